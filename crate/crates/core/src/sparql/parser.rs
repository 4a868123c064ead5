//! Recursive-descent parser for the SPARQL subset.
//!
//! Keywords (SELECT, ASK, WHERE, FILTER, CONTAINS) are case-insensitive;
//! variables are `?name`, IRIs `<...>`, literals `"..."` with the usual
//! escapes plus optional `@lang` or `^^<datatype>`. Errors carry the byte
//! position of the offending character.

use super::{FilterExpr, PatternTerm, Query, QueryForm, SparqlError, TriplePattern};
use crate::rdf::Term;

pub fn parse_query(text: &str) -> Result<Query, SparqlError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        idx: 0,
        len: text.len(),
        word_start: 0,
    };
    p.skip_ws();
    let keyword = p.word()?;
    let form = match keyword.to_ascii_uppercase().as_str() {
        "SELECT" => QueryForm::Select,
        "ASK" => QueryForm::Ask,
        _ => {
            return Err(SparqlError::UnknownKeyword {
                pos: p.word_start,
                word: keyword,
            })
        }
    };

    let mut projection = Vec::new();
    if form == QueryForm::Select {
        loop {
            p.skip_ws();
            if p.peek() == Some('?') {
                projection.push(p.variable()?);
            } else {
                break;
            }
        }
        if projection.is_empty() {
            return Err(p.err("SELECT needs at least one ?variable"));
        }
        p.expect_keyword("WHERE")?;
    } else {
        // WHERE is optional for ASK
        p.skip_ws();
        if p.peek_word_is("WHERE") {
            p.word()?;
        }
    }

    p.skip_ws();
    p.expect('{')?;
    let mut patterns = Vec::new();
    let mut filters = Vec::new();
    loop {
        p.skip_ws();
        match p.peek() {
            Some('}') => {
                p.next();
                break;
            }
            None => return Err(p.err("unterminated pattern group, expected `}`")),
            Some(_) => {
                if p.peek_word_is("FILTER") {
                    p.word()?;
                    filters.push(p.filter()?);
                } else {
                    patterns.push(p.triple_pattern()?);
                }
                p.skip_ws();
                if p.peek() == Some('.') {
                    p.next();
                }
            }
        }
    }
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.err(format!("trailing content starting at `{c}`")));
    }

    Query::new(form, projection, patterns, filters)
}

struct Parser {
    chars: Vec<(usize, char)>,
    idx: usize,
    len: usize,
    /// byte position of the last word's first character, for keyword errors
    word_start: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.chars.get(self.idx).map(|&(p, _)| p).unwrap_or(self.len)
    }

    fn err(&self, message: impl Into<String>) -> SparqlError {
        SparqlError::Syntax {
            pos: self.pos(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).map(|&(_, c)| c)
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.idx += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.idx += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SparqlError> {
        match self.peek() {
            Some(got) if got == c => {
                self.next();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected `{c}`, found `{got}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    fn word(&mut self) -> Result<String, SparqlError> {
        self.skip_ws();
        self.word_start = self.pos();
        let mut word = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            word.push(self.next().unwrap());
        }
        if word.is_empty() {
            return Err(self.err("expected a keyword"));
        }
        Ok(word)
    }

    fn peek_word_is(&self, keyword: &str) -> bool {
        let mut i = self.idx;
        while matches!(self.chars.get(i), Some(&(_, c)) if c.is_whitespace()) {
            i += 1;
        }
        let mut word = String::new();
        while let Some(&(_, c)) = self.chars.get(i) {
            if c.is_ascii_alphanumeric() || c == '_' {
                word.push(c);
                i += 1;
            } else {
                break;
            }
        }
        word.eq_ignore_ascii_case(keyword)
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), SparqlError> {
        let word = self.word()?;
        if word.eq_ignore_ascii_case(keyword) {
            Ok(())
        } else {
            Err(SparqlError::UnknownKeyword {
                pos: self.word_start,
                word,
            })
        }
    }

    fn variable(&mut self) -> Result<String, SparqlError> {
        self.expect('?')?;
        let mut name = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            name.push(self.next().unwrap());
        }
        if name.is_empty() {
            return Err(self.err("`?` must be followed by a variable name"));
        }
        Ok(name)
    }

    fn iri(&mut self) -> Result<Term, SparqlError> {
        let start = self.pos();
        self.expect('<')?;
        let mut iri = String::new();
        loop {
            match self.next() {
                Some('>') => break,
                Some(c) => iri.push(c),
                None => return Err(self.err("unterminated IRI, expected `>`")),
            }
        }
        Term::iri(iri).map_err(|e| SparqlError::Syntax {
            pos: start,
            message: e.to_string(),
        })
    }

    fn literal(&mut self) -> Result<Term, SparqlError> {
        let start = self.pos();
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.next() {
                Some('"') => break,
                Some('\\') => match self.next() {
                    Some('\\') => lexical.push('\\'),
                    Some('"') => lexical.push('"'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('t') => lexical.push('\t'),
                    Some(c) => return Err(self.err(format!("unknown escape `\\{c}`"))),
                    None => return Err(self.err("unterminated literal")),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.err("unterminated literal")),
            }
        }
        match self.peek() {
            Some('^') => {
                self.expect('^')?;
                self.expect('^')?;
                let datatype = self.iri()?;
                Term::typed_literal(lexical, datatype.text()).map_err(|e| SparqlError::Syntax {
                    pos: start,
                    message: e.to_string(),
                })
            }
            Some('@') => {
                self.next();
                let mut tag = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    tag.push(self.next().unwrap());
                }
                Term::lang_literal(lexical, tag).map_err(|e| SparqlError::Syntax {
                    pos: start,
                    message: e.to_string(),
                })
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn pattern_term(&mut self) -> Result<PatternTerm, SparqlError> {
        self.skip_ws();
        match self.peek() {
            Some('?') => Ok(PatternTerm::Variable(self.variable()?)),
            Some('<') => Ok(PatternTerm::Term(self.iri()?)),
            Some('"') => Ok(PatternTerm::Term(self.literal()?)),
            Some(c) => Err(self.err(format!(
                "expected `?variable`, `<iri>`, or `\"literal\"`, found `{c}`"
            ))),
            None => Err(self.err("expected a pattern term, found end of input")),
        }
    }

    fn triple_pattern(&mut self) -> Result<TriplePattern, SparqlError> {
        let subject = self.pattern_term()?;
        let predicate = self.pattern_term()?;
        let object = self.pattern_term()?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    /// `( ?v = term )` or `( CONTAINS(?v, "needle") )`, FILTER already
    /// consumed.
    fn filter(&mut self) -> Result<FilterExpr, SparqlError> {
        self.skip_ws();
        self.expect('(')?;
        self.skip_ws();
        let expr = if self.peek() == Some('?') {
            let var = self.variable()?;
            self.skip_ws();
            self.expect('=')?;
            self.skip_ws();
            let value = match self.peek() {
                Some('<') => self.iri()?,
                Some('"') => self.literal()?,
                _ => return Err(self.err("`=` must compare against an IRI or literal")),
            };
            FilterExpr::Equals { var, value }
        } else {
            self.expect_keyword("CONTAINS")?;
            self.skip_ws();
            self.expect('(')?;
            let var = {
                self.skip_ws();
                self.variable()?
            };
            self.skip_ws();
            self.expect(',')?;
            self.skip_ws();
            let needle = match self.literal()? {
                Term::Literal { lexical, .. } => lexical,
                _ => unreachable!("literal() only returns literals"),
            };
            self.skip_ws();
            self.expect(')')?;
            FilterExpr::Contains { var, needle }
        };
        self.skip_ws();
        self.expect(')')?;
        Ok(expr)
    }
}
