//! Line-oriented N-Triples reader and canonical writer.
//!
//! The reader accepts one triple per line, `#` comment lines, and blank
//! lines. The writer emits one line per triple, sorted byte-lexicographically,
//! each terminated with ` .\n`, so equal graphs serialize to equal bytes.

use super::{Graph, RdfError, Term, Triple};

/// Escape a literal lexical form for N-Triples output.
pub(super) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

/// Serialize the graph in canonical form: one triple per line, lines sorted
/// byte-lexicographically.
pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut lines: Vec<String> = graph.iter().map(|t| format!("{t}\n")).collect();
    lines.sort();
    lines.concat()
}

/// Parse N-Triples text into a graph. Duplicate statements collapse; errors
/// report 1-based line numbers.
pub fn parse_ntriples(input: &str) -> Result<Graph, RdfError> {
    let mut graph = Graph::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let triple = parse_line(trimmed, line_no)?;
        graph.insert(triple);
    }
    Ok(graph)
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Scanner {
    fn new(line: &str, line_no: usize) -> Self {
        Scanner {
            chars: line.chars().collect(),
            pos: 0,
            line: line_no,
        }
    }

    fn err(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), RdfError> {
        match self.next() {
            Some(got) if got == c => Ok(()),
            Some(got) => Err(self.err(format!("expected `{c}`, found `{got}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of line"))),
        }
    }

    fn iri_ref(&mut self) -> Result<String, RdfError> {
        self.expect('<')?;
        let mut iri = String::new();
        loop {
            match self.next() {
                Some('>') => break,
                Some(c) => iri.push(c),
                None => return Err(self.err("unterminated IRI reference")),
            }
        }
        Ok(iri)
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, RdfError> {
        let mut value: u32 = 0;
        for _ in 0..digits {
            let c = self
                .next()
                .ok_or_else(|| self.err("truncated \\u escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| self.err(format!("invalid hex digit `{c}` in escape")))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.err(format!("escape U+{value:X} is not a character")))
    }

    fn literal(&mut self) -> Result<Term, RdfError> {
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
                    Some('u') => lexical.push(self.hex_escape(4)?),
                    Some('U') => lexical.push(self.hex_escape(8)?),
                    Some(c) => return Err(self.err(format!("unknown escape `\\{c}`"))),
                    None => return Err(RdfError::UnterminatedLiteral { line: self.line }),
                },
                Some(c) => lexical.push(c),
                None => return Err(RdfError::UnterminatedLiteral { line: self.line }),
            }
        }
        match self.peek() {
            Some('^') => {
                self.expect('^')?;
                self.expect('^')?;
                let datatype = self.iri_ref()?;
                Term::typed_literal(lexical, datatype)
            }
            Some('@') => {
                self.next();
                let mut tag = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    tag.push(self.next().unwrap());
                }
                Term::lang_literal(lexical, tag)
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn blank_node(&mut self) -> Result<Term, RdfError> {
        self.expect('_')?;
        self.expect(':')?;
        let mut id = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            id.push(self.next().unwrap());
        }
        Term::blank(id)
    }

    fn term(&mut self) -> Result<Term, RdfError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Term::iri(self.iri_ref()?),
            Some('"') => self.literal(),
            Some('_') => self.blank_node(),
            Some(c) => Err(self.err(format!("expected a term, found `{c}`"))),
            None => Err(self.err("expected a term, found end of line")),
        }
    }

    fn finish(&mut self) -> Result<(), RdfError> {
        self.skip_ws();
        self.expect('.')?;
        self.skip_ws();
        if let Some(c) = self.peek() {
            return Err(self.err(format!("trailing content `{c}...` after `.`")));
        }
        Ok(())
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Triple, RdfError> {
    let mut scanner = Scanner::new(line, line_no);
    let subject = scanner.term()?;
    let predicate = scanner.term()?;
    let object = scanner.term()?;
    scanner.finish()?;
    // attach the line number to structural violations so the caller sees
    // where in the file the bad statement sits
    Triple::new(subject, predicate, object).map_err(|e| RdfError::Syntax {
        line: line_no,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_graph;
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    #[test]
    fn parse_minimal_line() {
        let g = parse_ntriples("<http://a> <http://p> <http://b> .\n").unwrap();
        assert_eq!(g.len(), 1);
        let t = g.iter().next().unwrap();
        assert_eq!(t.subject(), &iri("http://a"));
        assert_eq!(t.predicate(), &iri("http://p"));
        assert_eq!(t.object(), &iri("http://b"));
    }

    #[test]
    fn parse_typed_literal() {
        let g = parse_ntriples(
            "<http://a> <http://p> \"42\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n",
        )
        .unwrap();
        let t = g.iter().next().unwrap();
        assert_eq!(
            t.object(),
            &Term::typed_literal("42", "http://www.w3.org/2001/XMLSchema#integer").unwrap()
        );
    }

    #[test]
    fn parse_lang_literal_and_blank() {
        let g = parse_ntriples("_:b0 <http://p> \"hi\"@en-US .\n").unwrap();
        let t = g.iter().next().unwrap();
        assert_eq!(t.subject(), &Term::blank("b0").unwrap());
        assert_eq!(t.object(), &Term::lang_literal("hi", "en-US").unwrap());
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let g = parse_ntriples("# header\n\n<http://a> <http://p> \"x\" .\n").unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn escape_round_trip_in_literals() {
        let original = Term::literal("line1\nline2\t\"quoted\" back\\slash");
        let line = format!("<http://a> <http://p> {original} .\n");
        let g = parse_ntriples(&line).unwrap();
        assert_eq!(g.iter().next().unwrap().object(), &original);
    }

    #[test]
    fn unicode_escapes() {
        let g = parse_ntriples("<http://a> <http://p> \"\\u00e9\\U0001F600\" .\n").unwrap();
        assert_eq!(g.iter().next().unwrap().object(), &Term::literal("é😀"));
    }

    #[test]
    fn error_reports_line_number() {
        let err = parse_ntriples("<http://a> <http://p> <http://b> .\nnot a triple\n").unwrap_err();
        assert!(matches!(err, RdfError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unterminated_literal_is_its_own_error() {
        let err = parse_ntriples("<http://a> <http://p> \"open .\n").unwrap_err();
        assert_eq!(err, RdfError::UnterminatedLiteral { line: 1 });
    }

    #[test]
    fn missing_dot_rejected() {
        assert!(parse_ntriples("<http://a> <http://p> <http://b>\n").is_err());
    }

    #[test]
    fn literal_subject_rejected_with_line() {
        let err = parse_ntriples("\"lit\" <http://p> <http://b> .\n").unwrap_err();
        assert!(matches!(err, RdfError::Syntax { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn serialization_is_sorted_and_terminated() {
        let g = parse_ntriples("<http://z> <http://p> <http://a> .\n<http://a> <http://p> <http://z> .\n")
            .unwrap();
        let text = serialize_ntriples(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            vec![
                "<http://a> <http://p> <http://z> .",
                "<http://z> <http://p> <http://a> ."
            ]
        );
        assert!(text.ends_with(" .\n"));
    }

    #[test]
    fn round_trip_random_graphs() {
        let mut rng = crate::seed::rng(21);
        for _ in 0..10 {
            let g = random_graph(&mut rng, 30);
            let text = serialize_ntriples(&g);
            let parsed = parse_ntriples(&text).unwrap();
            assert_eq!(parsed, g);
            assert_eq!(serialize_ntriples(&parsed), text);
        }
    }

    #[test]
    fn canonical_bytes_independent_of_insertion_order() {
        let mut rng = crate::seed::rng(22);
        let g = random_graph(&mut rng, 40);
        let baseline = serialize_ntriples(&g);
        for _ in 0..5 {
            let mut triples = g.sorted_triples();
            triples.shuffle(&mut rng);
            let shuffled = Graph::from_triples(triples);
            assert_eq!(serialize_ntriples(&shuffled), baseline);
        }
    }

    fn arb_iri() -> impl Strategy<Value = String> {
        "[a-z]{1,6}(/[a-z0-9]{1,4}){0,2}".prop_map(|s| format!("http://ex.org/{s}"))
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            arb_iri().prop_map(|iri| Term::iri(iri).unwrap()),
            // lexical forms stress the escaper: quotes, backslashes, control chars
            "[ -~\\n\\t]{0,12}".prop_map(Term::literal),
            ("[ -~]{0,8}", arb_iri())
                .prop_map(|(lex, dt)| Term::typed_literal(lex, dt).unwrap()),
            "[a-z][a-z0-9]{0,5}".prop_map(|id| Term::blank(id).unwrap()),
        ]
    }

    fn arb_triple() -> impl Strategy<Value = Triple> {
        (arb_term(), arb_iri(), arb_term()).prop_filter_map(
            "subject must not be a literal",
            |(s, p, o)| Triple::new(s, Term::iri(p).unwrap(), o).ok(),
        )
    }

    proptest! {
        #[test]
        fn prop_serialize_parse_identity(triples in prop::collection::vec(arb_triple(), 0..25)) {
            let g = Graph::from_triples(triples);
            let text = serialize_ntriples(&g);
            let parsed = parse_ntriples(&text).unwrap();
            prop_assert_eq!(&parsed, &g);
            prop_assert_eq!(serialize_ntriples(&parsed), text);
        }

        #[test]
        fn prop_subject_index_consistent(triples in prop::collection::vec(arb_triple(), 0..25)) {
            let g = Graph::from_triples(triples);
            let mut from_index: Vec<&Triple> = g
                .subjects()
                .into_iter()
                .flat_map(|s| g.triples_with_subject(s))
                .collect();
            from_index.sort();
            let mut all: Vec<&Triple> = g.iter().collect();
            all.sort();
            prop_assert_eq!(from_index, all);
        }
    }
}
