//! RDF triple data model and an indexed in-memory graph.
//!
//! Terms follow the subject-predicate-object statement structure. The graph
//! keeps set semantics over triples and maintains subject/predicate/object
//! indexes for pattern lookup and traversal. N-Triples is the only supported
//! serialization; see [`ntriples`].

mod ntriples;

pub use ntriples::{parse_ntriples, serialize_ntriples};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RdfError {
    #[error("invalid IRI `{0}`: must be non-empty without whitespace or angle brackets")]
    InvalidIri(String),
    #[error("invalid blank node id `{0}`: expected non-empty [A-Za-z0-9_]+")]
    InvalidBlankId(String),
    #[error("invalid language tag `{0}`")]
    InvalidLanguageTag(String),
    #[error("a literal cannot carry both a datatype and a language tag")]
    DatatypeLanguageConflict,
    #[error("predicate must be an IRI, got `{0}`")]
    PredicateNotIri(String),
    #[error("subject cannot be a literal, got `{0}`")]
    LiteralSubject(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unterminated literal")]
    UnterminatedLiteral { line: usize },
}

/// One RDF term: IRI, literal, or blank node.
///
/// The derived `Ord` is the canonical term order used wherever this crate
/// promises sorted output (query rows, neighbor lists).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        language: Option<String>,
    },
    BlankNode(String),
}

fn check_iri(iri: &str) -> Result<(), RdfError> {
    if iri.is_empty() || iri.chars().any(|c| c.is_whitespace() || c == '<' || c == '>') {
        return Err(RdfError::InvalidIri(iri.to_string()));
    }
    Ok(())
}

fn check_blank_id(id: &str) -> Result<(), RdfError> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(RdfError::InvalidBlankId(id.to_string()));
    }
    Ok(())
}

fn check_language(tag: &str) -> Result<(), RdfError> {
    let mut parts = tag.split('-');
    let primary = parts.next().unwrap_or("");
    let primary_ok = !primary.is_empty() && primary.chars().all(|c| c.is_ascii_alphabetic());
    let rest_ok = parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()));
    if !primary_ok || !rest_ok {
        return Err(RdfError::InvalidLanguageTag(tag.to_string()));
    }
    Ok(())
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Result<Self, RdfError> {
        let iri = iri.into();
        check_iri(&iri)?;
        Ok(Term::Iri(iri))
    }

    /// Plain literal without datatype or language tag.
    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed_literal(
        lexical: impl Into<String>,
        datatype: impl Into<String>,
    ) -> Result<Self, RdfError> {
        let datatype = datatype.into();
        check_iri(&datatype)?;
        Ok(Term::Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            language: None,
        })
    }

    pub fn lang_literal(
        lexical: impl Into<String>,
        language: impl Into<String>,
    ) -> Result<Self, RdfError> {
        let language = language.into();
        check_language(&language)?;
        Ok(Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language),
        })
    }

    pub fn blank(id: impl Into<String>) -> Result<Self, RdfError> {
        let id = id.into();
        check_blank_id(&id)?;
        Ok(Term::BlankNode(id))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    /// IRIs and blank nodes are entities; literals are not.
    pub fn is_entity(&self) -> bool {
        !self.is_literal()
    }

    /// The IRI string, if this term is an IRI.
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    /// The plain text of the term: IRI string, literal lexical form, or blank id.
    pub fn text(&self) -> &str {
        match self {
            Term::Iri(iri) => iri,
            Term::Literal { lexical, .. } => lexical,
            Term::BlankNode(id) => id,
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples form of the term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal {
                lexical,
                datatype,
                language,
            } => {
                write!(f, "\"{}\"", ntriples::escape_literal(lexical))?;
                if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")?;
                } else if let Some(lang) = language {
                    write!(f, "@{lang}")?;
                }
                Ok(())
            }
            Term::BlankNode(id) => write!(f, "_:{id}"),
        }
    }
}

/// A directed statement. Construction enforces that the predicate is an IRI
/// and the subject is not a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        if !predicate.is_iri() {
            return Err(RdfError::PredicateNotIri(predicate.to_string()));
        }
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject(subject.to_string()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// In-memory triple set with subject/predicate/object indexes.
///
/// Insertion is idempotent; iteration order is insertion order. Equality is
/// set equality over triples. The graph is meant to be built once and read
/// concurrently afterwards.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: Vec<Triple>,
    seen: HashMap<Triple, usize>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut graph = Graph::new();
        for triple in triples {
            graph.insert(triple);
        }
        graph
    }

    /// Insert a triple; returns `true` if it was not present before.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.seen.contains_key(&triple) {
            return false;
        }
        let idx = self.triples.len();
        self.seen.insert(triple.clone(), idx);
        self.by_subject
            .entry(triple.subject.clone())
            .or_default()
            .push(idx);
        self.by_predicate
            .entry(triple.predicate.clone())
            .or_default()
            .push(idx);
        self.by_object
            .entry(triple.object.clone())
            .or_default()
            .push(idx);
        self.triples.push(triple);
        true
    }

    /// Validate terms and insert in one step.
    pub fn insert_terms(
        &mut self,
        subject: Term,
        predicate: Term,
        object: Term,
    ) -> Result<bool, RdfError> {
        Ok(self.insert(Triple::new(subject, predicate, object)?))
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.seen.contains_key(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples with the given subject, in insertion order.
    pub fn triples_with_subject<'a>(&'a self, subject: &Term) -> impl Iterator<Item = &'a Triple> {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .map(move |&idx| &self.triples[idx])
    }

    pub fn triples_with_predicate<'a>(
        &'a self,
        predicate: &Term,
    ) -> impl Iterator<Item = &'a Triple> {
        self.by_predicate
            .get(predicate)
            .into_iter()
            .flatten()
            .map(move |&idx| &self.triples[idx])
    }

    pub fn triples_with_object<'a>(&'a self, object: &Term) -> impl Iterator<Item = &'a Triple> {
        self.by_object
            .get(object)
            .into_iter()
            .flatten()
            .map(move |&idx| &self.triples[idx])
    }

    /// All outgoing `(predicate, object)` pairs of `node`, in canonical
    /// (sorted) order. Empty when the node has no outgoing edges.
    pub fn neighbors(&self, node: &Term) -> Vec<(&Term, &Term)> {
        let mut pairs: Vec<(&Term, &Term)> = self
            .triples_with_subject(node)
            .map(|t| (&t.predicate, &t.object))
            .collect();
        pairs.sort();
        pairs
    }

    /// Whether the term occurs in the graph as subject or object.
    pub fn contains_node(&self, node: &Term) -> bool {
        self.by_subject.contains_key(node) || self.by_object.contains_key(node)
    }

    /// Distinct subject terms in canonical order.
    pub fn subjects(&self) -> Vec<&Term> {
        let mut subjects: Vec<&Term> = self.by_subject.keys().collect();
        subjects.sort();
        subjects
    }

    /// Distinct terms appearing in any position, in canonical order.
    pub fn terms(&self) -> Vec<&Term> {
        let mut terms: Vec<&Term> = self
            .triples
            .iter()
            .flat_map(|t| [&t.subject, &t.predicate, &t.object])
            .collect();
        terms.sort();
        terms.dedup();
        terms
    }

    /// Distinct entity terms (subjects plus non-literal objects), in
    /// canonical order.
    pub fn entities(&self) -> Vec<&Term> {
        let mut entities: Vec<&Term> = self
            .triples
            .iter()
            .flat_map(|t| [&t.subject, &t.object])
            .filter(|term| term.is_entity())
            .collect();
        entities.sort();
        entities.dedup();
        entities
    }

    /// Merge all triples of `other` into `self`.
    pub fn merge(&mut self, other: &Graph) {
        for triple in other.iter() {
            self.insert(triple.clone());
        }
    }

    /// Sorted clone of the triple set; the canonical view used for equality.
    pub fn sorted_triples(&self) -> Vec<Triple> {
        let mut triples = self.triples.clone();
        triples.sort();
        triples
    }

    /// The same triple set rebuilt in sorted insertion order. Consumers that
    /// are sensitive to adjacency-list order (walk generation) canonicalize
    /// first so results depend only on graph content, not assembly history.
    pub fn canonicalized(&self) -> Graph {
        Graph::from_triples(self.sorted_triples())
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|t| other.contains(t))
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph::from_triples(iter)
    }
}
