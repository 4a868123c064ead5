//! SPARQL subset: SELECT/ASK over basic graph patterns with simple filters.
//!
//! The subset covers conjunctive triple patterns joined on shared variables
//! plus `FILTER(?v = term)` and `FILTER(CONTAINS(?v, "text"))`. That is
//! enough to express structural constraints over mapped AAS graphs ("has a
//! submodel named X"); OPTIONAL, UNION, paths, and CONSTRUCT are out of
//! scope. Grammar reference: `docs/sparql-subset.md`.
//!
//! Evaluation joins patterns left to right with index-backed lookups, but
//! correctness is defined purely by equivalence with exhaustive assignment
//! enumeration, which the tests enforce on random cases.

mod parser;

pub use parser::parse_query;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::rdf::{Graph, Term, Triple};

/// Variable name reserved by [`prefilter`]; bound to each candidate's shell
/// IRI in turn.
pub const SHELL_VAR: &str = "aas";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SparqlError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown keyword `{word}` at byte {pos}")]
    UnknownKeyword { pos: usize, word: String },
    #[error("projected variable ?{0} does not occur in any pattern")]
    UnboundProjection(String),
    #[error("filter variable ?{0} does not occur in any pattern")]
    UnboundFilterVariable(String),
    #[error("query has no triple patterns")]
    EmptyPattern,
    #[error("expected a {expected} query")]
    FormMismatch { expected: &'static str },
    #[error("constraint never mentions the reserved variable ?{SHELL_VAR}")]
    ReservedVariableMissing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Term(Term),
    Variable(String),
}

impl PatternTerm {
    fn variable(&self) -> Option<&str> {
        match self {
            PatternTerm::Variable(name) => Some(name),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(PatternTerm::variable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    /// Bound term equals the constant exactly (datatype included).
    Equals { var: String, value: Term },
    /// The bound term's text (lexical form or IRI) contains the needle.
    Contains { var: String, needle: String },
}

impl FilterExpr {
    fn var(&self) -> &str {
        match self {
            FilterExpr::Equals { var, .. } | FilterExpr::Contains { var, .. } => var,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryForm {
    Select,
    Ask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub form: QueryForm,
    /// Projected variable names, in declaration order. Empty for ASK.
    pub projection: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
}

impl Query {
    /// Build a query, enforcing the structural invariants: at least one
    /// pattern, and every projected or filtered variable bound by a pattern.
    pub fn new(
        form: QueryForm,
        projection: Vec<String>,
        patterns: Vec<TriplePattern>,
        filters: Vec<FilterExpr>,
    ) -> Result<Self, SparqlError> {
        if patterns.is_empty() {
            return Err(SparqlError::EmptyPattern);
        }
        let bound: Vec<&str> = patterns.iter().flat_map(TriplePattern::variables).collect();
        for var in &projection {
            if !bound.contains(&var.as_str()) {
                return Err(SparqlError::UnboundProjection(var.clone()));
            }
        }
        for filter in &filters {
            if !bound.contains(&filter.var()) {
                return Err(SparqlError::UnboundFilterVariable(filter.var().to_string()));
            }
        }
        Ok(Query {
            form,
            projection,
            patterns,
            filters,
        })
    }

    pub fn mentions_variable(&self, name: &str) -> bool {
        self.patterns.iter().flat_map(TriplePattern::variables).any(|v| v == name)
    }
}

/// One solution: variable name to term.
pub type Binding = BTreeMap<String, Term>;

/// SELECT result: a column header plus distinct rows in canonical
/// (sorted-by-terms) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

/// Evaluate a SELECT query. Rows are exactly the projected assignments
/// under which every pattern instantiates to a stored triple and every
/// filter holds; distinct, sorted.
pub fn eval_select(query: &Query, graph: &Graph) -> Result<BindingTable, SparqlError> {
    if query.form != QueryForm::Select {
        return Err(SparqlError::FormMismatch { expected: "SELECT" });
    }
    let solutions = solve(query, graph, &Binding::new());
    let mut rows: Vec<Vec<Term>> = solutions
        .into_iter()
        .map(|b| {
            query
                .projection
                .iter()
                .map(|var| b[var].clone())
                .collect()
        })
        .collect();
    rows.sort();
    rows.dedup();
    Ok(BindingTable {
        columns: query.projection.clone(),
        rows,
    })
}

/// Evaluate an ASK query: true iff the pattern group is satisfiable.
pub fn eval_ask(query: &Query, graph: &Graph) -> Result<bool, SparqlError> {
    if query.form != QueryForm::Ask {
        return Err(SparqlError::FormMismatch { expected: "ASK" });
    }
    Ok(satisfiable(query, graph, &Binding::new()))
}

/// Keep the candidates whose graph satisfies the constraint with the
/// reserved `?aas` variable fixed to their shell IRI. Order and the
/// tautological-identity property follow from evaluating candidates in
/// input order.
pub fn prefilter(
    constraint: &Query,
    repository: &[(Term, Graph)],
) -> Result<Vec<(Term, Graph)>, SparqlError> {
    if !constraint.mentions_variable(SHELL_VAR) {
        return Err(SparqlError::ReservedVariableMissing);
    }
    let verdicts: Vec<bool> = repository
        .par_iter()
        .map(|(shell_iri, graph)| {
            let seed = Binding::from([(SHELL_VAR.to_string(), shell_iri.clone())]);
            satisfiable(constraint, graph, &seed)
        })
        .collect();
    Ok(repository
        .iter()
        .zip(verdicts)
        .filter(|(_, keep)| *keep)
        .map(|(candidate, _)| candidate.clone())
        .collect())
}

/// All bindings extending `initial` that satisfy patterns and filters.
fn solve(query: &Query, graph: &Graph, initial: &Binding) -> Vec<Binding> {
    let mut frontier = vec![initial.clone()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for binding in &frontier {
            extend(pattern, graph, binding, &mut next);
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
        .into_iter()
        .filter(|b| query.filters.iter().all(|f| filter_passes(f, b)))
        .collect()
}

/// Early-exiting variant of [`solve`] for ASK-style use.
fn satisfiable(query: &Query, graph: &Graph, initial: &Binding) -> bool {
    fn rec(patterns: &[TriplePattern], query: &Query, graph: &Graph, binding: &Binding) -> bool {
        match patterns.split_first() {
            None => query.filters.iter().all(|f| filter_passes(f, binding)),
            Some((pattern, rest)) => {
                let mut extensions = Vec::new();
                extend(pattern, graph, binding, &mut extensions);
                extensions.iter().any(|b| rec(rest, query, graph, b))
            }
        }
    }
    rec(&query.patterns, query, graph, initial)
}

/// Push every extension of `binding` that matches `pattern` onto `out`,
/// scanning the smallest applicable index bucket.
fn extend(pattern: &TriplePattern, graph: &Graph, binding: &Binding, out: &mut Vec<Binding>) {
    let resolve = |pt: &PatternTerm| -> Option<Term> {
        match pt {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Variable(v) => binding.get(v).cloned(),
        }
    };
    let subject = resolve(&pattern.subject);
    let predicate = resolve(&pattern.predicate);
    let object = resolve(&pattern.object);

    let candidates: Vec<&Triple> = if let Some(s) = &subject {
        graph.triples_with_subject(s).collect()
    } else if let Some(o) = &object {
        graph.triples_with_object(o).collect()
    } else if let Some(p) = &predicate {
        graph.triples_with_predicate(p).collect()
    } else {
        graph.iter().collect()
    };

    for triple in candidates {
        let mut extended = binding.clone();
        if unify(&pattern.subject, triple.subject(), &mut extended)
            && unify(&pattern.predicate, triple.predicate(), &mut extended)
            && unify(&pattern.object, triple.object(), &mut extended)
        {
            out.push(extended);
        }
    }
}

fn unify(pt: &PatternTerm, term: &Term, binding: &mut Binding) -> bool {
    match pt {
        PatternTerm::Term(expected) => expected == term,
        PatternTerm::Variable(var) => match binding.get(var) {
            Some(bound) => bound == term,
            None => {
                binding.insert(var.clone(), term.clone());
                true
            }
        },
    }
}

fn filter_passes(filter: &FilterExpr, binding: &Binding) -> bool {
    match filter {
        FilterExpr::Equals { var, value } => binding.get(var) == Some(value),
        FilterExpr::Contains { var, needle } => binding
            .get(var)
            .map(|term| term.text().contains(needle.as_str()))
            .unwrap_or(false),
    }
}
