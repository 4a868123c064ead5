//! Graph-level vectors, similarity metrics, and ranking policies.
//!
//! A candidate graph is collapsed to one vector (its shell entity's
//! vector, the mean over its entity tokens, or a frequency-weighted mean),
//! compared to the query graph's vector with cosine similarity or
//! Euclidean distance, normalized into [0,1], and ranked. Three policies
//! shape the result list: keep everything above a threshold, keep the top
//! k, or the hybrid of both (threshold hits, filled up to k by decreasing
//! score).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rdf::{Graph, Term};
use crate::skipgram::EmbeddingTable;
use crate::walks::term_token;

/// Corpus token counts, as produced by walk-corpus tallying.
pub type TokenFrequencies = BTreeMap<String, u64>;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("no graph token resolves to an embedding vector")]
    NoResolvableTokens,
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("duplicate candidate shell `{iri}`")]
    DuplicateCandidate { iri: String },
    #[error("candidate shell must be an IRI, found `{term}`")]
    NonIriShell { term: String },
    #[error("raw score {value} is outside the {metric} domain")]
    OutOfDomain { metric: &'static str, value: f64 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

/// How a graph collapses to a single vector.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphVectorStrategy {
    /// The shell entity's own vector.
    Root,
    /// Componentwise mean over the graph's distinct entity tokens.
    Mean,
    /// Mean weighted by inverse corpus frequency; tokens absent from the
    /// frequency table weigh as if seen once.
    WeightedMean(TokenFrequencies),
}

impl GraphVectorStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            GraphVectorStrategy::Root => "root",
            GraphVectorStrategy::Mean => "mean",
            GraphVectorStrategy::WeightedMean(_) => "weighted_mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMetric {
    Cosine,
    Euclidean,
}

impl SimilarityMetric {
    pub fn name(self) -> &'static str {
        match self {
            SimilarityMetric::Cosine => "cosine",
            SimilarityMetric::Euclidean => "euclidean",
        }
    }

    pub fn parse_name(name: &str) -> Option<Self> {
        match name {
            "cosine" => Some(SimilarityMetric::Cosine),
            "euclidean" => Some(SimilarityMetric::Euclidean),
            _ => None,
        }
    }

    pub fn raw(self, a: &[f64], b: &[f64]) -> Result<f64, MatchError> {
        match self {
            SimilarityMetric::Cosine => cosine(a, b),
            SimilarityMetric::Euclidean => euclidean(a, b),
        }
    }

    /// Map a raw score into [0,1]; strictly monotone, so candidate order
    /// is preserved (reversed for distance, where smaller is better).
    pub fn normalize(self, raw: f64) -> Result<f64, MatchError> {
        // Float rounding can push cosine a hair past its codomain; snap
        // that back, but refuse genuinely out-of-domain values.
        const SLACK: f64 = 1e-9;
        match self {
            SimilarityMetric::Cosine => {
                if !(raw >= -1.0 - SLACK && raw <= 1.0 + SLACK) {
                    return Err(MatchError::OutOfDomain {
                        metric: "cosine",
                        value: raw,
                    });
                }
                Ok((raw.clamp(-1.0, 1.0) + 1.0) / 2.0)
            }
            SimilarityMetric::Euclidean => {
                if !(raw >= 0.0) {
                    return Err(MatchError::OutOfDomain {
                        metric: "euclidean",
                        value: raw,
                    });
                }
                Ok(1.0 / (1.0 + raw))
            }
        }
    }
}

/// (V1.V2) / (|V1| |V2|), in [-1,1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, MatchError> {
    check_dims(a, b)?;
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(MatchError::ZeroVector);
    }
    Ok(dot / (na * nb))
}

/// Straight-line distance, >= 0.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, MatchError> {
    check_dims(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<(), MatchError> {
    if a.len() != b.len() {
        return Err(MatchError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// The filtered candidates: distinct shell IRIs, each with its subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    entries: Vec<(Term, Graph)>,
}

impl CandidateSet {
    pub fn new(entries: Vec<(Term, Graph)>) -> Result<Self, MatchError> {
        let mut seen = std::collections::BTreeSet::new();
        for (shell, _) in &entries {
            let iri = shell.as_iri().ok_or_else(|| MatchError::NonIriShell {
                term: shell.to_string(),
            })?;
            if !seen.insert(iri.to_string()) {
                return Err(MatchError::DuplicateCandidate {
                    iri: iri.to_string(),
                });
            }
        }
        Ok(CandidateSet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Term, Graph)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionPolicy {
    /// Every candidate with normalized score >= t.
    Threshold(f64),
    /// The k best candidates.
    TopK(usize),
    /// Threshold hits, filled up to k by decreasing score when fewer.
    Hybrid(f64, usize),
}

impl DecisionPolicy {
    fn validate(self) -> Result<(), MatchError> {
        let (t, k) = match self {
            DecisionPolicy::Threshold(t) => (t, 1),
            DecisionPolicy::TopK(k) => (0.0, k),
            DecisionPolicy::Hybrid(t, k) => (t, k),
        };
        if !(0.0..=1.0).contains(&t) {
            return Err(MatchError::InvalidPolicy(format!(
                "threshold {t} outside [0,1]"
            )));
        }
        if k == 0 {
            return Err(MatchError::InvalidPolicy("k must be at least 1".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Candidate shell IRI.
    pub shell: String,
    /// Metric output before normalization.
    pub raw: f64,
    /// Score in [0,1]; higher is better under both metrics.
    pub normalized: f64,
    /// Position in the result list, starting at 1.
    pub rank: usize,
}

/// Collapse a graph to one vector. `root` names the shell entity and is
/// only consulted by the root strategy; tokens without a vector in
/// `table` are skipped by the mean strategies.
pub fn graph_vector(
    graph: &Graph,
    root: &Term,
    table: &EmbeddingTable,
    strategy: &GraphVectorStrategy,
) -> Result<Vec<f64>, MatchError> {
    match strategy {
        GraphVectorStrategy::Root => table
            .get(&term_token(root))
            .map(<[f64]>::to_vec)
            .ok_or(MatchError::NoResolvableTokens),
        GraphVectorStrategy::Mean => {
            let mut sum = vec![0.0; table.dim()];
            let mut resolved = 0usize;
            for entity in graph.entities() {
                if let Some(vector) = table.get(&term_token(entity)) {
                    for (s, x) in sum.iter_mut().zip(vector) {
                        *s += x;
                    }
                    resolved += 1;
                }
            }
            if resolved == 0 {
                return Err(MatchError::NoResolvableTokens);
            }
            sum.iter_mut().for_each(|s| *s /= resolved as f64);
            Ok(sum)
        }
        GraphVectorStrategy::WeightedMean(frequencies) => {
            let mut sum = vec![0.0; table.dim()];
            let mut weight_sum = 0.0;
            for entity in graph.entities() {
                let token = term_token(entity);
                if let Some(vector) = table.get(&token) {
                    let weight = 1.0 / frequencies.get(&token).copied().unwrap_or(1).max(1) as f64;
                    for (s, x) in sum.iter_mut().zip(vector) {
                        *s += weight * x;
                    }
                    weight_sum += weight;
                }
            }
            if weight_sum == 0.0 {
                return Err(MatchError::NoResolvableTokens);
            }
            sum.iter_mut().for_each(|s| *s /= weight_sum);
            Ok(sum)
        }
    }
}

/// Sort scored candidates (normalized descending, shell IRI ascending on
/// ties), apply the policy, and assign ranks from 1. Exposed separately
/// so policy behavior can be exercised on synthetic score sets.
pub fn apply_policy(
    policy: DecisionPolicy,
    scored: &[(String, f64, f64)],
) -> Result<Vec<MatchResult>, MatchError> {
    policy.validate()?;
    let mut order: Vec<&(String, f64, f64)> = scored.iter().collect();
    order.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));

    // On the sorted list every policy keeps a prefix: threshold hits all
    // sort ahead of the rest.
    let n = order.len();
    let above = |t: f64| order.iter().take_while(|(_, _, s)| *s >= t).count();
    let keep = match policy {
        DecisionPolicy::Threshold(t) => above(t),
        DecisionPolicy::TopK(k) => k.min(n),
        DecisionPolicy::Hybrid(t, k) => above(t).max(k.min(n)),
    };
    Ok(order[..keep]
        .iter()
        .enumerate()
        .map(|(i, (shell, raw, normalized))| MatchResult {
            shell: shell.clone(),
            raw: *raw,
            normalized: *normalized,
            rank: i + 1,
        })
        .collect())
}

/// Score every candidate against the query and rank them under the
/// policy. `query_root` names the query's shell entity for the root
/// strategy.
pub fn rank(
    query: &Graph,
    query_root: &Term,
    candidates: &CandidateSet,
    table: &EmbeddingTable,
    strategy: &GraphVectorStrategy,
    metric: SimilarityMetric,
    policy: DecisionPolicy,
) -> Result<Vec<MatchResult>, MatchError> {
    if candidates.is_empty() {
        return Err(MatchError::EmptyCandidates);
    }
    let query_vector = graph_vector(query, query_root, table, strategy)?;
    let mut scored = Vec::with_capacity(candidates.len());
    for (shell, graph) in candidates.iter() {
        let vector = graph_vector(graph, shell, table, strategy)?;
        let raw = metric.raw(&query_vector, &vector)?;
        let normalized = metric.normalize(raw)?;
        scored.push((shell.as_iri().expect("validated iri").to_string(), raw, normalized));
    }
    apply_policy(policy, &scored)
}
