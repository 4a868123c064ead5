//! Token-sequence extraction from RDF graphs by random or breadth-first
//! walks.
//!
//! Each walk is a sentence: an entity token, then alternating predicate and
//! entity/literal tokens, at most `2 * depth + 1` tokens long. Predicates
//! are tokens too, so relations get embeddings alongside entities.
//!
//! Literal tokens are the lexical form, except numeric literals (by
//! datatype), which collapse into one order-of-magnitude bucket token
//! (`num:e1` for anything in [10, 100), `num:-e-3` for values in
//! (-0.01, -0.001], `num:0` for zero). Different spellings of the same
//! quantity share a token, and nearby quantities share distributional
//! context without any regression machinery.
//!
//! Walk generation is parallel across start entities but byte-deterministic:
//! each walk draws from its own generator seeded by (seed, entity, index),
//! and sentences are ordered by (entity in canonical term order, walk index)
//! regardless of schedule.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::{encode_token, percent_decode};
use crate::rdf::{Graph, Term};
use crate::seed;

/// Re-draws allowed per step when literal objects are excluded before the
/// walk gives up and terminates.
const LITERAL_RETRY_LIMIT: usize = 8;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("walk depth must be at least 1")]
    ZeroDepth,
    #[error("walks per entity must be at least 1")]
    ZeroWalksPerEntity,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    BadToken { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkStrategy {
    Random,
    Bfs,
}

impl WalkStrategy {
    pub fn name(self) -> &'static str {
        match self {
            WalkStrategy::Random => "random",
            WalkStrategy::Bfs => "bfs",
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        match s {
            "random" => Some(WalkStrategy::Random),
            "bfs" => Some(WalkStrategy::Bfs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkConfig {
    pub strategy: WalkStrategy,
    /// Maximum hops per walk; one hop moves through a predicate to the next
    /// entity or literal.
    pub depth: usize,
    pub walks_per_entity: usize,
    pub seed: u64,
    pub include_literals: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            strategy: WalkStrategy::Random,
            depth: 4,
            walks_per_entity: 100,
            seed: 0,
            include_literals: true,
        }
    }
}

impl WalkConfig {
    pub fn validated(self) -> Result<Self, WalkError> {
        if self.depth == 0 {
            return Err(WalkError::ZeroDepth);
        }
        if self.walks_per_entity == 0 {
            return Err(WalkError::ZeroWalksPerEntity);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WalkCorpus {
    pub sentences: Vec<Vec<String>>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Tally of every token occurrence, ordered by token.
    pub fn token_frequencies(&self) -> BTreeMap<String, u64> {
        let mut freq = BTreeMap::new();
        for sentence in &self.sentences {
            for token in sentence {
                *freq.entry(token.clone()).or_insert(0u64) += 1;
            }
        }
        freq
    }

    /// File form: one sentence per line, tokens space-separated and
    /// percent-encoded. Also the bytes hashed for the embedding cache key.
    pub fn canonical_bytes(&self) -> String {
        let mut out = String::new();
        for sentence in &self.sentences {
            let encoded: Vec<String> = sentence.iter().map(|t| encode_token(t)).collect();
            out.push_str(&encoded.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), WalkError> {
        fs::write(path, self.canonical_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, WalkError> {
        let text = fs::read_to_string(path)?;
        let mut sentences = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let sentence: Result<Vec<String>, WalkError> = line
                .split(' ')
                .map(|tok| {
                    percent_decode(tok).map_err(|message| WalkError::BadToken {
                        line: idx + 1,
                        message,
                    })
                })
                .collect();
            sentences.push(sentence?);
        }
        Ok(WalkCorpus { sentences })
    }
}

/// Canonical token of a term: IRI string, `_:`-prefixed blank node id, or
/// literal lexical form with numeric literals folded into magnitude buckets.
pub fn term_token(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.clone(),
        Term::BlankNode(id) => format!("_:{id}"),
        Term::Literal {
            lexical, datatype, ..
        } => {
            if let Some(dt) = datatype {
                if is_numeric_datatype(dt) {
                    if let Ok(value) = lexical.trim().parse::<f64>() {
                        if value.is_finite() {
                            return numeric_bucket(value);
                        }
                    }
                }
            }
            lexical.clone()
        }
    }
}

fn is_numeric_datatype(datatype: &str) -> bool {
    matches!(
        datatype.strip_prefix("http://www.w3.org/2001/XMLSchema#"),
        Some("integer" | "decimal" | "double" | "float" | "int" | "long")
    )
}

fn numeric_bucket(value: f64) -> String {
    if value == 0.0 {
        return "num:0".to_string();
    }
    let sign = if value < 0.0 { "-" } else { "" };
    let exponent = value.abs().log10().floor() as i64;
    format!("num:{sign}e{exponent}")
}

/// Generate walk sentences from every valid start entity. Entities absent
/// from the graph are skipped; the returned strings describe each skip.
pub fn generate_walks(
    graph: &Graph,
    start_entities: &[Term],
    config: &WalkConfig,
) -> (WalkCorpus, Vec<String>) {
    let mut warnings = Vec::new();
    let mut valid: Vec<&Term> = Vec::new();
    for entity in start_entities {
        if graph.contains_node(entity) {
            valid.push(entity);
        } else {
            warnings.push(format!("start entity {entity} not present in graph; skipped"));
        }
    }
    valid.sort();
    valid.dedup();

    let per_entity: Vec<Vec<Vec<String>>> = valid
        .par_iter()
        .map(|entity| match config.strategy {
            WalkStrategy::Random => (0..config.walks_per_entity)
                .map(|j| random_walk(graph, entity, j, config))
                .collect(),
            WalkStrategy::Bfs => bfs_walks(graph, entity, config),
        })
        .collect();

    let sentences = per_entity.into_iter().flatten().collect();
    (WalkCorpus { sentences }, warnings)
}

fn random_walk(graph: &Graph, entity: &Term, index: usize, config: &WalkConfig) -> Vec<String> {
    let label = format!("walk:{}", term_token(entity));
    let mut rng = seed::rng(seed::derive_indexed(config.seed, &label, index as u64));
    let mut sentence = vec![term_token(entity)];
    let mut current = entity.clone();
    for _ in 0..config.depth {
        let pairs = graph.neighbors(&current);
        if pairs.is_empty() {
            break;
        }
        let chosen = if config.include_literals {
            Some(pairs[sample(&mut rng, pairs.len())])
        } else {
            // bounded back-off keeps entity-only walks alive on nodes that
            // mix literal and entity edges
            (0..=LITERAL_RETRY_LIMIT)
                .map(|_| pairs[sample(&mut rng, pairs.len())])
                .find(|(_, object)| object.is_entity())
        };
        let Some((predicate, object)) = chosen else {
            break;
        };
        sentence.push(term_token(predicate));
        sentence.push(term_token(object));
        if !object.is_entity() {
            break;
        }
        current = object.clone();
    }
    sentence
}

fn sample(rng: &mut impl rand::Rng, len: usize) -> usize {
    rng.gen_range(0..len)
}

/// All maximal paths up to the configured depth, in lexicographic
/// (pred, object) order, capped at walks_per_entity.
fn bfs_walks(graph: &Graph, entity: &Term, config: &WalkConfig) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut path = vec![term_token(entity)];
    descend(graph, entity, config.depth, &mut path, &mut out, config);
    out
}

fn descend(
    graph: &Graph,
    node: &Term,
    remaining: usize,
    path: &mut Vec<String>,
    out: &mut Vec<Vec<String>>,
    config: &WalkConfig,
) {
    if out.len() >= config.walks_per_entity {
        return;
    }
    let pairs: Vec<(&Term, &Term)> = graph
        .neighbors(node)
        .into_iter()
        .filter(|(_, object)| config.include_literals || object.is_entity())
        .collect();
    if remaining == 0 || pairs.is_empty() {
        out.push(path.clone());
        return;
    }
    for (predicate, object) in pairs {
        path.push(term_token(predicate));
        path.push(term_token(object));
        if object.is_entity() {
            descend(graph, object, remaining - 1, path, out, config);
        } else {
            out.push(path.clone());
        }
        path.pop();
        path.pop();
        if out.len() >= config.walks_per_entity {
            return;
        }
    }
}
