//! End-to-end orchestration: load a shell repository, map it to RDF,
//! prefilter candidates with a constraint query, embed via graph walks
//! and skip-gram training (or a content-addressed cache), and rank the
//! candidates against the query document.
//!
//! Reports echo the resolved configuration so a run can be reproduced
//! from its output alone. Everything outside the `timings` section is a
//! deterministic function of the inputs and the seed; `timings` holds the
//! volatile run facts (step durations, cache hit or miss, epoch losses).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aas::{parse_aas_json, validate, AASDocument};
use crate::aas2rdf::{map_document, subgraph_of, MappingRules, DEFAULT_NAMESPACE};
use crate::matcher::{
    rank, CandidateSet, DecisionPolicy, GraphVectorStrategy, SimilarityMetric,
};
use crate::rdf::{Graph, Term};
use crate::seed;
use crate::skipgram::{train, EmbeddingTable, Hyperparams};
use crate::sparql::{parse_query, prefilter, Query};
use crate::walks::{generate_walks, WalkConfig, WalkCorpus, WalkStrategy};

#[derive(Debug, Error)]
#[error("step `{step}`: {message}")]
pub struct PipelineError {
    pub step: &'static str,
    pub message: String,
}

fn err(step: &'static str, message: impl ToString) -> PipelineError {
    PipelineError {
        step,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkSettings {
    pub strategy: String,
    pub depth: usize,
    pub walks_per_entity: usize,
    pub include_literals: bool,
}

impl Default for WalkSettings {
    fn default() -> Self {
        let config = WalkConfig::default();
        WalkSettings {
            strategy: config.strategy.name().to_string(),
            depth: config.depth,
            walks_per_entity: config.walks_per_entity,
            include_literals: config.include_literals,
        }
    }
}

impl WalkSettings {
    pub fn to_config(&self, seed_value: u64) -> Result<WalkConfig, String> {
        let strategy = WalkStrategy::parse_name(&self.strategy)
            .ok_or_else(|| format!("unknown walk strategy `{}`", self.strategy))?;
        Ok(WalkConfig {
            strategy,
            depth: self.depth,
            walks_per_entity: self.walks_per_entity,
            seed: seed_value,
            include_literals: self.include_literals,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub learning_rate_floor: f64,
    pub min_count: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let hp = Hyperparams::default();
        TrainSettings {
            dim: hp.dim,
            window: hp.window,
            epochs: hp.epochs,
            negatives: hp.negatives,
            learning_rate: hp.learning_rate,
            learning_rate_floor: hp.learning_rate_floor,
            min_count: hp.min_count,
        }
    }
}

impl TrainSettings {
    pub fn to_hyperparams(&self, seed_value: u64) -> Hyperparams {
        Hyperparams {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            negatives: self.negatives,
            learning_rate: self.learning_rate,
            learning_rate_floor: self.learning_rate_floor,
            min_count: self.min_count,
            seed: seed_value,
        }
    }
}

/// Everything a run needs; the JSON form of this struct is the config
/// file format, and the resolved struct is echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// IRI namespace for minted entity IRIs; config key `rdf.namespace`.
    #[serde(rename = "rdf.namespace")]
    pub namespace: String,
    pub walks: WalkSettings,
    pub hyperparams: TrainSettings,
    /// "cosine" or "euclidean".
    pub metric: String,
    /// "root", "mean", or "weighted_mean".
    pub strategy: String,
    /// "threshold:T", "topk:K", or "hybrid:T,K".
    pub policy: String,
    /// "repository" walks the whole repository graph; "filtered" only the
    /// prefiltered candidates (plus the query document).
    pub embedding_scope: String,
    pub repo_dir: PathBuf,
    /// Optional embedding cache file; a `<path>.key` sidecar carries the
    /// content hash of (walk corpus, training settings, seed).
    pub embedding_cache: Option<PathBuf>,
    /// Default directory for run artifacts; the `pipeline` subcommand puts
    /// its report here when no explicit output path is given.
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            namespace: DEFAULT_NAMESPACE.to_string(),
            walks: WalkSettings::default(),
            hyperparams: TrainSettings::default(),
            metric: "cosine".to_string(),
            strategy: "mean".to_string(),
            policy: "hybrid:0.7,5".to_string(),
            embedding_scope: "repository".to_string(),
            repo_dir: PathBuf::new(),
            embedding_cache: None,
            output_dir: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("config serializes");
        out.push('\n');
        out
    }
}

/// Parse "threshold:T", "topk:K", or "hybrid:T,K".
pub fn parse_policy(text: &str) -> Result<DecisionPolicy, String> {
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| format!("policy `{text}` missing `:` (threshold:T, topk:K, hybrid:T,K)"))?;
    let bad = |what: &str| format!("policy `{text}`: bad {what}");
    match kind {
        "threshold" => {
            let t: f64 = args.parse().map_err(|_| bad("threshold"))?;
            Ok(DecisionPolicy::Threshold(t))
        }
        "topk" => {
            let k: usize = args.parse().map_err(|_| bad("k"))?;
            Ok(DecisionPolicy::TopK(k))
        }
        "hybrid" => {
            let (t, k) = args.split_once(',').ok_or_else(|| bad("arguments"))?;
            let t: f64 = t.parse().map_err(|_| bad("threshold"))?;
            let k: usize = k.parse().map_err(|_| bad("k"))?;
            Ok(DecisionPolicy::Hybrid(t, k))
        }
        _ => Err(format!("unknown policy kind `{kind}`")),
    }
}

pub fn parse_strategy(
    name: &str,
    frequencies: impl FnOnce() -> crate::matcher::TokenFrequencies,
) -> Result<GraphVectorStrategy, String> {
    match name {
        "root" => Ok(GraphVectorStrategy::Root),
        "mean" => Ok(GraphVectorStrategy::Mean),
        "weighted_mean" => Ok(GraphVectorStrategy::WeightedMean(frequencies())),
        _ => Err(format!("unknown strategy `{name}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub rank: usize,
    pub shell: String,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub step: String,
    pub millis: u128,
}

/// Volatile run facts, excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunInfo {
    pub steps: Vec<StepTiming>,
    /// "hit", "miss", "stale", or "disabled".
    pub cache: String,
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// "matched" or "empty-candidate-set".
    pub outcome: String,
    pub query_shell: String,
    pub constraint: String,
    pub document_count: usize,
    pub shell_count: usize,
    pub candidate_count: usize,
    pub results: Vec<ReportRow>,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
    pub timings: RunInfo,
}

impl MatchReport {
    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// The report as JSON with the volatile section removed; two runs
    /// over equal inputs must agree on this value.
    pub fn determinism_view(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        value.as_object_mut().expect("report is an object").remove("timings");
        value
    }
}

pub const EMPTY_CANDIDATES: &str = "empty-candidate-set";
pub const MATCHED: &str = "matched";

/// A parsed repository: documents in filename order plus their shells'
/// subgraphs over the merged graph.
pub struct Repository {
    pub documents: Vec<AASDocument>,
    pub merged: Graph,
    /// (shell IRI, shell subgraph), in document order.
    pub shells: Vec<(Term, Graph)>,
    pub warnings: Vec<String>,
}

/// Read every `.json` in the directory (filename order), parse, validate,
/// and map to RDF.
pub fn load_repository(dir: &Path, rules: &MappingRules) -> Result<Repository, PipelineError> {
    const STEP: &str = "load-repository";
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| err(STEP, format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(err(STEP, format!("no .json documents in {}", dir.display())));
    }

    let mut documents = Vec::new();
    let mut merged = Graph::new();
    let mut shells = Vec::new();
    let mut warnings = Vec::new();
    for path in &paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = fs::read(path).map_err(|e| err(STEP, format!("{name}: {e}")))?;
        let outcome =
            parse_aas_json(&bytes).map_err(|e| err(STEP, format!("{name}: {e}")))?;
        for w in outcome.warnings {
            warnings.push(format!("{name}: {w}"));
        }
        let violations = validate(&outcome.document);
        if !violations.is_empty() {
            return Err(err(STEP, format!("{name}: {}", violations[0])));
        }
        let graph = map_document(&outcome.document, rules)
            .map_err(|e| err("map-rdf", format!("{name}: {e}")))?;
        merged.merge(&graph);
        documents.push(outcome.document);
    }
    // Subgraphs come from the merged graph; semantic-id IRIs are shared
    // nodes but have no outgoing edges, so no candidate bleeds into
    // another document's content.
    for doc in &documents {
        for shell in &doc.shells {
            let iri = rules.entity_iri(&shell.id);
            let graph = subgraph_of(&merged, &iri).map_err(|e| err("map-rdf", e))?;
            shells.push((iri, graph));
        }
    }
    Ok(Repository {
        documents,
        merged,
        shells,
        warnings,
    })
}

fn cache_key(corpus: &WalkCorpus, settings: &TrainSettings, train_seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(corpus.canonical_bytes().as_bytes());
    hasher.update(b"\n");
    hasher.update(serde_json::to_string(settings).expect("settings serialize").as_bytes());
    hasher.update(train_seed.to_le_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn key_sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".key");
    path.with_file_name(name)
}

/// Train embeddings, or reuse the cache when its key sidecar matches the
/// current corpus and settings. Returns the table plus cache status and
/// the epoch losses of an actual training run.
fn train_or_load(
    corpus: &WalkCorpus,
    settings: &TrainSettings,
    train_seed: u64,
    cache: Option<&Path>,
) -> Result<(EmbeddingTable, String, Vec<f64>), PipelineError> {
    const STEP: &str = "train";
    let key = cache_key(corpus, settings, train_seed);
    let mut status = "disabled".to_string();
    if let Some(path) = cache {
        if path.is_file() {
            let stored = fs::read_to_string(key_sidecar(path)).unwrap_or_default();
            if stored.trim() == key {
                let table =
                    EmbeddingTable::load(path).map_err(|e| err(STEP, format!("cache: {e}")))?;
                return Ok((table, "hit".to_string(), Vec::new()));
            }
            status = "stale".to_string();
        } else {
            status = "miss".to_string();
        }
    }
    let output = train(corpus, &settings.to_hyperparams(train_seed)).map_err(|e| err(STEP, e))?;
    if let Some(path) = cache {
        output
            .table
            .save(path, false)
            .map_err(|e| err(STEP, format!("cache write: {e}")))?;
        fs::write(key_sidecar(path), format!("{key}\n"))
            .map_err(|e| err(STEP, format!("cache write: {e}")))?;
    }
    Ok((output.table, status, output.epoch_losses))
}

/// Run the whole retrieval pipeline for one query document against the
/// configured repository. An empty prefilter result is a reported
/// outcome, not an error.
pub fn run_pipeline(
    config: &PipelineConfig,
    query_doc: &AASDocument,
    constraint_text: &str,
) -> Result<MatchReport, PipelineError> {
    let mut info = RunInfo::default();
    let mut clock = Instant::now();
    let mut lap = |info: &mut RunInfo, step: &str| {
        info.steps.push(StepTiming {
            step: step.to_string(),
            millis: clock.elapsed().as_millis(),
        });
        clock = Instant::now();
    };

    let rules = MappingRules::new(config.namespace.clone())
        .map_err(|e| err("configure", e))?;
    let metric = SimilarityMetric::parse_name(&config.metric)
        .ok_or_else(|| err("configure", format!("unknown metric `{}`", config.metric)))?;
    let policy = parse_policy(&config.policy).map_err(|e| err("configure", e))?;
    match config.embedding_scope.as_str() {
        "repository" | "filtered" => {}
        other => {
            return Err(err("configure", format!("unknown embedding scope `{other}`")));
        }
    }

    let constraint: Query =
        parse_query(constraint_text).map_err(|e| err("parse-constraint", e))?;

    let violations = validate(query_doc);
    if !violations.is_empty() {
        return Err(err("validate-query", violations[0].to_string()));
    }
    if query_doc.shells.len() != 1 {
        return Err(err(
            "validate-query",
            format!("query document must contain exactly one shell, found {}", query_doc.shells.len()),
        ));
    }
    let query_graph = map_document(query_doc, &rules).map_err(|e| err("map-rdf", e))?;
    let query_shell = rules.entity_iri(&query_doc.shells[0].id);
    lap(&mut info, "prepare-query");

    let repo = load_repository(&config.repo_dir, &rules)?;
    lap(&mut info, "load-repository");

    let filtered = prefilter(&constraint, &repo.shells).map_err(|e| err("prefilter", e))?;
    lap(&mut info, "prefilter");

    let mut report = MatchReport {
        outcome: MATCHED.to_string(),
        query_shell: query_shell.as_iri().expect("entity iri").to_string(),
        constraint: constraint_text.to_string(),
        document_count: repo.documents.len(),
        shell_count: repo.shells.len(),
        candidate_count: filtered.len(),
        results: Vec::new(),
        warnings: repo.warnings,
        config: config.clone(),
        timings: RunInfo::default(),
    };
    if filtered.is_empty() {
        report.outcome = EMPTY_CANDIDATES.to_string();
        report.timings = info;
        return Ok(report);
    }

    // The walk graph always includes the query document, so its minted
    // IRIs resolve to vectors.
    let mut walk_graph = match config.embedding_scope.as_str() {
        "repository" => repo.merged.clone(),
        _ => {
            let mut g = Graph::new();
            for (_, candidate) in &filtered {
                g.merge(candidate);
            }
            g
        }
    };
    walk_graph.merge(&query_graph);
    // Canonical triple order: walks must not depend on how the graph was
    // assembled.
    let walk_graph = walk_graph.canonicalized();
    let walk_config = config
        .walks
        .to_config(seed::derive(config.seed, "walks"))
        .map_err(|e| err("configure", e))?
        .validated()
        .map_err(|e| err("walks", e))?;
    let starts: Vec<Term> = walk_graph.entities().into_iter().cloned().collect();
    let (corpus, walk_warnings) = generate_walks(&walk_graph, &starts, &walk_config);
    report.warnings.extend(walk_warnings);
    lap(&mut info, "walks");

    let (table, cache_status, losses) = train_or_load(
        &corpus,
        &config.hyperparams,
        seed::derive(config.seed, "train"),
        config.embedding_cache.as_deref(),
    )?;
    info.cache = cache_status;
    info.epoch_losses = losses;
    lap(&mut info, "train");

    let strategy = parse_strategy(&config.strategy, || corpus.token_frequencies())
        .map_err(|e| err("configure", e))?;
    let candidates = CandidateSet::new(filtered).map_err(|e| err("rank", e))?;
    let results = rank(
        &query_graph,
        &query_shell,
        &candidates,
        &table,
        &strategy,
        metric,
        policy,
    )
    .map_err(|e| err("rank", e))?;
    report.results = results
        .into_iter()
        .map(|r| ReportRow {
            rank: r.rank,
            shell: r.shell,
            raw: r.raw,
            normalized: r.normalized,
        })
        .collect();
    lap(&mut info, "rank");

    report.timings = info;
    Ok(report)
}
