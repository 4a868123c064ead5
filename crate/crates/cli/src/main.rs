//! Command-line frontend for the shell-retrieval pipeline.
//!
//! Each subcommand covers one pipeline stage (parse, map, filter, walk,
//! train, match) so stages compose through files; `pipeline` runs them
//! end to end in one process. Exit codes: 0 success, 1 usage error,
//! 2 data error (unreadable or invalid inputs), 3 internal error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aasmatch::aas::{parse_aas_json, to_json_string, validate, AASDocument};
use aasmatch::aas2rdf::{map_document, MappingRules, DEFAULT_NAMESPACE};
use aasmatch::corpus::{eval_retrieval, gen_corpus, CorpusSpec, GroundTruth, RankedList};
use aasmatch::matcher::{rank, CandidateSet, SimilarityMetric};
use aasmatch::pipeline::{
    load_repository, parse_policy, parse_strategy, run_pipeline, PipelineConfig,
};
use aasmatch::rdf::{parse_ntriples, serialize_ntriples};
use aasmatch::skipgram::{train, EmbeddingTable, Hyperparams};
use aasmatch::sparql::{eval_ask, eval_select, parse_query, prefilter, QueryForm};
use aasmatch::walks::{generate_walks, WalkConfig, WalkCorpus, WalkStrategy};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

fn data(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| data(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Parse and validate one shell document file.
fn load_document(path: &Path) -> Result<(AASDocument, Vec<String>), CliError> {
    let bytes = read_file(path)?;
    let outcome = parse_aas_json(&bytes).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let violations = validate(&outcome.document);
    if !violations.is_empty() {
        return Err(data(format!("{}: {}", path.display(), violations[0])));
    }
    Ok((outcome.document, outcome.warnings))
}

#[derive(Parser)]
#[command(
    name = "aasmatch",
    about = "Semantic retrieval over Asset Administration Shell repositories",
    version
)]
struct Cli {
    /// Worker threads for parallel stages (output is identical for any
    /// thread count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate shell documents, reporting violations.
    Ingest {
        /// Shell JSON files to check.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Convert a shell document to canonical N-Triples.
    Convert {
        /// Shell JSON file.
        input: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// IRI namespace for minted entity IRIs.
        #[arg(long, default_value = DEFAULT_NAMESPACE)]
        namespace: String,
    },
    /// Run a SELECT or ASK query over an N-Triples graph.
    Query {
        /// Graph file in N-Triples form.
        #[arg(long)]
        graph: PathBuf,
        /// File holding the query text.
        #[arg(long)]
        query: PathBuf,
    },
    /// Generate a walk corpus from an N-Triples graph.
    Walk {
        #[arg(long)]
        graph: PathBuf,
        /// Output corpus file.
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value = "random")]
        strategy: String,
        #[arg(long, default_value_t = WalkConfig::default().depth)]
        depth: usize,
        #[arg(long, default_value_t = WalkConfig::default().walks_per_entity)]
        walks_per_entity: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop literal tokens from walks.
        #[arg(long)]
        exclude_literals: bool,
    },
    /// Train embeddings from a walk corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Output embedding file.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also persist context vectors to `<out>.out`.
        #[arg(long)]
        with_output_vectors: bool,
    },
    /// Rank repository shells against a query document.
    Match {
        /// Query shell JSON file.
        #[arg(long)]
        query: PathBuf,
        /// Directory of repository shell JSON files.
        #[arg(long)]
        repo: PathBuf,
        /// File holding the SPARQL constraint.
        #[arg(long)]
        constraint: PathBuf,
        /// Pre-trained embedding file.
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value = "cosine")]
        metric: String,
        #[arg(long, default_value = "mean")]
        strategy: String,
        /// threshold:T, topk:K, or hybrid:T,K.
        #[arg(long, default_value = "hybrid:0.7,5")]
        policy: String,
        /// Walk corpus file; required by the weighted_mean strategy.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_NAMESPACE)]
        namespace: String,
    },
    /// Generate a synthetic evaluation corpus with ground truth.
    GenCorpus {
        /// Corpus spec JSON; built-in template families when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Instances per template (built-in spec only).
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 0.3)]
        synonym_rate: f64,
        #[arg(long, default_value_t = 0.2)]
        drop_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score ranked retrieval results against ground truth.
    Eval {
        /// TSV rows: query_id<TAB>rank<TAB>candidate_id.
        #[arg(long)]
        results: PathBuf,
        /// TSV rows: doc_id<TAB>template_id.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Run the full retrieval pipeline and emit a JSON report.
    Pipeline {
        /// Config JSON; falls back to $AASMATCH_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Query shell JSON file.
        #[arg(long)]
        query: PathBuf,
        /// File holding the SPARQL constraint.
        #[arg(long)]
        constraint: PathBuf,
        /// Override the configured repository directory.
        #[arg(long)]
        repo: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured embedding cache path.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Report file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = Hyperparams::default().dim)]
    dim: usize,
    #[arg(long, default_value_t = Hyperparams::default().window)]
    window: usize,
    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = Hyperparams::default().negatives)]
    negatives: usize,
    #[arg(long, default_value_t = Hyperparams::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = Hyperparams::default().learning_rate_floor)]
    learning_rate_floor: f64,
    #[arg(long, default_value_t = Hyperparams::default().min_count)]
    min_count: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; real parse
            // failures are usage errors.
            let ok = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aasmatch: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest { files } => cmd_ingest(&files),
        Command::Convert {
            input,
            out,
            namespace,
        } => cmd_convert(&input, out.as_deref(), &namespace),
        Command::Query { graph, query } => cmd_query(&graph, &query),
        Command::Walk {
            graph,
            out,
            strategy,
            depth,
            walks_per_entity,
            seed,
            exclude_literals,
        } => cmd_walk(&graph, &out, &strategy, depth, walks_per_entity, seed, exclude_literals),
        Command::Train {
            corpus,
            out,
            hyper,
            seed,
            with_output_vectors,
        } => cmd_train(&corpus, &out, &hyper, seed, with_output_vectors),
        Command::Match {
            query,
            repo,
            constraint,
            embeddings,
            metric,
            strategy,
            policy,
            corpus,
            namespace,
        } => cmd_match(
            &query,
            &repo,
            &constraint,
            &embeddings,
            &metric,
            &strategy,
            &policy,
            corpus.as_deref(),
            &namespace,
        ),
        Command::GenCorpus {
            spec,
            out,
            instances,
            synonym_rate,
            drop_rate,
            seed,
        } => cmd_gen_corpus(spec.as_deref(), &out, instances, synonym_rate, drop_rate, seed),
        Command::Eval { results, truth, k } => cmd_eval(&results, &truth, k),
        Command::Pipeline {
            config,
            query,
            constraint,
            repo,
            seed,
            cache,
            out,
        } => cmd_pipeline(
            config.as_deref(),
            &query,
            &constraint,
            repo,
            seed,
            cache,
            out.as_deref(),
        ),
    }
}

fn cmd_ingest(files: &[PathBuf]) -> Result<(), CliError> {
    let mut failed = false;
    for path in files {
        let bytes = read_file(path)?;
        match parse_aas_json(&bytes) {
            Ok(outcome) => {
                let violations = validate(&outcome.document);
                if violations.is_empty() {
                    println!(
                        "{}: ok ({} shells, {} submodels)",
                        path.display(),
                        outcome.document.shells.len(),
                        outcome.document.submodels.len()
                    );
                } else {
                    failed = true;
                    println!("{}: invalid", path.display());
                    for v in &violations {
                        println!("  {v}");
                    }
                }
                for w in &outcome.warnings {
                    eprintln!("{}: warning: {w}", path.display());
                }
            }
            Err(e) => {
                failed = true;
                println!("{}: unreadable: {e}", path.display());
            }
        }
    }
    if failed {
        Err(data("one or more documents failed validation"))
    } else {
        Ok(())
    }
}

fn cmd_convert(input: &Path, out: Option<&Path>, namespace: &str) -> Result<(), CliError> {
    let (document, warnings) = load_document(input)?;
    for w in warnings {
        eprintln!("{}: warning: {w}", input.display());
    }
    let rules = MappingRules::new(namespace).map_err(data)?;
    let graph = map_document(&document, &rules).map_err(data)?;
    write_output(out, &serialize_ntriples(&graph))
}

fn cmd_query(graph_path: &Path, query_path: &Path) -> Result<(), CliError> {
    let graph = parse_ntriples(&read_text(graph_path)?).map_err(data)?;
    let query = parse_query(&read_text(query_path)?).map_err(data)?;
    match query.form {
        QueryForm::Select => {
            let table = eval_select(&query, &graph).map_err(data)?;
            let header: Vec<String> = table.columns.iter().map(|c| format!("?{c}")).collect();
            println!("{}", header.join("\t"));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|t| t.to_string()).collect();
                println!("{}", cells.join("\t"));
            }
        }
        QueryForm::Ask => {
            println!("{}", eval_ask(&query, &graph).map_err(data)?);
        }
    }
    Ok(())
}

fn cmd_walk(
    graph_path: &Path,
    out: &Path,
    strategy: &str,
    depth: usize,
    walks_per_entity: usize,
    seed: u64,
    exclude_literals: bool,
) -> Result<(), CliError> {
    let strategy = WalkStrategy::parse_name(strategy)
        .ok_or_else(|| usage(format!("unknown walk strategy `{strategy}`")))?;
    let config = WalkConfig {
        strategy,
        depth,
        walks_per_entity,
        seed,
        include_literals: !exclude_literals,
    }
    .validated()
    .map_err(usage)?;
    // Canonical triple order keeps the output independent of line order in
    // the input file.
    let graph = parse_ntriples(&read_text(graph_path)?)
        .map_err(data)?
        .canonicalized();
    let starts: Vec<_> = graph.entities().into_iter().cloned().collect();
    let (corpus, warnings) = generate_walks(&graph, &starts, &config);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    corpus.save(out).map_err(data)?;
    eprintln!(
        "wrote {} sentences ({} tokens) to {}",
        corpus.len(),
        corpus.token_count(),
        out.display()
    );
    Ok(())
}

fn cmd_train(
    corpus_path: &Path,
    out: &Path,
    hyper: &HyperArgs,
    seed: u64,
    with_output_vectors: bool,
) -> Result<(), CliError> {
    let corpus = WalkCorpus::load(corpus_path).map_err(data)?;
    let hp = Hyperparams {
        dim: hyper.dim,
        window: hyper.window,
        epochs: hyper.epochs,
        negatives: hyper.negatives,
        learning_rate: hyper.learning_rate,
        learning_rate_floor: hyper.learning_rate_floor,
        min_count: hyper.min_count,
        seed,
    };
    let output = train(&corpus, &hp).map_err(data)?;
    output.table.save(out, with_output_vectors).map_err(data)?;
    for (epoch, loss) in output.epoch_losses.iter().enumerate() {
        eprintln!("epoch {epoch}: mean loss {loss:.6}");
    }
    eprintln!(
        "wrote {} vectors (dim {}) to {}",
        output.table.len(),
        output.table.dim(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_match(
    query_path: &Path,
    repo_dir: &Path,
    constraint_path: &Path,
    embeddings: &Path,
    metric: &str,
    strategy: &str,
    policy: &str,
    corpus_path: Option<&Path>,
    namespace: &str,
) -> Result<(), CliError> {
    let metric = SimilarityMetric::parse_name(metric)
        .ok_or_else(|| usage(format!("unknown metric `{metric}`")))?;
    let policy = parse_policy(policy).map_err(usage)?;
    if strategy == "weighted_mean" && corpus_path.is_none() {
        return Err(usage("strategy weighted_mean needs --corpus for token frequencies"));
    }
    let frequencies = match corpus_path {
        Some(path) => WalkCorpus::load(path).map_err(data)?.token_frequencies(),
        None => Default::default(),
    };
    let strategy = parse_strategy(strategy, || frequencies).map_err(usage)?;

    let (query_doc, warnings) = load_document(query_path)?;
    for w in warnings {
        eprintln!("{}: warning: {w}", query_path.display());
    }
    if query_doc.shells.len() != 1 {
        return Err(data(format!(
            "{}: query document must contain exactly one shell, found {}",
            query_path.display(),
            query_doc.shells.len()
        )));
    }
    let rules = MappingRules::new(namespace).map_err(data)?;
    let repo = load_repository(repo_dir, &rules).map_err(data)?;
    for w in &repo.warnings {
        eprintln!("warning: {w}");
    }
    let constraint = parse_query(&read_text(constraint_path)?).map_err(data)?;
    let filtered = prefilter(&constraint, &repo.shells).map_err(data)?;

    println!("rank\tshell\traw\tnormalized");
    if filtered.is_empty() {
        eprintln!("no candidates satisfy the constraint");
        return Ok(());
    }

    let table = EmbeddingTable::load(embeddings).map_err(data)?;
    let query_graph = map_document(&query_doc, &rules).map_err(data)?;
    let query_shell = rules.entity_iri(&query_doc.shells[0].id);
    let candidates = CandidateSet::new(filtered).map_err(data)?;
    let results = rank(
        &query_graph,
        &query_shell,
        &candidates,
        &table,
        &strategy,
        metric,
        policy,
    )
    .map_err(data)?;
    for r in &results {
        println!("{}\t{}\t{:.6}\t{:.6}", r.rank, r.shell, r.raw, r.normalized);
    }
    Ok(())
}

fn cmd_gen_corpus(
    spec_path: Option<&Path>,
    out: &Path,
    instances: usize,
    synonym_rate: f64,
    drop_rate: f64,
    seed: u64,
) -> Result<(), CliError> {
    let spec = match spec_path {
        Some(path) => {
            serde_json::from_str::<CorpusSpec>(&read_text(path)?)
                .map_err(|e| data(format!("{}: {e}", path.display())))?
        }
        None => CorpusSpec::builtin(instances, synonym_rate, drop_rate, seed),
    };
    let (documents, truth) = gen_corpus(&spec).map_err(data)?;
    fs::create_dir_all(out).map_err(|e| data(format!("{}: {e}", out.display())))?;

    // Documents arrive template-major in instance order; mirror that in
    // the file names.
    let mut docs = documents.iter();
    for template in &spec.templates {
        for instance in 0..spec.instances_per_template {
            let doc = docs.next().expect("document per template instance");
            let path = out.join(format!("{}_{instance:03}.json", template.id));
            fs::write(&path, to_json_string(doc))
                .map_err(|e| data(format!("{}: {e}", path.display())))?;
        }
    }
    truth.save(&out.join("ground_truth.tsv")).map_err(data)?;
    eprintln!(
        "wrote {} documents and ground_truth.tsv to {}",
        documents.len(),
        out.display()
    );
    Ok(())
}

fn cmd_eval(results_path: &Path, truth_path: &Path, k: usize) -> Result<(), CliError> {
    if k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let truth = GroundTruth::load(truth_path).map_err(data)?;

    // Group result rows by query, keeping first-appearance query order
    // and sorting each group by the rank column.
    let text = read_text(results_path)?;
    let mut order: Vec<String> = Vec::new();
    let mut grouped: std::collections::HashMap<String, Vec<(usize, String)>> =
        std::collections::HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(data(format!(
                "{}:{}: expected query<TAB>rank<TAB>candidate",
                results_path.display(),
                idx + 1
            )));
        }
        let rank_no: usize = fields[1].parse().map_err(|_| {
            data(format!(
                "{}:{}: bad rank `{}`",
                results_path.display(),
                idx + 1,
                fields[1]
            ))
        })?;
        let query = fields[0].to_string();
        if !grouped.contains_key(&query) {
            order.push(query.clone());
        }
        grouped
            .entry(query)
            .or_default()
            .push((rank_no, fields[2].to_string()));
    }
    let results: Vec<RankedList> = order
        .into_iter()
        .map(|query| {
            let mut rows = grouped.remove(&query).expect("grouped row");
            rows.sort();
            RankedList {
                query,
                ranked: rows.into_iter().map(|(_, c)| c).collect(),
            }
        })
        .collect();

    let metrics = eval_retrieval(&results, &truth, k).map_err(data)?;
    println!("metric\tvalue");
    println!("precision_at_k\t{:.6}", metrics.precision_at_k);
    println!("mean_reciprocal_rank\t{:.6}", metrics.mean_reciprocal_rank);
    println!("queries\t{}", metrics.per_query.len());
    Ok(())
}

fn cmd_pipeline(
    config_path: Option<&Path>,
    query_path: &Path,
    constraint_path: &Path,
    repo: Option<PathBuf>,
    seed: Option<u64>,
    cache: Option<PathBuf>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let env_path = std::env::var_os("AASMATCH_CONFIG").map(PathBuf::from);
    let path = config_path
        .map(Path::to_path_buf)
        .or(env_path)
        .ok_or_else(|| usage("no config: pass --config or set AASMATCH_CONFIG"))?;
    let mut config = PipelineConfig::from_json(&read_text(&path)?)
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    if let Some(dir) = repo {
        config.repo_dir = dir;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(c) = cache {
        config.embedding_cache = Some(c);
    }

    let (query_doc, warnings) = load_document(query_path)?;
    for w in warnings {
        eprintln!("{}: warning: {w}", query_path.display());
    }
    let constraint_text = read_text(constraint_path)?;
    let report = run_pipeline(&config, &query_doc, &constraint_text).map_err(data)?;

    // Explicit --out wins; otherwise the configured output directory;
    // otherwise stdout.
    let configured = match (out, &report.config.output_dir) {
        (None, Some(dir)) => {
            fs::create_dir_all(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
            Some(dir.join("report.json"))
        }
        _ => None,
    };
    let target = out.or(configured.as_deref());
    write_output(target, &report.to_json_string())?;
    if let Some(path) = configured {
        eprintln!("wrote report to {}", path.display());
    }
    Ok(())
}
