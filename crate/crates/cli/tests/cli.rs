//! End-to-end tests against the compiled binary: exit codes, file
//! round-trips, and equivalence between the one-shot pipeline and the
//! same stages composed through files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aasmatch::seed;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aasmatch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn path_str(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

#[test]
fn version_and_help_exit_zero() {
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["match", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let unknown = run(&["no-such-command"]);
    assert_eq!(code(&unknown), 1);

    let missing_arg = run(&["convert"]);
    assert_eq!(code(&missing_arg), 1);

    // Policy and metric strings are validated before any file access.
    let bad_policy = run(&[
        "match",
        "--query", "/nonexistent.json",
        "--repo", "/nonexistent",
        "--constraint", "/nonexistent.rq",
        "--embeddings", "/nonexistent.emb",
        "--policy", "bestest",
    ]);
    assert_eq!(code(&bad_policy), 1);
    assert!(stderr(&bad_policy).contains("bestest"));

    let no_config = run(&[
        "pipeline",
        "--query", "/nonexistent.json",
        "--constraint", "/nonexistent.rq",
    ]);
    assert_eq!(code(&no_config), 1);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["convert", path_str(&dir.path().join("absent.json"))]);
    assert_eq!(code(&missing), 2);

    let bad_graph = dir.path().join("broken.nt");
    fs::write(&bad_graph, "this is not a triple\n").unwrap();
    let query_file = dir.path().join("q.rq");
    fs::write(&query_file, "ASK WHERE { ?s ?p ?o }").unwrap();
    let malformed = run(&[
        "query",
        "--graph", path_str(&bad_graph),
        "--query", path_str(&query_file),
    ]);
    assert_eq!(code(&malformed), 2);
}

#[test]
fn ingest_reports_each_file_and_fails_on_violations() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let gen = run(&[
        "gen-corpus",
        "--out", path_str(&corpus),
        "--instances", "1",
        "--seed", "3",
    ]);
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));
    let good = corpus.join("digital-nameplate_000.json");
    assert!(good.is_file());

    // A shell pointing at a submodel that is not in the document.
    let bad = dir.path().join("dangling.json");
    fs::write(
        &bad,
        r#"{"assetAdministrationShells":[{"id":"urn:x:1","idShort":"X",
            "assetKind":"Instance","submodels":[{"keys":[{"type":"Submodel",
            "value":"urn:x:missing"}]}]}],"submodels":[]}"#,
    )
    .unwrap();

    let all_good = run(&["ingest", path_str(&good)]);
    assert_eq!(code(&all_good), 0);
    assert!(stdout(&all_good).contains("ok"));

    let mixed = run(&["ingest", path_str(&good), path_str(&bad)]);
    assert_eq!(code(&mixed), 2);
    let text = stdout(&mixed);
    assert!(text.contains("digital-nameplate_000.json"));
    assert!(text.contains("dangling.json"));
}

#[test]
fn convert_then_query_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let gen = run(&[
        "gen-corpus",
        "--out", path_str(&corpus),
        "--instances", "1",
        "--synonym-rate", "0",
        "--drop-rate", "0",
        "--seed", "1",
    ]);
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));

    let doc = corpus.join("digital-nameplate_000.json");
    let graph = dir.path().join("doc.nt");
    let converted = run(&["convert", path_str(&doc), "--out", path_str(&graph)]);
    assert_eq!(code(&converted), 0, "{}", stderr(&converted));
    let text = fs::read_to_string(&graph).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty());
    let sorted = {
        let mut s = lines.clone();
        s.sort();
        s
    };
    assert_eq!(lines, sorted, "converted graph is not in canonical order");
    lines.dedup();
    assert_eq!(lines.len(), text.lines().count(), "duplicate triples");

    let ask = dir.path().join("ask.rq");
    fs::write(
        &ask,
        r#"ASK WHERE { ?s <https://aasmatch.example/vocab#hasIdShort> "Nameplate" }"#,
    )
    .unwrap();
    let asked = run(&["query", "--graph", path_str(&graph), "--query", path_str(&ask)]);
    assert_eq!(code(&asked), 0);
    assert_eq!(stdout(&asked).trim(), "true");

    let select = dir.path().join("select.rq");
    fs::write(
        &select,
        r#"SELECT ?name WHERE {
            ?sm <https://aasmatch.example/vocab#hasIdShort> ?name .
            ?shell <https://aasmatch.example/vocab#hasSubmodel> ?sm
        }"#,
    )
    .unwrap();
    let selected = run(&[
        "query",
        "--graph", path_str(&graph),
        "--query", path_str(&select),
    ]);
    assert_eq!(code(&selected), 0);
    let rows: Vec<String> = stdout(&selected).lines().map(str::to_string).collect();
    assert_eq!(rows[0], "?name");
    assert!(rows[1..].iter().any(|r| r.contains("Nameplate")));
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        map.insert(name, fs::read(&path).unwrap());
    }
    map
}

#[test]
fn gen_corpus_same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("one");
    let second = dir.path().join("two");
    let third = dir.path().join("three");
    for (out, seed_text) in [(&first, "9"), (&second, "9"), (&third, "10")] {
        let output = run(&[
            "gen-corpus",
            "--out", path_str(out),
            "--instances", "2",
            "--seed", seed_text,
        ]);
        assert_eq!(code(&output), 0, "{}", stderr(&output));
    }
    let a = dir_contents(&first);
    let b = dir_contents(&second);
    assert_eq!(a, b, "same seed must reproduce the corpus byte for byte");
    assert_eq!(a.len(), 11, "2 instances x 5 templates + ground truth");
    let c = dir_contents(&third);
    assert_eq!(a.keys().collect::<Vec<_>>(), c.keys().collect::<Vec<_>>());
    assert_ne!(a, c, "different seed should perturb differently");
}

#[test]
fn eval_scores_known_lists_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.tsv");
    fs::write(&truth, "a1\tA\na2\tA\nb1\tB\nb2\tB\n").unwrap();
    // Rows arrive out of rank order on purpose.
    let results = dir.path().join("results.tsv");
    fs::write(&results, "a1\t2\ta2\na1\t1\tb1\nb1\t1\tb2\nb1\t2\ta1\n").unwrap();

    let output = run(&[
        "eval",
        "--results", path_str(&results),
        "--truth", path_str(&truth),
        "--k", "1",
    ]);
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let text = stdout(&output);
    // By hand: a1 has its first relevant hit at rank 2, b1 at rank 1.
    assert!(text.contains("precision_at_k\t0.500000"), "{text}");
    assert!(text.contains("mean_reciprocal_rank\t0.750000"), "{text}");
    assert!(text.contains("queries\t2"), "{text}");

    let zero_k = run(&[
        "eval",
        "--results", path_str(&results),
        "--truth", path_str(&truth),
        "--k", "0",
    ]);
    assert_eq!(code(&zero_k), 1);
}

struct PipelineFixture {
    _dir: tempfile::TempDir,
    repo: PathBuf,
    query: PathBuf,
    constraint: PathBuf,
    config: PathBuf,
    cache: PathBuf,
    report: PathBuf,
    seed: u64,
}

fn pipeline_fixture() -> PipelineFixture {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let gen = run(&[
        "gen-corpus",
        "--out", path_str(&repo),
        "--instances", "2",
        "--seed", "11",
    ]);
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));

    let query = repo.join("digital-nameplate_000.json");
    let constraint = dir.path().join("constraint.rq");
    fs::write(&constraint, "SELECT ?aas WHERE { ?aas ?p ?o }").unwrap();

    let cache = dir.path().join("cache.emb");
    let config = dir.path().join("config.json");
    let seed = 5;
    let config_json = serde_json::json!({
        "repo_dir": path_str(&repo),
        "embedding_cache": path_str(&cache),
        "seed": seed,
        "walks": {"depth": 3, "walks_per_entity": 6},
        "hyperparams": {"dim": 16, "epochs": 2},
        "policy": "topk:9",
    });
    fs::write(&config, serde_json::to_string_pretty(&config_json).unwrap()).unwrap();

    PipelineFixture {
        report: dir.path().join("report.json"),
        _dir: dir,
        repo,
        query,
        constraint,
        config,
        cache,
        seed,
    }
}

#[test]
fn pipeline_equals_composed_stages() {
    let fx = pipeline_fixture();
    let piped = run(&[
        "pipeline",
        "--config", path_str(&fx.config),
        "--query", path_str(&fx.query),
        "--constraint", path_str(&fx.constraint),
        "--out", path_str(&fx.report),
    ]);
    assert_eq!(code(&piped), 0, "{}", stderr(&piped));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&fx.report).unwrap()).unwrap();
    assert_eq!(report["outcome"], "matched");

    // Stage chain over files. The walk graph is the repository plus the
    // query document; the query is a repository member, so converting
    // every repository file covers it.
    let work = fx._dir.path();
    let mut merged = String::new();
    let mut doc_paths: Vec<PathBuf> = fs::read_dir(&fx.repo)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    doc_paths.sort();
    assert_eq!(doc_paths.len(), 10);
    for doc in &doc_paths {
        let nt = work.join(format!("{}.nt", doc.file_stem().unwrap().to_str().unwrap()));
        let converted = run(&["convert", path_str(doc), "--out", path_str(&nt)]);
        assert_eq!(code(&converted), 0, "{}", stderr(&converted));
        merged.push_str(&fs::read_to_string(&nt).unwrap());
    }
    let merged_path = work.join("merged.nt");
    fs::write(&merged_path, merged).unwrap();

    let walks_path = work.join("walks.txt");
    let walk_seed = seed::derive(fx.seed, "walks").to_string();
    let walked = run(&[
        "walk",
        "--graph", path_str(&merged_path),
        "--out", path_str(&walks_path),
        "--strategy", "random",
        "--depth", "3",
        "--walks-per-entity", "6",
        "--seed", &walk_seed,
    ]);
    assert_eq!(code(&walked), 0, "{}", stderr(&walked));

    let chain_emb = work.join("chain.emb");
    let train_seed = seed::derive(fx.seed, "train").to_string();
    let trained = run(&[
        "train",
        "--corpus", path_str(&walks_path),
        "--out", path_str(&chain_emb),
        "--dim", "16",
        "--epochs", "2",
        "--seed", &train_seed,
    ]);
    assert_eq!(code(&trained), 0, "{}", stderr(&trained));

    // The pipeline's cache file is the same table the chain just trained.
    assert_eq!(
        fs::read(&fx.cache).unwrap(),
        fs::read(&chain_emb).unwrap(),
        "pipeline cache and chain-trained embeddings differ"
    );

    let matched = run(&[
        "match",
        "--query", path_str(&fx.query),
        "--repo", path_str(&fx.repo),
        "--constraint", path_str(&fx.constraint),
        "--embeddings", path_str(&chain_emb),
        "--metric", "cosine",
        "--strategy", "mean",
        "--policy", "topk:9",
    ]);
    assert_eq!(code(&matched), 0, "{}", stderr(&matched));

    let rows: Vec<Vec<String>> = stdout(&matched)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect();
    let reported = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), reported.len());
    for (row, reported_row) in rows.iter().zip(reported) {
        assert_eq!(row[0].parse::<u64>().unwrap(), reported_row["rank"].as_u64().unwrap());
        assert_eq!(row[1], reported_row["shell"].as_str().unwrap());
        for (printed, exact) in [(&row[2], "raw"), (&row[3], "normalized")] {
            let printed: f64 = printed.parse().unwrap();
            let exact = reported_row[exact].as_f64().unwrap();
            assert!(
                (printed - exact).abs() <= 5e-7,
                "row {row:?} diverges from pipeline report"
            );
        }
    }
}

#[test]
fn pipeline_reruns_hit_the_cache_and_env_config_works() {
    let fx = pipeline_fixture();
    let first = run(&[
        "pipeline",
        "--config", path_str(&fx.config),
        "--query", path_str(&fx.query),
        "--constraint", path_str(&fx.constraint),
    ]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let first_report: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(first_report["timings"]["cache"], "miss");

    // Same run again, config taken from the environment this time.
    let second = bin()
        .env("AASMATCH_CONFIG", &fx.config)
        .args([
            "pipeline",
            "--query", path_str(&fx.query),
            "--constraint", path_str(&fx.constraint),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    let second_report: serde_json::Value = serde_json::from_str(&stdout(&second)).unwrap();
    assert_eq!(second_report["timings"]["cache"], "hit");

    let strip = |mut v: serde_json::Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(
        strip(first_report),
        strip(second_report),
        "cold and warm runs must report identical results"
    );
}

#[test]
fn configured_output_dir_receives_report() {
    let fx = pipeline_fixture();
    let out_dir = fx._dir.path().join("runs");
    let mut config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&fx.config).unwrap()).unwrap();
    config["output_dir"] = serde_json::Value::String(path_str(&out_dir).to_string());
    fs::write(&fx.config, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let piped = run(&[
        "pipeline",
        "--config", path_str(&fx.config),
        "--query", path_str(&fx.query),
        "--constraint", path_str(&fx.constraint),
    ]);
    assert_eq!(code(&piped), 0, "{}", stderr(&piped));
    assert!(stdout(&piped).is_empty(), "report should go to the file, not stdout");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "matched");
}

#[test]
fn thread_count_does_not_change_walk_output() {
    let fx = pipeline_fixture();
    let graph = fx._dir.path().join("g.nt");
    let converted = run(&["convert", path_str(&fx.query), "--out", path_str(&graph)]);
    assert_eq!(code(&converted), 0);

    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = fx._dir.path().join(format!("walks_{threads}.txt"));
        let walked = run(&[
            "--threads", threads,
            "walk",
            "--graph", path_str(&graph),
            "--out", path_str(&out),
            "--depth", "4",
            "--walks-per-entity", "25",
            "--seed", "2",
        ]);
        assert_eq!(code(&walked), 0, "{}", stderr(&walked));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "worker count changed walk output");
}
