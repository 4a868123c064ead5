//! Skip-gram embeddings with negative sampling, trained from walk
//! sentences.
//!
//! The trainer is deliberately single-threaded with a fixed update order,
//! so equal (corpus, hyperparameters) produce byte-identical embedding
//! files. Final vectors are quantized to the 9-significant-digit precision
//! of the file format before they leave [`train`], which makes the
//! in-memory table and its persisted form exactly equal.
//!
//! File format (version `v1`): header `aasmatch-emb v1 <dim> <tokens>`,
//! then one line per token in sorted order: percent-encoded token, a tab,
//! `dim` space-separated floats, each with 9 significant digits. Output
//! (context) vectors, when requested, go to a sibling `<path>.out` file in
//! the same format.

mod train;

pub use train::{gradient_check, gradient_check_sign_flipped, train, GradientCheckReport, TrainOutput};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::encoding::{encode_token, percent_decode};
use crate::walks::WalkCorpus;

#[derive(Debug, Error)]
pub enum SkipgramError {
    #[error("corpus has no sentences")]
    EmptyCorpus,
    #[error("vocabulary is empty (check min_count against the corpus)")]
    EmptyVocab,
    #[error("loss became non-finite in epoch {epoch}; lower the learning rate")]
    NonfiniteLoss { epoch: usize },
    #[error("hyperparameters invalid: {0}")]
    InvalidHyperparams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unsupported embedding file header `{found}` (expected `aasmatch-emb v1 ...`)")]
    VersionMismatch { found: String },
    #[error("embedding file corrupt at line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Embedding dimension.
    pub dim: usize,
    /// Context window radius in tokens.
    pub window: usize,
    pub epochs: usize,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    pub learning_rate: f64,
    /// The linear decay stops here instead of reaching zero.
    pub learning_rate_floor: f64,
    /// Tokens rarer than this are dropped from the vocabulary.
    pub min_count: u64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 64,
            window: 5,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            learning_rate_floor: 0.0001,
            min_count: 1,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validated(self) -> Result<Self, SkipgramError> {
        let fail = |msg: &str| Err(SkipgramError::InvalidHyperparams(msg.to_string()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be positive");
        }
        if self.negatives == 0 {
            return fail("negatives must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return fail("learning_rate must be positive");
        }
        if !(self.learning_rate_floor >= 0.0 && self.learning_rate_floor < self.learning_rate) {
            return fail("learning_rate_floor must be in [0, learning_rate)");
        }
        Ok(self)
    }
}

/// Token inventory with unigram counts and the `count^0.75` noise
/// distribution used to draw negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    /// Sorted tokens; position is the vocabulary index.
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    counts: Vec<u64>,
    /// Cumulative noise distribution; last entry is 1 (within float error).
    noise_cdf: Vec<f64>,
}

/// Tally the corpus and keep tokens with count >= min_count.
pub fn build_vocab(corpus: &WalkCorpus, min_count: u64) -> Result<Vocab, SkipgramError> {
    if corpus.is_empty() {
        return Err(SkipgramError::EmptyCorpus);
    }
    let frequencies = corpus.token_frequencies();
    let mut tokens = Vec::new();
    let mut counts = Vec::new();
    for (token, count) in frequencies {
        if count >= min_count.max(1) {
            tokens.push(token);
            counts.push(count);
        }
    }
    let mut index = BTreeMap::new();
    for (i, token) in tokens.iter().enumerate() {
        index.insert(token.clone(), i);
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let noise_cdf = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    Ok(Vocab {
        tokens,
        index,
        counts,
        noise_cdf,
    })
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    /// Probability mass of each token under the noise distribution.
    pub fn noise_probabilities(&self) -> Vec<f64> {
        let mut probs = Vec::with_capacity(self.noise_cdf.len());
        let mut prev = 0.0;
        for &c in &self.noise_cdf {
            probs.push(c - prev);
            prev = c;
        }
        probs
    }

    /// Draw one token index from the noise distribution.
    pub(crate) fn sample_noise(&self, uniform: f64) -> usize {
        self.noise_cdf
            .partition_point(|&c| c < uniform)
            .min(self.tokens.len() - 1)
    }
}

/// Trained vectors: an input vector per token, and optionally the output
/// (context) vectors. Similarity always reads the input vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    input: BTreeMap<String, Vec<f64>>,
    output: Option<BTreeMap<String, Vec<f64>>>,
}

impl EmbeddingTable {
    pub fn new(
        dim: usize,
        input: BTreeMap<String, Vec<f64>>,
        output: Option<BTreeMap<String, Vec<f64>>>,
    ) -> Self {
        debug_assert!(input.values().all(|v| v.len() == dim));
        EmbeddingTable { dim, input, output }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.input.get(token).map(Vec::as_slice)
    }

    pub fn output_vector(&self, token: &str) -> Option<&[f64]> {
        self.output.as_ref()?.get(token).map(Vec::as_slice)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.input.keys().map(String::as_str)
    }

    pub fn has_output_vectors(&self) -> bool {
        self.output.is_some()
    }

    fn sibling_out_path(path: &Path) -> PathBuf {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".out");
        path.with_file_name(name)
    }

    /// Write the table; with `include_output` the context vectors go to a
    /// sibling `<path>.out` file.
    pub fn save(&self, path: &Path, include_output: bool) -> Result<(), SkipgramError> {
        fs::write(path, serialize_table(self.dim, &self.input))?;
        if include_output {
            if let Some(output) = &self.output {
                fs::write(Self::sibling_out_path(path), serialize_table(self.dim, output))?;
            }
        }
        Ok(())
    }

    /// Read a table saved by [`EmbeddingTable::save`]. A sibling `.out`
    /// file, when present, restores the output vectors.
    pub fn load(path: &Path) -> Result<Self, SkipgramError> {
        let text = fs::read_to_string(path)?;
        let (dim, input) = parse_table(&text)?;
        let out_path = Self::sibling_out_path(path);
        let output = if out_path.is_file() {
            let (out_dim, table) = parse_table(&fs::read_to_string(out_path)?)?;
            if out_dim != dim {
                return Err(SkipgramError::Corrupt {
                    line: 1,
                    message: format!("output table dimension {out_dim} != input table {dim}"),
                });
            }
            Some(table)
        } else {
            None
        };
        Ok(EmbeddingTable { dim, input, output })
    }
}

/// One float at the file precision: 9 significant digits, scientific form.
pub(crate) fn format_component(x: f64) -> String {
    format!("{x:.8e}")
}

/// Snap a float to exactly the value its file form parses back to.
pub(crate) fn quantize(x: f64) -> f64 {
    format_component(x).parse().expect("formatted float reparses")
}

fn serialize_table(dim: usize, table: &BTreeMap<String, Vec<f64>>) -> String {
    let mut out = format!("aasmatch-emb v1 {dim} {}\n", table.len());
    for (token, vector) in table {
        out.push_str(&encode_token(token));
        out.push('\t');
        let comps: Vec<String> = vector.iter().map(|&x| format_component(x)).collect();
        out.push_str(&comps.join(" "));
        out.push('\n');
    }
    out
}

fn parse_table(text: &str) -> Result<(usize, BTreeMap<String, Vec<f64>>), SkipgramError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(SkipgramError::VersionMismatch {
        found: String::new(),
    })?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != "aasmatch-emb" || fields[1] != "v1" {
        return Err(SkipgramError::VersionMismatch {
            found: header.to_string(),
        });
    }
    let corrupt = |line: usize, message: String| SkipgramError::Corrupt { line, message };
    let dim: usize = fields[2]
        .parse()
        .map_err(|_| corrupt(1, format!("bad dimension `{}`", fields[2])))?;
    let declared: usize = fields[3]
        .parse()
        .map_err(|_| corrupt(1, format!("bad token count `{}`", fields[3])))?;

    let mut table = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (token_raw, floats) = line
            .split_once('\t')
            .ok_or_else(|| corrupt(line_no, "missing tab separator".to_string()))?;
        let token = percent_decode(token_raw).map_err(|m| corrupt(line_no, m))?;
        let vector: Result<Vec<f64>, SkipgramError> = floats
            .split(' ')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| corrupt(line_no, format!("bad float `{f}`")))
            })
            .collect();
        let vector = vector?;
        if vector.len() != dim {
            return Err(corrupt(
                line_no,
                format!("expected {dim} components, found {}", vector.len()),
            ));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(corrupt(line_no, "non-finite component".to_string()));
        }
        if table.insert(token.clone(), vector).is_some() {
            return Err(corrupt(line_no, format!("duplicate token `{token}`")));
        }
    }
    if table.len() != declared {
        return Err(corrupt(
            1,
            format!("header declares {declared} tokens, file has {}", table.len()),
        ));
    }
    Ok((dim, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn corpus(sentences: &[&[&str]]) -> WalkCorpus {
        WalkCorpus {
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn vocab_counts_tiny_corpus() {
        let v = build_vocab(&corpus(&[&["a", "p", "b"]]), 0).unwrap();
        assert_eq!(v.len(), 3);
        for token in ["a", "p", "b"] {
            assert_eq!(v.count(v.index_of(token).unwrap()), 1);
        }
    }

    #[test]
    fn min_count_filters_to_empty_vocab() {
        let v = build_vocab(&corpus(&[&["a", "p", "b"]]), 2).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            build_vocab(&WalkCorpus::default(), 1),
            Err(SkipgramError::EmptyCorpus)
        ));
    }

    #[test]
    fn counts_match_tally_oracle_on_random_corpus() {
        let mut rng = crate::seed::rng(61);
        let pool = ["a", "b", "c", "d", "e", "f", "g"];
        let mut sentences = Vec::new();
        let mut oracle: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
        for _ in 0..500 {
            let len = rng.gen_range(1..20);
            let mut sentence = Vec::new();
            for _ in 0..len {
                let tok = pool[rng.gen_range(0..pool.len())];
                *oracle.entry(tok).or_insert(0) += 1;
                sentence.push(tok.to_string());
            }
            sentences.push(sentence);
        }
        let v = build_vocab(&WalkCorpus { sentences }, 1).unwrap();
        assert_eq!(v.len(), oracle.len());
        for (tok, count) in oracle {
            assert_eq!(v.count(v.index_of(tok).unwrap()), count, "token {tok}");
        }
    }

    #[test]
    fn noise_distribution_sums_to_one() {
        let v = build_vocab(
            &corpus(&[&["a", "a", "a", "a", "b", "b", "c"]]),
            1,
        )
        .unwrap();
        let probs = v.noise_probabilities();
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        // power 0.75 flattens the raw frequencies: a is 4x as frequent as
        // c but gets less than 4x the mass
        let pa = probs[v.index_of("a").unwrap()];
        let pc = probs[v.index_of("c").unwrap()];
        assert!(pa > pc);
        assert!(pa / pc < 4.0);
        assert!((pa / pc - 4f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn noise_sampling_hits_every_token_and_respects_mass() {
        let v = build_vocab(&corpus(&[&["a", "a", "a", "a", "a", "a", "b", "c"]]), 1).unwrap();
        let mut rng = crate::seed::rng(62);
        let mut hits = vec![0u32; v.len()];
        for _ in 0..30_000 {
            hits[v.sample_noise(rng.gen::<f64>())] += 1;
        }
        assert!(hits.iter().all(|&h| h > 0));
        let probs = v.noise_probabilities();
        for (i, &h) in hits.iter().enumerate() {
            let observed = h as f64 / 30_000.0;
            assert!(
                (observed - probs[i]).abs() < 0.02,
                "token {} observed {observed} expected {}",
                v.token(i),
                probs[i]
            );
        }
    }

    #[test]
    fn quantize_is_idempotent_at_format_precision() {
        let mut rng = crate::seed::rng(63);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-10.0..10.0);
            let q = quantize(x);
            assert_eq!(quantize(q), q);
            assert_eq!(format_component(q).parse::<f64>().unwrap(), q);
        }
    }

    #[test]
    fn table_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let mut input = BTreeMap::new();
        let mut output = BTreeMap::new();
        for (i, tok) in ["alpha", "token with space", "num:e1"].iter().enumerate() {
            input.insert(tok.to_string(), vec![quantize(0.1 * i as f64), quantize(-1.5)]);
            output.insert(tok.to_string(), vec![quantize(2.0), quantize(0.25 * i as f64)]);
        }
        let table = EmbeddingTable::new(2, input, Some(output));

        table.save(&path, false).unwrap();
        let loaded = EmbeddingTable::load(&path).unwrap();
        assert_eq!(loaded.dim(), 2);
        assert_eq!(loaded.get("alpha"), table.get("alpha"));
        assert!(!loaded.has_output_vectors());

        table.save(&path, true).unwrap();
        let loaded = EmbeddingTable::load(&path).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        std::fs::write(&path, "aasmatch-emb v2 4 0\n").unwrap();
        assert!(matches!(
            EmbeddingTable::load(&path),
            Err(SkipgramError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn corrupt_files_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        for (body, expect_line) in [
            ("aasmatch-emb v1 2 1\ntok\t1.0\n", 2),
            ("aasmatch-emb v1 2 1\ntok 1.0 2.0\n", 2),
            ("aasmatch-emb v1 2 1\ntok\tx y\n", 2),
            ("aasmatch-emb v1 2 2\ntok\t1.0 2.0\n", 1),
        ] {
            std::fs::write(&path, body).unwrap();
            match EmbeddingTable::load(&path) {
                Err(SkipgramError::Corrupt { line, .. }) => assert_eq!(line, expect_line),
                other => panic!("expected corrupt error for {body:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn serialized_tokens_are_sorted() {
        let mut input = BTreeMap::new();
        input.insert("zebra".to_string(), vec![0.0]);
        input.insert("alpha".to_string(), vec![0.0]);
        let text = serialize_table(1, &input);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("alpha"));
        assert!(lines[2].starts_with("zebra"));
    }
}
