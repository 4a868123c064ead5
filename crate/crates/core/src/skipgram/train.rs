//! Trainer and gradient checker for the negative-sampling objective.
//!
//! For a (center, context) pair with negatives N the per-pair loss is
//!
//! `L = -log sigma(u_ctx . v) - sum over n in N of log sigma(-u_n . v)`
//!
//! minimized by SGD on the center's input vector `v` and the context and
//! negative output vectors `u`. The learning rate decays linearly with the
//! number of processed center tokens down to a floor.

use std::collections::BTreeMap;

use rand::Rng;

use super::{
    build_vocab, quantize, EmbeddingTable, Hyperparams, SkipgramError, Vocab,
};
use crate::seed;
use crate::walks::WalkCorpus;

pub struct TrainOutput {
    pub table: EmbeddingTable,
    /// Mean per-pair loss for each epoch, in order.
    pub epoch_losses: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log(sigmoid(x)) computed without overflowing exp for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(1.0 + (-x).exp()).ln()
    } else {
        x - (1.0 + x.exp()).ln()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Seeded uniform init in [-0.5/dim, 0.5/dim), the conventional scale for
/// input vectors; output vectors start at zero.
pub(crate) fn initial_input(vocab: &Vocab, hp: &Hyperparams) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed::derive(hp.seed, "skipgram-init"));
    (0..vocab.len())
        .map(|_| {
            (0..hp.dim)
                .map(|_| (rng.gen::<f64>() - 0.5) / hp.dim as f64)
                .collect()
        })
        .collect()
}

/// Train embeddings over the corpus. Deterministic: a fixed pair order and
/// a seeded RNG for negative draws make equal inputs yield equal tables.
pub fn train(corpus: &WalkCorpus, hp: &Hyperparams) -> Result<TrainOutput, SkipgramError> {
    let hp = hp.clone().validated()?;
    let vocab = build_vocab(corpus, hp.min_count)?;
    if vocab.is_empty() {
        return Err(SkipgramError::EmptyVocab);
    }

    // Sentences as index sequences; out-of-vocabulary tokens drop out.
    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index_of(t)).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    let tokens_per_epoch: usize = sentences.iter().map(Vec::len).sum();

    let mut input = initial_input(&vocab, &hp);
    let mut output = vec![vec![0.0; hp.dim]; vocab.len()];
    let mut rng = seed::rng(seed::derive(hp.seed, "skipgram-train"));

    let total_steps = (hp.epochs * tokens_per_epoch).max(1) as f64;
    let mut step = 0usize;
    let mut epoch_losses = Vec::with_capacity(hp.epochs);
    let mut grad_v = vec![0.0; hp.dim];

    for epoch in 0..hp.epochs {
        let mut loss_sum = 0.0;
        let mut pair_count = 0u64;
        for sentence in &sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let alpha = (hp.learning_rate * (1.0 - step as f64 / total_steps))
                    .max(hp.learning_rate_floor);
                step += 1;
                let lo = pos.saturating_sub(hp.window);
                let hi = (pos + hp.window).min(sentence.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = sentence[ctx_pos];
                    grad_v.iter_mut().for_each(|g| *g = 0.0);

                    // Positive term.
                    let score = sigmoid(dot(&output[context], &input[center]));
                    loss_sum -= log_sigmoid(dot(&output[context], &input[center]));
                    let g = score - 1.0;
                    for d in 0..hp.dim {
                        grad_v[d] += g * output[context][d];
                        output[context][d] -= alpha * g * input[center][d];
                    }

                    // Negatives; a draw that hits the context token is
                    // skipped rather than redrawn, as in the reference
                    // implementations.
                    for _ in 0..hp.negatives {
                        let neg = vocab.sample_noise(rng.gen::<f64>());
                        if neg == context {
                            continue;
                        }
                        let raw = dot(&output[neg], &input[center]);
                        loss_sum -= log_sigmoid(-raw);
                        let g = sigmoid(raw);
                        for d in 0..hp.dim {
                            grad_v[d] += g * output[neg][d];
                            output[neg][d] -= alpha * g * input[center][d];
                        }
                    }

                    for d in 0..hp.dim {
                        input[center][d] -= alpha * grad_v[d];
                    }
                    pair_count += 1;
                }
            }
        }
        let mean = if pair_count == 0 {
            0.0
        } else {
            loss_sum / pair_count as f64
        };
        if !mean.is_finite() {
            return Err(SkipgramError::NonfiniteLoss { epoch });
        }
        epoch_losses.push(mean);
    }

    // Snap to file precision so the in-memory table equals its saved form.
    let to_map = |vectors: Vec<Vec<f64>>| -> BTreeMap<String, Vec<f64>> {
        vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                (
                    vocab.token(i).to_string(),
                    v.into_iter().map(quantize).collect(),
                )
            })
            .collect()
    };
    Ok(TrainOutput {
        table: EmbeddingTable::new(hp.dim, to_map(input), Some(to_map(output))),
        epoch_losses,
    })
}

pub struct GradientCheckReport {
    pub trials: usize,
    /// Worst relative error between analytic and central-difference
    /// gradients over all trials and components.
    pub max_relative_error: f64,
}

/// Loss of one pair as a function of the concatenated free parameters
/// [v, u_ctx, u_neg1, ..]. Used only by the checker.
fn pair_loss(params: &[f64], dim: usize, negatives: usize) -> f64 {
    let v = &params[0..dim];
    let ctx = &params[dim..2 * dim];
    let mut loss = -log_sigmoid(dot(ctx, v));
    for n in 0..negatives {
        let u = &params[(2 + n) * dim..(3 + n) * dim];
        loss -= log_sigmoid(-dot(u, v));
    }
    loss
}

fn pair_gradient(params: &[f64], dim: usize, negatives: usize) -> Vec<f64> {
    let v = &params[0..dim];
    let ctx = &params[dim..2 * dim];
    let mut grad = vec![0.0; params.len()];
    let g_pos = sigmoid(dot(ctx, v)) - 1.0;
    for d in 0..dim {
        grad[d] += g_pos * ctx[d];
        grad[dim + d] += g_pos * v[d];
    }
    for n in 0..negatives {
        let base = (2 + n) * dim;
        let u = &params[base..base + dim];
        let g_neg = sigmoid(dot(u, v));
        for d in 0..dim {
            grad[d] += g_neg * u[d];
            grad[base + d] += g_neg * v[d];
        }
    }
    grad
}

fn check_at(params: &[f64], dim: usize, negatives: usize, flip_signs: bool) -> f64 {
    let h = 1e-5;
    let mut analytic = pair_gradient(params, dim, negatives);
    if flip_signs {
        for g in &mut analytic {
            *g = -*g;
        }
    }
    let mut worst = 0.0f64;
    let mut probe = params.to_vec();
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = pair_loss(&probe, dim, negatives);
        probe[i] = orig - h;
        let minus = pair_loss(&probe, dim, negatives);
        probe[i] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

fn run_check(hp: &Hyperparams, trials: usize, flip_signs: bool) -> GradientCheckReport {
    let mut rng = seed::rng(seed::derive(hp.seed, "gradient-check"));
    let dim = hp.dim.max(1);
    let negatives = hp.negatives.max(1);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let params: Vec<f64> = (0..(2 + negatives) * dim)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        worst = worst.max(check_at(&params, dim, negatives, flip_signs));
    }
    GradientCheckReport {
        trials,
        max_relative_error: worst,
    }
}

/// Compare analytic gradients of the pair loss against central finite
/// differences at random parameter points.
pub fn gradient_check(hp: &Hyperparams, trials: usize) -> GradientCheckReport {
    run_check(hp, trials, false)
}

/// Same check with the analytic gradient's signs flipped; a sound checker
/// must report a large error here.
pub fn gradient_check_sign_flipped(hp: &Hyperparams, trials: usize) -> GradientCheckReport {
    run_check(hp, trials, true)
}
