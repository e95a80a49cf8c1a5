//! Skip-gram with negative sampling.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooc::{skipgram_stream, subsample};
use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};
use crate::store::{EmbeddingSpace, ModelKind, Provenance};

/// Exponent applied to unigram counts in the noise distribution.
pub const NOISE_POWER: f64 = 0.75;

/// Dot products are clipped to this magnitude before the sigmoid.
pub const MAX_LOGIT: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
    /// Frequent-word subsampling threshold; off when `None`.
    pub subsample: Option<f64>,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            seed: 42,
            subsample: None,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(Error::InvalidConfig("dim, window and negatives must be at least 1".into()));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return Err(Error::InvalidConfig("learning rates must satisfy lr_start >= lr_end > 0".into()));
        }
        Ok(())
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "dim={} window={} negatives={} epochs={} lr={}->{} noise_power={} seed={} vectors=input",
            self.dim, self.window, self.negatives, self.epochs, self.lr_start, self.lr_end, NOISE_POWER, self.seed
        );
        if let Some(t) = self.subsample {
            s.push_str(&format!(" subsample={}", t));
        }
        s
    }
}

/// Sampler over term ids with `p(w)` proportional to `freq(w)^0.75`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(freqs: &[u64]) -> Result<Self> {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = freqs
            .iter()
            .map(|&f| {
                acc += (f as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        if acc.is_nan() || acc <= 0.0 {
            return Err(Error::EmptyCorpus);
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(NoiseTable { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, w: usize) -> f64 {
        let prev = if w == 0 { 0.0 } else { self.cumulative[w - 1] };
        self.cumulative[w] - prev
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// Update one output vector against the center vector.
///
/// `label` is 1 for the observed context and 0 for a negative. The center
/// gradient step is accumulated into `center_delta` (computed from the output
/// vector before its own update). Returns this target's loss term.
fn update_output<F: Float>(center: &[F], output: &mut [F], label: F, lr: F, center_delta: &mut [F]) -> F {
    let limit = F::from(MAX_LOGIT).unwrap();
    let x = center
        .iter()
        .zip(output.iter())
        .fold(F::zero(), |acc, (&a, &b)| acc + a * b)
        .max(-limit)
        .min(limit);
    // -ln sigma(x) for positives, -ln sigma(-x) for negatives
    let signed = if label > F::zero() { x } else { -x };
    let loss = (F::one() + (-signed).exp()).ln();
    let g = (label - sigmoid(x)) * lr;
    for ((delta, out), &c) in center_delta.iter_mut().zip(output.iter_mut()).zip(center) {
        *delta = *delta + g * *out;
        *out = *out + g * c;
    }
    loss
}

/// One SGD step on `-ln sigma(u_o . v_c) - sum_i ln sigma(-u_i . v_c)`.
///
/// Updates the center (input) vector and the context and negative (output)
/// vectors in place; returns the loss before the step.
pub fn sgns_step<F: Float>(center: &mut [F], context: &mut [F], negatives: &mut [&mut [F]], lr: F) -> F {
    let mut delta = vec![F::zero(); center.len()];
    let mut loss = update_output(center, context, F::one(), lr, &mut delta);
    for neg in negatives.iter_mut() {
        loss = loss + update_output(center, neg, F::zero(), lr, &mut delta);
    }
    for (c, d) in center.iter_mut().zip(&delta) {
        *c = *c + *d;
    }
    loss
}

/// Expected number of (center, context) pairs per pass with window shrinking.
fn expected_pairs(docs: &[Document], window: usize) -> f64 {
    let mut total = 0.0;
    for doc in docs {
        let len = doc.len();
        for i in 0..len {
            let mut sum = 0usize;
            for b in 1..=window {
                sum += i.min(b) + (len - 1 - i).min(b);
            }
            total += sum as f64 / window as f64;
        }
    }
    total
}

/// Per-epoch statistics from a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// Mean per-pair loss of each epoch.
    pub epoch_loss: Vec<f64>,
    pub pairs: u64,
}

// RNG streams for the independent random decisions made during training.
const STREAM_INIT: u64 = 0;
const STREAM_WINDOW: u64 = 1;
const STREAM_NEGATIVE: u64 = 2;
const STREAM_SUBSAMPLE: u64 = 3;

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn train_sgns(docs: &[Document], vocab: &Vocabulary, cfg: &SgnsConfig) -> Result<EmbeddingSpace> {
    train_sgns_with_stats(docs, vocab, cfg).map(|(space, _)| space)
}

/// Single-threaded, deterministic trainer. Returns the input vectors.
pub fn train_sgns_with_stats(
    docs: &[Document],
    vocab: &Vocabulary,
    cfg: &SgnsConfig,
) -> Result<(EmbeddingSpace, TrainStats)> {
    cfg.validate()?;
    if vocab.is_empty() || docs.iter().all(Document::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let n_terms = vocab.len();
    let dim = cfg.dim;

    let mut init_rng = rng_stream(cfg.seed, STREAM_INIT);
    let bound = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..n_terms * dim)
        .map(|_| init_rng.random_range(-bound..bound))
        .collect();
    let mut output = vec![0.0f32; n_terms * dim];

    let noise = NoiseTable::new(vocab.freqs())?;
    let mut window_rng = rng_stream(cfg.seed, STREAM_WINDOW);
    let mut neg_rng = rng_stream(cfg.seed, STREAM_NEGATIVE);
    let mut sub_rng = rng_stream(cfg.seed, STREAM_SUBSAMPLE);

    let total_pairs = (expected_pairs(docs, cfg.window) * cfg.epochs as f64).max(1.0);
    let mut processed = 0u64;
    let mut stats = TrainStats::default();
    let mut delta = vec![0.0f32; dim];

    for _ in 0..cfg.epochs {
        let sampled;
        let epoch_docs: &[Document] = match cfg.subsample {
            Some(t) => {
                sampled = docs
                    .iter()
                    .map(|d| Document {
                        doc_id: d.doc_id,
                        token_ids: subsample(&d.token_ids, vocab, t, &mut sub_rng),
                    })
                    .collect::<Vec<_>>();
                &sampled
            }
            None => docs,
        };

        let mut loss_sum = 0.0f64;
        let mut count = 0u64;
        for pair in skipgram_stream(epoch_docs, cfg.window, &mut window_rng) {
            let progress = processed as f64 / total_pairs;
            let lr = (cfg.lr_start - (cfg.lr_start - cfg.lr_end) * progress).max(cfg.lr_end) as f32;

            let center = &mut input[pair.center * dim..(pair.center + 1) * dim];
            delta.fill(0.0);
            let ctx = pair.context;
            let mut loss = update_output(center, &mut output[ctx * dim..(ctx + 1) * dim], 1.0, lr, &mut delta);
            for _ in 0..cfg.negatives {
                let neg = loop {
                    let n = noise.sample(&mut neg_rng);
                    if n != ctx || n_terms == 1 {
                        break n;
                    }
                };
                loss += update_output(center, &mut output[neg * dim..(neg + 1) * dim], 0.0, lr, &mut delta);
            }
            for (c, d) in center.iter_mut().zip(&delta) {
                *c += d;
            }

            loss_sum += loss as f64;
            count += 1;
            processed += 1;
        }
        stats.epoch_loss.push(if count > 0 { loss_sum / count as f64 } else { 0.0 });
    }
    stats.pairs = processed;

    let space = EmbeddingSpace::new(
        vocab.clone(),
        dim,
        input,
        Provenance {
            kind: ModelKind::Sgns,
            config: cfg.summary(),
        },
    )?;
    Ok((space, stats))
}
