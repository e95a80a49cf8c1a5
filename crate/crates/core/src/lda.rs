//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//!
//! The exported term vector for word `w` is the smoothed topic distribution
//! `p(k | w) = (n_wk + beta) / (n_w + K beta)`, which is comparable across
//! terms of very different frequency.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};
use crate::store::{EmbeddingSpace, ModelKind, Provenance};

#[derive(Clone, Debug, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 300,
            alpha: None,
            beta: 0.01,
            sweeps: 200,
            seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidConfig("topics must be at least 1".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig("sweeps must be at least 1".into()));
        }
        if self.alpha().is_nan() || self.alpha() <= 0.0 || self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidConfig("alpha and beta must be positive".into()));
        }
        Ok(())
    }

    fn summary(&self) -> String {
        format!(
            "topics={} alpha={} beta={} sweeps={} seed={} vector=p(topic|word)",
            self.topics,
            self.alpha(),
            self.beta,
            self.sweeps,
            self.seed
        )
    }
}

/// Topic assignments and the count tables derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct LdaState {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    /// Topic of every token, per document.
    z: Vec<Vec<usize>>,
    /// Documents x topics.
    n_dk: Vec<u32>,
    /// Terms x topics.
    n_wk: Vec<u32>,
    n_k: Vec<u32>,
}

impl LdaState {
    /// Assign every token a uniformly random topic.
    pub fn init_random<R: Rng>(
        docs: &[Document],
        vocab_size: usize,
        topics: usize,
        alpha: f64,
        beta: f64,
        rng: &mut R,
    ) -> Self {
        let z = docs
            .iter()
            .map(|d| d.token_ids.iter().map(|_| rng.random_range(0..topics)).collect())
            .collect();
        Self::from_assignments(docs, vocab_size, topics, alpha, beta, z)
    }

    /// Build the count tables from explicit assignments.
    pub fn from_assignments(
        docs: &[Document],
        vocab_size: usize,
        topics: usize,
        alpha: f64,
        beta: f64,
        z: Vec<Vec<usize>>,
    ) -> Self {
        assert_eq!(docs.len(), z.len(), "one assignment vector per document");
        let mut state = LdaState {
            topics,
            vocab_size,
            alpha,
            beta,
            n_dk: vec![0; docs.len() * topics],
            n_wk: vec![0; vocab_size * topics],
            n_k: vec![0; topics],
            z,
        };
        for (d, doc) in docs.iter().enumerate() {
            assert_eq!(doc.len(), state.z[d].len(), "assignment length mismatch");
            for (&w, &k) in doc.token_ids.iter().zip(&state.z[d]) {
                assert!(w < vocab_size && k < topics);
                state.n_dk[d * topics + k] += 1;
                state.n_wk[w * topics + k] += 1;
                state.n_k[k] += 1;
            }
        }
        state
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn doc_topic(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.topics + k]
    }

    pub fn word_topic(&self, w: usize, k: usize) -> u32 {
        self.n_wk[w * self.topics + k]
    }

    pub fn topic_total(&self, k: usize) -> u32 {
        self.n_k[k]
    }

    /// Recompute every count table from the assignments and compare.
    pub fn counts_consistent(&self, docs: &[Document]) -> bool {
        let fresh = Self::from_assignments(
            docs,
            self.vocab_size,
            self.topics,
            self.alpha,
            self.beta,
            self.z.clone(),
        );
        let doc_sums_ok = docs.iter().enumerate().all(|(d, doc)| {
            (0..self.topics).map(|k| self.doc_topic(d, k) as usize).sum::<usize>() == doc.len()
        });
        let topic_sums_ok = (0..self.topics).all(|k| {
            (0..self.vocab_size).map(|w| self.word_topic(w, k)).sum::<u32>() == self.n_k[k]
        });
        fresh.n_dk == self.n_dk && fresh.n_wk == self.n_wk && fresh.n_k == self.n_k && doc_sums_ok && topic_sums_ok
    }

    /// One full sweep in token order: each token is removed from the counts,
    /// resampled from its full conditional, and added back.
    pub fn gibbs_sweep<R: Rng>(&mut self, docs: &[Document], rng: &mut R) {
        let k_max = self.topics;
        if k_max == 1 {
            return;
        }
        let v_beta = self.vocab_size as f64 * self.beta;
        let mut cumulative = vec![0.0f64; k_max];
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.token_ids.iter().enumerate() {
                let old = self.z[d][i];
                self.n_dk[d * k_max + old] -= 1;
                self.n_wk[w * k_max + old] -= 1;
                self.n_k[old] -= 1;

                let mut total = 0.0;
                for (k, slot) in cumulative.iter_mut().enumerate() {
                    total += (self.n_dk[d * k_max + k] as f64 + self.alpha)
                        * (self.n_wk[w * k_max + k] as f64 + self.beta)
                        / (self.n_k[k] as f64 + v_beta);
                    *slot = total;
                }
                let u = rng.random::<f64>() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k_max - 1);

                self.z[d][i] = new;
                self.n_dk[d * k_max + new] += 1;
                self.n_wk[w * k_max + new] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    /// Collapsed joint log-likelihood `ln p(w, z | alpha, beta)`.
    pub fn log_likelihood(&self, docs: &[Document]) -> f64 {
        let k_max = self.topics;
        let v_beta = self.vocab_size as f64 * self.beta;
        let k_alpha = k_max as f64 * self.alpha;
        let lg_beta = ln_gamma(self.beta);
        let lg_alpha = ln_gamma(self.alpha);

        let mut ll = 0.0;
        for k in 0..k_max {
            ll += ln_gamma(v_beta) - ln_gamma(self.n_k[k] as f64 + v_beta);
            for w in 0..self.vocab_size {
                let n = self.n_wk[w * k_max + k];
                if n > 0 {
                    ll += ln_gamma(n as f64 + self.beta) - lg_beta;
                }
            }
        }
        for (d, doc) in docs.iter().enumerate() {
            ll += ln_gamma(k_alpha) - ln_gamma(doc.len() as f64 + k_alpha);
            for k in 0..k_max {
                let n = self.n_dk[d * k_max + k];
                if n > 0 {
                    ll += ln_gamma(n as f64 + self.alpha) - lg_alpha;
                }
            }
        }
        ll
    }

    /// `(n_wk + beta) / (n_w + K beta)` over topics, normalized to sum 1.
    pub fn term_distribution(&self, w: usize) -> Vec<f64> {
        let k_max = self.topics;
        let row = &self.n_wk[w * k_max..(w + 1) * k_max];
        let n_w: u32 = row.iter().sum();
        let denom = n_w as f64 + k_max as f64 * self.beta;
        let mut dist: Vec<f64> = row.iter().map(|&n| (n as f64 + self.beta) / denom).collect();
        let sum: f64 = dist.iter().sum();
        for p in &mut dist {
            *p /= sum;
        }
        dist
    }

    pub fn argmax_topic(&self, w: usize) -> usize {
        let row = &self.n_wk[w * self.topics..(w + 1) * self.topics];
        let mut best = 0;
        for (k, &n) in row.iter().enumerate() {
            if n > row[best] {
                best = k;
            }
        }
        best
    }
}

/// Run the sampler, calling `observe` after every sweep (1-based).
pub fn run_gibbs<F>(docs: &[Document], vocab_size: usize, cfg: &LdaConfig, mut observe: F) -> Result<LdaState>
where
    F: FnMut(usize, &LdaState),
{
    cfg.validate()?;
    if docs.iter().all(Document::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = LdaState::init_random(docs, vocab_size, cfg.topics, cfg.alpha(), cfg.beta, &mut rng);
    for sweep in 1..=cfg.sweeps {
        state.gibbs_sweep(docs, &mut rng);
        observe(sweep, &state);
    }
    Ok(state)
}

pub fn train_lda(docs: &[Document], vocab: &Vocabulary, cfg: &LdaConfig) -> Result<EmbeddingSpace> {
    let state = run_gibbs(docs, vocab.len(), cfg, |_, _| {})?;
    space_from_state(&state, vocab, cfg)
}

pub fn space_from_state(state: &LdaState, vocab: &Vocabulary, cfg: &LdaConfig) -> Result<EmbeddingSpace> {
    let data = (0..vocab.len())
        .flat_map(|w| state.term_distribution(w))
        .map(|p| p as f32)
        .collect();
    EmbeddingSpace::new(
        vocab.clone(),
        state.topics(),
        data,
        Provenance {
            kind: ModelKind::Lda,
            config: cfg.summary(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: usize, ids: &[usize]) -> Document {
        Document {
            doc_id: id,
            token_ids: ids.to_vec(),
        }
    }

    #[test]
    fn single_topic_sweep_is_a_noop() {
        let docs = [doc(0, &[0, 1, 2, 1]), doc(1, &[2, 2])];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = LdaState::init_random(&docs, 3, 1, 0.5, 0.01, &mut rng);
        let before = state.clone();
        state.gibbs_sweep(&docs, &mut rng);
        assert_eq!(state, before);
        assert!(state.assignments().iter().flatten().all(|&k| k == 0));
    }

    #[test]
    fn two_token_hand_trace() {
        // corpus: one document [w0, w1], K = 2, V = 2
        let docs = [doc(0, &[0, 1])];
        let (alpha, beta) = (0.5, 0.1);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = LdaState::init_random(&docs, 2, 2, alpha, beta, &mut rng);
            state.gibbs_sweep(&docs, &mut rng);

            // Trace the same draws by hand.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut z = [rng.random_range(0..2usize), rng.random_range(0..2usize)];
            for i in 0..2 {
                let other = z[1 - i];
                // counts with token i removed: only the other token remains.
                // Each word occurs once, so n_wk for word i is zero in both topics.
                let p = |k: usize| {
                    let n_dk = (other == k) as u8 as f64;
                    let n_k = (other == k) as u8 as f64;
                    (n_dk + alpha) * (0.0 + beta) / (n_k + 2.0 * beta)
                };
                let (p0, p1) = (p(0), p(1));
                let u = rng.random::<f64>() * (p0 + p1);
                z[i] = if u < p0 { 0 } else { 1 };
            }
            assert_eq!(state.assignments()[0], z, "seed {}", seed);
        }
    }

    #[test]
    fn counts_conserved_every_sweep() {
        let docs = [doc(0, &[0, 1, 2, 3, 0]), doc(1, &[4, 4, 1]), doc(2, &[]), doc(3, &[3, 2, 1, 0, 4, 4])];
        let cfg = LdaConfig {
            topics: 3,
            alpha: Some(0.2),
            beta: 0.05,
            sweeps: 25,
            seed: 11,
        };
        run_gibbs(&docs, 5, &cfg, |_, s| assert!(s.counts_consistent(&docs))).unwrap();
    }

    #[test]
    fn term_vectors_are_distributions() {
        let docs = [doc(0, &[0, 1, 1, 2]), doc(1, &[2, 3, 3, 3])];
        let vocab = Vocabulary::from_tokens(["a", "b", "c", "d", "unused"]).unwrap();
        let cfg = LdaConfig {
            topics: 4,
            sweeps: 10,
            ..Default::default()
        };
        let state = run_gibbs(&docs, vocab.len(), &cfg, |_, _| {}).unwrap();
        for w in 0..vocab.len() {
            let dist = state.term_distribution(w);
            assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(dist.iter().all(|&p| p >= 0.0));
        }
        let space = train_lda(&docs, &vocab, &cfg).unwrap();
        assert_eq!(space.dim(), 4);
        for w in 0..space.len() {
            let s: f64 = space.vector(w).iter().map(|&x| x as f64).sum();
            assert!((s - 1.0).abs() < 1e-6);
        }
        // a term that never occurs gets the uniform distribution
        assert!(space.vector(4).iter().all(|&p| (p - 0.25).abs() < 1e-7));
    }

    #[test]
    fn deterministic_for_seed() {
        let docs = [doc(0, &[0, 1, 2, 0, 1]), doc(1, &[2, 3, 3])];
        let cfg = LdaConfig {
            topics: 3,
            sweeps: 20,
            ..Default::default()
        };
        let a = run_gibbs(&docs, 4, &cfg, |_, _| {}).unwrap();
        let b = run_gibbs(&docs, 4, &cfg, |_, _| {}).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let cfg = LdaConfig::default();
        assert!(matches!(run_gibbs(&[doc(0, &[])], 1, &cfg, |_, _| {}), Err(Error::EmptyCorpus)));
        let bad = LdaConfig {
            topics: 0,
            ..Default::default()
        };
        assert!(run_gibbs(&[doc(0, &[0])], 1, &bad, |_, _| {}).is_err());
    }
}
