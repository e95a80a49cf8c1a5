//! Latent semantic analysis: term vectors from a truncated randomized SVD of
//! the term-document matrix.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cooc::{SparseCountMatrix, Weighting};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::store::{EmbeddingSpace, ModelKind, Provenance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LsaConfig {
    pub rank: usize,
    pub power_iters: usize,
    pub oversample: usize,
    pub seed: u64,
    /// Reweight raw counts by TF-IDF before factorizing.
    pub tfidf: bool,
}

impl Default for LsaConfig {
    fn default() -> Self {
        LsaConfig {
            rank: 300,
            power_iters: 4,
            oversample: 10,
            seed: 42,
            tfidf: true,
        }
    }
}

impl LsaConfig {
    fn summary(&self, weighting: Weighting) -> String {
        format!(
            "rank={} power_iters={} oversample={} seed={} weighting={:?}",
            self.rank, self.power_iters, self.oversample, self.seed, weighting
        )
    }
}

/// A matrix that can be multiplied from both sides, which is all the
/// randomized range finder needs.
pub trait LinearOperator: Sync {
    fn shape(&self) -> (usize, usize);

    /// `A * x`
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;

    /// `A^T * y`
    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn shape(&self) -> (usize, usize) {
        self.shape()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }

    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(y)
    }
}

impl LinearOperator for SparseCountMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let width = x.ncols();
        // Each output row is reduced in a fixed order, so the result does not
        // depend on how rows are spread across threads.
        let rows: Vec<Vec<f64>> = (0..self.n_rows())
            .into_par_iter()
            .map(|r| {
                let (cols, vals) = self.row(r);
                (0..width)
                    .map(|j| cols.iter().zip(vals).map(|(&c, &v)| v * x[(c, j)]).sum())
                    .collect()
            })
            .collect();
        DMatrix::from_fn(self.n_rows(), width, |r, j| rows[r][j])
    }

    fn apply_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_cols(), y.ncols());
        for r in 0..self.n_rows() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for j in 0..y.ncols() {
                    out[(c, j)] += v * y[(r, j)];
                }
            }
        }
        out
    }
}

/// `A ~= U diag(s) V^T` with `k` components, singular values descending.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Randomized truncated SVD: Gaussian sketch of width `rank + oversample`
/// (capped at the smaller matrix side), `power_iters` rounds of subspace
/// iteration with re-orthonormalization after every product, then an exact
/// SVD of the small projected matrix.
pub fn randomized_svd<A: LinearOperator>(
    a: &A,
    rank: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<TruncatedSvd> {
    let (m, n) = a.shape();
    let max = m.min(n);
    if max == 0 {
        return Err(Error::EmptyCorpus);
    }
    if rank == 0 {
        return Err(Error::InvalidConfig("rank must be at least 1".into()));
    }
    if rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    let width = (rank + oversample).min(max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sketch = DMatrix::from_fn(n, width, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormalize(a.apply(&sketch));
    for _ in 0..power_iters {
        let z = orthonormalize(a.apply_transpose(&q));
        q = orthonormalize(a.apply(&z));
    }

    // B = Q^T A, computed as (A^T Q)^T
    let b = a.apply_transpose(&q).transpose();
    let svd = b.svd(true, true);
    let u_small = svd.u.expect("requested U");
    let v_t_small = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    order.truncate(rank);

    let u_small = DMatrix::from_fn(u_small.nrows(), rank, |r, c| u_small[(r, order[c])]);
    let v_t = DMatrix::from_fn(rank, n, |r, c| v_t_small[(order[r], c)]);
    let singular_values = DVector::from_fn(rank, |i, _| svd.singular_values[order[i]].max(0.0));

    Ok(TruncatedSvd {
        u: q * u_small,
        singular_values,
        v_t,
    })
}

/// Train an LSA space. Row `t` of `U_k Sigma_k` becomes the vector of term `t`.
///
/// Terms whose (weighted) matrix row is entirely zero, e.g. a term present in
/// every document under TF-IDF, carry no signal and are dropped.
pub fn train_lsa(m: &SparseCountMatrix, vocab: &Vocabulary, cfg: &LsaConfig) -> Result<EmbeddingSpace> {
    if m.nnz() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if m.n_rows() != vocab.len() {
        return Err(Error::InvalidConfig(format!(
            "matrix has {} rows but vocabulary has {} terms",
            m.n_rows(),
            vocab.len()
        )));
    }
    let max = m.n_rows().min(m.n_cols());
    if cfg.rank == 0 || cfg.rank > max {
        return Err(Error::RankTooLarge { rank: cfg.rank, max });
    }

    let weighted;
    let m = if cfg.tfidf && m.weighting() == Weighting::RawCount {
        weighted = m.apply_tfidf()?;
        &weighted
    } else {
        m
    };

    let svd = randomized_svd(m, cfg.rank, cfg.oversample, cfg.power_iters, cfg.seed)?;
    let k = cfg.rank;

    let mut keep = Vec::with_capacity(m.n_rows());
    let mut data = Vec::with_capacity(m.n_rows() * k);
    for t in 0..m.n_rows() {
        if m.row(t).1.iter().all(|&v| v == 0.0) {
            continue;
        }
        keep.push(t);
        data.extend((0..k).map(|j| (svd.u[(t, j)] * svd.singular_values[j]) as f32));
    }
    if keep.len() < m.n_rows() {
        warn!("LSA: dropped {} terms with all-zero weighted rows", m.n_rows() - keep.len());
    }
    if keep.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let space = EmbeddingSpace::new(
        vocab.subset(&keep),
        k,
        data,
        Provenance {
            kind: ModelKind::Lsa,
            config: cfg.summary(m.weighting()),
        },
    )?;
    let (space, dropped) = space.drop_zero_rows();
    if !dropped.is_empty() {
        warn!("LSA: dropped {} terms with zero vectors", dropped.len());
    }
    Ok(space)
}
