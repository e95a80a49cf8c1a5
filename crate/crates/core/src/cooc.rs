//! Sparse count structures consumed by the trainers: a CSR term-document
//! matrix for LSA and a skip-gram pair stream for SGNS.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    RawCount,
    TfIdf,
}

/// Term x document matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCountMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    weighting: Weighting,
}

impl SparseCountMatrix {
    /// Count term occurrences per document. Entry `(t, d)` is the number of
    /// times term `t` occurs in the `d`-th document of `docs`.
    pub fn build_term_doc(docs: &[Document], vocab: &Vocabulary) -> Result<Self> {
        let n_rows = vocab.len();
        let n_cols = docs.len();
        if docs.iter().all(Document::is_empty) {
            return Err(Error::EmptyCorpus);
        }

        // Per-row (doc, count) lists; documents are visited in order so
        // columns come out sorted within each row.
        let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n_rows];
        let mut scratch: Vec<usize> = Vec::new();
        for (d, doc) in docs.iter().enumerate() {
            scratch.clear();
            scratch.extend_from_slice(&doc.token_ids);
            scratch.sort_unstable();
            for run in scratch.chunk_by(|a, b| a == b) {
                let t = run[0];
                assert!(t < n_rows, "token id {} out of vocabulary range", t);
                rows[t].push((d, run.len() as u64));
            }
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (d, c) in row {
                col_idx.push(d);
                values.push(c as f64);
            }
            row_ptr.push(col_idx.len());
        }

        Ok(SparseCountMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            weighting: Weighting::RawCount,
        })
    }

    /// Build directly from triplets `(row, col, value)`. Duplicate positions
    /// are summed; explicit zeros are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
        weighting: Weighting,
    ) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({}, {}) out of bounds", r, c);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = SparseCountMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            weighting,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    /// Reweight each entry by `ln(D / df(t))`.
    ///
    /// The sparsity pattern is left untouched, so a term occurring in every
    /// document keeps explicit zero entries.
    pub fn apply_tfidf(&self) -> Result<Self> {
        if self.weighting != Weighting::RawCount {
            return Err(Error::AlreadyWeighted);
        }
        let n_docs = self.n_cols as f64;
        let mut out = self.clone();
        for t in 0..self.n_rows {
            let span = self.row_ptr[t]..self.row_ptr[t + 1];
            let df = span.len();
            if df == 0 {
                continue;
            }
            let idf = (n_docs / df as f64).ln();
            for v in &mut out.values[span] {
                *v *= idf;
            }
        }
        out.weighting = Weighting::TfIdf;
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(i) => vals[i],
            Err(_) => 0.0,
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (&c, &v) in self.col_idx.iter().zip(&self.values) {
            sums[c] += v;
        }
        sums
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SkipGramPair {
    pub center: usize,
    pub context: usize,
}

/// Iterator over skip-gram pairs of a document sequence.
///
/// With a random generator attached, each position draws its effective
/// window uniformly from `1..=window`; without one the full window is used.
pub struct SkipGrams<'a, R> {
    docs: &'a [Document],
    window: usize,
    rng: Option<&'a mut R>,
    doc: usize,
    pos: usize,
    buf: Vec<SkipGramPair>,
    next: usize,
}

impl<R: Rng> Iterator for SkipGrams<'_, R> {
    type Item = SkipGramPair;

    fn next(&mut self) -> Option<SkipGramPair> {
        loop {
            if self.next < self.buf.len() {
                self.next += 1;
                return Some(self.buf[self.next - 1]);
            }
            let doc = self.docs.get(self.doc)?;
            if self.pos >= doc.token_ids.len() {
                self.doc += 1;
                self.pos = 0;
                continue;
            }
            self.buf.clear();
            self.next = 0;
            let span = match self.rng.as_deref_mut() {
                Some(rng) => rng.random_range(1..=self.window),
                None => self.window,
            };
            window_pairs(&doc.token_ids, self.pos, span, &mut self.buf);
            self.pos += 1;
        }
    }
}

/// Pairs centered on `tokens[pos]` with every token at distance `1..=span`,
/// in increasing position order.
pub(crate) fn window_pairs(tokens: &[usize], pos: usize, span: usize, out: &mut Vec<SkipGramPair>) {
    let lo = pos.saturating_sub(span);
    let hi = (pos + span).min(tokens.len() - 1);
    for j in lo..=hi {
        if j != pos {
            out.push(SkipGramPair {
                center: tokens[pos],
                context: tokens[j],
            });
        }
    }
}

/// Skip-gram pairs with dynamic window shrinking, deterministic for a seeded `rng`.
pub fn skipgram_stream<'a, R: Rng>(
    docs: &'a [Document],
    window: usize,
    rng: &'a mut R,
) -> SkipGrams<'a, R> {
    assert!(window >= 1, "window must be at least 1");
    SkipGrams {
        docs,
        window,
        rng: Some(rng),
        doc: 0,
        pos: 0,
        buf: Vec::new(),
        next: 0,
    }
}

/// Skip-gram pairs with the full window at every position.
pub fn skipgram_fixed(docs: &[Document], window: usize) -> SkipGrams<'_, rand::rngs::StdRng> {
    assert!(window >= 1, "window must be at least 1");
    SkipGrams {
        docs,
        window,
        rng: None,
        doc: 0,
        pos: 0,
        buf: Vec::new(),
        next: 0,
    }
}

/// Frequent-word subsampling: keep token `w` with probability
/// `(sqrt(f / t) + 1) * t / f`, where `f` is the relative corpus frequency.
pub fn subsample<R: Rng>(tokens: &[usize], vocab: &Vocabulary, threshold: f64, rng: &mut R) -> Vec<usize> {
    let total = vocab.total_tokens().max(1) as f64;
    tokens
        .iter()
        .copied()
        .filter(|&w| {
            let f = vocab.freq(w) as f64 / total;
            if f <= 0.0 {
                return true;
            }
            let keep = ((f / threshold).sqrt() + 1.0) * threshold / f;
            keep >= 1.0 || rng.random::<f64>() < keep
        })
        .collect()
}
