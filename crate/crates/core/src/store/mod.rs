//! Uniform storage for every kind of semantic space, exact cosine k-NN and
//! the word2vec binary/text file formats.

mod binary;
mod text;

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub use binary::{read_binary, read_binary_from, write_binary, write_binary_to};
pub use text::{format_sig9, read_text, read_text_from, write_text, write_text_to};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Lsa,
    Lda,
    Sgns,
    Pretrained,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::Lsa => "LSA",
            ModelKind::Lda => "LDA",
            ModelKind::Sgns => "SGNS",
            ModelKind::Pretrained => "Pretrained",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ModelKind,
    pub config: String,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.kind, self.config)
    }
}

/// A dense `V x dim` matrix of term vectors with its vocabulary.
///
/// Immutable once built; row norms are cached for neighbor queries.
#[derive(Clone, Debug)]
pub struct EmbeddingSpace {
    vocab: Vocabulary,
    dim: usize,
    data: Vec<f32>,
    norms: Vec<f64>,
    provenance: Provenance,
}

impl PartialEq for EmbeddingSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.vocab.tokens() == other.vocab.tokens()
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl EmbeddingSpace {
    /// `data` is row-major with one row of `dim` values per vocabulary entry.
    pub fn new(vocab: Vocabulary, dim: usize, data: Vec<f32>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::InvalidConfig(format!(
                "matrix has {} values, expected {} x {}",
                data.len(),
                vocab.len(),
                dim
            )));
        }
        let norms = data.chunks_exact(dim).map(norm).collect();
        Ok(EmbeddingSpace {
            vocab,
            dim,
            data,
            norms,
            provenance,
        })
    }

    /// Remove all-zero rows, returning the cleaned space and the dropped tokens.
    pub fn drop_zero_rows(self) -> (Self, Vec<String>) {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.norms[i] > 0.0).collect();
        if keep.len() == self.len() {
            return (self, Vec::new());
        }
        let dropped = (0..self.len())
            .filter(|&i| self.norms[i] == 0.0)
            .map(|i| self.vocab.token(i).to_owned())
            .collect();
        let vocab = self.vocab.subset(&keep);
        let mut data = Vec::with_capacity(keep.len() * self.dim);
        for &i in &keep {
            data.extend_from_slice(self.vector(i));
        }
        let space = EmbeddingSpace::new(vocab, self.dim, data, self.provenance)
            .expect("subset of a valid space is valid");
        (space, dropped)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn matrix(&self) -> &[f32] {
        &self.data
    }

    pub fn vector(&self, id: usize) -> &[f32] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn lookup(&self, term: &str) -> Option<&[f32]> {
        self.vocab.id(term).map(|id| self.vector(id))
    }

    pub fn norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    /// Cosine similarity of two rows; 0 when either row has zero norm.
    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        let denom = self.norms[a] * self.norms[b];
        if denom == 0.0 {
            return 0.0;
        }
        dot(self.vector(a), self.vector(b)) / denom
    }

    pub fn top_k(&self, query: &str, k: usize) -> Result<NeighborList> {
        let id = self
            .vocab
            .id(query)
            .ok_or_else(|| Error::UnknownTerm(query.to_owned()))?;
        Ok(self.top_k_id(id, k))
    }

    /// Exact top-`k` neighbors by cosine, ties broken by ascending id.
    /// The query itself and zero-norm rows never appear.
    pub fn top_k_id(&self, query: usize, k: usize) -> NeighborList {
        assert!(k >= 1, "k must be at least 1");
        if self.norms[query] == 0.0 {
            return NeighborList {
                query,
                neighbors: Vec::new(),
            };
        }
        let score = |i: usize| -> Option<(usize, f64)> {
            (i != query && self.norms[i] > 0.0).then(|| (i, self.cosine(query, i)))
        };
        let mut scored: Vec<(usize, f64)> = if self.len() >= PARALLEL_SCAN_MIN {
            (0..self.len()).into_par_iter().filter_map(score).collect()
        } else {
            (0..self.len()).filter_map(score).collect()
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, rank_order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(rank_order);
        NeighborList {
            query,
            neighbors: scored,
        }
    }
}

/// Write to a temporary file next to `path`, then rename it into place, so a
/// failed write never leaves a partial file behind.
pub(crate) fn write_atomically<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut File) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io_at(dir, e))?;
    write(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path)
        .map_err(|e| Error::io_at(path, e.error))?;
    Ok(())
}

const PARALLEL_SCAN_MIN: usize = 50_000;

// Numeric comparison, so -0.0 and 0.0 tie and fall back to id order.
fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Neighbors of one query term, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList {
    pub query: usize,
    pub neighbors: Vec<(usize, f64)>,
}

impl NeighborList {
    pub fn contains(&self, id: usize) -> bool {
        self.neighbors.iter().any(|&(n, _)| n == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|&(n, _)| n)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

#[cfg(test)]
pub(crate) fn toy_space(rows: &[(&str, &[f32])]) -> EmbeddingSpace {
    let vocab = Vocabulary::from_tokens(rows.iter().map(|r| r.0)).unwrap();
    let dim = rows[0].1.len();
    let data = rows.iter().flat_map(|r| r.1.iter().copied()).collect();
    EmbeddingSpace::new(
        vocab,
        dim,
        data,
        Provenance {
            kind: ModelKind::Pretrained,
            config: "test".into(),
        },
    )
    .unwrap()
}
