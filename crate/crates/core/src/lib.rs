//! Distributional semantic spaces and a harness that measures how well
//! extracted semantic relations are reproduced inside them.
//!
//! Four kinds of space reduce to a single [`EmbeddingSpace`]:
//!
//! * LSA: truncated randomized SVD of a (TF-IDF weighted) term-document matrix,
//! * LDA: smoothed per-term topic distributions from collapsed Gibbs sampling,
//! * SGNS: skip-gram with negative sampling,
//! * pre-trained vectors loaded from the word2vec binary or text formats.
//!
//! Relations come from SemEval-2010 Task 8 files or a plain TSV and are
//! replayed through a space with [`relation::evaluate`], which computes
//! RC, SSRIC, R-Prec and R-Rec overall and per relation category.

pub mod cooc;
pub mod corpus;
mod error;
pub mod lda;
pub mod lsa;
pub mod relation;
pub mod sgns;
pub mod store;
pub mod synth;

pub use cooc::{SkipGramPair, SparseCountMatrix, Weighting};
pub use corpus::{Document, TokenizerConfig, Vocabulary};
pub use error::{Error, Result};
pub use lda::{LdaConfig, LdaState};
pub use lsa::LsaConfig;
pub use relation::{
    Direction, EvalOptions, EvalReport, RelationCategory, RelationInstance, ReportFormat,
    SamplingSpec,
};
pub use sgns::{NoiseTable, SgnsConfig};
pub use store::{EmbeddingSpace, ModelKind, NeighborList, Provenance};
