//! Document embeddings built by aggregating word-vector residuals against a
//! k-means codebook (VLAWE), together with the linear SVM, cross-validation and
//! metrics needed to evaluate them on text classification corpora.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, embedding table
//! loading and the command line live in the `vlawe` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod classifier;
pub mod codebook;
pub mod corpus;
pub mod embeddings;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod folds;
pub mod metrics;
pub mod pca;
pub mod seed;
pub mod vecmath;

pub use classifier::{ClassifierConfig, ClassifierModel, FeatureVector, Mode, SparseVector};
pub use codebook::{Codebook, DedupMode, KMeansConfig, TrainingSet};
pub use corpus::{Document, LabeledCorpus, SplitHint, TaskKind};
pub use embeddings::{resolve, tokenize, EmbeddingTable, Resolved, TokenizedDocument};
pub use encoder::{DocumentEmbedding, EncoderConfig};
pub use error::{Error, Result};
pub use experiment::{CodebookScope, EncoderKind, EvalReport, MetricKind, PipelineConfig};
pub use pca::PcaProjection;

/// An unordered set of class labels attached to one document.
pub type LabelSet = alloc::collections::BTreeSet<alloc::string::String>;
