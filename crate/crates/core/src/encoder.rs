//! Document encoders.
//!
//! The main encoder sums, for each codeword, the residuals `x - mu` of the
//! document's word vectors assigned to that codeword, stacks the `k`
//! residual sums into one `k * d` vector, applies signed power normalization
//! and finally L2 normalization. The mean-of-vectors, bag-of-words and
//! cluster-histogram encoders are baselines over the same inputs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::classifier::SparseVector;
use crate::codebook::Codebook;
use crate::embeddings::{resolve, EmbeddingTable, TokenizedDocument};
use crate::error::{Error, Result};
use crate::vecmath::norm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderConfig {
    /// Power normalization exponent in `[0, 1]`.
    pub alpha: f64,
    pub l2_normalize: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            l2_normalize: true,
        }
    }
}

impl EncoderConfig {
    pub fn new(alpha: f64, l2_normalize: bool) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            l2_normalize,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

/// Encoded document: `k` stacked residual sums of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentEmbedding {
    pub values: Vec<f64>,
    pub k: usize,
    pub dim: usize,
    pub normalized: bool,
    pub known_tokens: usize,
    pub oov_tokens: usize,
}

impl DocumentEmbedding {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Stacked per-codeword residual sums of `vectors`, without normalization.
/// Codewords with no assigned vector contribute a zero block.
pub fn encode_raw<T, V>(vectors: &[V], cb: &Codebook) -> Result<Vec<f64>>
where
    T: Copy + Into<f64>,
    V: AsRef<[T]>,
{
    let dim = cb.dim();
    let mut out = vec![0.0; cb.k() * dim];
    for v in vectors {
        let x = v.as_ref();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        let (i, _) = cb.nearest(x);
        let block = &mut out[i * dim..(i + 1) * dim];
        for ((acc, &xv), &mu) in block.iter_mut().zip(x).zip(cb.centroid(i)) {
            *acc += xv.into() - mu;
        }
    }
    Ok(out)
}

/// `z -> sign(z) * |z|^alpha` on every component. Zero stays zero for every
/// `alpha`, including `alpha = 0`.
pub fn power_normalize(v: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    power_normalize_in_place(&mut out, alpha)?;
    Ok(out)
}

pub fn power_normalize_in_place(v: &mut [f64], alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(());
    }
    for z in v.iter_mut() {
        if *z != 0.0 {
            let m = if alpha == 0.5 {
                libm::sqrt(z.abs())
            } else {
                libm::pow(z.abs(), alpha)
            };
            *z = libm::copysign(m, *z);
        }
    }
    Ok(())
}

/// `v / ||v||`; the zero vector is returned unchanged.
pub fn l2_normalize(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    l2_normalize_in_place(&mut out);
    out
}

pub fn l2_normalize_in_place(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Full pipeline for one document: vocabulary lookup, residual aggregation,
/// power normalization and (optionally) L2 normalization.
pub fn encode(
    doc: &TokenizedDocument,
    table: &EmbeddingTable,
    cb: &Codebook,
    cfg: &EncoderConfig,
) -> Result<DocumentEmbedding> {
    if table.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: table.dim(),
        });
    }
    let resolved = resolve(doc, table);
    let mut values = encode_raw(&resolved.vectors, cb)?;
    power_normalize_in_place(&mut values, cfg.alpha)?;
    if cfg.l2_normalize {
        l2_normalize_in_place(&mut values);
    }
    Ok(DocumentEmbedding {
        values,
        k: cb.k(),
        dim: cb.dim(),
        normalized: cfg.l2_normalize,
        known_tokens: resolved.known_count(),
        oov_tokens: resolved.oov_count,
    })
}

/// Arithmetic mean of the document's in-vocabulary word vectors, or zero when
/// none are known.
pub fn encode_mean_baseline(doc: &TokenizedDocument, table: &EmbeddingTable) -> Vec<f64> {
    let resolved = resolve(doc, table);
    mean_of(&resolved.vectors, table.dim())
}

pub fn mean_of<T: Copy + Into<f64>, V: AsRef<[T]>>(vectors: &[V], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if vectors.is_empty() {
        return out;
    }
    for v in vectors {
        for (o, &x) in out.iter_mut().zip(v.as_ref()) {
            *o += x.into();
        }
    }
    let n = vectors.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Number of the document's in-vocabulary words assigned to each codeword.
pub fn encode_histogram(
    doc: &TokenizedDocument,
    table: &EmbeddingTable,
    cb: &Codebook,
) -> Result<Vec<u32>> {
    if table.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: table.dim(),
        });
    }
    histogram(&resolve(doc, table).vectors, cb)
}

pub fn histogram<T: Copy + Into<f64>, V: AsRef<[T]>>(
    vectors: &[V],
    cb: &Codebook,
) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; cb.k()];
    for v in vectors {
        counts[cb.assign(v.as_ref())?] += 1;
    }
    Ok(counts)
}

/// Token counts of one document.
pub fn term_counts(doc: &TokenizedDocument) -> BTreeMap<&str, u32> {
    let mut counts = BTreeMap::new();
    for t in &doc.tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Bag-of-words vocabulary fitted on training documents only. Terms are
/// indexed in sorted order; unseen terms are ignored at transform time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowVocabulary {
    terms: BTreeMap<String, u32>,
}

impl BowVocabulary {
    pub fn fit<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenizedDocument>,
    {
        let mut terms: BTreeMap<String, u32> = BTreeMap::new();
        for doc in docs {
            for t in &doc.tokens {
                if !terms.contains_key(t) {
                    terms.insert(t.clone(), 0);
                }
            }
        }
        for (i, v) in terms.values_mut().enumerate() {
            *v = i as u32;
        }
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.terms.get(term).copied()
    }

    /// Sparse term-frequency vector over this vocabulary.
    pub fn transform(&self, doc: &TokenizedDocument) -> SparseVector {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for t in &doc.tokens {
            if let Some(&i) = self.terms.get(t) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let (indices, values) = counts.into_iter().unzip();
        SparseVector::new(self.len(), indices, values).expect("indices are sorted and in range")
    }
}
