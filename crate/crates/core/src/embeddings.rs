//! Pre-trained word vector tables, tokenization and vocabulary lookup.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};

/// Word to vector map with a fixed dimension.
///
/// Vectors are stored contiguously in `f32`, the precision pre-trained tables
/// are distributed in. The table is never mutated after loading, so shared
/// references can be handed to any number of worker threads.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            values: Vec::new(),
        })
    }

    /// Adds a row. Returns `Ok(false)` and leaves the table unchanged when the
    /// word is already present; the first occurrence wins.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.index.contains_key(word) {
            return Ok(false);
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.values.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&row| self.row(row))
    }

    /// Row by insertion order.
    pub fn row(&self, row: usize) -> &[f32] {
        &self.values[row * self.dim..(row + 1) * self.dim]
    }

    /// Words in insertion order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// A document split into lowercase word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedDocument {
    pub source_id: String,
    pub tokens: Vec<String>,
    /// Tokens found in the embedding table, in document order. `None` until
    /// the document has been passed through [`resolve`].
    pub known_tokens: Option<Vec<String>>,
}

impl TokenizedDocument {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }
}

/// Lowercases `text` and splits it on every maximal run of non-alphanumeric
/// characters. Empty pieces are dropped.
pub fn tokenize(text: &str) -> TokenizedDocument {
    let lower = text.to_lowercase();
    let tokens = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(ToString::to_string)
        .collect();
    TokenizedDocument {
        source_id: String::new(),
        tokens,
        known_tokens: None,
    }
}

/// Output of [`resolve`]: the document with `known_tokens` filled in and one
/// borrowed table row per known token.
#[derive(Debug, Clone)]
pub struct Resolved<'t> {
    pub document: TokenizedDocument,
    pub vectors: Vec<&'t [f32]>,
    pub oov_count: usize,
}

impl Resolved<'_> {
    pub fn known_count(&self) -> usize {
        self.vectors.len()
    }
}

/// Looks every token up in `table`. Out-of-vocabulary tokens are dropped and
/// counted. Resolution always starts from `doc.tokens`, so resolving an
/// already resolved document gives the same result.
pub fn resolve<'t>(doc: &TokenizedDocument, table: &'t EmbeddingTable) -> Resolved<'t> {
    let mut known = Vec::with_capacity(doc.tokens.len());
    let mut vectors = Vec::with_capacity(doc.tokens.len());
    for token in &doc.tokens {
        if let Some(v) = table.get(token) {
            known.push(token.clone());
            vectors.push(v);
        }
    }
    let oov_count = doc.tokens.len() - known.len();
    Resolved {
        document: TokenizedDocument {
            source_id: doc.source_id.clone(),
            tokens: doc.tokens.clone(),
            known_tokens: Some(known),
        },
        vectors,
        oov_count,
    }
}
