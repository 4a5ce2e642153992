//! k-means codebook over word vectors.
//!
//! Training is Lloyd's algorithm seeded with k-means++. Each codeword is the
//! arithmetic mean of the training vectors assigned to it, and a vector is
//! assigned to the codeword at minimum Euclidean distance (exact search, ties
//! to the lowest index).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::embeddings::{EmbeddingTable, TokenizedDocument};
use crate::error::{Error, Result};
use crate::vecmath::{all_finite, squared_distance};

/// Which occurrences of in-vocabulary words make up the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupMode {
    /// Each distinct word contributes its vector once.
    #[default]
    UniqueTypes,
    /// Every token occurrence contributes its vector.
    AllTokens,
}

impl DedupMode {
    pub fn name(self) -> &'static str {
        match self {
            DedupMode::UniqueTypes => "types",
            DedupMode::AllTokens => "tokens",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "types" => Some(DedupMode::UniqueTypes),
            "tokens" => Some(DedupMode::AllTokens),
            _ => None,
        }
    }
}

/// Row-major set of `n` training vectors of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    dim: usize,
    data: Vec<f64>,
}

impl TrainingSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn from_vectors<T: Copy + Into<f64>, V: AsRef<[T]>>(
        dim: usize,
        vectors: &[V],
    ) -> Result<Self> {
        let mut set = Self::new(dim);
        for v in vectors {
            set.push(v.as_ref())?;
        }
        Ok(set)
    }

    /// Builds the training set from the in-vocabulary words of `docs`.
    /// Unique types are taken in sorted order so the result does not depend
    /// on document order.
    pub fn from_documents<'a, I>(docs: I, table: &EmbeddingTable, mode: DedupMode) -> Self
    where
        I: IntoIterator<Item = &'a TokenizedDocument>,
    {
        let mut set = Self::new(table.dim());
        match mode {
            DedupMode::UniqueTypes => {
                let mut types = BTreeSet::new();
                for doc in docs {
                    for t in &doc.tokens {
                        if table.contains(t) {
                            types.insert(t.as_str());
                        }
                    }
                }
                for t in types {
                    set.push_unchecked(table.get(t).unwrap());
                }
            }
            DedupMode::AllTokens => {
                for doc in docs {
                    for t in &doc.tokens {
                        if let Some(v) = table.get(t) {
                            set.push_unchecked(v);
                        }
                    }
                }
            }
        }
        set
    }

    pub fn push<T: Copy + Into<f64>>(&mut self, v: &[T]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        self.push_unchecked(v);
        Ok(())
    }

    fn push_unchecked<T: Copy + Into<f64>>(&mut self, v: &[T]) {
        self.data.extend(v.iter().map(|&x| x.into()));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iters: usize,
    /// Stop once `(previous - current) / previous` inertia drops below this.
    pub rel_tolerance: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            rel_tolerance: 1e-4,
            seed: 0,
        }
    }
}

/// `k` codewords of dimension `dim` plus how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    k: usize,
    dim: usize,
    centroids: Vec<f64>,
    /// Within-cluster sum of squared distances of the training set under
    /// nearest-codeword assignment to the final centroids.
    pub inertia: f64,
    pub iterations_run: usize,
    pub seed: u64,
}

impl Codebook {
    /// Assembles a codebook from a row-major `k x dim` centroid matrix.
    pub fn from_parts(
        k: usize,
        dim: usize,
        centroids: Vec<f64>,
        inertia: f64,
        iterations_run: usize,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::InvalidParameter(
                "codebook needs k >= 1 and dim >= 1".into(),
            ));
        }
        if centroids.len() != k * dim {
            return Err(Error::DimensionMismatch {
                expected: k * dim,
                found: centroids.len(),
            });
        }
        if !all_finite(&centroids) {
            return Err(Error::NonFinite("centroids"));
        }
        Ok(Self {
            k,
            dim,
            centroids,
            inertia,
            iterations_run,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major centroid matrix.
    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    /// Zero-based index of the nearest codeword.
    pub fn assign<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.nearest(x).0)
    }

    /// Nearest codeword and its squared distance. `x` must have length `dim`.
    pub(crate) fn nearest<T: Copy + Into<f64>>(&self, x: &[T]) -> (usize, f64) {
        nearest(&self.centroids, self.dim, x)
    }

    /// Runs one assignment + mean update over `data` starting from these
    /// centroids.
    pub fn lloyd_step(&self, data: &TrainingSet) -> Result<Codebook> {
        if data.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: data.dim(),
            });
        }
        let (labels, dists, _) = assign_all(&self.centroids, self.k, data);
        let centroids = update_centroids(data, self.k, labels, dists);
        let inertia = assign_all(&centroids, self.k, data).2;
        Ok(Codebook {
            centroids,
            inertia,
            iterations_run: self.iterations_run + 1,
            ..self.clone()
        })
    }
}

fn nearest<T: Copy + Into<f64>>(centroids: &[f64], dim: usize, x: &[T]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.chunks_exact(dim).enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn assign_all(centroids: &[f64], k: usize, data: &TrainingSet) -> (Vec<usize>, Vec<f64>, f64) {
    debug_assert_eq!(centroids.len(), k * data.dim());
    let mut labels = Vec::with_capacity(data.len());
    let mut dists = Vec::with_capacity(data.len());
    let mut inertia = 0.0;
    for x in data.rows() {
        let (i, d) = nearest(centroids, data.dim(), x);
        labels.push(i);
        dists.push(d);
        inertia += d;
    }
    (labels, dists, inertia)
}

/// Mean of each cluster. An empty cluster takes over the point farthest from
/// its current codeword among clusters that can spare one.
fn update_centroids(
    data: &TrainingSet,
    k: usize,
    mut labels: Vec<usize>,
    mut dists: Vec<f64>,
) -> Vec<f64> {
    let dim = data.dim();
    let mut counts = vec![0usize; k];
    for &l in &labels {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] != 0 {
            continue;
        }
        let donor = (0..labels.len()).filter(|&i| counts[labels[i]] > 1).fold(
            None,
            |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            },
        );
        if let Some(i) = donor {
            counts[labels[i]] -= 1;
            labels[i] = empty;
            dists[i] = 0.0;
            counts[empty] = 1;
        }
    }

    let mut sums = vec![0.0; k * dim];
    for (x, &l) in data.rows().zip(&labels) {
        for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (c, &n) in sums.chunks_exact_mut(dim).zip(&counts) {
        if n > 0 {
            let inv = n as f64;
            c.iter_mut().for_each(|v| *v /= inv);
        }
    }
    sums
}

fn kmeans_plus_plus(data: &TrainingSet, k: usize, seed: u64) -> Vec<f64> {
    let n = data.len();
    let mut rng = crate::seed::rng(seed);
    let mut chosen = vec![false; n];
    let mut centroids = Vec::with_capacity(k * data.dim());

    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.extend_from_slice(data.row(first));
    let mut min_dist: Vec<f64> = data
        .rows()
        .map(|x| squared_distance(x, data.row(first)))
        .collect();

    for _ in 1..k {
        let total: f64 = min_dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in min_dist.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.unwrap()
        } else {
            // every remaining point coincides with a chosen centroid
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = data.row(pick);
        centroids.extend_from_slice(c);
        for (m, x) in min_dist.iter_mut().zip(data.rows()) {
            let d = squared_distance(x, c);
            if d < *m {
                *m = d;
            }
        }
    }
    centroids
}

/// Trains a codebook; see [`train_codebook_traced`].
pub fn train_codebook(data: &TrainingSet, k: usize, cfg: &KMeansConfig) -> Result<Codebook> {
    train_codebook_traced(data, k, cfg).map(|(cb, _)| cb)
}

/// Trains a codebook and also returns the inertia measured at every
/// assignment step, followed by the final inertia.
pub fn train_codebook_traced(
    data: &TrainingSet,
    k: usize,
    cfg: &KMeansConfig,
) -> Result<(Codebook, Vec<f64>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if data.dim() == 0 {
        return Err(Error::InvalidParameter(
            "training vectors must have dimension >= 1".into(),
        ));
    }
    if data.len() < k {
        return Err(Error::TooFewVectors {
            required: k,
            available: data.len(),
        });
    }
    if !all_finite(&data.data) {
        return Err(Error::NonFinite("training vectors"));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter(
            "max_iters must be at least 1".into(),
        ));
    }
    if cfg.rel_tolerance.is_nan() || cfg.rel_tolerance < 0.0 {
        return Err(Error::InvalidParameter(
            "rel_tolerance must be non-negative".into(),
        ));
    }

    let mut centroids = kmeans_plus_plus(data, k, cfg.seed);
    let mut trace = Vec::new();
    let mut previous: Option<(f64, Vec<usize>)> = None;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let (labels, dists, inertia) = assign_all(&centroids, k, data);
        trace.push(inertia);
        iterations += 1;
        let converged = match &previous {
            Some((prev, prev_labels)) => {
                *prev - inertia <= cfg.rel_tolerance * *prev || *prev_labels == labels
            }
            None => false,
        };
        let next = update_centroids(data, k, labels.clone(), dists);
        centroids = next;
        if converged {
            break;
        }
        previous = Some((inertia, labels));
    }
    let inertia = assign_all(&centroids, k, data).2;
    trace.push(inertia);

    let cb = Codebook::from_parts(k, data.dim(), centroids, inertia, iterations, cfg.seed)?;
    Ok((cb, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TrainingSet {
        TrainingSet::from_vectors(2, &[[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]]).unwrap()
    }

    #[test]
    fn assign_examples() {
        let cb = Codebook::from_parts(2, 2, vec![0.0, 0.0, 10.0, 0.0], 0.0, 0, 0).unwrap();
        assert_eq!(cb.assign(&[4.0, 0.0]).unwrap(), 0);
        assert_eq!(cb.assign(&[10.0, 0.0]).unwrap(), 1);
        // equidistant goes to the lower index
        assert_eq!(cb.assign(&[5.0, 3.0]).unwrap(), 0);
        assert!(matches!(
            cb.assign(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn k_equals_one_is_the_mean() {
        let cb = train_codebook(&toy(), 1, &KMeansConfig::default()).unwrap();
        assert_eq!(cb.centroid(0), &[5.0, 1.0]);
        assert_eq!(cb.inertia, 4.0 * 26.0);
    }

    #[test]
    fn k_equals_n_reproduces_points() {
        let data = toy();
        let cb = train_codebook(&data, 4, &KMeansConfig::default()).unwrap();
        assert_eq!(cb.inertia, 0.0);
        let mut got: Vec<[u64; 2]> = (0..4)
            .map(|i| [cb.centroid(i)[0].to_bits(), cb.centroid(i)[1].to_bits()])
            .collect();
        let mut want: Vec<[u64; 2]> = (0..4)
            .map(|i| [data.row(i)[0].to_bits(), data.row(i)[1].to_bits()])
            .collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn rejects_bad_input() {
        let data = toy();
        assert!(matches!(
            train_codebook(&data, 5, &KMeansConfig::default()),
            Err(Error::TooFewVectors {
                required: 5,
                available: 4
            })
        ));
        assert!(train_codebook(&data, 0, &KMeansConfig::default()).is_err());
        let bad = TrainingSet::from_vectors(1, &[[0.0], [f64::NAN]]).unwrap();
        assert_eq!(
            train_codebook(&bad, 1, &KMeansConfig::default()),
            Err(Error::NonFinite("training vectors"))
        );
    }

    #[test]
    fn empty_clusters_are_repaired() {
        // identical points force k-means++ to pick coincident seeds
        let data = TrainingSet::from_vectors(1, &[[1.0], [1.0], [1.0], [5.0]]).unwrap();
        let cb = train_codebook(&data, 3, &KMeansConfig::default()).unwrap();
        assert!(cb.centroids().iter().all(|v| v.is_finite()));
        assert_eq!(cb.k(), 3);
    }

    #[test]
    fn from_parts_validates() {
        assert!(Codebook::from_parts(2, 2, vec![0.0; 3], 0.0, 0, 0).is_err());
        assert!(Codebook::from_parts(1, 2, vec![0.0, f64::INFINITY], 0.0, 0, 0).is_err());
    }

    #[test]
    fn training_set_from_documents() {
        let mut table = EmbeddingTable::new(1).unwrap();
        table.insert("b", &[2.0]).unwrap();
        table.insert("a", &[1.0]).unwrap();
        let docs = [crate::tokenize("b a b zz"), crate::tokenize("a")];
        let unique = TrainingSet::from_documents(&docs, &table, DedupMode::UniqueTypes);
        assert_eq!(unique.data, vec![1.0, 2.0]);
        let all = TrainingSet::from_documents(&docs, &table, DedupMode::AllTokens);
        assert_eq!(all.data, vec![2.0, 1.0, 2.0, 1.0]);
    }
}
