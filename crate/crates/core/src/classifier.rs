//! Linear max-margin classifier.
//!
//! Each binary subproblem minimizes the L2-regularized hinge loss
//!
//! ```text
//! 0.5 * (|w|^2 + b^2) + C * sum_i max(0, 1 - y_i (w . x_i + b))
//! ```
//!
//! by dual coordinate descent with shrinking. The bias is handled as an extra
//! constant feature of value 1, so it is regularized together with `w`.
//! Multiclass and multilabel problems are decomposed one-vs-rest.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{self, Stream};
use crate::vecmath;
use crate::LabelSet;

/// Anything the solver can take inner products with.
pub trait FeatureVector {
    fn dim(&self) -> usize;
    fn dot(&self, w: &[f64]) -> f64;
    fn norm_sq(&self) -> f64;
    /// `w += a * self`
    fn add_scaled_to(&self, a: f64, w: &mut [f64]);
}

impl FeatureVector for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }
    fn dot(&self, w: &[f64]) -> f64 {
        vecmath::dot(self, w)
    }
    fn norm_sq(&self) -> f64 {
        vecmath::norm_sq(self)
    }
    fn add_scaled_to(&self, a: f64, w: &mut [f64]) {
        vecmath::axpy(a, self, w)
    }
}

impl FeatureVector for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }
    fn dot(&self, w: &[f64]) -> f64 {
        vecmath::dot(self, w)
    }
    fn norm_sq(&self) -> f64 {
        vecmath::norm_sq(self)
    }
    fn add_scaled_to(&self, a: f64, w: &mut [f64]) {
        vecmath::axpy(a, self, w)
    }
}

impl<T: FeatureVector + ?Sized> FeatureVector for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn dot(&self, w: &[f64]) -> f64 {
        (**self).dot(w)
    }
    fn norm_sq(&self) -> f64 {
        (**self).norm_sq()
    }
    fn add_scaled_to(&self, a: f64, w: &mut [f64]) {
        (**self).add_scaled_to(a, w)
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sparse indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: last as usize + 1,
                });
            }
        }
        Ok(Self {
            dim,
            indices,
            values,
        })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl FeatureVector for SparseVector {
    fn dim(&self) -> usize {
        self.dim
    }
    fn dot(&self, w: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| w[i as usize] * v)
            .sum()
    }
    fn norm_sq(&self) -> f64 {
        vecmath::norm_sq(&self.values)
    }
    fn add_scaled_to(&self, a: f64, w: &mut [f64]) {
        for (&i, v) in self.indices.iter().zip(&self.values) {
            w[i as usize] += a * v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Two classes, one separating hyperplane.
    Binary,
    /// One hyperplane per class; the highest score wins.
    MulticlassOvr,
    /// One hyperplane per class; every class with a positive score is output.
    MultilabelOvr,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Binary => "binary",
            Mode::MulticlassOvr => "multiclass-ovr",
            Mode::MultilabelOvr => "multilabel-ovr",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(Mode::Binary),
            "multiclass-ovr" => Some(Mode::MulticlassOvr),
            "multilabel-ovr" => Some(Mode::MultilabelOvr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Hinge-loss weight against the regularizer.
    pub c: f64,
    /// Stop once the duality gap, relative to the primal objective, is below
    /// this.
    pub tolerance: f64,
    /// Maximum passes over the data per subproblem.
    pub max_iters: usize,
    /// Seeds the coordinate visiting order.
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-3,
            max_iters: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    classes: Vec<String>,
    mode: Mode,
    dim: usize,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl ClassifierModel {
    pub fn from_parts(
        classes: Vec<String>,
        mode: Mode,
        dim: usize,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        let expected = match mode {
            Mode::Binary => {
                if classes.len() != 2 {
                    return Err(Error::Labels(format!(
                        "binary model needs 2 classes, got {}",
                        classes.len()
                    )));
                }
                1
            }
            _ => classes.len(),
        };
        if weights.len() != expected || biases.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: weights.len().min(biases.len()),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: w.len(),
            });
        }
        if !weights.iter().all(|w| vecmath::all_finite(w)) || !vecmath::all_finite(&biases) {
            return Err(Error::NonFinite("classifier weights"));
        }
        Ok(Self {
            classes,
            mode,
            dim,
            weights,
            biases,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored hyperplanes: one for binary models, one per class otherwise.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// One score per class, in `classes()` order. A binary model scores the
    /// second class with `w . x + b` and the first with its negation.
    pub fn decision_scores<X: FeatureVector + ?Sized>(&self, x: &X) -> Result<Vec<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let raw: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| x.dot(w) + b)
            .collect();
        Ok(match self.mode {
            Mode::Binary => vec![-raw[0], raw[0]],
            _ => raw,
        })
    }

    /// Index of the highest score, ties to the earlier class.
    pub fn predict_index<X: FeatureVector + ?Sized>(&self, x: &X) -> Result<usize> {
        let scores = self.decision_scores(x)?;
        Ok(argmax(&scores))
    }

    /// Predicted labels: a singleton for binary and multiclass models, every
    /// class with a strictly positive score for multilabel models.
    pub fn predict<X: FeatureVector + ?Sized>(&self, x: &X) -> Result<LabelSet> {
        let scores = self.decision_scores(x)?;
        Ok(match self.mode {
            Mode::MultilabelOvr => self
                .classes
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s > 0.0)
                .map(|(c, _)| c.clone())
                .collect(),
            _ => {
                let mut set = BTreeSet::new();
                set.insert(self.classes[argmax(&scores)].clone());
                set
            }
        })
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Trains a model. `labels[i]` holds the labels of `x[i]`; binary and
/// multiclass modes require exactly one label per example.
pub fn train<X: FeatureVector>(
    x: &[X],
    labels: &[Vec<String>],
    cfg: &ClassifierConfig,
    mode: Mode,
) -> Result<ClassifierModel> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: labels.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewVectors {
            required: 2,
            available: x.len(),
        });
    }
    if cfg.c.is_nan() || cfg.c <= 0.0 || !cfg.c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "C must be positive and finite, got {}",
            cfg.c
        )));
    }
    let dim = x[0].dim();
    if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    if mode != Mode::MultilabelOvr {
        if let Some(i) = labels.iter().position(|l| l.len() != 1) {
            return Err(Error::Labels(format!(
                "example {i} has {} labels; {} mode needs exactly one",
                labels[i].len(),
                mode.name()
            )));
        }
    }

    let classes: Vec<String> = labels
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    match mode {
        Mode::Binary if classes.len() != 2 => {
            return Err(Error::Labels(format!(
                "binary mode needs exactly 2 classes, got {}",
                classes.len()
            )))
        }
        Mode::MulticlassOvr if classes.len() < 2 => {
            return Err(Error::Labels(
                "multiclass mode needs at least 2 classes".into(),
            ))
        }
        Mode::MultilabelOvr if classes.is_empty() => {
            return Err(Error::Labels("no labels in training data".into()))
        }
        _ => {}
    }

    let targets: Vec<&String> = match mode {
        Mode::Binary => vec![&classes[1]],
        _ => classes.iter().collect(),
    };
    let mut weights = Vec::with_capacity(targets.len());
    let mut biases = Vec::with_capacity(targets.len());
    for (ci, class) in targets.into_iter().enumerate() {
        let signs: Vec<f64> = labels
            .iter()
            .map(|l| if l.contains(class) { 1.0 } else { -1.0 })
            .collect();
        let solver_seed = seed::derive(cfg.seed, Stream::Solver, ci as u64);
        let (w, b) = solve_dual_cd(x, &signs, dim, cfg, solver_seed).0;
        weights.push(w);
        biases.push(b);
    }
    ClassifierModel::from_parts(classes, mode, dim, weights, biases)
}

/// Dual coordinate descent for one binary subproblem. Returns `((w, b),
/// passes)`.
pub fn solve_dual_cd<X: FeatureVector>(
    x: &[X],
    signs: &[f64],
    dim: usize,
    cfg: &ClassifierConfig,
    seed: u64,
) -> ((Vec<f64>, f64), usize) {
    let n = x.len();
    let c = cfg.c;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let diag: Vec<f64> = x.iter().map(|v| v.norm_sq() + 1.0).collect();
    let mut index: Vec<usize> = (0..n).collect();
    let mut active = n;
    let mut pg_max_old = f64::INFINITY;
    let mut pg_min_old = f64::NEG_INFINITY;
    let mut rng = seed::rng(seed);
    // the cheap projected-gradient test only triggers the gap check; it is
    // tightened whenever the gap is still too wide
    let mut pg_tol = cfg.tolerance;

    let mut pass = 0;
    while pass < cfg.max_iters {
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;

        for i in 0..active {
            let j = rng.random_range(i..active);
            index.swap(i, j);
        }

        let mut s = 0;
        while s < active {
            let i = index[s];
            let yi = signs[i];
            let g = yi * (x[i].dot(&w) + b) - 1.0;

            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);

            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / diag[i]).clamp(0.0, c);
                let d = (alpha[i] - old) * yi;
                x[i].add_scaled_to(d, &mut w);
                b += d;
            }
            s += 1;
        }
        pass += 1;

        if pg_max - pg_min <= pg_tol {
            if active == n {
                if relative_gap(x, signs, &w, b, &alpha, c) <= cfg.tolerance {
                    break;
                }
                pg_tol = (pg_max - pg_min) * 0.1;
                pg_max_old = f64::INFINITY;
                pg_min_old = f64::NEG_INFINITY;
                continue;
            }
            // re-check the shrunk coordinates before stopping
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 {
            f64::NEG_INFINITY
        } else {
            pg_min
        };
    }
    ((w, b), pass)
}

/// `(P - D) / P` for the bias-augmented problem, where `w` and `b` are the
/// primal point induced by `alpha`.
fn relative_gap<X: FeatureVector>(
    x: &[X],
    signs: &[f64],
    w: &[f64],
    b: f64,
    alpha: &[f64],
    c: f64,
) -> f64 {
    let reg = 0.5 * (crate::vecmath::norm_sq(w) + b * b);
    let hinge: f64 = x
        .iter()
        .zip(signs)
        .map(|(xi, y)| (1.0 - y * (xi.dot(w) + b)).max(0.0))
        .sum();
    let primal = reg + c * hinge;
    let dual = alpha.iter().sum::<f64>() - reg;
    if primal <= 0.0 {
        return 0.0;
    }
    (primal - dual) / primal
}
