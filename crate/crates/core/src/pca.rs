//! Principal component projection for compacting document embeddings.
//!
//! The principal axes come from a full symmetric eigendecomposition of the
//! sample covariance, or of the Gram matrix when there are fewer samples than
//! dimensions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::vecmath::{all_finite, dot, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    dim: usize,
    mean: Vec<f64>,
    /// Row-major `m x dim`; rows are orthonormal.
    components: Vec<f64>,
    explained_variance: Vec<f64>,
}

impl PcaProjection {
    /// Fits the top `m` components of `data`, ordered by decreasing variance.
    pub fn fit<V: AsRef<[f64]>>(data: &[V], m: usize) -> Result<Self> {
        let rows: Vec<&[f64]> = data.iter().map(AsRef::as_ref).collect();
        Self::fit_rows(&rows, m)
    }

    fn fit_rows(data: &[&[f64]], m: usize) -> Result<Self> {
        let n = data.len();
        if n == 0 {
            return Err(Error::Empty("PCA training data"));
        }
        let dim = data[0].len();
        if let Some(bad) = data.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        if m == 0 || m > dim.min(n) {
            return Err(Error::InvalidParameter(format!(
                "PCA target dimension {m} must lie in 1..={} for {n} samples of dimension {dim}",
                dim.min(n)
            )));
        }
        if !data.iter().all(|v| all_finite(v)) {
            return Err(Error::NonFinite("PCA training data"));
        }

        let mut mean = vec![0.0; dim];
        for v in data {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered = DMatrix::from_fn(n, dim, |i, j| data[i][j] - mean[j]);
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };

        let mut components = Vec::with_capacity(m * dim);
        let mut variance = Vec::with_capacity(m);
        let mut collapsed = vec![false; m];
        if dim <= n {
            let cov = (centered.transpose() * &centered) / denom;
            let eig = SymmetricEigen::new(cov);
            for idx in descending(eig.eigenvalues.as_slice()).into_iter().take(m) {
                components.extend(eig.eigenvectors.column(idx).iter());
                variance.push(eig.eigenvalues[idx].max(0.0));
            }
        } else {
            let gram = (&centered * centered.transpose()) / denom;
            let eig = SymmetricEigen::new(gram);
            let order = descending(eig.eigenvalues.as_slice());
            let top = eig.eigenvalues[order[0]].max(0.0);
            for (r, &idx) in order.iter().take(m).enumerate() {
                let axis = centered.transpose() * eig.eigenvectors.column(idx);
                components.extend(axis.iter());
                let lambda = eig.eigenvalues[idx].max(0.0);
                collapsed[r] = lambda <= 1e-10 * top || top == 0.0;
                variance.push(lambda);
            }
        }
        orthonormalize(&mut components, dim, &collapsed);
        for row in components.chunks_exact_mut(dim) {
            fix_sign(row);
        }

        Ok(Self {
            dim,
            mean,
            components,
            explained_variance: variance,
        })
    }

    pub fn from_parts(
        mean: Vec<f64>,
        components: Vec<f64>,
        explained_variance: Vec<f64>,
    ) -> Result<Self> {
        let dim = mean.len();
        let m = explained_variance.len();
        if dim == 0 || components.len() != m * dim {
            return Err(Error::DimensionMismatch {
                expected: m * dim,
                found: components.len(),
            });
        }
        Ok(Self {
            dim,
            mean,
            components,
            explained_variance,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.dim
    }

    pub fn output_dim(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i * self.dim..(i + 1) * self.dim]
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Coordinates of `v - mean` on the principal axes.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self
            .components
            .chunks_exact(self.dim)
            .map(|c| dot(c, &centered))
            .collect())
    }

    /// Maps projected coordinates back into the input space.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: coords.len(),
            });
        }
        let mut out = self.mean.clone();
        for (c, row) in coords.iter().zip(self.components.chunks_exact(self.dim)) {
            crate::vecmath::axpy(*c, row, &mut out);
        }
        Ok(out)
    }
}

/// Indices sorting `values` from largest to smallest, ties by index.
fn descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Modified Gram-Schmidt over the rows. Rows flagged as collapsed (directions
/// with no variance in the Gram route), or that vanish under
/// orthogonalization, are replaced by the first coordinate axis orthogonal to
/// the rows before them.
fn orthonormalize(rows: &mut [f64], dim: usize, collapsed: &[bool]) {
    for (i, &flagged) in collapsed.iter().enumerate() {
        let (done, rest) = rows.split_at_mut(i * dim);
        let row = &mut rest[..dim];
        let scale = norm(row);
        for _ in 0..2 {
            for prev in done.chunks_exact(dim) {
                let p = dot(prev, row);
                crate::vecmath::axpy(-p, prev, row);
            }
        }
        let mut len = norm(row);
        if flagged || len <= 1e-8 * scale || len == 0.0 {
            for axis in 0..dim {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[axis] = 1.0;
                for _ in 0..2 {
                    for prev in done.chunks_exact(dim) {
                        let p = dot(prev, row);
                        crate::vecmath::axpy(-p, prev, row);
                    }
                }
                len = norm(row);
                if len > 1e-6 {
                    break;
                }
            }
        }
        row.iter_mut().for_each(|v| *v /= len);
    }
}

/// Flips the row so its largest-magnitude entry is positive.
fn fix_sign(row: &mut [f64]) {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if v.abs() > row[best].abs() {
            best = i;
        }
    }
    if row[best] < 0.0 {
        row.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath::squared_distance;
    use proptest::prelude::*;

    fn check_orthonormal(p: &PcaProjection) {
        for i in 0..p.output_dim() {
            for j in 0..p.output_dim() {
                let d = dot(p.component(i), p.component(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() <= 1e-6, "rows {i},{j}: {d}");
            }
        }
    }

    #[test]
    fn line_data_reconstructs_exactly() {
        let data: Vec<[f64; 2]> = (0..9)
            .map(|t| [1.0 + 2.0 * t as f64, -3.0 + 0.5 * t as f64])
            .collect();
        let p = PcaProjection::fit(&data, 1).unwrap();
        check_orthonormal(&p);
        for x in &data {
            let back = p.reconstruct(&p.apply(x).unwrap()).unwrap();
            assert!(squared_distance(x, &back).sqrt() <= 1e-8);
        }
    }

    #[test]
    fn full_rank_is_a_rotation() {
        let data: Vec<Vec<f64>> = (0..12)
            .map(|i| (0..4).map(|j| libm::sin((i * 5 + j * 3) as f64)).collect())
            .collect();
        let p = PcaProjection::fit(&data, 4).unwrap();
        check_orthonormal(&p);
        let proj: Vec<Vec<f64>> = data.iter().map(|x| p.apply(x).unwrap()).collect();
        for a in 0..data.len() {
            for b in 0..data.len() {
                let before = squared_distance(&data[a], &data[b]).sqrt();
                let after = squared_distance(&proj[a], &proj[b]).sqrt();
                assert!((before - after).abs() <= 1e-6);
            }
        }
        let ev = p.explained_variance();
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn wide_data_uses_gram_route() {
        // 6 samples in 20 dimensions; m = n forces a zero-variance axis
        let data: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..20)
                    .map(|j| libm::cos((i * 7 + j) as f64 * 0.37))
                    .collect()
            })
            .collect();
        let p = PcaProjection::fit(&data, 6).unwrap();
        check_orthonormal(&p);
        assert_eq!(p.output_dim(), 6);
        for x in &data {
            let back = p.reconstruct(&p.apply(x).unwrap()).unwrap();
            assert!(squared_distance(x, &back).sqrt() <= 1e-8);
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let data = [[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]];
        assert!(PcaProjection::fit(&data, 3).is_err());
        assert!(PcaProjection::fit(&data, 0).is_err());
        assert!(PcaProjection::fit(&data[..1], 2).is_err());
        let p = PcaProjection::fit(&data, 2).unwrap();
        assert!(p.apply(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn projected_training_data_is_centered(
            rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 5), 6..20),
            m in 1usize..5,
        ) {
            let p = PcaProjection::fit(&rows, m).unwrap();
            let mut mean = vec![0.0; m];
            for r in &rows {
                for (a, c) in mean.iter_mut().zip(p.apply(r).unwrap()) {
                    *a += c / rows.len() as f64;
                }
            }
            prop_assert!(mean.iter().all(|v| v.abs() <= 1e-6));
        }
    }
}
