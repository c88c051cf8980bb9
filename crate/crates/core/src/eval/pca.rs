//! Principal component analysis via a Jacobi eigensolver.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::Result;

/// Fitted PCA projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Mean of the fit data.
    pub mean: Vec<f64>,
    /// Orthonormal component rows, k x d, ordered by decreasing variance.
    pub components: Matrix,
    /// Eigenvalue per kept component.
    pub explained_variance: Vec<f64>,
    /// Fraction of total variance per kept component.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    /// Cumulative explained variance of the kept components.
    pub fn cumulative_explained(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    /// Project rows of `x` (N x d) into component space (N x k).
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        let d = self.mean.len();
        if x.cols() != d {
            return Err(Error::ShapeMismatch {
                op: "pca_project",
                left: x.shape(),
                right: (x.rows(), d),
            });
        }
        let k = self.components.rows();
        let mut out = Matrix::zeros(x.rows(), k);
        for r in 0..x.rows() {
            let row = x.row(r);
            let dst = out.row_mut(r);
            for (c, o) in dst.iter_mut().enumerate() {
                let comp = self.components.row(c);
                let mut acc = 0.0;
                for i in 0..d {
                    acc += (row[i] - self.mean[i]) * comp[i];
                }
                *o = acc;
            }
        }
        Ok(out)
    }

    /// Map projections back to the original space (N x d).
    pub fn reconstruct(&self, proj: &Matrix) -> Result<Matrix> {
        let k = self.components.rows();
        if proj.cols() != k {
            return Err(Error::ShapeMismatch {
                op: "pca_reconstruct",
                left: proj.shape(),
                right: (proj.rows(), k),
            });
        }
        let d = self.mean.len();
        let mut out = Matrix::zeros(proj.rows(), d);
        for r in 0..proj.rows() {
            let dst = out.row_mut(r);
            dst.copy_from_slice(&self.mean);
            for c in 0..k {
                let w = proj.get(r, c);
                let comp = self.components.row(c);
                for i in 0..d {
                    dst[i] += w * comp[i];
                }
            }
        }
        Ok(out)
    }
}

/// Jacobi eigendecomposition of a symmetric matrix. Returns (eigenvalues,
/// eigenvectors as rows), unsorted.
fn jacobi_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                off += m.get(r, c) * m.get(r, c);
            }
        }
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + crate::num::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + crate::num::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / crate::num::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let values = (0..n).map(|i| m.get(i, i)).collect();
    // Columns of v are eigenvectors; return them as rows.
    (values, v.transpose())
}

/// Fit a k-component PCA on N x d samples (N > k required).
///
/// Components carry a deterministic sign: the entry of largest magnitude in
/// each component is positive.
pub fn fit_pca(samples: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = samples.shape();
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(alloc::format!(
            "component count {k} must be in 1..={d}"
        )));
    }
    if n <= k {
        return Err(Error::InvalidArgument(alloc::format!(
            "need more samples ({n}) than components ({k})"
        )));
    }

    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(samples.row(r).iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    // Population covariance.
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        let row = samples.row(r);
        for i in 0..d {
            let di = row[i] - mean[i];
            if di == 0.0 {
                continue;
            }
            let dst = cov.row_mut(i);
            for (j, c) in dst.iter_mut().enumerate() {
                *c += di * (row[j] - mean[j]);
            }
        }
    }
    cov.map_inplace(|v| v / n as f64);

    let (values, vectors) = jacobi_eigen(&cov);
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));

    let mut components = Matrix::zeros(k, d);
    let mut explained = Vec::with_capacity(k);
    for (row, &idx) in order.iter().take(k).enumerate() {
        let mut comp: Vec<f64> = vectors.row(idx).to_vec();
        // Deterministic sign: largest-magnitude entry positive.
        let mut max_i = 0;
        for (i, c) in comp.iter().enumerate() {
            if c.abs() > comp[max_i].abs() {
                max_i = i;
            }
        }
        if comp[max_i] < 0.0 {
            for c in comp.iter_mut() {
                *c = -*c;
            }
        }
        components.row_mut(row).copy_from_slice(&comp);
        explained.push(values[idx].max(0.0));
    }
    let ratio = explained
        .iter()
        .map(|&v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        explained_variance_ratio: ratio,
    })
}
