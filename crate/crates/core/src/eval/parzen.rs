//! Parzen-window density estimation with cross-validated bandwidth.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

/// Isotropic Gaussian kernel density estimate over a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct ParzenModel {
    /// Support samples, N x d.
    pub support: Matrix,
    /// Kernel bandwidth (standard deviation per axis).
    pub bandwidth: f64,
}

/// Log-density of one point under the mixture, via log-sum-exp.
fn log_density(support: &Matrix, h: f64, point: &[f64]) -> f64 {
    let (n, d) = support.shape();
    let inv2h2 = 1.0 / (2.0 * h * h);
    let mut max_e = f64::NEG_INFINITY;
    let mut exponents = Vec::with_capacity(n);
    for r in 0..n {
        let row = support.row(r);
        let mut sq = 0.0;
        for (a, b) in row.iter().zip(point.iter()) {
            let dif = a - b;
            sq += dif * dif;
        }
        let e = -sq * inv2h2;
        max_e = max_e.max(e);
        exponents.push(e);
    }
    let mut sum = 0.0;
    for e in exponents {
        sum += num::exp(e - max_e);
    }
    max_e + num::ln(sum) - num::ln(n as f64) - d as f64 / 2.0 * num::ln(2.0 * core::f64::consts::PI * h * h)
}

impl ParzenModel {
    /// Build directly from a support set and bandwidth.
    pub fn new(support: Matrix, bandwidth: f64) -> Result<ParzenModel> {
        if support.rows() == 0 {
            return Err(Error::EmptyInput("parzen support"));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidArgument("bandwidth must be positive".into()));
        }
        Ok(ParzenModel { support, bandwidth })
    }

    /// Log-density of a single point.
    pub fn log_density(&self, point: &[f64]) -> f64 {
        log_density(&self.support, self.bandwidth, point)
    }
}

/// Mean nearest-neighbor distance of the support (basis for the default
/// bandwidth grid).
fn mean_nn_distance(support: &Matrix) -> f64 {
    let n = support.rows();
    if n < 2 {
        return 1.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = support.row(i);
        let mut best = f64::INFINITY;
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut sq = 0.0;
            for (x, y) in a.iter().zip(support.row(j).iter()) {
                let d = x - y;
                sq += d * d;
            }
            best = best.min(sq);
        }
        total += num::sqrt(best);
    }
    total / n as f64
}

/// Default grid: `count` log-spaced bandwidths spanning 0.01x to 10x the
/// mean nearest-neighbor distance of the support.
pub fn default_bandwidth_grid(support: &Matrix, count: usize) -> Vec<f64> {
    let base = mean_nn_distance(support).max(1e-12);
    let (lo, hi) = (0.01 * base, 10.0 * base);
    if count <= 1 {
        return vec![num::sqrt(lo * hi)];
    }
    let log_lo = num::ln(lo);
    let log_hi = num::ln(hi);
    (0..count)
        .map(|i| num::exp(log_lo + (log_hi - log_lo) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Fold of row `r` among `n` rows: contiguous blocks, so temporally
/// adjacent trajectory frames stay in the same fold and do not leak
/// between train and held-out sides of the bandwidth selection.
fn fold_of(r: usize, n: usize, folds: usize) -> usize {
    (r * folds / n).min(folds - 1)
}

/// Select the bandwidth maximizing mean held-out log-likelihood over a
/// k-fold split of the generated samples (contiguous row blocks), then
/// return the model with the full support.
pub fn fit_parzen(generated: &Matrix, bandwidth_grid: &[f64], folds: usize) -> Result<ParzenModel> {
    let n = generated.rows();
    if bandwidth_grid.is_empty() {
        return Err(Error::EmptyInput("bandwidth grid"));
    }
    if folds < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    if n < folds {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least {folds} samples for {folds}-fold selection, got {n}"
        )));
    }
    for &h in bandwidth_grid {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument("bandwidths must be positive".into()));
        }
    }

    // Per-fold training supports, built once.
    let supports: Vec<Matrix> = (0..folds)
        .map(|fold| {
            let train_rows: Vec<usize> = (0..n).filter(|&r| fold_of(r, n, folds) != fold).collect();
            let mut support = Matrix::zeros(train_rows.len(), generated.cols());
            for (dst, &src) in train_rows.iter().enumerate() {
                support.row_mut(dst).copy_from_slice(generated.row(src));
            }
            support
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, bandwidth_grid[0]);
    for &h in bandwidth_grid {
        let mut total = 0.0;
        let mut count = 0usize;
        for (fold, support) in supports.iter().enumerate() {
            for r in 0..n {
                if fold_of(r, n, folds) != fold {
                    continue;
                }
                total += log_density(support, h, generated.row(r));
                count += 1;
            }
        }
        let score = total / count as f64;
        if score > best.0 {
            best = (score, h);
        }
    }
    ParzenModel::new(generated.clone(), best.1)
}

/// Mean and standard deviation of per-sample log-likelihoods of `test`
/// under the model.
pub fn loglik(model: &ParzenModel, test: &Matrix) -> Result<(f64, f64)> {
    if test.rows() == 0 {
        return Err(Error::EmptyInput("test samples"));
    }
    if test.cols() != model.support.cols() {
        return Err(Error::ShapeMismatch {
            op: "parzen_loglik",
            left: test.shape(),
            right: (test.rows(), model.support.cols()),
        });
    }
    let n = test.rows();
    let mut values = Vec::with_capacity(n);
    for r in 0..n {
        values.push(model.log_density(test.row(r)));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok((mean, num::sqrt(var)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn single_support_mode_value_is_analytic() {
        let d = 15usize;
        let h = 0.7;
        let support = Matrix::zeros(1, d);
        let model = ParzenModel::new(support, h).unwrap();
        let got = model.log_density(&vec![0.0; d]);
        let want = -(d as f64 / 2.0) * num::ln(2.0 * core::f64::consts::PI * h * h);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn far_point_is_small_but_finite() {
        let d = 15usize;
        let h = 0.5;
        let model = ParzenModel::new(Matrix::zeros(4, d), h).unwrap();
        let mode = model.log_density(&vec![0.0; d]);
        let far = model.log_density(&vec![50.0; d]);
        assert!(far.is_finite());
        assert!(far < mode - 1000.0);
    }

    #[test]
    fn matches_bruteforce_mixture_oracle() {
        let mut rng = SeededRng::new(3);
        let support = Matrix::from_fn(10, 15, |_, _| rng.gaussian());
        let test = Matrix::from_fn(5, 15, |_, _| rng.gaussian());
        let h = 0.9;
        let model = ParzenModel::new(support.clone(), h).unwrap();
        let (mean, _) = loglik(&model, &test).unwrap();

        // Oracle: direct sum of Gaussian densities, no log-sum-exp.
        let norm = num::powf(2.0 * core::f64::consts::PI * h * h, -15.0 / 2.0);
        let mut oracle_total = 0.0;
        for r in 0..5 {
            let mut density = 0.0;
            for s in 0..10 {
                let mut sq = 0.0;
                for c in 0..15 {
                    let d = test.get(r, c) - support.get(s, c);
                    sq += d * d;
                }
                density += norm * num::exp(-sq / (2.0 * h * h));
            }
            oracle_total += num::ln(density / 10.0);
        }
        let oracle_mean = oracle_total / 5.0;
        assert!((mean - oracle_mean).abs() < 1e-9, "{mean} vs {oracle_mean}");
    }

    #[test]
    fn density_never_exceeds_single_point_mode() {
        let mut rng = SeededRng::new(4);
        let support = Matrix::from_fn(30, 15, |_, _| rng.gaussian());
        let h = 0.6;
        let model = ParzenModel::new(support, h).unwrap();
        let bound = -(15.0 / 2.0) * num::ln(2.0 * core::f64::consts::PI * h * h);
        for _ in 0..50 {
            let p: Vec<f64> = (0..15).map(|_| rng.gaussian()).collect();
            assert!(model.log_density(&p) <= bound + 1e-12);
        }
    }

    #[test]
    fn singleton_grid_is_chosen() {
        let mut rng = SeededRng::new(5);
        let data = Matrix::from_fn(25, 3, |_, _| rng.gaussian());
        let model = fit_parzen(&data, &[0.37], 5).unwrap();
        assert_eq!(model.bandwidth, 0.37);
        assert!(fit_parzen(&data, &[], 5).is_err());
    }

    #[test]
    fn cv_scores_are_finite_across_grid() {
        let mut rng = SeededRng::new(6);
        let data = Matrix::from_fn(40, 2, |_, _| rng.gaussian());
        let grid = default_bandwidth_grid(&data, 20);
        assert_eq!(grid.len(), 20);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        // Selection must succeed and produce a grid member.
        let model = fit_parzen(&data, &grid, 5).unwrap();
        assert!(grid.contains(&model.bandwidth));
    }

    #[test]
    fn selected_bandwidth_shrinks_with_sample_count() {
        let mut chosen = Vec::new();
        for &n in &[100usize, 1000, 10000] {
            let mut rng = SeededRng::new(7);
            let data = Matrix::from_fn(n, 1, |_, _| rng.gaussian());
            // Fixed absolute grid so the comparison is meaningful.
            let grid: Vec<f64> = (0..24)
                .map(|i| 0.01 * num::powf(1.4, i as f64))
                .collect();
            let model = fit_parzen(&data, &grid, 5).unwrap();
            chosen.push(model.bandwidth);
        }
        assert!(
            chosen[0] > chosen[1] && chosen[1] > chosen[2],
            "bandwidths {chosen:?}"
        );
    }
}
