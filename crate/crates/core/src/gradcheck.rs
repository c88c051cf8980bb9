//! Central-difference verification of analytic gradients.
//!
//! Every layer and loss in this crate ships a hand-written backward pass;
//! this module is the contract they are all tested against. The caller
//! provides a deterministic scalar loss over a set of parameter tensors plus
//! the analytic gradients at the current point; each parameter element is
//! perturbed by +/-eps and the central difference is compared against the
//! analytic value.

use alloc::vec::Vec;

use crate::matrix::Matrix;

/// Outcome of a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Max relative error per parameter tensor (infinity when the loss went
    /// non-finite while perturbing that tensor).
    pub per_param: Vec<f64>,
    /// Largest relative error across all tensors.
    pub max_rel_err: f64,
    /// `max_rel_err <= tol`.
    pub pass: bool,
    /// Perturbation step used.
    pub eps: f64,
    /// Tolerance used.
    pub tol: f64,
    /// Set when a perturbed evaluation produced a non-finite loss:
    /// (parameter tensor index, element index).
    pub non_finite: Option<(usize, usize)>,
}

/// Relative error with the denominator floored at 1e-8 so near-zero
/// gradients do not blow up the ratio.
#[inline]
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compare analytic gradients against central differences.
///
/// `loss` must be a pure deterministic function of `params` (freeze any
/// dropout masks or noise draws before calling). `analytic` mirrors `params`
/// tensor by tensor.
pub fn check_gradients(
    params: &[Matrix],
    analytic: &[Matrix],
    mut loss: impl FnMut(&[Matrix]) -> f64,
    eps: f64,
    tol: f64,
) -> GradCheckReport {
    assert_eq!(
        params.len(),
        analytic.len(),
        "one gradient tensor per parameter tensor"
    );
    let mut work: Vec<Matrix> = params.to_vec();
    let mut per_param = Vec::with_capacity(params.len());
    let mut max_rel_err: f64 = 0.0;
    let mut non_finite = None;

    'tensors: for p in 0..params.len() {
        assert_eq!(params[p].shape(), analytic[p].shape());
        let mut worst = 0.0f64;
        for i in 0..params[p].len() {
            let theta = params[p].as_slice()[i];
            work[p].as_mut_slice()[i] = theta + eps;
            let up = loss(&work);
            work[p].as_mut_slice()[i] = theta - eps;
            let down = loss(&work);
            work[p].as_mut_slice()[i] = theta;
            if !up.is_finite() || !down.is_finite() {
                non_finite = Some((p, i));
                per_param.push(f64::INFINITY);
                max_rel_err = f64::INFINITY;
                continue 'tensors;
            }
            let numeric = (up - down) / (2.0 * eps);
            let rel = relative_error(analytic[p].as_slice()[i], numeric);
            worst = worst.max(rel);
        }
        per_param.push(worst);
        max_rel_err = max_rel_err.max(worst);
    }

    GradCheckReport {
        per_param,
        max_rel_err,
        pass: max_rel_err <= tol,
        eps,
        tol,
        non_finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_passes() {
        // f(x) = x^2 at x = 3: gradient 6.
        let params = [Matrix::from_vec(1, 1, vec![3.0]).unwrap()];
        let analytic = [Matrix::from_vec(1, 1, vec![6.0]).unwrap()];
        let report = check_gradients(
            &params,
            &analytic,
            |p| p[0].get(0, 0) * p[0].get(0, 0),
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
        assert_eq!(report.pass, report.max_rel_err <= report.tol);
    }

    #[test]
    fn corrupted_gradient_fails() {
        let params = [Matrix::from_vec(1, 1, vec![3.0]).unwrap()];
        let analytic = [Matrix::from_vec(1, 1, vec![6.0 * 1.01]).unwrap()];
        let report = check_gradients(
            &params,
            &analytic,
            |p| p[0].get(0, 0) * p[0].get(0, 0),
            1e-5,
            1e-4,
        );
        assert!(!report.pass);
    }

    #[test]
    fn non_finite_loss_reports_parameter_index() {
        let params = [
            Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
            Matrix::from_vec(1, 2, vec![0.5, 2.0]).unwrap(),
        ];
        let analytic = [Matrix::zeros(1, 1), Matrix::zeros(1, 2)];
        // Loss goes infinite whenever the second tensor's last element moves.
        let report = check_gradients(
            &params,
            &analytic,
            |p| {
                if (p[1].get(0, 1) - 2.0).abs() > 1e-12 {
                    f64::INFINITY
                } else {
                    0.0
                }
            },
            1e-5,
            1e-4,
        );
        assert!(!report.pass);
        assert_eq!(report.non_finite, Some((1, 1)));
    }

    #[test]
    fn multi_tensor_linear_map() {
        // f = sum(w . x) with x fixed: grad w = x.
        let x = [0.3, -1.2, 0.8];
        let params = [Matrix::from_vec(1, 3, vec![0.1, 0.2, -0.4]).unwrap()];
        let analytic = [Matrix::from_vec(1, 3, x.to_vec()).unwrap()];
        let report = check_gradients(
            &params,
            &analytic,
            |p| p[0].as_slice().iter().zip(x.iter()).map(|(w, xi)| w * xi).sum(),
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }
}
