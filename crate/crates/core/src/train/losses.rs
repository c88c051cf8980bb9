//! Regression and adversarial losses with analytic gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

/// Smallest target variance a channel may have before the concordance loss
/// skips it.
const CCC_VAR_FLOOR: f64 = 1e-12;

/// Probability clamp applied inside the binary cross-entropy.
pub const BCE_CLAMP: f64 = 1e-7;

/// Per-channel agreement statistics behind the concordance loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    /// Mean of the prediction.
    pub mu_y: f64,
    /// Mean of the target.
    pub mu_t: f64,
    /// Population variance of the prediction.
    pub var_y: f64,
    /// Population variance of the target.
    pub var_t: f64,
    /// Pearson correlation (0 when either variance vanishes).
    pub rho: f64,
    /// Concordance correlation coefficient.
    pub ccc: f64,
}

/// Statistics of two paired slices.
pub fn channel_stats(y: &[f64], t: &[f64]) -> ChannelStats {
    assert_eq!(y.len(), t.len());
    let n = y.len() as f64;
    let mu_y = y.iter().sum::<f64>() / n;
    let mu_t = t.iter().sum::<f64>() / n;
    let mut var_y = 0.0;
    let mut var_t = 0.0;
    let mut cov = 0.0;
    for (a, b) in y.iter().zip(t.iter()) {
        let dy = a - mu_y;
        let dt = b - mu_t;
        var_y += dy * dy;
        var_t += dt * dt;
        cov += dy * dt;
    }
    var_y /= n;
    var_t /= n;
    cov /= n;
    let denom_rho = num::sqrt(var_y * var_t);
    let rho = if denom_rho > 0.0 { cov / denom_rho } else { 0.0 };
    let shift = mu_y - mu_t;
    let d = var_y + var_t + shift * shift;
    let ccc = if d > 0.0 { 2.0 * cov / d } else { 0.0 };
    ChannelStats {
        mu_y,
        mu_t,
        var_y,
        var_t,
        rho,
        ccc,
    }
}

/// A loss value with its gradient with respect to the prediction.
#[derive(Debug, Clone)]
pub struct LossValue {
    /// Scalar loss.
    pub loss: f64,
    /// d loss / d prediction, same shape as the prediction.
    pub grad: Matrix,
    /// Channels skipped because the target had no variance (concordance
    /// loss only).
    pub skipped_channels: Vec<usize>,
}

fn count_valid(t_len: usize, mask: Option<&[bool]>) -> Result<usize> {
    match mask {
        None => Ok(t_len),
        Some(m) => {
            assert_eq!(m.len(), t_len, "mask length");
            let n = m.iter().filter(|&&v| v).count();
            if n == 0 {
                Err(Error::EmptyInput("all frames masked"))
            } else {
                Ok(n)
            }
        }
    }
}

#[inline]
fn frame_valid(mask: Option<&[bool]>, t: usize) -> bool {
    mask.map_or(true, |m| m[t])
}

/// Mean squared error over unmasked frames and channels.
pub fn mse_loss(p: &Matrix, t: &Matrix, mask: Option<&[bool]>) -> Result<LossValue> {
    if p.shape() != t.shape() {
        return Err(Error::ShapeMismatch {
            op: "mse_loss",
            left: p.shape(),
            right: t.shape(),
        });
    }
    let valid = count_valid(p.rows(), mask)?;
    let count = (valid * p.cols()) as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(p.rows(), p.cols());
    for r in 0..p.rows() {
        if !frame_valid(mask, r) {
            continue;
        }
        let (pr, tr) = (p.row(r), t.row(r));
        let gr = grad.row_mut(r);
        for c in 0..pr.len() {
            let d = pr[c] - tr[c];
            loss += d * d;
            gr[c] = 2.0 * d / count;
        }
    }
    Ok(LossValue {
        loss: loss / count,
        grad,
        skipped_channels: Vec::new(),
    })
}

/// Concordance loss: 1 - mean per-channel CCC over unmasked frames.
///
/// Channels whose target variance vanishes are skipped and reported in
/// `skipped_channels`; it is an error when every channel is skipped or
/// fewer than two frames are unmasked.
pub fn ccc_loss(p: &Matrix, t: &Matrix, mask: Option<&[bool]>) -> Result<LossValue> {
    if p.shape() != t.shape() {
        return Err(Error::ShapeMismatch {
            op: "ccc_loss",
            left: p.shape(),
            right: t.shape(),
        });
    }
    let valid = count_valid(p.rows(), mask)?;
    if valid < 2 {
        return Err(Error::InvalidArgument(
            "ccc_loss needs at least 2 unmasked frames".into(),
        ));
    }
    let rows: Vec<usize> = (0..p.rows()).filter(|&r| frame_valid(mask, r)).collect();
    let n = rows.len() as f64;

    let mut grad = Matrix::zeros(p.rows(), p.cols());
    let mut skipped = Vec::new();
    let mut ccc_sum = 0.0;
    let mut kept = 0usize;

    let mut py = vec![0.0; rows.len()];
    let mut ty = vec![0.0; rows.len()];
    for c in 0..p.cols() {
        for (k, &r) in rows.iter().enumerate() {
            py[k] = p.get(r, c);
            ty[k] = t.get(r, c);
        }
        let stats = channel_stats(&py, &ty);
        if stats.var_t <= CCC_VAR_FLOOR {
            skipped.push(c);
            continue;
        }
        kept += 1;
        ccc_sum += stats.ccc;
        let d = stats.var_y + stats.var_t + (stats.mu_y - stats.mu_t) * (stats.mu_y - stats.mu_t);
        // dCCC/dy_i = 2/(n d) ((t_i - mu_t) - ccc (y_i - mu_t))
        let scale = 2.0 / (n * d);
        for (k, &r) in rows.iter().enumerate() {
            let dccc = scale * ((ty[k] - stats.mu_t) - stats.ccc * (py[k] - stats.mu_t));
            grad.set(r, c, -dccc);
        }
    }
    if kept == 0 {
        return Err(Error::InvalidArgument(
            "ccc_loss: every target channel has zero variance".into(),
        ));
    }
    // Average over kept channels.
    let k = kept as f64;
    grad.map_inplace(|v| v / k);
    Ok(LossValue {
        loss: 1.0 - ccc_sum / k,
        grad,
        skipped_channels: skipped,
    })
}

/// Frame-averaged binary cross-entropy of per-frame probabilities against a
/// constant label, with the probabilities clamped to
/// [`BCE_CLAMP`, 1 - `BCE_CLAMP`] before the logs.
pub fn bce(y: &Matrix, label: f64) -> (f64, Matrix) {
    let frames = y.len() as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(y.rows(), y.cols());
    for r in 0..y.rows() {
        for c in 0..y.cols() {
            let raw = y.get(r, c);
            let v = raw.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            loss -= label * num::ln(v) + (1.0 - label) * num::ln(1.0 - v);
            // Gradient of the clamped expression: zero outside the clamp.
            if raw > BCE_CLAMP && raw < 1.0 - BCE_CLAMP {
                grad.set(r, c, (-label / v + (1.0 - label) / (1.0 - v)) / frames);
            }
        }
    }
    (loss / frames, grad)
}

/// The two adversarial objectives given per-frame discriminator outputs for
/// real pairs, generated fakes and mismatched fakes.
///
/// `d_loss` weights the three streams by `fake_mix` = (real, generated,
/// mismatched); `g_loss` scores the generated fakes against the real label
/// (the label flip that trains the generator).
pub fn adversarial_losses(
    y_real: &Matrix,
    y_fake_gen: &Matrix,
    y_fake_mis: &Matrix,
    fake_mix: (usize, usize, usize),
) -> (f64, f64) {
    let (wr, wg, wm) = fake_mix;
    let total = (wr + wg + wm) as f64;
    let (l_real, _) = bce(y_real, 1.0);
    let (l_gen, _) = bce(y_fake_gen, 0.0);
    let (l_mis, _) = bce(y_fake_mis, 0.0);
    let d_loss = (wr as f64 * l_real + wg as f64 * l_gen + wm as f64 * l_mis) / total;
    let (g_loss, _) = bce(y_fake_gen, 1.0);
    (d_loss, g_loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::check_gradients;
    use crate::rng::SeededRng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = SeededRng::new(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
    }

    #[test]
    fn mse_reference_values() {
        let t = random_matrix(6, 4, 1);
        let zero = mse_loss(&t, &t, None).unwrap();
        assert_eq!(zero.loss, 0.0);

        let shifted = t.map(|v| v + 1.0);
        let one = mse_loss(&shifted, &t, None).unwrap();
        assert!((one.loss - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mse_respects_mask() {
        let t = Matrix::zeros(4, 2);
        let mut p = Matrix::zeros(4, 2);
        // Only the masked-out frame differs.
        p.set(3, 0, 100.0);
        p.set(3, 1, 100.0);
        let mask = vec![true, true, true, false];
        let l = mse_loss(&p, &t, Some(&mask)).unwrap();
        assert_eq!(l.loss, 0.0);
        assert_eq!(l.grad.get(3, 0), 0.0);
        assert!(mse_loss(&p, &t, Some(&vec![false; 4])).is_err());
    }

    #[test]
    fn mse_gradient_matches_central_differences() {
        let t = random_matrix(5, 3, 2);
        let p = random_matrix(5, 3, 3);
        let mask = vec![true, true, false, true, true];
        let l = mse_loss(&p, &t, Some(&mask)).unwrap();
        let report = check_gradients(
            &[p.clone()],
            &[l.grad.clone()],
            |params| mse_loss(&params[0], &t, Some(&mask)).unwrap().loss,
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn ccc_perfect_agreement_is_zero() {
        let t = random_matrix(50, 4, 4);
        let l = ccc_loss(&t, &t, None).unwrap();
        assert!(l.loss.abs() < 1e-12, "loss {}", l.loss);
    }

    #[test]
    fn ccc_constant_shift_matches_closed_form() {
        let t = random_matrix(200, 3, 5);
        let c = 0.7;
        let p = t.map(|v| v + c);
        let l = ccc_loss(&p, &t, None).unwrap();
        // Per channel: CCC = 2 var / (2 var + c^2).
        let mut want = 0.0;
        for ch in 0..3 {
            let col: Vec<f64> = (0..200).map(|r| t.get(r, ch)).collect();
            let stats = channel_stats(&col, &col);
            want += 2.0 * stats.var_t / (2.0 * stats.var_t + c * c);
        }
        want = 1.0 - want / 3.0;
        assert!((l.loss - want).abs() < 1e-9, "{} vs {want}", l.loss);
    }

    #[test]
    fn ccc_independent_sequences_score_one() {
        let mut rng = SeededRng::new(99);
        let n = 10_000;
        let p = Matrix::from_fn(n, 1, |_, _| rng.gaussian());
        let t = Matrix::from_fn(n, 1, |_, _| rng.gaussian());
        let l = ccc_loss(&p, &t, None).unwrap();
        assert!((l.loss - 1.0).abs() < 2e-2, "loss {}", l.loss);
    }

    #[test]
    fn ccc_skips_flat_target_channels() {
        let mut t = random_matrix(30, 3, 6);
        for r in 0..30 {
            t.set(r, 1, 4.2);
        }
        let p = random_matrix(30, 3, 7);
        let l = ccc_loss(&p, &t, None).unwrap();
        assert_eq!(l.skipped_channels, vec![1]);
        for r in 0..30 {
            assert_eq!(l.grad.get(r, 1), 0.0);
        }
        // All-flat target is an error.
        let flat = Matrix::filled(30, 3, 1.0);
        assert!(ccc_loss(&p, &flat, None).is_err());
    }

    #[test]
    fn ccc_gradient_matches_central_differences() {
        let t = random_matrix(12, 3, 8);
        let p = random_matrix(12, 3, 9);
        let mask = {
            let mut m = vec![true; 12];
            m[4] = false;
            m
        };
        let l = ccc_loss(&p, &t, Some(&mask)).unwrap();
        let report = check_gradients(
            &[p.clone()],
            &[l.grad.clone()],
            |params| ccc_loss(&params[0], &t, Some(&mask)).unwrap().loss,
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn ccc_loss_stays_in_range() {
        for seed in 0..20 {
            let p = random_matrix(40, 2, 100 + seed);
            let t = random_matrix(40, 2, 200 + seed);
            let l = ccc_loss(&p, &t, None).unwrap();
            assert!((0.0..=2.0).contains(&l.loss), "loss {}", l.loss);
        }
    }

    #[test]
    fn bce_reference_values() {
        let y = Matrix::filled(10, 1, 0.5);
        let (l1, _) = bce(&y, 1.0);
        let (l0, _) = bce(&y, 0.0);
        assert!((l1 - core::f64::consts::LN_2).abs() < 1e-12);
        assert!((l0 - core::f64::consts::LN_2).abs() < 1e-12);

        let (d_loss, g_loss) = adversarial_losses(&y, &y, &y, (1, 1, 1));
        assert!((d_loss - core::f64::consts::LN_2).abs() < 1e-12);
        assert!((g_loss - core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_discriminator_limits() {
        let ones = Matrix::filled(8, 1, 1.0 - 1e-9);
        let zeros = Matrix::filled(8, 1, 1e-9);
        let (d_loss, g_loss) = adversarial_losses(&ones, &zeros, &zeros, (1, 1, 1));
        assert!(d_loss < 1e-6, "d_loss {d_loss}");
        assert!(g_loss > 10.0, "g_loss {g_loss}");
    }

    #[test]
    fn bce_gradient_matches_central_differences() {
        let mut rng = SeededRng::new(17);
        let y = Matrix::from_fn(9, 1, |_, _| rng.uniform(0.05, 0.95));
        for label in [0.0, 1.0] {
            let (_, grad) = bce(&y, label);
            let report = check_gradients(
                &[y.clone()],
                &[grad],
                |params| bce(&params[0], label).0,
                1e-6,
                1e-4,
            );
            assert!(report.pass, "label {label}: {}", report.max_rel_err);
        }
    }
}
