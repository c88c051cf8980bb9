//! Sliding-window feedforward baseline: three relu layers with batch
//! normalization and dropout, mapping a 41-frame feature window to a
//! 13-frame motion window centered on the same frame.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::MOTION_DIM;
use crate::error::Error;
use crate::matrix::{gemv_acc, gemv_t_acc, ger_acc, Matrix};
use crate::num;
use crate::rng::SeededRng;
use crate::Result;

use super::{glorot_init, Linear, ParamSet};

/// Input context: 41 frames (about 340 ms at 120 fps).
pub const SWDNN_IN_FRAMES: usize = 41;
/// Output span: 13 frames (about 100 ms) centered on the input window.
pub const SWDNN_OUT_FRAMES: usize = 13;

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.99;

/// Fully connected layer with batch normalization parameters and running
/// statistics. Order per layer: linear -> batch norm -> relu -> dropout.
#[derive(Debug, Clone)]
pub struct DenseBn {
    /// Weights, out x in (no bias: batch-norm's shift subsumes it).
    pub w: Matrix,
    /// Batch-norm scale, 1 x out.
    pub gamma: Matrix,
    /// Batch-norm shift, 1 x out.
    pub beta: Matrix,
    /// Running mean (eval-mode statistics), 1 x out.
    pub running_mean: Matrix,
    /// Running variance, 1 x out.
    pub running_var: Matrix,
}

impl DenseBn {
    fn new(n_in: usize, n_out: usize, rng: &mut SeededRng) -> DenseBn {
        DenseBn {
            w: glorot_init(n_in, n_out, rng),
            gamma: Matrix::filled(1, n_out, 1.0),
            beta: Matrix::zeros(1, n_out),
            running_mean: Matrix::zeros(1, n_out),
            running_var: Matrix::filled(1, n_out, 1.0),
        }
    }
}

/// The sliding-window network. Dropout is inverted (activations scaled by
/// 1/keep at train time) so evaluation needs no rescaling.
#[derive(Debug, Clone)]
pub struct SwdnnNet {
    feature_dim: usize,
    hidden: usize,
    /// Dropout probability on every relu layer.
    pub dropout: f64,
    /// The three hidden layers.
    pub layers: Vec<DenseBn>,
    /// Output head, hidden -> 13 * 45.
    pub head: Linear,
}

/// Cache from a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct SwdnnCache {
    /// Input to each hidden layer (and the head input last), B x in.
    pub inputs: Vec<Matrix>,
    /// Normalized activations per hidden layer, B x H.
    pub xhat: Vec<Matrix>,
    /// 1/sqrt(var + eps) per hidden layer.
    pub inv_std: Vec<Vec<f64>>,
    /// Post-batch-norm, pre-relu values per hidden layer.
    pub bn_out: Vec<Matrix>,
    /// Dropout masks (0 or 1 entries) per hidden layer.
    pub masks: Vec<Matrix>,
}

impl SwdnnNet {
    /// Fresh network; `hidden` is 2000 in the reference configuration.
    pub fn new(feature_dim: usize, hidden: usize, rng: &mut SeededRng) -> SwdnnNet {
        let n_in = SWDNN_IN_FRAMES * feature_dim;
        let n_out = SWDNN_OUT_FRAMES * MOTION_DIM;
        let mut layers = Vec::with_capacity(3);
        let mut prev = n_in;
        for _ in 0..3 {
            layers.push(DenseBn::new(prev, hidden, rng));
            prev = hidden;
        }
        SwdnnNet {
            feature_dim,
            hidden,
            dropout: 0.5,
            layers,
            head: Linear::new(hidden, n_out, rng),
        }
    }

    /// Speech feature width F.
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Hidden layer width.
    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    /// Flattened input width 41 * F.
    pub fn input_width(&self) -> usize {
        SWDNN_IN_FRAMES * self.feature_dim
    }

    /// Flattened output width 13 * 45.
    pub fn output_width(&self) -> usize {
        SWDNN_OUT_FRAMES * MOTION_DIM
    }

    fn linear_layer(&self, l: usize, x: &Matrix) -> Matrix {
        let layer = &self.layers[l];
        let b = x.rows();
        let mut out = Matrix::zeros(b, layer.w.rows());
        for r in 0..b {
            gemv_acc(&layer.w, x.row(r), out.row_mut(r));
        }
        out
    }

    /// Draw fresh dropout masks (entries 0 or 1).
    pub fn draw_masks(&self, batch: usize, rng: &mut SeededRng) -> Vec<Matrix> {
        self.layers
            .iter()
            .map(|layer| {
                Matrix::from_fn(batch, layer.w.rows(), |_, _| {
                    if rng.next_f64() < self.dropout {
                        0.0
                    } else {
                        1.0
                    }
                })
            })
            .collect()
    }

    /// Train-mode forward with the given dropout masks. Pure: batch
    /// statistics are used but running statistics are not updated.
    pub fn forward_train_frozen(&self, x: &Matrix, masks: &[Matrix]) -> (Matrix, SwdnnCache) {
        let (out, cache, _) = self.forward_train_impl(x, masks);
        (out, cache)
    }

    fn forward_train_impl(
        &self,
        x: &Matrix,
        masks: &[Matrix],
    ) -> (Matrix, SwdnnCache, Vec<(Vec<f64>, Vec<f64>)>) {
        assert_eq!(x.cols(), self.input_width(), "swdnn input width");
        assert_eq!(masks.len(), self.layers.len());
        let b = x.rows();
        let keep = 1.0 - self.dropout;
        let mut batch_stats = Vec::with_capacity(3);

        let mut cache = SwdnnCache {
            inputs: Vec::with_capacity(4),
            xhat: Vec::with_capacity(3),
            inv_std: Vec::with_capacity(3),
            bn_out: Vec::with_capacity(3),
            masks: masks.to_vec(),
        };

        let mut cur = x.clone();
        for l in 0..self.layers.len() {
            cache.inputs.push(cur.clone());
            let lin = self.linear_layer(l, &cur);
            let h = lin.cols();

            // Batch statistics (population variance).
            let mut mu = vec![0.0; h];
            let mut var = vec![0.0; h];
            for r in 0..b {
                for (j, v) in lin.row(r).iter().enumerate() {
                    mu[j] += v;
                }
            }
            for m in mu.iter_mut() {
                *m /= b as f64;
            }
            for r in 0..b {
                for (j, v) in lin.row(r).iter().enumerate() {
                    let d = v - mu[j];
                    var[j] += d * d;
                }
            }
            for v in var.iter_mut() {
                *v /= b as f64;
            }
            let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / num::sqrt(v + BN_EPS)).collect();

            let layer = &self.layers[l];
            let mut xhat = Matrix::zeros(b, h);
            let mut bn = Matrix::zeros(b, h);
            let mut act = Matrix::zeros(b, h);
            for r in 0..b {
                for j in 0..h {
                    let xh = (lin.get(r, j) - mu[j]) * inv_std[j];
                    xhat.set(r, j, xh);
                    let y = layer.gamma.get(0, j) * xh + layer.beta.get(0, j);
                    bn.set(r, j, y);
                    let relu = y.max(0.0);
                    act.set(r, j, relu * masks[l].get(r, j) / keep);
                }
            }
            cache.xhat.push(xhat);
            cache.inv_std.push(inv_std);
            cache.bn_out.push(bn);
            batch_stats.push((mu, var));
            cur = act;
        }
        cache.inputs.push(cur.clone());

        let mut out = Matrix::zeros(b, self.output_width());
        for r in 0..b {
            let row = out.row_mut(r);
            row.copy_from_slice(self.head.b.row(0));
            gemv_acc(&self.head.w, cur.row(r), row);
        }
        (out, cache, batch_stats)
    }

    /// Train-mode forward: draws masks from `rng` and updates the running
    /// batch-norm statistics.
    pub fn forward_train(&mut self, x: &Matrix, rng: &mut SeededRng) -> (Matrix, SwdnnCache) {
        let masks = self.draw_masks(x.rows(), rng);
        let (out, cache, batch_stats) = self.forward_train_impl(x, &masks);
        for (layer, (mu, var)) in self.layers.iter_mut().zip(batch_stats.iter()) {
            for j in 0..mu.len() {
                let rm = layer.running_mean.get(0, j);
                let rv = layer.running_var.get(0, j);
                layer
                    .running_mean
                    .set(0, j, BN_MOMENTUM * rm + (1.0 - BN_MOMENTUM) * mu[j]);
                layer
                    .running_var
                    .set(0, j, BN_MOMENTUM * rv + (1.0 - BN_MOMENTUM) * var[j]);
            }
        }
        (out, cache)
    }

    /// Eval-mode forward: running statistics, no dropout. Deterministic.
    pub fn forward_eval(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols(), self.input_width(), "swdnn input width");
        let b = x.rows();
        let mut cur = x.clone();
        for l in 0..self.layers.len() {
            let lin = self.linear_layer(l, &cur);
            let layer = &self.layers[l];
            let h = lin.cols();
            let mut act = Matrix::zeros(b, h);
            for r in 0..b {
                for j in 0..h {
                    let inv = 1.0 / num::sqrt(layer.running_var.get(0, j) + BN_EPS);
                    let xh = (lin.get(r, j) - layer.running_mean.get(0, j)) * inv;
                    let y = layer.gamma.get(0, j) * xh + layer.beta.get(0, j);
                    act.set(r, j, y.max(0.0));
                }
            }
            cur = act;
        }
        let mut out = Matrix::zeros(b, self.output_width());
        for r in 0..b {
            let row = out.row_mut(r);
            row.copy_from_slice(self.head.b.row(0));
            gemv_acc(&self.head.w, cur.row(r), row);
        }
        out
    }

    /// One 41-frame window -> one 13 x 45 motion window (eval mode when
    /// `train_rng` is `None`, freshly masked train mode otherwise).
    pub fn forward_window(
        &self,
        window: &Matrix,
        train_rng: Option<&mut SeededRng>,
    ) -> Result<Matrix> {
        if window.rows() != SWDNN_IN_FRAMES || window.cols() != self.feature_dim {
            return Err(Error::ShapeMismatch {
                op: "swdnn_forward",
                left: window.shape(),
                right: (SWDNN_IN_FRAMES, self.feature_dim),
            });
        }
        let flat = Matrix::from_vec(1, self.input_width(), window.as_slice().to_vec())?;
        let out = match train_rng {
            None => self.forward_eval(&flat),
            Some(rng) => {
                let masks = self.draw_masks(1, rng);
                self.forward_train_frozen(&flat, &masks).0
            }
        };
        Matrix::from_vec(SWDNN_OUT_FRAMES, MOTION_DIM, out.as_slice().to_vec())
    }

    /// Backward through a train-mode (frozen-mask) pass. `dout` is
    /// B x (13*45); returns gradients in parameter order.
    pub fn backward(&self, cache: &SwdnnCache, dout: &Matrix) -> Vec<Matrix> {
        let b = dout.rows();
        let keep = 1.0 - self.dropout;

        // Head.
        let head_in = &cache.inputs[self.layers.len()];
        let mut g_head_w = Matrix::zeros(self.head.w.rows(), self.head.w.cols());
        let mut g_head_b = Matrix::zeros(1, self.head.b.cols());
        let mut dcur = Matrix::zeros(b, self.hidden);
        for r in 0..b {
            let d = dout.row(r);
            ger_acc(&mut g_head_w, d, head_in.row(r));
            for (bg, dv) in g_head_b.row_mut(0).iter_mut().zip(d.iter()) {
                *bg += dv;
            }
            gemv_t_acc(&self.head.w, d, dcur.row_mut(r));
        }

        let mut layer_grads: Vec<[Matrix; 3]> = Vec::with_capacity(3);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let h = layer.w.rows();
            let xhat = &cache.xhat[l];
            let inv_std = &cache.inv_std[l];
            let bn_out = &cache.bn_out[l];
            let mask = &cache.masks[l];

            // Dropout and relu.
            let mut dbn = Matrix::zeros(b, h);
            for r in 0..b {
                for j in 0..h {
                    let g = dcur.get(r, j) * mask.get(r, j) / keep;
                    dbn.set(r, j, if bn_out.get(r, j) > 0.0 { g } else { 0.0 });
                }
            }

            // Batch norm (through batch statistics).
            let mut dgamma = Matrix::zeros(1, h);
            let mut dbeta = Matrix::zeros(1, h);
            let mut sum_dxhat = vec![0.0; h];
            let mut sum_dxhat_xhat = vec![0.0; h];
            for r in 0..b {
                for j in 0..h {
                    let dxh = dbn.get(r, j) * layer.gamma.get(0, j);
                    sum_dxhat[j] += dxh;
                    sum_dxhat_xhat[j] += dxh * xhat.get(r, j);
                    dgamma.set(0, j, dgamma.get(0, j) + dbn.get(r, j) * xhat.get(r, j));
                    dbeta.set(0, j, dbeta.get(0, j) + dbn.get(r, j));
                }
            }
            // dlin = inv_std/B * (B*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
            let mut dlin = Matrix::zeros(b, h);
            for r in 0..b {
                for j in 0..h {
                    let dxh = dbn.get(r, j) * layer.gamma.get(0, j);
                    let v = inv_std[j] / b as f64
                        * (b as f64 * dxh - sum_dxhat[j] - xhat.get(r, j) * sum_dxhat_xhat[j]);
                    dlin.set(r, j, v);
                }
            }

            // Linear.
            let input = &cache.inputs[l];
            let mut g_w = Matrix::zeros(layer.w.rows(), layer.w.cols());
            let mut dprev = Matrix::zeros(b, layer.w.cols());
            for r in 0..b {
                let d = dlin.row(r);
                ger_acc(&mut g_w, d, input.row(r));
                gemv_t_acc(&layer.w, d, dprev.row_mut(r));
            }
            layer_grads.push([g_w, dgamma, dbeta]);
            dcur = dprev;
        }
        layer_grads.reverse();

        let mut out = Vec::with_capacity(3 * 3 + 2);
        for g in layer_grads {
            out.extend(g);
        }
        out.push(g_head_w);
        out.push(g_head_b);
        out
    }

    /// Names of the non-trainable state tensors (running statistics).
    pub fn state_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            names.push(format!("fc{}.running_mean", l + 1));
            names.push(format!("fc{}.running_var", l + 1));
        }
        names
    }

    /// Running statistics in `state_names` order.
    pub fn state(&self) -> Vec<&Matrix> {
        self.layers
            .iter()
            .flat_map(|l| [&l.running_mean, &l.running_var])
            .collect()
    }

    /// Mutable running statistics in `state_names` order.
    pub fn state_mut(&mut self) -> Vec<&mut Matrix> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.running_mean, &mut l.running_var])
            .collect()
    }
}

impl ParamSet for SwdnnNet {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            for field in ["w", "gamma", "beta"] {
                names.push(format!("fc{}.{field}", l + 1));
            }
        }
        names.push("head.w".into());
        names.push("head.b".into());
        names
    }

    fn params(&self) -> Vec<&Matrix> {
        let mut p = Vec::new();
        for l in &self.layers {
            p.push(&l.w);
            p.push(&l.gamma);
            p.push(&l.beta);
        }
        p.push(&self.head.w);
        p.push(&self.head.b);
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let (layers, head) = (&mut self.layers, &mut self.head);
        let mut p = Vec::new();
        for l in layers.iter_mut() {
            p.push(&mut l.w);
            p.push(&mut l.gamma);
            p.push(&mut l.beta);
        }
        p.push(&mut head.w);
        p.push(&mut head.b);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::check_gradients;

    fn tiny_net(rng: &mut SeededRng) -> SwdnnNet {
        SwdnnNet::new(2, 6, rng)
    }

    #[test]
    fn eval_mode_is_deterministic() {
        let mut rng = SeededRng::new(40);
        let net = tiny_net(&mut rng);
        let window = Matrix::from_fn(SWDNN_IN_FRAMES, 2, |r, c| 0.01 * (r * 2 + c) as f64);
        let a = net.forward_window(&window, None).unwrap();
        let b = net.forward_window(&window, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (SWDNN_OUT_FRAMES, MOTION_DIM));
    }

    #[test]
    fn wrong_window_length_is_an_error() {
        let mut rng = SeededRng::new(41);
        let net = tiny_net(&mut rng);
        let window = Matrix::zeros(40, 2);
        assert!(net.forward_window(&window, None).is_err());
    }

    #[test]
    fn train_mode_dropout_zeroes_about_half() {
        let mut rng = SeededRng::new(42);
        let net = SwdnnNet::new(2, 2000, &mut rng);
        let masks = net.draw_masks(1, &mut rng);
        for m in &masks {
            let zeros = m.as_slice().iter().filter(|&&v| v == 0.0).count();
            let frac = zeros as f64 / m.len() as f64;
            // Binomial(2000, 0.5): +/- 5 sigma is about +/- 0.056.
            assert!((frac - 0.5).abs() < 0.06, "zero fraction {frac}");
        }
    }

    #[test]
    fn gradients_with_frozen_masks_match_central_differences() {
        let mut rng = SeededRng::new(43);
        let net = tiny_net(&mut rng);
        let x = Matrix::from_fn(3, net.input_width(), |r, c| {
            0.05 * ((r * 31 + c) % 11) as f64 - 0.2
        });
        let masks = net.draw_masks(3, &mut rng);

        let (out, cache) = net.forward_train_frozen(&x, &masks);
        let dout = out.map(|v| 2.0 * v);
        let analytic = net.backward(&cache, &dout);

        let params = net.cloned_params();
        let report = check_gradients(
            &params,
            &analytic,
            |p| {
                let mut n = net.clone();
                n.set_params(p);
                let (o, _) = n.forward_train_frozen(&x, &masks);
                o.as_slice().iter().map(|v| v * v).sum()
            },
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn running_stats_move_toward_batch_stats() {
        let mut rng = SeededRng::new(44);
        let mut net = tiny_net(&mut rng);
        let x = Matrix::from_fn(8, net.input_width(), |r, c| ((r + c) % 5) as f64);
        let before = net.layers[0].running_mean.clone();
        let _ = net.forward_train(&x, &mut rng);
        let after = &net.layers[0].running_mean;
        assert_ne!(&before, after);
    }
}
