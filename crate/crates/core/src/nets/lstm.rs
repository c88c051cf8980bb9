//! LSTM cell and bidirectional layer with backpropagation through time.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{gemv_acc, gemv_t_acc, ger_acc, Matrix};
use crate::num;
use crate::rng::SeededRng;

use super::{glorot_init, ParamSet};

/// Gate order used throughout: input, forget, output, candidate.
const GATE_NAMES: [&str; 4] = ["i", "f", "o", "c"];
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_O: usize = 2;
const GATE_C: usize = 3;

/// A standard LSTM cell (no peepholes), forget-gate bias initialized to 1.
///
/// Per step, with sigmoid gates and tanh candidate:
/// ```text
/// a_g = W_g x_t + U_g h_{t-1} + b_g          g in {i, f, o, c}
/// c_t = f_t * c_{t-1} + i_t * cand_t
/// h_t = o_t * tanh(c_t)
/// ```
#[derive(Debug, Clone)]
pub struct LstmCell {
    input_size: usize,
    hidden_size: usize,
    /// Input weights per gate, H x F.
    pub w: [Matrix; 4],
    /// Recurrent weights per gate, H x H.
    pub u: [Matrix; 4],
    /// Biases per gate, 1 x H.
    pub b: [Matrix; 4],
}

/// Forward-pass intermediates kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache {
    /// Post-activation gate values, T x H each, gate order i/f/o/c.
    pub gates: [Matrix; 4],
    /// Cell states, T x H.
    pub c: Matrix,
    /// tanh of the cell states, T x H.
    pub tanh_c: Matrix,
    /// Hidden outputs, T x H.
    pub h: Matrix,
}

/// Parameter gradients mirroring [`LstmCell`].
#[derive(Debug, Clone)]
pub struct LstmGrads {
    /// d/dW per gate.
    pub w: [Matrix; 4],
    /// d/dU per gate.
    pub u: [Matrix; 4],
    /// d/db per gate.
    pub b: [Matrix; 4],
}

impl LstmGrads {
    /// Flatten in parameter order (w_i..w_c, u_i..u_c, b_i..b_c).
    pub fn into_vec(self) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(12);
        out.extend(self.w);
        out.extend(self.u);
        out.extend(self.b);
        out
    }
}

impl LstmCell {
    /// Glorot-initialized cell; forget bias 1, other biases 0.
    pub fn new(input_size: usize, hidden_size: usize, rng: &mut SeededRng) -> LstmCell {
        let w = core::array::from_fn(|_| glorot_init(input_size, hidden_size, rng));
        let u = core::array::from_fn(|_| glorot_init(hidden_size, hidden_size, rng));
        let mut b: [Matrix; 4] = core::array::from_fn(|_| Matrix::zeros(1, hidden_size));
        b[GATE_F] = Matrix::filled(1, hidden_size, 1.0);
        LstmCell {
            input_size,
            hidden_size,
            w,
            u,
            b,
        }
    }

    /// Input width F.
    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// Hidden width H.
    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Scan a T x F sequence (initial hidden and cell states are zero).
    pub fn forward(&self, seq: &Matrix) -> LstmCache {
        assert_eq!(seq.cols(), self.input_size, "lstm input width");
        let t_len = seq.rows();
        let h_dim = self.hidden_size;
        let mut cache = LstmCache {
            gates: core::array::from_fn(|_| Matrix::zeros(t_len, h_dim)),
            c: Matrix::zeros(t_len, h_dim),
            tanh_c: Matrix::zeros(t_len, h_dim),
            h: Matrix::zeros(t_len, h_dim),
        };
        let mut pre = vec![0.0; h_dim];
        for t in 0..t_len {
            let x_t = seq.row(t);
            for g in 0..4 {
                pre.copy_from_slice(self.b[g].row(0));
                gemv_acc(&self.w[g], x_t, &mut pre);
                if t > 0 {
                    gemv_acc(&self.u[g], cache.h.row(t - 1), &mut pre);
                }
                let dst = cache.gates[g].row_mut(t);
                if g == GATE_C {
                    for (d, &p) in dst.iter_mut().zip(pre.iter()) {
                        *d = num::tanh(p);
                    }
                } else {
                    for (d, &p) in dst.iter_mut().zip(pre.iter()) {
                        *d = num::sigmoid(p);
                    }
                }
            }
            for k in 0..h_dim {
                let i = cache.gates[GATE_I].get(t, k);
                let f = cache.gates[GATE_F].get(t, k);
                let o = cache.gates[GATE_O].get(t, k);
                let cand = cache.gates[GATE_C].get(t, k);
                let c_prev = if t > 0 { cache.c.get(t - 1, k) } else { 0.0 };
                let c_t = f * c_prev + i * cand;
                let tc = num::tanh(c_t);
                cache.c.set(t, k, c_t);
                cache.tanh_c.set(t, k, tc);
                cache.h.set(t, k, o * tc);
            }
        }
        cache
    }

    /// Backpropagate `dh` (T x H, gradient w.r.t. every hidden output) and
    /// return parameter gradients plus the gradient w.r.t. the input
    /// sequence.
    pub fn backward(&self, seq: &Matrix, cache: &LstmCache, dh: &Matrix) -> (LstmGrads, Matrix) {
        let t_len = seq.rows();
        let h_dim = self.hidden_size;
        assert_eq!(dh.shape(), (t_len, h_dim));

        let mut grads = LstmGrads {
            w: core::array::from_fn(|g| Matrix::zeros(self.w[g].rows(), self.w[g].cols())),
            u: core::array::from_fn(|g| Matrix::zeros(self.u[g].rows(), self.u[g].cols())),
            b: core::array::from_fn(|_| Matrix::zeros(1, h_dim)),
        };
        let mut dx = Matrix::zeros(t_len, self.input_size);

        let mut dh_rec = vec![0.0; h_dim];
        let mut dc_rec = vec![0.0; h_dim];
        let mut da: [Vec<f64>; 4] = core::array::from_fn(|_| vec![0.0; h_dim]);

        for t in (0..t_len).rev() {
            for k in 0..h_dim {
                let dh_total = dh.get(t, k) + dh_rec[k];
                let i = cache.gates[GATE_I].get(t, k);
                let f = cache.gates[GATE_F].get(t, k);
                let o = cache.gates[GATE_O].get(t, k);
                let cand = cache.gates[GATE_C].get(t, k);
                let tc = cache.tanh_c.get(t, k);
                let c_prev = if t > 0 { cache.c.get(t - 1, k) } else { 0.0 };

                let dc_total = dh_total * o * (1.0 - tc * tc) + dc_rec[k];
                da[GATE_O][k] = dh_total * tc * o * (1.0 - o);
                da[GATE_I][k] = dc_total * cand * i * (1.0 - i);
                da[GATE_C][k] = dc_total * i * (1.0 - cand * cand);
                da[GATE_F][k] = dc_total * c_prev * f * (1.0 - f);
                dc_rec[k] = dc_total * f;
            }

            for v in dh_rec.iter_mut() {
                *v = 0.0;
            }
            let x_t = seq.row(t);
            for g in 0..4 {
                ger_acc(&mut grads.w[g], &da[g], x_t);
                if t > 0 {
                    let h_prev = cache.h.row(t - 1);
                    ger_acc(&mut grads.u[g], &da[g], h_prev);
                    gemv_t_acc(&self.u[g], &da[g], &mut dh_rec);
                }
                for (bg, d) in grads.b[g].row_mut(0).iter_mut().zip(da[g].iter()) {
                    *bg += d;
                }
                gemv_t_acc(&self.w[g], &da[g], dx.row_mut(t));
            }
        }
        (grads, dx)
    }
}

impl ParamSet for LstmCell {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(12);
        for kind in ["w", "u", "b"] {
            for gate in GATE_NAMES {
                names.push(format!("{kind}_{gate}"));
            }
        }
        names
    }

    fn params(&self) -> Vec<&Matrix> {
        self.w.iter().chain(self.u.iter()).chain(self.b.iter()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        self.w
            .iter_mut()
            .chain(self.u.iter_mut())
            .chain(self.b.iter_mut())
            .collect()
    }
}

/// Reverse the row order of a matrix.
pub(crate) fn reverse_rows(m: &Matrix) -> Matrix {
    let (t, f) = m.shape();
    let mut out = Matrix::zeros(t, f);
    for r in 0..t {
        out.row_mut(r).copy_from_slice(m.row(t - 1 - r));
    }
    out
}

/// Bidirectional LSTM layer: a forward cell scanning t = 1..T and a backward
/// cell scanning t = T..1, outputs concatenated per frame (width 2H).
#[derive(Debug, Clone)]
pub struct BlstmLayer {
    /// Cell scanning left to right.
    pub fwd: LstmCell,
    /// Cell scanning right to left.
    pub bwd: LstmCell,
}

/// Cache for [`BlstmLayer::forward`].
#[derive(Debug, Clone)]
pub struct BlstmCache {
    /// Input sequence reversed in time (the backward cell's view).
    pub rev_input: Matrix,
    /// Forward cell intermediates.
    pub fwd: LstmCache,
    /// Backward cell intermediates (in reversed time).
    pub bwd: LstmCache,
    /// Concatenated output, T x 2H.
    pub out: Matrix,
}

/// Gradients for [`BlstmLayer`].
#[derive(Debug, Clone)]
pub struct BlstmGrads {
    /// Forward cell gradients.
    pub fwd: LstmGrads,
    /// Backward cell gradients.
    pub bwd: LstmGrads,
}

impl BlstmGrads {
    /// Flatten in parameter order (forward cell, then backward cell).
    pub fn into_vec(self) -> Vec<Matrix> {
        let mut out = self.fwd.into_vec();
        out.extend(self.bwd.into_vec());
        out
    }
}

impl BlstmLayer {
    /// Two independently initialized cells.
    pub fn new(input_size: usize, hidden_size: usize, rng: &mut SeededRng) -> BlstmLayer {
        BlstmLayer {
            fwd: LstmCell::new(input_size, hidden_size, rng),
            bwd: LstmCell::new(input_size, hidden_size, rng),
        }
    }

    /// Hidden width H of each direction (output width is 2H).
    pub fn hidden_size(&self) -> usize {
        self.fwd.hidden_size()
    }

    /// Scan in both directions; output row t is [h_fwd_t ; h_bwd_t].
    pub fn forward(&self, seq: &Matrix) -> BlstmCache {
        let t_len = seq.rows();
        let h = self.hidden_size();
        let rev_input = reverse_rows(seq);
        let fwd = self.fwd.forward(seq);
        let bwd = self.bwd.forward(&rev_input);
        let mut out = Matrix::zeros(t_len, 2 * h);
        for t in 0..t_len {
            out.row_mut(t)[..h].copy_from_slice(fwd.h.row(t));
            out.row_mut(t)[h..].copy_from_slice(bwd.h.row(t_len - 1 - t));
        }
        BlstmCache {
            rev_input,
            fwd,
            bwd,
            out,
        }
    }

    /// Backward from `dout` (T x 2H) to parameter gradients and d/dinput.
    pub fn backward(&self, seq: &Matrix, cache: &BlstmCache, dout: &Matrix) -> (BlstmGrads, Matrix) {
        let t_len = seq.rows();
        let h = self.hidden_size();
        assert_eq!(dout.shape(), (t_len, 2 * h));

        let mut dh_fwd = Matrix::zeros(t_len, h);
        let mut dh_bwd = Matrix::zeros(t_len, h);
        for t in 0..t_len {
            dh_fwd.row_mut(t).copy_from_slice(&dout.row(t)[..h]);
            // Backward cell time axis is reversed.
            dh_bwd
                .row_mut(t_len - 1 - t)
                .copy_from_slice(&dout.row(t)[h..]);
        }

        let (g_fwd, dx_fwd) = self.fwd.backward(seq, &cache.fwd, &dh_fwd);
        let (g_bwd, dx_bwd_rev) = self.bwd.backward(&cache.rev_input, &cache.bwd, &dh_bwd);
        let mut dx = dx_fwd;
        let dx_bwd = reverse_rows(&dx_bwd_rev);
        dx.axpy(1.0, &dx_bwd);
        (
            BlstmGrads {
                fwd: g_fwd,
                bwd: g_bwd,
            },
            dx,
        )
    }
}

impl ParamSet for BlstmLayer {
    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .fwd
            .param_names()
            .into_iter()
            .map(|n| format!("fwd.{n}"))
            .collect();
        names.extend(self.bwd.param_names().into_iter().map(|n| format!("bwd.{n}")));
        names
    }

    fn params(&self) -> Vec<&Matrix> {
        let mut p = self.fwd.params();
        p.extend(self.bwd.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let (f, b) = (&mut self.fwd, &mut self.bwd);
        let mut p = f.params_mut();
        p.extend(b.params_mut());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::check_gradients;

    fn random_seq(t: usize, f: usize, rng: &mut SeededRng) -> Matrix {
        Matrix::from_fn(t, f, |_, _| rng.uniform(-1.0, 1.0))
    }

    /// Sum-of-outputs loss for a cell built from a parameter slice.
    fn cell_loss(template: &LstmCell, params: &[Matrix], seq: &Matrix) -> f64 {
        let mut cell = template.clone();
        cell.set_params(params);
        let cache = cell.forward(seq);
        cache.h.as_slice().iter().sum()
    }

    #[test]
    fn lstm_cell_gradients_match_central_differences() {
        let mut rng = SeededRng::new(2);
        let cell = LstmCell::new(3, 4, &mut rng);
        let seq = random_seq(5, 3, &mut rng);

        let cache = cell.forward(&seq);
        let dh = Matrix::filled(5, 4, 1.0);
        let (grads, _) = cell.backward(&seq, &cache, &dh);

        let params = cell.cloned_params();
        let analytic = grads.into_vec();
        let report = check_gradients(
            &params,
            &analytic,
            |p| cell_loss(&cell, p, &seq),
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn lstm_input_gradients_match_central_differences() {
        let mut rng = SeededRng::new(8);
        let cell = LstmCell::new(3, 4, &mut rng);
        let seq = random_seq(6, 3, &mut rng);
        let cache = cell.forward(&seq);
        let dh = Matrix::filled(6, 4, 1.0);
        let (_, dx) = cell.backward(&seq, &cache, &dh);

        let params = [seq.clone()];
        let analytic = [dx];
        let report = check_gradients(
            &params,
            &analytic,
            |p| {
                let cache = cell.forward(&p[0]);
                cache.h.as_slice().iter().sum()
            },
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn forget_bias_initialized_to_one() {
        let mut rng = SeededRng::new(1);
        let cell = LstmCell::new(2, 3, &mut rng);
        assert!(cell.b[GATE_F].as_slice().iter().all(|&v| v == 1.0));
        assert!(cell.b[GATE_I].as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn blstm_output_width_is_double() {
        let mut rng = SeededRng::new(10);
        let layer = BlstmLayer::new(3, 4, &mut rng);
        let seq = random_seq(7, 3, &mut rng);
        let cache = layer.forward(&seq);
        assert_eq!(cache.out.shape(), (7, 8));
    }

    #[test]
    fn time_reversal_with_swapped_cells_reverses_output() {
        let mut rng = SeededRng::new(11);
        let layer = BlstmLayer::new(3, 4, &mut rng);
        let swapped = BlstmLayer {
            fwd: layer.bwd.clone(),
            bwd: layer.fwd.clone(),
        };
        let seq = random_seq(6, 3, &mut rng);
        let rev = reverse_rows(&seq);
        let a = layer.forward(&seq).out;
        let b = swapped.forward(&rev).out;
        let h = 4;
        for t in 0..6 {
            let orig = a.row(t);
            let mirrored = b.row(5 - t);
            // Halves swap along with the cells.
            for k in 0..h {
                assert!((orig[k] - mirrored[h + k]).abs() < 1e-12);
                assert!((orig[h + k] - mirrored[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blstm_gradients_match_central_differences() {
        let mut rng = SeededRng::new(21);
        let layer = BlstmLayer::new(2, 3, &mut rng);
        let seq = random_seq(5, 2, &mut rng);
        let cache = layer.forward(&seq);
        let dout = Matrix::filled(5, 6, 1.0);
        let (grads, _) = layer.backward(&seq, &cache, &dout);

        let params = layer.cloned_params();
        let analytic = grads.into_vec();
        let report = check_gradients(
            &params,
            &analytic,
            |p| {
                let mut l = layer.clone();
                l.set_params(p);
                l.forward(&seq).out.as_slice().iter().sum()
            },
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }
}
