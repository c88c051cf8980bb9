//! Network architectures with hand-written backward passes.
//!
//! Everything here is a plain parameter container plus explicit forward and
//! backward functions; there is no autodiff tape. Each backward pass is
//! verified against central differences (see the gradient-check tests and
//! the acceptance suite).
//!
//! * [`LstmCell`] / [`BlstmLayer`] -- recurrent building blocks.
//! * [`GeneratorNet`] -- 2-layer BLSTM, linear output head tied across
//!   frames; input per frame is the speech features concatenated with a
//!   noise vector shared by all frames (and optionally a soft emotion
//!   vector).
//! * [`DiscriminatorNet`] -- 2-layer BLSTM over [features; pose] with a
//!   per-frame sigmoid head, emitting a real/fake probability on every
//!   frame.
//! * [`SwdnnNet`] -- sliding-window feedforward baseline (3 relu layers
//!   with batch norm and dropout).
//! * [`Checkpoint`] -- named-tensor container capturing parameters,
//!   optimizer state, RNG state and progress counters.

use alloc::string::String;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::rng::SeededRng;

mod checkpoint;
mod discriminator;
mod generator;
mod lstm;
mod swdnn;

pub use checkpoint::{
    load_discriminator, load_generator, load_swdnn, ArchDescriptor, Checkpoint, ModelKind,
    CHECKPOINT_VERSION,
};
pub use discriminator::{DiscriminatorCache, DiscriminatorNet};
pub use generator::{GeneratorCache, GeneratorNet};
pub use lstm::{BlstmCache, BlstmLayer, LstmCache, LstmCell};
pub use swdnn::{SwdnnCache, SwdnnNet, SWDNN_IN_FRAMES, SWDNN_OUT_FRAMES};

/// Uniform access to a network's trainable tensors in a fixed order.
pub trait ParamSet {
    /// Stable names, one per tensor, in parameter order.
    fn param_names(&self) -> Vec<String>;
    /// Immutable views in parameter order.
    fn params(&self) -> Vec<&Matrix>;
    /// Mutable views in parameter order.
    fn params_mut(&mut self) -> Vec<&mut Matrix>;

    /// Overwrite all parameters from `values` (same order and shapes).
    fn set_params(&mut self, values: &[Matrix]) {
        let mut slots = self.params_mut();
        assert_eq!(slots.len(), values.len(), "parameter count mismatch");
        for (slot, value) in slots.iter_mut().zip(values.iter()) {
            assert_eq!(slot.shape(), value.shape(), "parameter shape mismatch");
            **slot = value.clone();
        }
    }

    /// Clone all parameters in order.
    fn cloned_params(&self) -> Vec<Matrix> {
        self.params().into_iter().cloned().collect()
    }
}

/// Glorot (uniform) initialization: samples in +/- sqrt(6 / (n_in + n_out)),
/// returned as an (n_out x n_in) weight matrix.
pub fn glorot_init(n_in: usize, n_out: usize, rng: &mut SeededRng) -> Matrix {
    assert!(n_in >= 1 && n_out >= 1);
    let bound = crate::num::sqrt(6.0 / (n_in + n_out) as f64);
    Matrix::from_fn(n_out, n_in, |_, _| rng.uniform(-bound, bound))
}

/// A linear map applied independently to every frame (weights tied across
/// time).
#[derive(Debug, Clone)]
pub struct Linear {
    /// Weights, out x in.
    pub w: Matrix,
    /// Bias, 1 x out.
    pub b: Matrix,
}

/// Gradients for [`Linear`].
#[derive(Debug, Clone)]
pub struct LinearGrads {
    /// d/dw.
    pub w: Matrix,
    /// d/db.
    pub b: Matrix,
}

impl Linear {
    /// Glorot-initialized weights, zero bias.
    pub fn new(n_in: usize, n_out: usize, rng: &mut SeededRng) -> Linear {
        Linear {
            w: glorot_init(n_in, n_out, rng),
            b: Matrix::zeros(1, n_out),
        }
    }

    /// y_t = W h_t + b for every row of `h`.
    pub fn forward_seq(&self, h: &Matrix) -> Matrix {
        let t = h.rows();
        let out_dim = self.w.rows();
        let mut out = Matrix::zeros(t, out_dim);
        for r in 0..t {
            let row = out.row_mut(r);
            row.copy_from_slice(self.b.row(0));
            crate::matrix::gemv_acc(&self.w, h.row(r), row);
        }
        out
    }

    /// Backward through the tied map: returns gradients and d/dh.
    pub fn backward_seq(&self, h: &Matrix, dout: &Matrix) -> (LinearGrads, Matrix) {
        let t = h.rows();
        let mut grads = LinearGrads {
            w: Matrix::zeros(self.w.rows(), self.w.cols()),
            b: Matrix::zeros(1, self.b.cols()),
        };
        let mut dh = Matrix::zeros(t, self.w.cols());
        for r in 0..t {
            let d = dout.row(r);
            crate::matrix::ger_acc(&mut grads.w, d, h.row(r));
            for (bg, dv) in grads.b.row_mut(0).iter_mut().zip(d.iter()) {
                *bg += dv;
            }
            crate::matrix::gemv_t_acc(&self.w, d, dh.row_mut(r));
        }
        (grads, dh)
    }
}

/// Elementwise accumulate: `acc += tensors`, both in parameter order.
pub fn accumulate_grads(acc: &mut [Matrix], tensors: &[Matrix]) {
    assert_eq!(acc.len(), tensors.len());
    for (a, t) in acc.iter_mut().zip(tensors.iter()) {
        a.axpy(1.0, t);
    }
}

/// Scale every tensor in place.
pub fn scale_grads(grads: &mut [Matrix], factor: f64) {
    for g in grads.iter_mut() {
        g.map_inplace(|v| v * factor);
    }
}

/// Zero-shaped copies of a parameter list, for accumulation.
pub fn zeros_like(params: &[&Matrix]) -> Vec<Matrix> {
    params
        .iter()
        .map(|p| Matrix::zeros(p.rows(), p.cols()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_bound_matches_formula() {
        let mut rng = SeededRng::new(77);
        let m = glorot_init(256, 256, &mut rng);
        let bound = crate::num::sqrt(6.0 / 512.0);
        assert!((bound - 0.108253).abs() < 1e-6);
        assert!(m.as_slice().iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn glorot_mean_is_near_zero() {
        let mut rng = SeededRng::new(3);
        let m = glorot_init(100, 1000, &mut rng);
        let mean = m.as_slice().iter().sum::<f64>() / m.len() as f64;
        assert!(mean.abs() < 0.003, "mean {mean}");
    }

    #[test]
    fn linear_seq_matches_manual() {
        let mut rng = SeededRng::new(4);
        let lin = Linear::new(3, 2, &mut rng);
        let h = Matrix::from_fn(5, 3, |r, c| (r + c) as f64 * 0.1);
        let y = lin.forward_seq(&h);
        for t in 0..5 {
            for o in 0..2 {
                let mut want = lin.b.get(0, o);
                for i in 0..3 {
                    want += lin.w.get(o, i) * h.get(t, i);
                }
                assert!((y.get(t, o) - want).abs() < 1e-12);
            }
        }
    }
}
