//! Adaptive moment estimation with bias correction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

/// Optimizer state: first/second moments mirroring the parameter tensors
/// plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    /// Learning rate.
    pub lr: f64,
    /// First-moment decay.
    pub beta1: f64,
    /// Second-moment decay.
    pub beta2: f64,
    /// Denominator stabilizer.
    pub epsilon: f64,
    /// First moments.
    pub m: Vec<Matrix>,
    /// Second moments.
    pub v: Vec<Matrix>,
    /// Completed steps.
    pub t: u64,
}

impl AdamState {
    /// Fresh state for the given parameter shapes. Hyperparameters are the
    /// method's defaults except the learning rate.
    pub fn new(params: &[&Matrix], lr: f64) -> AdamState {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect(),
            t: 0,
        }
    }

    /// One bias-corrected update. Aborts (no mutation) when any gradient
    /// element is non-finite, naming the offending tensor.
    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[Matrix]) -> Result<()> {
        assert_eq!(params.len(), self.m.len(), "adam: parameter count");
        assert_eq!(grads.len(), self.m.len(), "adam: gradient count");
        for (i, g) in grads.iter().enumerate() {
            if !g.all_finite() {
                return Err(Error::NonFinite {
                    context: "adam gradient",
                    index: Some(i),
                });
            }
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - num::powf(self.beta1, t as f64);
        let bc2 = 1.0 - num::powf(self.beta2, t as f64);
        for i in 0..params.len() {
            let m = self.m[i].as_mut_slice();
            let v = self.v[i].as_mut_slice();
            let p = params[i].as_mut_slice();
            let g = grads[i].as_slice();
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                p[k] -= self.lr * m_hat / (num::sqrt(v_hat) + self.epsilon);
            }
        }
        Ok(())
    }

    /// Serialize moments and counter under a name prefix, for checkpoints.
    pub fn pack(&self, prefix: &str, param_names: &[String]) -> (Vec<(String, Matrix)>, (String, f64)) {
        assert_eq!(param_names.len(), self.m.len());
        let mut tensors = Vec::with_capacity(2 * self.m.len());
        for (name, m) in param_names.iter().zip(self.m.iter()) {
            tensors.push((format!("{prefix}.m.{name}"), m.clone()));
        }
        for (name, v) in param_names.iter().zip(self.v.iter()) {
            tensors.push((format!("{prefix}.v.{name}"), v.clone()));
        }
        (tensors, (format!("{prefix}.t"), self.t as f64))
    }

    /// Rebuild from checkpoint tensors written by [`AdamState::pack`].
    pub fn unpack(
        ckpt: &crate::nets::Checkpoint,
        prefix: &str,
        param_names: &[String],
        lr: f64,
    ) -> Result<AdamState> {
        let mut m = Vec::with_capacity(param_names.len());
        let mut v = Vec::with_capacity(param_names.len());
        for name in param_names {
            m.push(ckpt.tensor(&format!("{prefix}.m.{name}"))?.clone());
        }
        for name in param_names {
            v.push(ckpt.tensor(&format!("{prefix}.v.{name}"))?.clone());
        }
        let t = ckpt.scalar(&format!("{prefix}.t"))? as u64;
        Ok(AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m,
            v,
            t,
        })
    }
}
