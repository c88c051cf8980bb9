//! Sequence generator: speech features (plus tied noise and optionally a
//! soft emotion vector) to per-frame lip poses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{EMOTION_CLASSES, MOTION_DIM};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::rng::SeededRng;
use crate::Result;

use super::lstm::{BlstmCache, BlstmGrads, BlstmLayer};
use super::{Linear, LinearGrads, ParamSet};

/// Two BLSTM layers and a linear output head tied across frames.
///
/// The per-frame input is `[x_t ; z]` with the same noise vector `z` at
/// every frame, extended by the soft emotion vector when the network is
/// emotion-aware. The same topology with `noise_dim == 0` serves as the
/// BLSTM regression baseline.
#[derive(Debug, Clone)]
pub struct GeneratorNet {
    feature_dim: usize,
    noise_dim: usize,
    emotion_aware: bool,
    /// First recurrent layer, input width F + m (+6).
    pub layer1: BlstmLayer,
    /// Second recurrent layer, input width 2H.
    pub layer2: BlstmLayer,
    /// Tied output head, 2H -> 45.
    pub head: Linear,
}

/// Intermediates for [`GeneratorNet::backward`].
#[derive(Debug, Clone)]
pub struct GeneratorCache {
    /// Assembled per-frame input, T x (F + m [+ 6]).
    pub input: Matrix,
    /// Layer 1 cache.
    pub l1: BlstmCache,
    /// Layer 2 cache.
    pub l2: BlstmCache,
}

/// Gradients mirroring [`GeneratorNet`] parameter order.
#[derive(Debug, Clone)]
pub struct GeneratorGrads {
    /// Layer 1 gradients.
    pub l1: BlstmGrads,
    /// Layer 2 gradients.
    pub l2: BlstmGrads,
    /// Head gradients.
    pub head: LinearGrads,
}

impl GeneratorGrads {
    /// Flatten in parameter order.
    pub fn into_vec(self) -> Vec<Matrix> {
        let mut out = self.l1.into_vec();
        out.extend(self.l2.into_vec());
        out.push(self.head.w);
        out.push(self.head.b);
        out
    }
}

impl GeneratorNet {
    /// Fresh Glorot-initialized network.
    pub fn new(
        feature_dim: usize,
        noise_dim: usize,
        emotion_aware: bool,
        hidden: usize,
        rng: &mut SeededRng,
    ) -> GeneratorNet {
        let in1 = feature_dim + noise_dim + if emotion_aware { EMOTION_CLASSES } else { 0 };
        GeneratorNet {
            feature_dim,
            noise_dim,
            emotion_aware,
            layer1: BlstmLayer::new(in1, hidden, rng),
            layer2: BlstmLayer::new(2 * hidden, hidden, rng),
            head: Linear::new(2 * hidden, MOTION_DIM, rng),
        }
    }

    /// Speech feature width F.
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Noise width m (0 for the regression baselines).
    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    /// Whether the input carries the 6-D soft emotion vector.
    pub fn emotion_aware(&self) -> bool {
        self.emotion_aware
    }

    /// Hidden width H of each BLSTM direction.
    pub fn hidden_size(&self) -> usize {
        self.layer1.hidden_size()
    }

    /// Number of leading parameter tensors belonging to layer 1 (the
    /// freezing boundary for emotion adaptation).
    pub fn layer1_param_count(&self) -> usize {
        self.layer1.params().len()
    }

    fn assemble_input(
        &self,
        x: &Matrix,
        z: &[f64],
        e: Option<&[f64; EMOTION_CLASSES]>,
    ) -> Result<Matrix> {
        if x.cols() != self.feature_dim {
            return Err(Error::ShapeMismatch {
                op: "generator_forward",
                left: x.shape(),
                right: (x.rows(), self.feature_dim),
            });
        }
        if z.len() != self.noise_dim {
            return Err(Error::InvalidArgument(format!(
                "noise length {} != noise_dim {}",
                z.len(),
                self.noise_dim
            )));
        }
        if self.emotion_aware && e.is_none() {
            return Err(Error::InvalidArgument(
                "emotion-aware generator needs a soft emotion vector".into(),
            ));
        }
        let extra = if self.emotion_aware { EMOTION_CLASSES } else { 0 };
        let width = self.feature_dim + self.noise_dim + extra;
        let mut input = Matrix::zeros(x.rows(), width);
        for t in 0..x.rows() {
            let row = input.row_mut(t);
            row[..self.feature_dim].copy_from_slice(x.row(t));
            row[self.feature_dim..self.feature_dim + self.noise_dim].copy_from_slice(z);
            if let Some(e) = e {
                row[self.feature_dim + self.noise_dim..].copy_from_slice(e);
            }
        }
        Ok(input)
    }

    /// Generate a T x 45 pose sequence. The noise `z` is drawn once per
    /// sequence and tiled across frames.
    pub fn forward(
        &self,
        x: &Matrix,
        z: &[f64],
        e: Option<&[f64; EMOTION_CLASSES]>,
    ) -> Result<(Matrix, GeneratorCache)> {
        let input = self.assemble_input(x, z, e)?;
        let l1 = self.layer1.forward(&input);
        let l2 = self.layer2.forward(&l1.out);
        let out = self.head.forward_seq(&l2.out);
        Ok((out, GeneratorCache { input, l1, l2 }))
    }

    /// Backward from d/dout (T x 45) to parameter gradients.
    pub fn backward(&self, cache: &GeneratorCache, dout: &Matrix) -> GeneratorGrads {
        let (g_head, dh2) = self.head.backward_seq(&cache.l2.out, dout);
        let (g_l2, dh1) = self.layer2.backward(&cache.l1.out, &cache.l2, &dh2);
        let (g_l1, _) = self.layer1.backward(&cache.input, &cache.l1, &dh1);
        GeneratorGrads {
            l1: g_l1,
            l2: g_l2,
            head: g_head,
        }
    }
}

impl ParamSet for GeneratorNet {
    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .layer1
            .param_names()
            .into_iter()
            .map(|n| format!("layer1.{n}"))
            .collect();
        names.extend(
            self.layer2
                .param_names()
                .into_iter()
                .map(|n| format!("layer2.{n}")),
        );
        names.push("head.w".into());
        names.push("head.b".into());
        names
    }

    fn params(&self) -> Vec<&Matrix> {
        let mut p = self.layer1.params();
        p.extend(self.layer2.params());
        p.push(&self.head.w);
        p.push(&self.head.b);
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let (l1, l2, head) = (&mut self.layer1, &mut self.layer2, &mut self.head);
        let mut p = l1.params_mut();
        p.extend(l2.params_mut());
        p.push(&mut head.w);
        p.push(&mut head.b);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::check_gradients;

    fn tiny_generator(rng: &mut SeededRng) -> GeneratorNet {
        GeneratorNet::new(3, 2, false, 3, rng)
    }

    #[test]
    fn deterministic_given_same_inputs() {
        let mut rng = SeededRng::new(14);
        let g = tiny_generator(&mut rng);
        let x = Matrix::from_fn(6, 3, |r, c| (r as f64 - c as f64) * 0.2);
        let z = [0.3, -0.7];
        let (a, _) = g.forward(&x, &z, None).unwrap();
        let (b, _) = g.forward(&x, &z, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zeroed_head_outputs_bias() {
        let mut rng = SeededRng::new(15);
        let mut g = tiny_generator(&mut rng);
        g.head.w.fill_zero();
        for (i, v) in g.head.b.row_mut(0).iter_mut().enumerate() {
            *v = i as f64 * 0.5;
        }
        let x = Matrix::from_fn(4, 3, |r, c| (r + c) as f64);
        let (out, _) = g.forward(&x, &[1.0, 2.0], None).unwrap();
        for t in 0..4 {
            for j in 0..MOTION_DIM {
                assert_eq!(out.get(t, j), j as f64 * 0.5);
            }
        }
    }

    #[test]
    fn shape_errors_are_reported() {
        let mut rng = SeededRng::new(16);
        let g = tiny_generator(&mut rng);
        let bad_x = Matrix::zeros(5, 4);
        assert!(g.forward(&bad_x, &[0.0, 0.0], None).is_err());
        let x = Matrix::zeros(5, 3);
        assert!(g.forward(&x, &[0.0], None).is_err());
    }

    #[test]
    fn emotion_aware_requires_emotion() {
        let mut rng = SeededRng::new(17);
        let g = GeneratorNet::new(3, 2, true, 3, &mut rng);
        let x = Matrix::zeros(5, 3);
        assert!(g.forward(&x, &[0.0, 0.0], None).is_err());
        let e = [0.0, 0.5, 0.5, 0.0, 0.0, 0.0];
        assert!(g.forward(&x, &[0.0, 0.0], Some(&e)).is_ok());
    }

    #[test]
    fn generator_gradients_match_central_differences() {
        let mut rng = SeededRng::new(18);
        let g = GeneratorNet::new(2, 1, true, 2, &mut rng);
        let x = Matrix::from_fn(4, 2, |r, c| 0.3 * (r as f64) - 0.2 * (c as f64));
        let z = [0.4];
        let e = [0.1, 0.2, 0.3, 0.1, 0.2, 0.1];

        let (out, cache) = g.forward(&x, &z, Some(&e)).unwrap();
        // Loss: sum of squares of outputs; dL/dout = 2*out.
        let dout = out.map(|v| 2.0 * v);
        let grads = g.backward(&cache, &dout);

        let params = g.cloned_params();
        let analytic = grads.into_vec();
        let report = check_gradients(
            &params,
            &analytic,
            |p| {
                let mut net = g.clone();
                net.set_params(p);
                let (o, _) = net.forward(&x, &z, Some(&e)).unwrap();
                o.as_slice().iter().map(|v| v * v).sum()
            },
            1e-5,
            1e-4,
        );
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }
}
