//! Sequence discriminator: per-frame real/fake probabilities for a
//! (features, pose) pair, optionally conditioned on a soft emotion vector.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{EMOTION_CLASSES, MOTION_DIM};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::rng::SeededRng;
use crate::Result;

use super::lstm::{BlstmCache, BlstmGrads, BlstmLayer};
use super::{Linear, LinearGrads, ParamSet};

/// Two BLSTM layers over `[x_t ; pose_t (; e)]` with a sigmoid head tied
/// across frames: every frame gets its own probability in (0, 1).
#[derive(Debug, Clone)]
pub struct DiscriminatorNet {
    feature_dim: usize,
    emotion_aware: bool,
    /// First recurrent layer, input width F + 45 (+6).
    pub layer1: BlstmLayer,
    /// Second recurrent layer, input width 2H.
    pub layer2: BlstmLayer,
    /// Tied head, 2H -> 1 (pre-sigmoid).
    pub head: Linear,
}

/// Intermediates for [`DiscriminatorNet::backward`].
#[derive(Debug, Clone)]
pub struct DiscriminatorCache {
    /// Assembled input, T x (F + 45 [+ 6]).
    pub input: Matrix,
    /// Layer 1 cache.
    pub l1: BlstmCache,
    /// Layer 2 cache.
    pub l2: BlstmCache,
    /// Post-sigmoid outputs, T x 1.
    pub y: Matrix,
}

/// Gradients mirroring [`DiscriminatorNet`] parameter order, plus the
/// gradient with respect to the pose input (needed to train the generator
/// through a frozen discriminator).
#[derive(Debug, Clone)]
pub struct DiscriminatorGrads {
    /// Layer 1 gradients.
    pub l1: BlstmGrads,
    /// Layer 2 gradients.
    pub l2: BlstmGrads,
    /// Head gradients.
    pub head: LinearGrads,
}

impl DiscriminatorGrads {
    /// Flatten in parameter order.
    pub fn into_vec(self) -> Vec<Matrix> {
        let mut out = self.l1.into_vec();
        out.extend(self.l2.into_vec());
        out.push(self.head.w);
        out.push(self.head.b);
        out
    }
}

impl DiscriminatorNet {
    /// Fresh Glorot-initialized network.
    pub fn new(
        feature_dim: usize,
        emotion_aware: bool,
        hidden: usize,
        rng: &mut SeededRng,
    ) -> DiscriminatorNet {
        let in1 =
            feature_dim + MOTION_DIM + if emotion_aware { EMOTION_CLASSES } else { 0 };
        DiscriminatorNet {
            feature_dim,
            emotion_aware,
            layer1: BlstmLayer::new(in1, hidden, rng),
            layer2: BlstmLayer::new(2 * hidden, hidden, rng),
            head: Linear::new(2 * hidden, 1, rng),
        }
    }

    /// Speech feature width F.
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Whether the input carries the soft emotion vector.
    pub fn emotion_aware(&self) -> bool {
        self.emotion_aware
    }

    /// Hidden width H of each BLSTM direction.
    pub fn hidden_size(&self) -> usize {
        self.layer1.hidden_size()
    }

    /// Per-frame probabilities y_t in (0, 1), T x 1.
    pub fn forward(
        &self,
        x: &Matrix,
        pose: &Matrix,
        e: Option<&[f64; EMOTION_CLASSES]>,
    ) -> Result<(Matrix, DiscriminatorCache)> {
        if x.rows() != pose.rows() {
            return Err(Error::ShapeMismatch {
                op: "discriminator_forward",
                left: x.shape(),
                right: pose.shape(),
            });
        }
        if x.cols() != self.feature_dim || pose.cols() != MOTION_DIM {
            return Err(Error::ShapeMismatch {
                op: "discriminator_forward",
                left: (x.cols(), pose.cols()),
                right: (self.feature_dim, MOTION_DIM),
            });
        }
        if self.emotion_aware && e.is_none() {
            return Err(Error::InvalidArgument(format!(
                "emotion-aware discriminator needs a soft emotion vector ({} inputs)",
                self.feature_dim + MOTION_DIM + EMOTION_CLASSES
            )));
        }
        let extra = if self.emotion_aware { EMOTION_CLASSES } else { 0 };
        let width = self.feature_dim + MOTION_DIM + extra;
        let mut input = Matrix::zeros(x.rows(), width);
        for t in 0..x.rows() {
            let row = input.row_mut(t);
            row[..self.feature_dim].copy_from_slice(x.row(t));
            row[self.feature_dim..self.feature_dim + MOTION_DIM].copy_from_slice(pose.row(t));
            if let Some(e) = e {
                row[self.feature_dim + MOTION_DIM..].copy_from_slice(e);
            }
        }
        let l1 = self.layer1.forward(&input);
        let l2 = self.layer2.forward(&l1.out);
        let logits = self.head.forward_seq(&l2.out);
        let y = logits.map(num::sigmoid);
        Ok((
            y.clone(),
            DiscriminatorCache { input, l1, l2, y },
        ))
    }

    /// Backward from d/dy (gradient w.r.t. the post-sigmoid outputs, T x 1).
    ///
    /// Returns parameter gradients and the gradient w.r.t. the pose input
    /// (T x 45), which is what the generator step needs.
    pub fn backward(
        &self,
        cache: &DiscriminatorCache,
        dy: &Matrix,
    ) -> (DiscriminatorGrads, Matrix) {
        // Through the sigmoid: dL/dlogit = dL/dy * y(1-y).
        let t_len = cache.y.rows();
        let mut dlogits = Matrix::zeros(t_len, 1);
        for t in 0..t_len {
            let y = cache.y.get(t, 0);
            dlogits.set(t, 0, dy.get(t, 0) * y * (1.0 - y));
        }
        let (g_head, dh2) = self.head.backward_seq(&cache.l2.out, &dlogits);
        let (g_l2, dh1) = self.layer2.backward(&cache.l1.out, &cache.l2, &dh2);
        let (g_l1, dinput) = self.layer1.backward(&cache.input, &cache.l1, &dh1);
        let mut dpose = Matrix::zeros(t_len, MOTION_DIM);
        for t in 0..t_len {
            dpose
                .row_mut(t)
                .copy_from_slice(&dinput.row(t)[self.feature_dim..self.feature_dim + MOTION_DIM]);
        }
        (
            DiscriminatorGrads {
                l1: g_l1,
                l2: g_l2,
                head: g_head,
            },
            dpose,
        )
    }
}

impl ParamSet for DiscriminatorNet {
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
