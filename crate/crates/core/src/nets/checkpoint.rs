//! In-memory checkpoint: architecture descriptor plus named tensors,
//! optimizer state, RNG state and progress counters. The binary file
//! encoding lives in the IO crate; this container is what training
//! produces and synthesis consumes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::Emotion;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::Result;

/// Current checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Which model a checkpoint holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Sliding-window feedforward baseline.
    Swdnn,
    /// BLSTM regression baseline trained with MSE.
    BlstmMse,
    /// BLSTM regression baseline trained with the concordance loss.
    BlstmCcc,
    /// Conditional sequential GAN.
    Csg,
    /// CSG conditioned on soft emotion vectors.
    CsgEmoAware,
    /// CSG adapted to one emotion by freezing the first generator layer.
    CsgEmoAdapted(Emotion),
}

impl ModelKind {
    /// Stable textual tag (used in files and on the command line).
    pub fn tag(&self) -> String {
        match self {
            ModelKind::Swdnn => "swdnn".to_string(),
            ModelKind::BlstmMse => "blstm-mse".to_string(),
            ModelKind::BlstmCcc => "blstm-ccc".to_string(),
            ModelKind::Csg => "csg".to_string(),
            ModelKind::CsgEmoAware => "csg-emo-aware".to_string(),
            ModelKind::CsgEmoAdapted(e) => format!("csg-emo-adapted-{}", e.name()),
        }
    }

    /// Parse a tag produced by [`ModelKind::tag`].
    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "swdnn" => Some(ModelKind::Swdnn),
            "blstm-mse" => Some(ModelKind::BlstmMse),
            "blstm-ccc" => Some(ModelKind::BlstmCcc),
            "csg" => Some(ModelKind::Csg),
            "csg-emo-aware" => Some(ModelKind::CsgEmoAware),
            _ => {
                let rest = s.strip_prefix("csg-emo-adapted-")?;
                Emotion::parse(rest).map(ModelKind::CsgEmoAdapted)
            }
        }
    }

    /// True for the three GAN variants.
    pub fn is_csg(&self) -> bool {
        matches!(
            self,
            ModelKind::Csg | ModelKind::CsgEmoAware | ModelKind::CsgEmoAdapted(_)
        )
    }

    /// True when generation needs a noise vector.
    pub fn uses_noise(&self) -> bool {
        self.is_csg()
    }

    /// True when the networks take the 6-D soft emotion vector as input.
    pub fn emotion_aware(&self) -> bool {
        matches!(self, ModelKind::CsgEmoAware)
    }
}

/// Everything needed to rebuild the network shapes of a checkpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchDescriptor {
    /// Model kind.
    pub kind: ModelKind,
    /// Speech feature width F.
    pub feature_dim: usize,
    /// Noise width m (0 for baselines).
    pub noise_dim: usize,
    /// Generator BLSTM hidden width.
    pub g_hidden: usize,
    /// Discriminator BLSTM hidden width (0 for baselines).
    pub d_hidden: usize,
    /// SWDNN hidden layer width (0 for the other models).
    pub swdnn_hidden: usize,
}

/// A trained (or in-progress) model: named tensors plus enough bookkeeping
/// to resume training exactly where it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Format version.
    pub version: u32,
    /// Architecture descriptor.
    pub arch: ArchDescriptor,
    /// Epochs completed in the current phase.
    pub epoch: u64,
    /// Training phase tag ("pretrain-g", "adversarial", "final", ...).
    pub phase: String,
    /// Training RNG state at save time.
    pub rng_state: [u64; 4],
    /// Named tensors: network parameters, running statistics and optimizer
    /// moments.
    pub tensors: Vec<(String, Matrix)>,
    /// Named scalars (optimizer step counters, best validation loss, ...).
    pub scalars: Vec<(String, f64)>,
}

impl Checkpoint {
    /// Empty checkpoint for `arch`.
    pub fn new(arch: ArchDescriptor) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            arch,
            epoch: 0,
            phase: String::new(),
            rng_state: [0; 4],
            tensors: Vec::new(),
            scalars: Vec::new(),
        }
    }

    /// Look up a tensor by exact name.
    pub fn tensor(&self, name: &str) -> Result<&Matrix> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Malformed(format!("checkpoint missing tensor {name}")))
    }

    /// Look up a scalar by exact name.
    pub fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Malformed(format!("checkpoint missing scalar {name}")))
    }

    /// Append tensors under a dotted prefix.
    pub fn push_tensors(&mut self, prefix: &str, names: &[String], values: &[&Matrix]) {
        assert_eq!(names.len(), values.len());
        for (n, v) in names.iter().zip(values.iter()) {
            self.tensors.push((format!("{prefix}{n}"), (*v).clone()));
        }
    }
}

fn fill_params<N: super::ParamSet>(net: &mut N, ckpt: &Checkpoint, prefix: &str) -> Result<()> {
    let names = net.param_names();
    for (name, slot) in names.iter().zip(net.params_mut()) {
        let tensor = ckpt.tensor(&format!("{prefix}{name}"))?;
        if tensor.shape() != slot.shape() {
            return Err(Error::Malformed(format!(
                "checkpoint tensor {prefix}{name}: shape {:?} vs expected {:?}",
                tensor.shape(),
                slot.shape()
            )));
        }
        *slot = tensor.clone();
    }
    Ok(())
}

/// Rebuild the generator stored under `prefix` (usually "g.").
pub fn load_generator(ckpt: &Checkpoint, prefix: &str) -> Result<super::GeneratorNet> {
    let arch = &ckpt.arch;
    let mut rng = crate::rng::SeededRng::new(0);
    let mut g = super::GeneratorNet::new(
        arch.feature_dim,
        arch.noise_dim,
        arch.kind.emotion_aware(),
        arch.g_hidden,
        &mut rng,
    );
    fill_params(&mut g, ckpt, prefix)?;
    Ok(g)
}

/// Rebuild the discriminator stored under `prefix` (usually "d.").
pub fn load_discriminator(ckpt: &Checkpoint, prefix: &str) -> Result<super::DiscriminatorNet> {
    let arch = &ckpt.arch;
    let mut rng = crate::rng::SeededRng::new(0);
    let mut d = super::DiscriminatorNet::new(
        arch.feature_dim,
        arch.kind.emotion_aware(),
        arch.d_hidden,
        &mut rng,
    );
    fill_params(&mut d, ckpt, prefix)?;
    Ok(d)
}

/// Rebuild the sliding-window network stored under `prefix` (parameters and
/// running statistics).
pub fn load_swdnn(ckpt: &Checkpoint, prefix: &str) -> Result<super::SwdnnNet> {
    let arch = &ckpt.arch;
    let mut rng = crate::rng::SeededRng::new(0);
    let mut net = super::SwdnnNet::new(arch.feature_dim, arch.swdnn_hidden, &mut rng);
    fill_params(&mut net, ckpt, prefix)?;
    let state_names = net.state_names();
    for (name, slot) in state_names.iter().zip(net.state_mut()) {
        *slot = ckpt.tensor(&format!("{prefix}{name}"))?.clone();
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_kind_tags_round_trip() {
        let kinds = [
            ModelKind::Swdnn,
            ModelKind::BlstmMse,
            ModelKind::BlstmCcc,
            ModelKind::Csg,
            ModelKind::CsgEmoAware,
            ModelKind::CsgEmoAdapted(Emotion::Happiness),
        ];
        for k in kinds {
            assert_eq!(ModelKind::parse(&k.tag()), Some(k));
        }
        assert_eq!(ModelKind::parse("nope"), None);
    }

    #[test]
    fn tensor_lookup_errors_name_the_missing_tensor() {
        let arch = ArchDescriptor {
            kind: ModelKind::Csg,
            feature_dim: 3,
            noise_dim: 2,
            g_hidden: 4,
            d_hidden: 4,
            swdnn_hidden: 0,
        };
        let ckpt = Checkpoint::new(arch);
        let err = ckpt.tensor("g.head.w").unwrap_err();
        assert!(format!("{err}").contains("g.head.w"));
    }
}
