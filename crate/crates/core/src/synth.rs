//! Full-utterance motion synthesis from trained checkpoints, the
//! sliding-window inference scheme, and the linear marker-to-FAP mapping.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{MotionSequence, EMOTION_CLASSES, MOTION_DIM};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::nets::{self, Checkpoint, ModelKind, SwdnnNet, SWDNN_IN_FRAMES, SWDNN_OUT_FRAMES};
use crate::rng::SeededRng;
use crate::speech::FeatureSequence;
use crate::Result;

/// How the recurrent generator covers a full utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    /// One pass over the whole sequence (the default: recurrent nets accept
    /// arbitrary lengths even when trained on fixed windows).
    FullSequence,
    /// Fixed windows with hop and linear crossfade over the overlaps.
    Windowed {
        /// Window length in frames.
        window: usize,
        /// Hop between window starts.
        hop: usize,
    },
}

impl SynthesisMode {
    /// The windowed mode matching the training geometry (71-frame windows,
    /// hop 35).
    pub fn windowed_default() -> SynthesisMode {
        SynthesisMode::Windowed {
            window: 71,
            hop: 35,
        }
    }
}

/// A synthesis job: checkpoint, features, noise seed, optional emotion.
#[derive(Debug, Clone)]
pub struct SynthesisRequest<'a> {
    /// Trained model.
    pub checkpoint: &'a Checkpoint,
    /// Input features at 120 fps.
    pub features: &'a FeatureSequence,
    /// Seed for the per-utterance noise draw.
    pub noise_seed: u64,
    /// Soft emotion vector (required iff the model is emotion-aware).
    pub emotion: Option<[f64; EMOTION_CLASSES]>,
    /// Coverage mode (ignored by the sliding-window baseline).
    pub mode: SynthesisMode,
}

/// Generate a motion trajectory with the same length as the input features.
pub fn synthesize(req: &SynthesisRequest) -> Result<MotionSequence> {
    let arch = &req.checkpoint.arch;
    if (req.features.frame_rate() - crate::speech::FRAME_RATE).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "features at {} fps; synthesis expects {}",
            req.features.frame_rate(),
            crate::speech::FRAME_RATE
        )));
    }
    if arch.kind == ModelKind::Swdnn {
        let net = nets::load_swdnn(req.checkpoint, "swdnn.")?;
        return swdnn_infer(&net, req.features);
    }
    if arch.kind.emotion_aware() && req.emotion.is_none() {
        return Err(Error::InvalidArgument(
            "emotion-aware model needs an emotion vector".into(),
        ));
    }
    let g = nets::load_generator(req.checkpoint, "g.")?;
    let mut noise_rng = SeededRng::with_stream(req.noise_seed, 0x2e01);
    let z = noise_rng.gaussian_vec(g.noise_dim());
    let e = req.emotion.as_ref();
    let x = req.features.frames();
    let t_total = x.rows();
    if t_total == 0 {
        return Err(Error::EmptyInput("features"));
    }

    let out = match req.mode {
        SynthesisMode::FullSequence => g.forward(x, &z, e)?.0,
        SynthesisMode::Windowed { window, hop } => {
            if window == 0 || hop == 0 {
                return Err(Error::InvalidArgument("window and hop must be >= 1".into()));
            }
            let mut starts: Vec<usize> = Vec::new();
            if t_total <= window {
                starts.push(0);
            } else {
                let mut s = 0;
                while s + window < t_total {
                    starts.push(s);
                    s += hop;
                }
                starts.push(t_total - window);
            }
            let mut acc = Matrix::zeros(t_total, MOTION_DIM);
            let mut weight = vec![0.0; t_total];
            for &start in &starts {
                let len = window.min(t_total - start);
                let mut slice = Matrix::zeros(window, x.cols());
                for r in 0..len {
                    slice.row_mut(r).copy_from_slice(x.row(start + r));
                }
                let (pose, _) = g.forward(&slice, &z, e)?;
                for r in 0..len {
                    // Tent weight: linear ramps over the overlap regions.
                    let w = (r + 1).min(window - r) as f64;
                    let dst = acc.row_mut(start + r);
                    for (d, &p) in dst.iter_mut().zip(pose.row(r).iter()) {
                        *d += w * p;
                    }
                    weight[start + r] += w;
                }
            }
            for r in 0..t_total {
                let w = weight[r];
                for v in acc.row_mut(r) {
                    *v /= w;
                }
            }
            acc
        }
    };
    if !out.all_finite() {
        return Err(Error::NonFinite {
            context: "synthesized trajectory",
            index: None,
        });
    }
    MotionSequence::new(out, crate::speech::FRAME_RATE)
}

/// Sliding-window inference: move the 41-frame input window one frame at a
/// time, predict 13 frames per step, and average every prediction covering
/// each output frame. The feature stream is edge-replicated so the output
/// covers all T frames.
pub fn swdnn_infer(net: &SwdnnNet, features: &FeatureSequence) -> Result<MotionSequence> {
    let x = features.frames();
    let t_total = x.rows();
    if t_total < SWDNN_IN_FRAMES {
        return Err(Error::InvalidArgument(format!(
            "utterance too short for sliding-window inference: {t_total} < {SWDNN_IN_FRAMES} frames"
        )));
    }
    if x.cols() != net.feature_dim() {
        return Err(Error::ShapeMismatch {
            op: "swdnn_infer",
            left: x.shape(),
            right: (t_total, net.feature_dim()),
        });
    }
    let half_in = (SWDNN_IN_FRAMES / 2) as i64;
    let half_out = (SWDNN_OUT_FRAMES / 2) as i64;
    let f_dim = net.feature_dim();

    let mut acc = Matrix::zeros(t_total, MOTION_DIM);
    let mut coverage = vec![0u32; t_total];

    // Batch the sliding windows for throughput.
    const CHUNK: usize = 64;
    let mut centers = Vec::with_capacity(CHUNK);
    let mut flat = Matrix::zeros(CHUNK, net.input_width());
    let flush =
        |centers: &mut Vec<usize>, flat: &mut Matrix, acc: &mut Matrix, coverage: &mut [u32]| {
            if centers.is_empty() {
                return;
            }
            let batch = Matrix::from_fn(centers.len(), net.input_width(), |r, c| flat.get(r, c));
            let out = net.forward_eval(&batch);
            for (row, &center) in centers.iter().enumerate() {
                for k in 0..SWDNN_OUT_FRAMES {
                    let t = center as i64 - half_out + k as i64;
                    if t < 0 || t >= t_total as i64 {
                        continue;
                    }
                    let dst = acc.row_mut(t as usize);
                    let src = &out.row(row)[k * MOTION_DIM..(k + 1) * MOTION_DIM];
                    for (d, &s) in dst.iter_mut().zip(src.iter()) {
                        *d += s;
                    }
                    coverage[t as usize] += 1;
                }
            }
            centers.clear();
        };

    for center in 0..t_total {
        let row = centers.len();
        for f in 0..SWDNN_IN_FRAMES {
            // Edge replication outside [0, T).
            let src = (center as i64 - half_in + f as i64).clamp(0, t_total as i64 - 1) as usize;
            flat.row_mut(row)[f * f_dim..(f + 1) * f_dim].copy_from_slice(x.row(src));
        }
        centers.push(center);
        if centers.len() == CHUNK {
            flush(&mut centers, &mut flat, &mut acc, &mut coverage);
        }
    }
    flush(&mut centers, &mut flat, &mut acc, &mut coverage);

    for r in 0..t_total {
        let n = coverage[r] as f64;
        for v in acc.row_mut(r) {
            *v /= n;
        }
    }
    MotionSequence::new(acc, crate::speech::FRAME_RATE)
}

/// One mapped output channel: marker channel index, FAP id and output range.
#[derive(Debug, Clone, PartialEq)]
pub struct FapChannel {
    /// Source motion channel (0..45).
    pub channel: usize,
    /// FAP identifier written to the export header.
    pub fap_id: u32,
    /// Output range (fap_min, fap_max).
    pub fap_range: (f64, f64),
}

/// Linear marker-to-FAP mapping relative to a neutral pose.
///
/// For a mapped channel with displacement range (min, max) around the
/// neutral pose, a value x maps to
/// `fap_min + (x - neutral - min) / (max - min) * (fap_max - fap_min)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FapMapping {
    /// Neutral pose, 45 values.
    pub neutral_pose: Vec<f64>,
    /// Displacement range per motion channel (min, max), 45 entries.
    pub ranges: Vec<(f64, f64)>,
    /// Mapped channels in output order.
    pub channels: Vec<FapChannel>,
}

impl FapMapping {
    /// Validate shapes and range non-degeneracy on mapped channels.
    pub fn new(
        neutral_pose: Vec<f64>,
        ranges: Vec<(f64, f64)>,
        channels: Vec<FapChannel>,
    ) -> Result<FapMapping> {
        if neutral_pose.len() != MOTION_DIM || ranges.len() != MOTION_DIM {
            return Err(Error::InvalidArgument(format!(
                "fap mapping needs {MOTION_DIM} neutral values and ranges"
            )));
        }
        if channels.is_empty() {
            return Err(Error::EmptyInput("fap channel assignment"));
        }
        for ch in &channels {
            if ch.channel >= MOTION_DIM {
                return Err(Error::InvalidArgument(format!(
                    "fap channel {} out of bounds",
                    ch.channel
                )));
            }
            let (lo, hi) = ranges[ch.channel];
            if !(hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate range ({lo}, {hi}) on mapped channel {}",
                    ch.channel
                )));
            }
            if !(ch.fap_range.1 > ch.fap_range.0) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate fap range on channel {}",
                    ch.channel
                )));
            }
        }
        Ok(FapMapping {
            neutral_pose,
            ranges,
            channels,
        })
    }

    /// Build a mapping from observed motion: neutral pose = mean frame,
    /// symmetric displacement ranges from the per-channel extremes. Flat
    /// channels are left unmapped.
    pub fn fit(seq: &MotionSequence, fap_range: (f64, f64)) -> Result<FapMapping> {
        if seq.is_empty() {
            return Err(Error::EmptyInput("motion for fap fitting"));
        }
        let t = seq.len() as f64;
        let mut neutral = vec![0.0; MOTION_DIM];
        for r in 0..seq.len() {
            for (n, v) in neutral.iter_mut().zip(seq.frames().row(r).iter()) {
                *n += v;
            }
        }
        for n in neutral.iter_mut() {
            *n /= t;
        }
        let mut ranges = vec![(0.0, 0.0); MOTION_DIM];
        let mut channels = Vec::new();
        for c in 0..MOTION_DIM {
            let mut extent = 0.0f64;
            for r in 0..seq.len() {
                extent = extent.max((seq.frames().get(r, c) - neutral[c]).abs());
            }
            if extent > 0.0 {
                ranges[c] = (-extent, extent);
                channels.push(FapChannel {
                    channel: c,
                    fap_id: c as u32,
                    fap_range,
                });
            }
        }
        FapMapping::new(neutral, ranges, channels)
    }

    /// Map a trajectory onto the FAP channels (T x mapped-channel-count).
    pub fn apply(&self, seq: &MotionSequence) -> Result<Matrix> {
        let mut out = Matrix::zeros(seq.len(), self.channels.len());
        for r in 0..seq.len() {
            let pose = seq.frames().row(r);
            let dst = out.row_mut(r);
            for (k, ch) in self.channels.iter().enumerate() {
                let (lo, hi) = self.ranges[ch.channel];
                let (flo, fhi) = ch.fap_range;
                let d = pose[ch.channel] - self.neutral_pose[ch.channel];
                dst[k] = flo + (d - lo) / (hi - lo) * (fhi - flo);
            }
        }
        Ok(out)
    }

    /// Invert mapped values back to marker space (bijection check).
    pub fn invert(&self, mapped: &Matrix) -> Result<Matrix> {
        if mapped.cols() != self.channels.len() {
            return Err(Error::ShapeMismatch {
                op: "fap_invert",
                left: mapped.shape(),
                right: (mapped.rows(), self.channels.len()),
            });
        }
        let mut out = Matrix::zeros(mapped.rows(), self.channels.len());
        for r in 0..mapped.rows() {
            for (k, ch) in self.channels.iter().enumerate() {
                let (lo, hi) = self.ranges[ch.channel];
                let (flo, fhi) = ch.fap_range;
                let d = (mapped.get(r, k) - flo) / (fhi - flo) * (hi - lo) + lo;
                out.set(r, k, d + self.neutral_pose[ch.channel]);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(t: usize, f: usize, seed: u64) -> FeatureSequence {
        let mut rng = SeededRng::new(seed);
        FeatureSequence::new(
            Matrix::from_fn(t, f, |_, _| rng.uniform(-1.0, 1.0)),
            crate::speech::FRAME_RATE,
            (0..f).map(|i| format!("c{i}")).collect(),
        )
        .unwrap()
    }

    fn tiny_csg_checkpoint(feature_dim: usize) -> Checkpoint {
        use crate::nets::{ArchDescriptor, DiscriminatorNet, GeneratorNet, ParamSet};
        let mut rng = SeededRng::new(7);
        let g = GeneratorNet::new(feature_dim, 2, false, 3, &mut rng);
        let d = DiscriminatorNet::new(feature_dim, false, 2, &mut rng);
        let mut ckpt = Checkpoint::new(ArchDescriptor {
            kind: ModelKind::Csg,
            feature_dim,
            noise_dim: 2,
            g_hidden: 3,
            d_hidden: 2,
            swdnn_hidden: 0,
        });
        ckpt.push_tensors("g.", &g.param_names(), &g.params());
        ckpt.push_tensors("d.", &d.param_names(), &d.params());
        ckpt
    }

    #[test]
    fn output_length_matches_input_in_both_modes() {
        let ckpt = tiny_csg_checkpoint(3);
        let feats = features(150, 3, 1);
        for mode in [SynthesisMode::FullSequence, SynthesisMode::windowed_default()] {
            let req = SynthesisRequest {
                checkpoint: &ckpt,
                features: &feats,
                noise_seed: 5,
                emotion: None,
                mode,
            };
            let motion = synthesize(&req).unwrap();
            assert_eq!(motion.len(), 150);
        }
        // Shorter than one window.
        let short = features(40, 3, 2);
        let req = SynthesisRequest {
            checkpoint: &ckpt,
            features: &short,
            noise_seed: 5,
            emotion: None,
            mode: SynthesisMode::windowed_default(),
        };
        assert_eq!(synthesize(&req).unwrap().len(), 40);
    }

    #[test]
    fn same_request_is_bit_identical() {
        let ckpt = tiny_csg_checkpoint(3);
        let feats = features(100, 3, 3);
        let req = SynthesisRequest {
            checkpoint: &ckpt,
            features: &feats,
            noise_seed: 11,
            emotion: None,
            mode: SynthesisMode::FullSequence,
        };
        let a = synthesize(&req).unwrap();
        let b = synthesize(&req).unwrap();
        assert_eq!(a.frames(), b.frames());

        let req2 = SynthesisRequest {
            noise_seed: 12,
            ..req.clone()
        };
        let c = synthesize(&req2).unwrap();
        assert_ne!(a.frames(), c.frames());
    }

    #[test]
    fn swdnn_constant_net_gives_constant_output() {
        use crate::nets::ParamSet;
        let mut rng = SeededRng::new(4);
        let mut net = SwdnnNet::new(2, 5, &mut rng);
        // Zero every parameter except the head bias: output is the bias.
        let zeroed: Vec<Matrix> = net
            .params()
            .iter()
            .map(|p| Matrix::zeros(p.rows(), p.cols()))
            .collect();
        net.set_params(&zeroed);
        for (i, v) in net.head.b.row_mut(0).iter_mut().enumerate() {
            *v = (i % MOTION_DIM) as f64 * 0.1;
        }
        let feats = features(60, 2, 5);
        let motion = swdnn_infer(&net, &feats).unwrap();
        assert_eq!(motion.len(), 60);
        for r in 0..60 {
            for c in 0..MOTION_DIM {
                assert!((motion.frames().get(r, c) - c as f64 * 0.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn swdnn_matches_bruteforce_coverage_average() {
        let mut rng = SeededRng::new(6);
        let net = SwdnnNet::new(2, 4, &mut rng);
        let feats = features(50, 2, 7);
        let got = swdnn_infer(&net, &feats).unwrap();

        // Oracle: list every covering window per frame, average directly.
        let t_total = 50usize;
        let x = feats.frames();
        for frame in [0usize, 3, 20, 25, 49] {
            let mut sums = vec![0.0; MOTION_DIM];
            let mut n = 0.0;
            for center in 0..t_total {
                let k = frame as i64 - (center as i64 - 6);
                if !(0..13).contains(&k) {
                    continue;
                }
                // Rebuild this center's input window with edge replication.
                let mut win = Matrix::zeros(SWDNN_IN_FRAMES, 2);
                for f in 0..SWDNN_IN_FRAMES {
                    let src = (center as i64 - 20 + f as i64).clamp(0, t_total as i64 - 1) as usize;
                    win.row_mut(f).copy_from_slice(x.row(src));
                }
                let pred = net.forward_window(&win, None).unwrap();
                for c in 0..MOTION_DIM {
                    sums[c] += pred.get(k as usize, c);
                }
                n += 1.0;
            }
            // Interior frames are covered by exactly 13 windows.
            if (6..t_total - 6).contains(&frame) {
                assert_eq!(n as usize, 13);
            }
            for c in 0..MOTION_DIM {
                let want = sums[c] / n;
                let d = (got.frames().get(frame, c) - want).abs();
                assert!(d < 1e-9, "frame {frame} chan {c}: {d}");
            }
        }
    }

    #[test]
    fn swdnn_too_short_is_an_error() {
        let mut rng = SeededRng::new(8);
        let net = SwdnnNet::new(2, 4, &mut rng);
        let feats = features(40, 2, 9);
        assert!(swdnn_infer(&net, &feats).is_err());
    }

    #[test]
    fn fap_mapping_endpoints_and_neutral() {
        let neutral = vec![1.0; MOTION_DIM];
        let ranges = vec![(-2.0, 2.0); MOTION_DIM];
        let channels = vec![FapChannel {
            channel: 0,
            fap_id: 3,
            fap_range: (-100.0, 100.0),
        }];
        let map = FapMapping::new(neutral, ranges, channels).unwrap();

        let mut frames = Matrix::zeros(3, MOTION_DIM);
        frames.set(0, 0, 1.0); // neutral
        frames.set(1, 0, -1.0); // neutral + min displacement
        frames.set(2, 0, 3.0); // neutral + max displacement
        let seq = MotionSequence::new(frames, 120.0).unwrap();
        let mapped = map.apply(&seq).unwrap();
        assert!((mapped.get(0, 0) - 0.0).abs() < 1e-12); // symmetric -> mid-range
        assert!((mapped.get(1, 0) - -100.0).abs() < 1e-12);
        assert!((mapped.get(2, 0) - 100.0).abs() < 1e-12);

        // Linear bijection on mapped channels.
        let inverted = map.invert(&mapped).unwrap();
        for r in 0..3 {
            assert!((inverted.get(r, 0) - seq.frames().get(r, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fap_mapping_rejects_degenerate_ranges() {
        let neutral = vec![0.0; MOTION_DIM];
        let mut ranges = vec![(-1.0, 1.0); MOTION_DIM];
        ranges[2] = (0.5, 0.5);
        let channels = vec![FapChannel {
            channel: 2,
            fap_id: 1,
            fap_range: (0.0, 1.0),
        }];
        assert!(FapMapping::new(neutral, ranges, channels).is_err());
    }

    #[test]
    fn emotion_aware_checkpoint_requires_emotion() {
        use crate::nets::{ArchDescriptor, GeneratorNet, ParamSet};
        let mut rng = SeededRng::new(9);
        let g = GeneratorNet::new(3, 2, true, 3, &mut rng);
        let mut ckpt = Checkpoint::new(ArchDescriptor {
            kind: ModelKind::CsgEmoAware,
            feature_dim: 3,
            noise_dim: 2,
            g_hidden: 3,
            d_hidden: 2,
            swdnn_hidden: 0,
        });
        ckpt.push_tensors("g.", &g.param_names(), &g.params());
        let feats = features(80, 3, 10);
        let mut req = SynthesisRequest {
            checkpoint: &ckpt,
            features: &feats,
            noise_seed: 0,
            emotion: None,
            mode: SynthesisMode::FullSequence,
        };
        assert!(synthesize(&req).is_err());
        req.emotion = Some([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(synthesize(&req).is_ok());
    }
}
