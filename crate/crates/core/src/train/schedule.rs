//! Training schedules: regression baselines, the adversarial model with its
//! pretrain/pretrain/alternate phasing, and per-emotion adaptation.
//!
//! All schedules are deterministic given the generator state they are
//! handed: batch order, noise draws and mismatched sampling all consume the
//! single training stream, and that stream is part of every snapshot, so a
//! run resumed from a checkpoint continues the exact trajectory of an
//! uninterrupted run.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::{
    make_batches, sample_mismatched, Corpus, CorpusSplit, Emotion, Window, WindowBatch,
};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::nets::{
    self, accumulate_grads, scale_grads, zeros_like, ArchDescriptor, Checkpoint, DiscriminatorNet,
    GeneratorNet, ModelKind, ParamSet, SwdnnNet, CHECKPOINT_VERSION, SWDNN_IN_FRAMES,
    SWDNN_OUT_FRAMES,
};
use crate::rng::SeededRng;
use crate::Result;

use super::adam::AdamState;
use super::losses::{bce, ccc_loss, mse_loss, LossValue};

/// Epoch counts, batch geometry and optimizer settings. Defaults are the
/// reference configuration; tests shrink them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    /// Generator pretraining epochs (concordance loss).
    pub pretrain_g_epochs: usize,
    /// Discriminator pretraining epochs (generator frozen).
    pub pretrain_d_epochs: usize,
    /// Adversarial alternation epochs.
    pub adversarial_epochs: usize,
    /// Per-emotion adaptation epochs.
    pub adapt_epochs: usize,
    /// Baseline training epochs.
    pub baseline_epochs: usize,
    /// Extra epochs for the sliding-window baseline.
    pub swdnn_extra_epochs: usize,
    /// Sequences per batch.
    pub batch: usize,
    /// Window length in frames.
    pub window: usize,
    /// Training window stride in frames.
    pub hop: usize,
    /// Discriminator step composition: (real, generated, mismatched).
    pub fake_mix: (usize, usize, usize),
    /// Learning rate for pretraining and the baselines.
    pub lr: f64,
    /// Learning rate for the adversarial phases (alternation and
    /// adaptation); defaults to `lr` when unset. Desk-scale runs accelerate
    /// pretraining with a large `lr` while keeping the adversarial game at
    /// the reference rate.
    pub adversarial_lr: Option<f64>,
    /// Generator BLSTM width.
    pub g_hidden: usize,
    /// Discriminator BLSTM width.
    pub d_hidden: usize,
    /// Sliding-window baseline hidden width.
    pub swdnn_hidden: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            pretrain_g_epochs: 200,
            pretrain_d_epochs: 100,
            adversarial_epochs: 50,
            adapt_epochs: 50,
            baseline_epochs: 200,
            swdnn_extra_epochs: 800,
            batch: 128,
            window: 71,
            hop: 10,
            fake_mix: (1, 1, 1),
            lr: 1e-4,
            adversarial_lr: None,
            g_hidden: 256,
            d_hidden: 128,
            swdnn_hidden: 2000,
        }
    }
}

impl ScheduleSpec {
    /// Check the positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.pretrain_g_epochs,
            self.pretrain_d_epochs,
            self.adversarial_epochs,
            self.adapt_epochs,
            self.baseline_epochs,
            self.batch,
            self.window,
            self.hop,
            self.fake_mix.0,
            self.fake_mix.1,
            self.fake_mix.2,
            self.g_hidden,
            self.d_hidden,
            self.swdnn_hidden,
        ];
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument(
                "schedule counts must all be positive".into(),
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if let Some(lr) = self.adversarial_lr {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::InvalidArgument(
                    "adversarial learning rate must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    /// Phase tag: "baseline", "pretrain-g", "pretrain-d", "adversarial",
    /// "adapt".
    pub phase: String,
    /// 1-based epoch within the phase.
    pub epoch: usize,
    /// Mean training loss of the epoch (generator/regression loss).
    pub train_loss: f64,
    /// Validation loss, for phases that compute one.
    pub val_loss: Option<f64>,
    /// Mean discriminator loss, for phases that train it.
    pub d_loss: Option<f64>,
    /// Mean generator adversarial loss.
    pub g_loss: Option<f64>,
    /// Mean discriminator frame accuracy at threshold 0.5.
    pub d_accuracy: Option<f64>,
}

/// What a schedule returns.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Final checkpoint (best-on-validation for baselines, last state for
    /// the adversarial schedules).
    pub checkpoint: Checkpoint,
    /// One record per epoch.
    pub log: Vec<LogRecord>,
    /// True when training aborted on a non-finite loss.
    pub diverged: bool,
    /// Human-readable diagnostics when `diverged`.
    pub diagnostics: Option<String>,
}

/// Baseline selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Sliding-window feedforward network (MSE).
    Swdnn,
    /// BLSTM regression with MSE.
    BlstmMse,
    /// BLSTM regression with the concordance loss.
    BlstmCcc,
}

impl BaselineKind {
    /// The corresponding checkpoint model kind.
    pub fn model_kind(self) -> ModelKind {
        match self {
            BaselineKind::Swdnn => ModelKind::Swdnn,
            BaselineKind::BlstmMse => ModelKind::BlstmMse,
            BaselineKind::BlstmCcc => ModelKind::BlstmCcc,
        }
    }
}

fn regression_loss(kind: BaselineKind, p: &Matrix, t: &Matrix, mask: Option<&[bool]>) -> Result<LossValue> {
    match kind {
        BaselineKind::BlstmCcc => ccc_loss(p, t, mask),
        _ => mse_loss(p, t, mask),
    }
}

fn window_mask(w: &Window) -> Option<Vec<bool>> {
    if w.valid == w.len() {
        None
    } else {
        Some(w.mask())
    }
}

/// Mean regression loss of a BLSTM-topology net over a corpus part, with
/// zero noise and per-utterance whole windows (stride = window length).
fn eval_blstm(
    net: &GeneratorNet,
    corpus: &Corpus,
    indices: &[usize],
    kind: BaselineKind,
    window: usize,
) -> Result<f64> {
    let part = corpus.subset(indices);
    let windows = crate::dataset::corpus_windows(&part, window, window);
    let z = alloc::vec![0.0; net.noise_dim()];
    let mut total = 0.0;
    let mut count = 0usize;
    for w in &windows {
        if w.valid < 2 {
            continue;
        }
        let e = if net.emotion_aware() { Some(&w.soft) } else { None };
        let (pose, _) = net.forward(&w.x, &z, e)?;
        let mask = window_mask(w);
        let loss = regression_loss(kind, &pose, &w.y, mask.as_deref())?;
        total += loss.loss;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("no evaluable windows"));
    }
    Ok(total / count as f64)
}

// ---------------------------------------------------------------------------
// BLSTM regression baselines (also the generator pretraining engine)
// ---------------------------------------------------------------------------

struct BlstmTrainer<'a> {
    kind: BaselineKind,
    net: GeneratorNet,
    adam: AdamState,
    rng: SeededRng,
    schedule: &'a ScheduleSpec,
    best_val: f64,
    best_params: Vec<Matrix>,
    log: Vec<LogRecord>,
}

impl<'a> BlstmTrainer<'a> {
    fn new(
        kind: BaselineKind,
        feature_dim: usize,
        noise_dim: usize,
        emotion_aware: bool,
        schedule: &'a ScheduleSpec,
        mut rng: SeededRng,
    ) -> Self {
        let net = GeneratorNet::new(
            feature_dim,
            noise_dim,
            emotion_aware,
            schedule.g_hidden,
            &mut rng,
        );
        let adam = AdamState::new(&net.params(), schedule.lr);
        let best_params = net.cloned_params();
        BlstmTrainer {
            kind,
            net,
            adam,
            rng,
            schedule,
            best_val: f64::INFINITY,
            best_params,
            log: Vec::new(),
        }
    }

    /// One epoch over the training part; returns the mean train loss.
    fn train_epoch(&mut self, train: &Corpus) -> Result<f64> {
        let s = self.schedule;
        let batches = make_batches(train, s.batch, s.window, s.hop, &mut self.rng)?;
        let mut epoch_loss = 0.0;
        let mut epoch_windows = 0usize;
        for batch in &batches {
            let mut acc = zeros_like(&self.net.params());
            let mut used = 0usize;
            for w in &batch.windows {
                if w.valid < 2 {
                    continue;
                }
                let z = self.rng.gaussian_vec(self.net.noise_dim());
                let e = if self.net.emotion_aware() { Some(&w.soft) } else { None };
                let (pose, cache) = self.net.forward(&w.x, &z, e)?;
                let mask = window_mask(w);
                let loss = regression_loss(self.kind, &pose, &w.y, mask.as_deref())?;
                if !loss.loss.is_finite() {
                    return Err(Error::NonFinite {
                        context: "training loss",
                        index: None,
                    });
                }
                epoch_loss += loss.loss;
                epoch_windows += 1;
                used += 1;
                let grads = self.net.backward(&cache, &loss.grad).into_vec();
                accumulate_grads(&mut acc, &grads);
            }
            if used == 0 {
                continue;
            }
            scale_grads(&mut acc, 1.0 / used as f64);
            self.adam.step(&mut self.net.params_mut(), &acc)?;
        }
        if epoch_windows == 0 {
            return Err(Error::EmptyInput("no trainable windows"));
        }
        Ok(epoch_loss / epoch_windows as f64)
    }
}

fn arch_for_baseline(kind: BaselineKind, feature_dim: usize, s: &ScheduleSpec) -> ArchDescriptor {
    ArchDescriptor {
        kind: kind.model_kind(),
        feature_dim,
        noise_dim: 0,
        g_hidden: if kind == BaselineKind::Swdnn { 0 } else { s.g_hidden },
        d_hidden: 0,
        swdnn_hidden: if kind == BaselineKind::Swdnn { s.swdnn_hidden } else { 0 },
    }
}

/// Train one of the three non-adversarial baselines; the returned checkpoint
/// holds the best-on-validation parameters.
pub fn train_baseline(
    kind: BaselineKind,
    corpus: &Corpus,
    split: &CorpusSplit,
    schedule: &ScheduleSpec,
    rng: SeededRng,
) -> Result<TrainOutcome> {
    schedule.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    match kind {
        BaselineKind::Swdnn => train_swdnn(corpus, split, schedule, rng),
        _ => train_blstm_baseline(kind, corpus, split, schedule, rng),
    }
}

fn train_blstm_baseline(
    kind: BaselineKind,
    corpus: &Corpus,
    split: &CorpusSplit,
    schedule: &ScheduleSpec,
    rng: SeededRng,
) -> Result<TrainOutcome> {
    let train = corpus.subset(&split.train);
    let mut tr = BlstmTrainer::new(kind, corpus.feature_dim(), 0, false, schedule, rng);
    let mut diverged = false;
    let mut diagnostics = None;

    for epoch in 1..=schedule.baseline_epochs {
        match tr.train_epoch(&train) {
            Ok(train_loss) => {
                let val_loss = eval_blstm(&tr.net, corpus, &split.val, kind, schedule.window)?;
                if val_loss < tr.best_val {
                    tr.best_val = val_loss;
                    tr.best_params = tr.net.cloned_params();
                }
                tr.log.push(LogRecord {
                    phase: "baseline".to_string(),
                    epoch,
                    train_loss,
                    val_loss: Some(val_loss),
                    d_loss: None,
                    g_loss: None,
                    d_accuracy: None,
                });
            }
            Err(Error::NonFinite { .. }) => {
                diverged = true;
                diagnostics = Some(format!("loss diverged at epoch {epoch}; best checkpoint kept"));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    // Final checkpoint carries the best-on-validation parameters.
    let mut best_net = tr.net.clone();
    best_net.set_params(&tr.best_params);
    let mut ckpt = Checkpoint::new(arch_for_baseline(kind, corpus.feature_dim(), schedule));
    ckpt.version = CHECKPOINT_VERSION;
    ckpt.epoch = tr.log.len() as u64;
    ckpt.phase = "final".to_string();
    ckpt.rng_state = tr.rng.state();
    ckpt.push_tensors("g.", &best_net.param_names(), &best_net.params());
    let (adam_tensors, adam_scalar) = tr.adam.pack("adam", &best_net.param_names());
    ckpt.tensors.extend(adam_tensors);
    ckpt.scalars.push(adam_scalar);
    ckpt.scalars.push(("best_val".to_string(), tr.best_val));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log: tr.log,
        diverged,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Sliding-window baseline
// ---------------------------------------------------------------------------

/// (utterance, start) pairs with the full 41-frame context available.
fn swdnn_starts(corpus: &Corpus, hop: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, u) in corpus.utterances.iter().enumerate() {
        if u.len() < SWDNN_IN_FRAMES {
            continue;
        }
        let mut start = 0;
        while start + SWDNN_IN_FRAMES <= u.len() {
            out.push((i, start));
            start += hop;
        }
    }
    out
}

fn swdnn_gather(corpus: &Corpus, items: &[(usize, usize)], feature_dim: usize) -> (Matrix, Matrix) {
    let center_off = (SWDNN_IN_FRAMES - SWDNN_OUT_FRAMES) / 2;
    let mut x = Matrix::zeros(items.len(), SWDNN_IN_FRAMES * feature_dim);
    let mut y = Matrix::zeros(items.len(), SWDNN_OUT_FRAMES * crate::dataset::MOTION_DIM);
    for (row, &(u_idx, start)) in items.iter().enumerate() {
        let u = &corpus.utterances[u_idx];
        let xr = x.row_mut(row);
        for f in 0..SWDNN_IN_FRAMES {
            let src = u.features.frames().row(start + f);
            xr[f * feature_dim..(f + 1) * feature_dim].copy_from_slice(src);
        }
        let yr = y.row_mut(row);
        for f in 0..SWDNN_OUT_FRAMES {
            let src = u.motion.frames().row(start + center_off + f);
            yr[f * crate::dataset::MOTION_DIM..(f + 1) * crate::dataset::MOTION_DIM]
                .copy_from_slice(src);
        }
    }
    (x, y)
}

fn train_swdnn(
    corpus: &Corpus,
    split: &CorpusSplit,
    schedule: &ScheduleSpec,
    mut rng: SeededRng,
) -> Result<TrainOutcome> {
    let feature_dim = corpus.feature_dim();
    let train = corpus.subset(&split.train);
    let val = corpus.subset(&split.val);
    let train_items = swdnn_starts(&train, schedule.hop);
    let val_items = swdnn_starts(&val, SWDNN_IN_FRAMES);
    if train_items.is_empty() || val_items.is_empty() {
        return Err(Error::EmptyInput(
            "no utterances long enough for the sliding-window baseline",
        ));
    }
    let (val_x, val_y) = swdnn_gather(&val, &val_items, feature_dim);

    let mut net = SwdnnNet::new(feature_dim, schedule.swdnn_hidden, &mut rng);
    let mut adam = AdamState::new(&net.params(), schedule.lr);
    let mut best_val = f64::INFINITY;
    let mut best_params = net.cloned_params();
    let mut best_state: Vec<Matrix> = net.state().into_iter().cloned().collect();
    let mut log = Vec::new();
    let mut diverged = false;
    let mut diagnostics = None;

    let epochs = schedule.baseline_epochs + schedule.swdnn_extra_epochs;
    'outer: for epoch in 1..=epochs {
        let mut order = train_items.clone();
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(schedule.batch) {
            let (x, y) = swdnn_gather(&train, chunk, feature_dim);
            let (out, cache) = net.forward_train(&x, &mut rng);
            let loss = mse_loss(&out, &y, None)?;
            if !loss.loss.is_finite() {
                diverged = true;
                diagnostics = Some(format!("loss diverged at epoch {epoch}; best checkpoint kept"));
                break 'outer;
            }
            epoch_loss += loss.loss;
            batches += 1;
            let grads = net.backward(&cache, &loss.grad);
            adam.step(&mut net.params_mut(), &grads)?;
        }
        let val_out = net.forward_eval(&val_x);
        let val_loss = mse_loss(&val_out, &val_y, None)?.loss;
        if val_loss < best_val {
            best_val = val_loss;
            best_params = net.cloned_params();
            best_state = net.state().into_iter().cloned().collect();
        }
        log.push(LogRecord {
            phase: "baseline".to_string(),
            epoch,
            train_loss: epoch_loss / batches.max(1) as f64,
            val_loss: Some(val_loss),
            d_loss: None,
            g_loss: None,
            d_accuracy: None,
        });
    }

    net.set_params(&best_params);
    for (slot, value) in net.state_mut().into_iter().zip(best_state.iter()) {
        *slot = value.clone();
    }
    let mut ckpt = Checkpoint::new(arch_for_baseline(BaselineKind::Swdnn, feature_dim, schedule));
    ckpt.epoch = log.len() as u64;
    ckpt.phase = "final".to_string();
    ckpt.rng_state = rng.state();
    ckpt.push_tensors("swdnn.", &net.param_names(), &net.params());
    ckpt.push_tensors("swdnn.", &net.state_names(), &net.state());
    let (adam_tensors, adam_scalar) = adam.pack("adam", &net.param_names());
    ckpt.tensors.extend(adam_tensors);
    ckpt.scalars.push(adam_scalar);
    ckpt.scalars.push(("best_val".to_string(), best_val));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log,
        diverged,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Conditional sequential GAN
// ---------------------------------------------------------------------------

/// Phase of the adversarial schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsgPhase {
    /// Generator regression pretraining.
    PretrainG,
    /// Discriminator pretraining with the generator frozen.
    PretrainD,
    /// Per-batch alternation of discriminator and generator updates.
    Adversarial,
    /// Schedule complete.
    Done,
}

impl CsgPhase {
    fn tag(self) -> &'static str {
        match self {
            CsgPhase::PretrainG => "pretrain-g",
            CsgPhase::PretrainD => "pretrain-d",
            CsgPhase::Adversarial => "adversarial",
            CsgPhase::Done => "final",
        }
    }

    fn from_index(i: u64) -> CsgPhase {
        match i {
            0 => CsgPhase::PretrainG,
            1 => CsgPhase::PretrainD,
            2 => CsgPhase::Adversarial,
            _ => CsgPhase::Done,
        }
    }

    fn index(self) -> u64 {
        match self {
            CsgPhase::PretrainG => 0,
            CsgPhase::PretrainD => 1,
            CsgPhase::Adversarial => 2,
            CsgPhase::Done => 3,
        }
    }
}

/// Adversarial trainer with snapshot/resume at epoch granularity.
pub struct CsgTrainer {
    /// Generator.
    pub g: GeneratorNet,
    /// Discriminator.
    pub d: DiscriminatorNet,
    /// Generator optimizer.
    pub adam_g: AdamState,
    /// Discriminator optimizer.
    pub adam_d: AdamState,
    /// The single training stream.
    pub rng: SeededRng,
    /// Schedule in effect.
    pub schedule: ScheduleSpec,
    /// Current phase.
    pub phase: CsgPhase,
    /// Epochs completed within the current phase.
    pub epoch_in_phase: usize,
    /// Accumulated log.
    pub log: Vec<LogRecord>,
    /// Freeze the first generator layer (emotion adaptation).
    pub freeze_g_layer1: bool,
    kind: ModelKind,
}

impl CsgTrainer {
    /// Fresh trainer (plain or emotion-aware).
    pub fn new(
        feature_dim: usize,
        schedule: &ScheduleSpec,
        noise_dim: usize,
        emotion_aware: bool,
        mut rng: SeededRng,
    ) -> Result<CsgTrainer> {
        schedule.validate()?;
        let g = GeneratorNet::new(feature_dim, noise_dim, emotion_aware, schedule.g_hidden, &mut rng);
        let d = DiscriminatorNet::new(feature_dim, emotion_aware, schedule.d_hidden, &mut rng);
        let adam_g = AdamState::new(&g.params(), schedule.lr);
        let adam_d = AdamState::new(&d.params(), schedule.lr);
        let kind = if emotion_aware {
            ModelKind::CsgEmoAware
        } else {
            ModelKind::Csg
        };
        Ok(CsgTrainer {
            g,
            d,
            adam_g,
            adam_d,
            rng,
            schedule: schedule.clone(),
            phase: CsgPhase::PretrainG,
            epoch_in_phase: 0,
            log: Vec::new(),
            freeze_g_layer1: false,
            kind,
        })
    }

    /// Resume from a snapshot written by [`CsgTrainer::snapshot`].
    pub fn from_checkpoint(ckpt: &Checkpoint, schedule: &ScheduleSpec) -> Result<CsgTrainer> {
        schedule.validate()?;
        if !ckpt.arch.kind.is_csg() {
            return Err(Error::InvalidArgument(format!(
                "checkpoint holds {}, not an adversarial model",
                ckpt.arch.kind.tag()
            )));
        }
        let g = nets::load_generator(ckpt, "g.")?;
        let d = nets::load_discriminator(ckpt, "d.")?;
        let g_names = g.param_names();
        let d_names = d.param_names();
        let freeze = matches!(ckpt.arch.kind, ModelKind::CsgEmoAdapted(_));
        let adam_g_names: Vec<String> = if freeze {
            g_names[g.layer1_param_count()..].to_vec()
        } else {
            g_names
        };
        let adam_g = AdamState::unpack(ckpt, "adam_g", &adam_g_names, schedule.lr)?;
        let adam_d = AdamState::unpack(ckpt, "adam_d", &d_names, schedule.lr)?;
        Ok(CsgTrainer {
            g,
            d,
            adam_g,
            adam_d,
            rng: SeededRng::from_state(ckpt.rng_state),
            schedule: schedule.clone(),
            phase: CsgPhase::from_index(ckpt.scalar("phase")? as u64),
            epoch_in_phase: ckpt.epoch as usize,
            log: Vec::new(),
            freeze_g_layer1: freeze,
            kind: ckpt.arch.kind,
        })
    }

    /// Serialize the complete training state.
    pub fn snapshot(&self) -> Checkpoint {
        let mut ckpt = Checkpoint::new(ArchDescriptor {
            kind: self.kind,
            feature_dim: self.g.feature_dim(),
            noise_dim: self.g.noise_dim(),
            g_hidden: self.g.hidden_size(),
            d_hidden: self.d.hidden_size(),
            swdnn_hidden: 0,
        });
        ckpt.epoch = self.epoch_in_phase as u64;
        ckpt.phase = self.phase.tag().to_string();
        ckpt.rng_state = self.rng.state();
        ckpt.push_tensors("g.", &self.g.param_names(), &self.g.params());
        ckpt.push_tensors("d.", &self.d.param_names(), &self.d.params());
        let (gt, gs) = self.adam_g.pack("adam_g", &self.adam_g_param_names());
        let (dt, ds) = self.adam_d.pack("adam_d", &self.d.param_names());
        ckpt.tensors.extend(gt);
        ckpt.tensors.extend(dt);
        ckpt.scalars.push(gs);
        ckpt.scalars.push(ds);
        ckpt.scalars.push(("phase".to_string(), self.phase.index() as f64));
        ckpt
    }

    fn adam_g_param_names(&self) -> Vec<String> {
        let names = self.g.param_names();
        if self.freeze_g_layer1 {
            names[self.g.layer1_param_count()..].to_vec()
        } else {
            names
        }
    }

    /// Fresh noise for one window (all phases sample the prior).
    fn draw_noise(&mut self) -> Vec<f64> {
        self.rng.gaussian_vec(self.g.noise_dim())
    }

    fn emotion_of<'w>(&self, w: &'w Window) -> Option<&'w [f64; 6]> {
        if self.g.emotion_aware() {
            Some(&w.soft)
        } else {
            None
        }
    }

    /// One discriminator update on a batch: real pairs against generated
    /// and mismatched fakes, weighted by `fake_mix`. Returns (loss, frame
    /// accuracy). Generator parameters are read-only here.
    pub fn d_step(&mut self, batch: &WindowBatch) -> Result<(f64, f64)> {
        let (wr, wg, wm) = self.schedule.fake_mix;
        let mismatched = if batch.distinct_sources() >= 2 {
            Some(sample_mismatched(batch, &mut self.rng)?)
        } else {
            None
        };
        let total_weight = (wr + wg + if mismatched.is_some() { wm } else { 0 }) as f64;

        let mut acc = zeros_like(&self.d.params());
        let mut d_loss = 0.0;
        let mut acc_hits = 0.0;
        let mut acc_frames = 0usize;
        let mut used = 0usize;

        for (i, w) in batch.windows.iter().enumerate() {
            if w.valid < 2 {
                continue;
            }
            used += 1;
            let e = self.emotion_of(w);

            // Real pair, label 1.
            let (y_real, cache_real) = self.d.forward(&w.x, &w.y, e)?;
            let (l_real, dy_real) = bce(&y_real, 1.0);
            let (g_real, _) = self.d.backward(&cache_real, &dy_real);
            let mut tensors = g_real.into_vec();
            scale_grads(&mut tensors, wr as f64 / total_weight);
            accumulate_grads(&mut acc, &tensors);
            d_loss += wr as f64 / total_weight * l_real;
            for &v in y_real.as_slice() {
                acc_hits += if v > 0.5 { 1.0 } else { 0.0 };
            }
            acc_frames += y_real.len();

            // Generated fake, label 0.
            let z = self.draw_noise();
            let (pose, _) = self.g.forward(&w.x, &z, e)?;
            let (y_gen, cache_gen) = self.d.forward(&w.x, &pose, e)?;
            let (l_gen, dy_gen) = bce(&y_gen, 0.0);
            let (g_gen, _) = self.d.backward(&cache_gen, &dy_gen);
            let mut tensors = g_gen.into_vec();
            scale_grads(&mut tensors, wg as f64 / total_weight);
            accumulate_grads(&mut acc, &tensors);
            d_loss += wg as f64 / total_weight * l_gen;
            for &v in y_gen.as_slice() {
                acc_hits += if v <= 0.5 { 1.0 } else { 0.0 };
            }
            acc_frames += y_gen.len();

            // Mismatched fake, label 0.
            if let Some(mis) = &mismatched {
                let m = &mis.windows[i];
                let (y_mis, cache_mis) = self.d.forward(&m.x, &m.y, e)?;
                let (l_mis, dy_mis) = bce(&y_mis, 0.0);
                let (g_mis, _) = self.d.backward(&cache_mis, &dy_mis);
                let mut tensors = g_mis.into_vec();
                scale_grads(&mut tensors, wm as f64 / total_weight);
                accumulate_grads(&mut acc, &tensors);
                d_loss += wm as f64 / total_weight * l_mis;
                for &v in y_mis.as_slice() {
                    acc_hits += if v <= 0.5 { 1.0 } else { 0.0 };
                }
                acc_frames += y_mis.len();
            }
        }
        if used == 0 {
            return Ok((0.0, 0.0));
        }
        scale_grads(&mut acc, 1.0 / used as f64);
        self.adam_d.step(&mut self.d.params_mut(), &acc)?;
        Ok((d_loss / used as f64, acc_hits / acc_frames.max(1) as f64))
    }

    /// One generator update on a batch: fool the discriminator (labels
    /// flipped to 1 on generated fakes). The discriminator is read-only.
    pub fn g_step(&mut self, batch: &WindowBatch) -> Result<f64> {
        let frozen = if self.freeze_g_layer1 {
            self.g.layer1_param_count()
        } else {
            0
        };
        let mut acc: Vec<Matrix> = zeros_like(&self.g.params())[frozen..].to_vec();
        let mut g_loss = 0.0;
        let mut used = 0usize;
        for w in &batch.windows {
            if w.valid < 2 {
                continue;
            }
            used += 1;
            let e = self.emotion_of(w);
            let z = self.draw_noise();
            let (pose, g_cache) = self.g.forward(&w.x, &z, e)?;
            let (y, d_cache) = self.d.forward(&w.x, &pose, e)?;
            let (loss, dy) = bce(&y, 1.0);
            g_loss += loss;
            let (_, dpose) = self.d.backward(&d_cache, &dy);
            let tensors = self.g.backward(&g_cache, &dpose).into_vec();
            accumulate_grads(&mut acc, &tensors[frozen..]);
        }
        if used == 0 {
            return Ok(0.0);
        }
        scale_grads(&mut acc, 1.0 / used as f64);
        let mut params = self.g.params_mut();
        let mut tail: Vec<&mut Matrix> = params.drain(frozen..).collect();
        self.adam_g.step(&mut tail, &acc)?;
        Ok(g_loss / used as f64)
    }

    /// Regression pretraining epoch for the generator.
    fn epoch_pretrain_g(&mut self, train: &Corpus) -> Result<f64> {
        let s = self.schedule.clone();
        let batches = make_batches(train, s.batch, s.window, s.hop, &mut self.rng)?;
        let mut loss_sum = 0.0;
        let mut count = 0usize;
        for batch in &batches {
            let mut acc = zeros_like(&self.g.params());
            let mut used = 0usize;
            for w in &batch.windows {
                if w.valid < 2 {
                    continue;
                }
                let e = self.emotion_of(w);
                let z = self.draw_noise();
                let (pose, cache) = self.g.forward(&w.x, &z, e)?;
                let mask = window_mask(w);
                let loss = ccc_loss(&pose, &w.y, mask.as_deref())?;
                if !loss.loss.is_finite() {
                    return Err(Error::NonFinite {
                        context: "pretrain loss",
                        index: None,
                    });
                }
                loss_sum += loss.loss;
                count += 1;
                used += 1;
                let grads = self.g.backward(&cache, &loss.grad).into_vec();
                accumulate_grads(&mut acc, &grads);
            }
            if used == 0 {
                continue;
            }
            scale_grads(&mut acc, 1.0 / used as f64);
            self.adam_g.step(&mut self.g.params_mut(), &acc)?;
        }
        if count == 0 {
            return Err(Error::EmptyInput("no trainable windows"));
        }
        Ok(loss_sum / count as f64)
    }

    /// Discriminator pretraining epoch (generator frozen by construction:
    /// only `adam_d` steps).
    fn epoch_pretrain_d(&mut self, train: &Corpus) -> Result<(f64, f64)> {
        let s = self.schedule.clone();
        let batches = make_batches(train, s.batch, s.window, s.hop, &mut self.rng)?;
        let mut d_loss = 0.0;
        let mut d_acc = 0.0;
        let mut count = 0usize;
        for batch in &batches {
            let (loss, accuracy) = self.d_step(batch)?;
            d_loss += loss;
            d_acc += accuracy;
            count += 1;
        }
        Ok((d_loss / count.max(1) as f64, d_acc / count.max(1) as f64))
    }

    /// Adversarial epoch: per batch, discriminator update then generator
    /// update.
    fn epoch_adversarial(&mut self, train: &Corpus) -> Result<(f64, f64, f64)> {
        let s = self.schedule.clone();
        let batches = make_batches(train, s.batch, s.window, s.hop, &mut self.rng)?;
        let mut d_loss = 0.0;
        let mut g_loss = 0.0;
        let mut d_acc = 0.0;
        let mut count = 0usize;
        for batch in &batches {
            let (dl, da) = self.d_step(batch)?;
            let gl = self.g_step(batch)?;
            d_loss += dl;
            d_acc += da;
            g_loss += gl;
            count += 1;
        }
        let n = count.max(1) as f64;
        Ok((d_loss / n, g_loss / n, d_acc / n))
    }

    fn phase_epochs(&self, phase: CsgPhase) -> usize {
        match phase {
            CsgPhase::PretrainG => self.schedule.pretrain_g_epochs,
            CsgPhase::PretrainD => self.schedule.pretrain_d_epochs,
            CsgPhase::Adversarial => self.schedule.adversarial_epochs,
            CsgPhase::Done => 0,
        }
    }

    fn apply_phase_lr(&mut self) {
        if self.phase == CsgPhase::Adversarial {
            if let Some(lr) = self.schedule.adversarial_lr {
                self.adam_g.lr = lr;
                self.adam_d.lr = lr;
            }
        }
    }

    /// Run at most `max_epochs` epochs (across phase boundaries); stops
    /// early when the schedule is complete. Returns the number of epochs
    /// actually run.
    pub fn run_epochs(&mut self, train: &Corpus, max_epochs: usize) -> Result<usize> {
        let mut ran = 0;
        self.apply_phase_lr();
        while ran < max_epochs && self.phase != CsgPhase::Done {
            if self.epoch_in_phase >= self.phase_epochs(self.phase) {
                self.phase = CsgPhase::from_index(self.phase.index() + 1);
                self.epoch_in_phase = 0;
                self.apply_phase_lr();
                continue;
            }
            let epoch = self.epoch_in_phase + 1;
            let record = match self.phase {
                CsgPhase::PretrainG => {
                    let train_loss = self.epoch_pretrain_g(train)?;
                    LogRecord {
                        phase: self.phase.tag().to_string(),
                        epoch,
                        train_loss,
                        val_loss: None,
                        d_loss: None,
                        g_loss: None,
                        d_accuracy: None,
                    }
                }
                CsgPhase::PretrainD => {
                    let (d_loss, d_acc) = self.epoch_pretrain_d(train)?;
                    LogRecord {
                        phase: self.phase.tag().to_string(),
                        epoch,
                        train_loss: d_loss,
                        val_loss: None,
                        d_loss: Some(d_loss),
                        g_loss: None,
                        d_accuracy: Some(d_acc),
                    }
                }
                CsgPhase::Adversarial => {
                    let (d_loss, g_loss, d_acc) = self.epoch_adversarial(train)?;
                    LogRecord {
                        phase: self.phase.tag().to_string(),
                        epoch,
                        train_loss: g_loss,
                        val_loss: None,
                        d_loss: Some(d_loss),
                        g_loss: Some(g_loss),
                        d_accuracy: Some(d_acc),
                    }
                }
                CsgPhase::Done => unreachable!(),
            };
            self.log.push(record);
            self.epoch_in_phase += 1;
            ran += 1;
            if self.epoch_in_phase >= self.phase_epochs(self.phase) {
                self.phase = CsgPhase::from_index(self.phase.index() + 1);
                self.epoch_in_phase = 0;
                self.apply_phase_lr();
            }
        }
        Ok(ran)
    }

    /// Run the remaining schedule to completion.
    pub fn run_to_completion(&mut self, train: &Corpus) -> Result<()> {
        while self.phase != CsgPhase::Done {
            self.run_epochs(train, usize::MAX)?;
        }
        Ok(())
    }

    /// Final checkpoint with phase tag "final".
    pub fn finish(&self) -> Checkpoint {
        let mut ckpt = self.snapshot();
        ckpt.phase = "final".to_string();
        ckpt
    }
}

/// Train the adversarial model end to end: generator pretraining (CCC),
/// discriminator pretraining (generator frozen, both fake kinds), then
/// per-batch alternation with flipped labels on the generator step.
pub fn train_csg(
    corpus: &Corpus,
    split: &CorpusSplit,
    schedule: &ScheduleSpec,
    noise_dim: usize,
    emotion_aware: bool,
    rng: SeededRng,
) -> Result<TrainOutcome> {
    let train = corpus.subset(&split.train);
    let mut trainer = CsgTrainer::new(corpus.feature_dim(), schedule, noise_dim, emotion_aware, rng)?;
    let mut diverged = false;
    let mut diagnostics = None;
    if let Err(e) = trainer.run_to_completion(&train) {
        match e {
            Error::NonFinite { .. } => {
                diverged = true;
                let last = trainer.log.last();
                diagnostics = Some(format!(
                    "adversarial run diverged; last record: {:?}",
                    last.map(|r| (r.phase.clone(), r.epoch, r.train_loss))
                ));
            }
            other => return Err(other),
        }
    }
    Ok(TrainOutcome {
        checkpoint: trainer.finish(),
        log: trainer.log,
        diverged,
        diagnostics,
    })
}

/// Adapt a trained plain CSG to a single emotion: generator layer 1 frozen,
/// the rest of the generator and the whole discriminator fine-tuned
/// adversarially on the emotion subset.
pub fn adapt_emotion(
    base: &Checkpoint,
    subset: &Corpus,
    schedule: &ScheduleSpec,
    rng: SeededRng,
) -> Result<TrainOutcome> {
    schedule.validate()?;
    if base.arch.kind != ModelKind::Csg {
        return Err(Error::InvalidArgument(format!(
            "adaptation starts from a plain csg checkpoint, got {}",
            base.arch.kind.tag()
        )));
    }
    if subset.is_empty() {
        return Err(Error::EmptyInput("adaptation subset"));
    }
    let mut emotion = None;
    for u in &subset.utterances {
        match u.emotion.hard() {
            Some(e) if Emotion::ADAPTABLE.contains(&e) => {
                if *emotion.get_or_insert(e) != e {
                    return Err(Error::InvalidArgument(
                        "adaptation subset mixes consensus emotions".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "utterance {} lacks an adaptable consensus emotion",
                    u.id
                )));
            }
        }
    }
    let emotion = emotion.unwrap();

    let g = nets::load_generator(base, "g.")?;
    let d = nets::load_discriminator(base, "d.")?;
    let frozen = g.layer1_param_count();
    let adapt_lr = schedule.adversarial_lr.unwrap_or(schedule.lr);
    let adam_g = AdamState::new(&g.params()[frozen..].to_vec(), adapt_lr);
    let adam_d = AdamState::new(&d.params(), adapt_lr);

    let mut trainer = CsgTrainer {
        g,
        d,
        adam_g,
        adam_d,
        rng,
        schedule: schedule.clone(),
        phase: CsgPhase::Adversarial,
        epoch_in_phase: 0,
        log: Vec::new(),
        freeze_g_layer1: true,
        kind: ModelKind::CsgEmoAdapted(emotion),
    };
    // The adaptation schedule is `adapt_epochs` adversarial epochs.
    trainer.schedule.adversarial_epochs = schedule.adapt_epochs;

    let mut diverged = false;
    let mut diagnostics = None;
    if let Err(e) = trainer.run_to_completion(subset) {
        match e {
            Error::NonFinite { .. } => {
                diverged = true;
                diagnostics = Some("adaptation diverged".to_string());
            }
            other => return Err(other),
        }
    }
    let mut outcome_log = trainer.log.clone();
    for r in &mut outcome_log {
        r.phase = "adapt".to_string();
    }
    Ok(TrainOutcome {
        checkpoint: trainer.finish(),
        log: outcome_log,
        diverged,
        diagnostics,
    })
}

/// Mean regression loss of a checkpointed BLSTM-topology model over part of
/// a corpus (exposed for validation and the acceptance suite).
pub fn eval_checkpoint_loss(
    ckpt: &Checkpoint,
    corpus: &Corpus,
    indices: &[usize],
    window: usize,
) -> Result<f64> {
    let net = nets::load_generator(ckpt, "g.")?;
    let kind = match ckpt.arch.kind {
        ModelKind::BlstmMse => BaselineKind::BlstmMse,
        _ => BaselineKind::BlstmCcc,
    };
    eval_blstm(&net, corpus, indices, kind, window)
}
