//! Corpus model: utterances pairing speech features with lip motion,
//! emotion labels (hard and soft), fixed-window batching, mismatched-pair
//! fake sampling, stratified splitting, and a synthetic paired corpus with a
//! known ground-truth mapping used as the oracle for everything downstream.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::rng::SeededRng;
use crate::speech::FeatureSequence;
use crate::Result;

/// Orofacial markers tracked around the mouth.
pub const MARKER_COUNT: usize = 15;
/// Motion vector width: 15 markers x (x, y, z).
pub const MOTION_DIM: usize = 45;
/// Number of retained emotion classes.
pub const EMOTION_CLASSES: usize = 6;

/// The six retained emotion categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    /// Neutral state.
    Neutral,
    /// Anger.
    Anger,
    /// Happiness (includes excitement).
    Happiness,
    /// Sadness.
    Sadness,
    /// Frustration.
    Frustration,
    /// Everything else, including no-consensus turns.
    Other,
}

impl Emotion {
    /// All six classes in index order.
    pub const ALL: [Emotion; 6] = [
        Emotion::Neutral,
        Emotion::Anger,
        Emotion::Happiness,
        Emotion::Sadness,
        Emotion::Frustration,
        Emotion::Other,
    ];

    /// The four classes used for emotion-dependent adaptation.
    pub const ADAPTABLE: [Emotion; 4] = [
        Emotion::Anger,
        Emotion::Happiness,
        Emotion::Sadness,
        Emotion::Frustration,
    ];

    /// Stable index in 0..6.
    pub fn index(self) -> usize {
        match self {
            Emotion::Neutral => 0,
            Emotion::Anger => 1,
            Emotion::Happiness => 2,
            Emotion::Sadness => 3,
            Emotion::Frustration => 4,
            Emotion::Other => 5,
        }
    }

    /// Inverse of [`Emotion::index`].
    pub fn from_index(i: usize) -> Option<Emotion> {
        Emotion::ALL.get(i).copied()
    }

    /// Short name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Emotion::Neutral => "neu",
            Emotion::Anger => "ang",
            Emotion::Happiness => "hap",
            Emotion::Sadness => "sad",
            Emotion::Frustration => "fru",
            Emotion::Other => "oth",
        }
    }

    /// Parse a short or long class name.
    pub fn parse(s: &str) -> Option<Emotion> {
        match s {
            "neu" | "neutral" => Some(Emotion::Neutral),
            "ang" | "anger" => Some(Emotion::Anger),
            "hap" | "happiness" => Some(Emotion::Happiness),
            "sad" | "sadness" => Some(Emotion::Sadness),
            "fru" | "frustration" => Some(Emotion::Frustration),
            "oth" | "other" => Some(Emotion::Other),
            _ => None,
        }
    }
}

/// Per-utterance emotion: optional strict-majority class plus the empirical
/// distribution of the individual annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionLabel {
    hard: Option<Emotion>,
    soft: [f64; EMOTION_CLASSES],
}

impl EmotionLabel {
    /// Build from raw per-annotator labels.
    pub fn from_annotations(annotations: &[Emotion]) -> Result<EmotionLabel> {
        Ok(EmotionLabel {
            hard: consensus_label(annotations),
            soft: soft_label(annotations)?,
        })
    }

    /// Build directly from a soft distribution (hard set when one class
    /// holds a strict majority of the mass).
    pub fn from_soft(soft: [f64; EMOTION_CLASSES]) -> Result<EmotionLabel> {
        let sum: f64 = soft.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || soft.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "soft label must be a distribution (sum {sum})"
            )));
        }
        let (argmax, max) = soft
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let hard = if max > 0.5 {
            Emotion::from_index(argmax)
        } else {
            None
        };
        Ok(EmotionLabel { hard, soft })
    }

    /// Strict-majority class, when one exists.
    pub fn hard(&self) -> Option<Emotion> {
        self.hard
    }

    /// Soft distribution over the six classes.
    pub fn soft(&self) -> &[f64; EMOTION_CLASSES] {
        &self.soft
    }
}

/// Empirical distribution of annotations over the six classes.
pub fn soft_label(annotations: &[Emotion]) -> Result<[f64; EMOTION_CLASSES]> {
    if annotations.is_empty() {
        return Err(Error::EmptyInput("annotations"));
    }
    let mut soft = [0.0; EMOTION_CLASSES];
    for a in annotations {
        soft[a.index()] += 1.0;
    }
    let n = annotations.len() as f64;
    for v in &mut soft {
        *v /= n;
    }
    Ok(soft)
}

/// Strict-majority class across annotations; `None` when no class holds
/// more than half the votes.
pub fn consensus_label(annotations: &[Emotion]) -> Option<Emotion> {
    if annotations.is_empty() {
        return None;
    }
    let mut counts = [0usize; EMOTION_CLASSES];
    for a in annotations {
        counts[a.index()] += 1;
    }
    let (argmax, max) = counts
        .iter()
        .enumerate()
        .fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    if 2 * max > annotations.len() {
        Emotion::from_index(argmax)
    } else {
        None
    }
}

/// A T x 45 block of marker coordinates at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    frames: Matrix,
    frame_rate: f64,
}

impl MotionSequence {
    /// Wrap a T x 45 matrix.
    pub fn new(frames: Matrix, frame_rate: f64) -> Result<MotionSequence> {
        if frames.cols() != MOTION_DIM {
            return Err(Error::InvalidArgument(format!(
                "motion must have {MOTION_DIM} channels, got {}",
                frames.cols()
            )));
        }
        if frame_rate <= 0.0 {
            return Err(Error::InvalidArgument("frame_rate must be > 0".into()));
        }
        Ok(MotionSequence { frames, frame_rate })
    }

    /// Frame matrix (T x 45).
    pub fn frames(&self) -> &Matrix {
        &self.frames
    }

    /// Mutable frame matrix.
    pub fn frames_mut(&mut self) -> &mut Matrix {
        &mut self.frames
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }

    /// Frame rate in Hz.
    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    /// First `t` frames.
    pub fn truncated(&self, t: usize) -> MotionSequence {
        let t = t.min(self.len());
        let mut m = Matrix::zeros(t, MOTION_DIM);
        for r in 0..t {
            m.row_mut(r).copy_from_slice(self.frames.row(r));
        }
        MotionSequence {
            frames: m,
            frame_rate: self.frame_rate,
        }
    }
}

/// Channel names for motion CSV files: `m01_x .. m15_z`.
pub fn motion_channel_names() -> Vec<String> {
    let mut names = Vec::with_capacity(MOTION_DIM);
    for marker in 1..=MARKER_COUNT {
        for axis in ["x", "y", "z"] {
            names.push(format!("m{marker:02}_{axis}"));
        }
    }
    names
}

/// One speaking turn: aligned features and motion plus emotion.
#[derive(Debug, Clone)]
pub struct Utterance {
    /// Unique id.
    pub id: String,
    /// Speaker id.
    pub speaker: String,
    /// Speech features, T x F at 120 fps.
    pub features: FeatureSequence,
    /// Lip motion, T x 45 at 120 fps.
    pub motion: MotionSequence,
    /// Emotion label.
    pub emotion: EmotionLabel,
}

impl Utterance {
    /// Build an utterance, checking frame alignment.
    pub fn new(
        id: String,
        speaker: String,
        features: FeatureSequence,
        motion: MotionSequence,
        emotion: EmotionLabel,
    ) -> Result<Utterance> {
        if features.len() != motion.len() {
            return Err(Error::InvalidArgument(format!(
                "utterance {id}: features T={} vs motion T={}",
                features.len(),
                motion.len()
            )));
        }
        Ok(Utterance {
            id,
            speaker,
            features,
            motion,
            emotion,
        })
    }

    /// Frame count.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// A list of utterances sharing one feature dimensionality.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    /// The utterances.
    pub utterances: Vec<Utterance>,
}

impl Corpus {
    /// Wrap utterances; all must share the feature dimension.
    pub fn new(utterances: Vec<Utterance>) -> Result<Corpus> {
        if let Some(first) = utterances.first() {
            let f = first.features.dim();
            for u in &utterances {
                if u.features.dim() != f {
                    return Err(Error::InvalidArgument(format!(
                        "utterance {}: feature dim {} vs {}",
                        u.id,
                        u.features.dim(),
                        f
                    )));
                }
            }
        }
        Ok(Corpus { utterances })
    }

    /// Number of utterances.
    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    /// True when there are no utterances.
    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// Feature dimensionality (0 for an empty corpus).
    pub fn feature_dim(&self) -> usize {
        self.utterances.first().map_or(0, |u| u.features.dim())
    }

    /// Clone the utterances selected by `indices`.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            utterances: indices
                .iter()
                .map(|&i| self.utterances[i].clone())
                .collect(),
        }
    }

    /// Indices of utterances whose consensus label equals `emotion`.
    pub fn indices_with_emotion(&self, emotion: Emotion) -> Vec<usize> {
        self.utterances
            .iter()
            .enumerate()
            .filter(|(_, u)| u.emotion.hard() == Some(emotion))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A contiguous L-frame slice of one utterance (zero-padded at the tail when
/// the utterance is shorter than L).
#[derive(Debug, Clone)]
pub struct Window {
    /// Features, L x F.
    pub x: Matrix,
    /// Motion, L x 45.
    pub y: Matrix,
    /// Soft emotion of the source utterance.
    pub soft: [f64; EMOTION_CLASSES],
    /// Index of the source utterance within its corpus.
    pub source: usize,
    /// Source utterance id.
    pub source_id: String,
    /// First frame of the slice within the utterance.
    pub start: usize,
    /// Number of valid frames; frames `valid..L` are padding.
    pub valid: usize,
}

impl Window {
    /// Window length L.
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    /// True when the window holds no frames.
    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    /// Per-frame validity mask.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.len()).map(|t| t < self.valid).collect()
    }
}

/// A batch of equally sized windows.
#[derive(Debug, Clone)]
pub struct WindowBatch {
    /// The windows.
    pub windows: Vec<Window>,
}

impl WindowBatch {
    /// Batch size B.
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    /// True when the batch is empty.
    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Distinct source utterances in the batch.
    pub fn distinct_sources(&self) -> usize {
        let mut ids: Vec<usize> = self.windows.iter().map(|w| w.source).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Slice an utterance into L-frame windows starting at 0, hop, 2*hop, ...
///
/// An utterance shorter than L yields a single zero-padded window whose
/// `valid` marks the padded tail.
pub fn window_utterance(u: &Utterance, corpus_index: usize, l: usize, hop: usize) -> Vec<Window> {
    assert!(l >= 1 && hop >= 1, "window and hop must be >= 1");
    let t = u.len();
    let f = u.features.dim();
    let mut out = Vec::new();
    let make = |start: usize| -> Window {
        let valid = (t - start).min(l);
        let mut x = Matrix::zeros(l, f);
        let mut y = Matrix::zeros(l, MOTION_DIM);
        for r in 0..valid {
            x.row_mut(r)
                .copy_from_slice(u.features.frames().row(start + r));
            y.row_mut(r)
                .copy_from_slice(u.motion.frames().row(start + r));
        }
        Window {
            x,
            y,
            soft: *u.emotion.soft(),
            source: corpus_index,
            source_id: u.id.clone(),
            start,
            valid,
        }
    };
    if t < l {
        out.push(make(0));
        return out;
    }
    let mut start = 0;
    while start + l <= t {
        out.push(make(start));
        start += hop;
    }
    out
}

/// All windows of a corpus, in utterance order.
pub fn corpus_windows(corpus: &Corpus, l: usize, hop: usize) -> Vec<Window> {
    let mut windows = Vec::new();
    for (i, u) in corpus.utterances.iter().enumerate() {
        windows.extend(window_utterance(u, i, l, hop));
    }
    windows
}

/// Shuffle all corpus windows and group them into batches of `b` (the last
/// partial batch is kept). Deterministic given the generator state.
pub fn make_batches(
    corpus: &Corpus,
    b: usize,
    l: usize,
    hop: usize,
    rng: &mut SeededRng,
) -> Result<Vec<WindowBatch>> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    if b == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let mut windows = corpus_windows(corpus, l, hop);
    rng.shuffle(&mut windows);
    let mut batches = Vec::with_capacity(windows.len().div_ceil(b));
    let mut cur = Vec::with_capacity(b);
    for w in windows {
        cur.push(w);
        if cur.len() == b {
            batches.push(WindowBatch {
                windows: core::mem::take(&mut cur),
            });
            cur.reserve(b);
        }
    }
    if !cur.is_empty() {
        batches.push(WindowBatch { windows: cur });
    }
    Ok(batches)
}

/// Replace each window's motion with a window from a different utterance.
///
/// Uses a within-batch derangement over source ids, which preserves the
/// multiset of motion windows. When no derangement exists (one utterance
/// holds more than half the batch) the affected entries fall back to
/// redrawing a motion window from another source with replacement. A batch
/// drawn entirely from one utterance is an error.
pub fn sample_mismatched(batch: &WindowBatch, rng: &mut SeededRng) -> Result<WindowBatch> {
    let n = batch.len();
    if batch.distinct_sources() < 2 {
        return Err(Error::InvalidArgument(
            "mismatched sampling needs at least two source utterances in the batch".into(),
        ));
    }

    // Random order, then stable-sort by source so each source forms one
    // contiguous block; rotating by the largest block size leaves every
    // position in a different block whenever a derangement exists.
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    order.sort_by_key(|&i| batch.windows[i].source);

    let mut max_group = 1usize;
    {
        let mut run = 1;
        for w in 1..n {
            if batch.windows[order[w]].source == batch.windows[order[w - 1]].source {
                run += 1;
                max_group = max_group.max(run);
            } else {
                run = 1;
            }
        }
    }

    let mut donor_of = vec![usize::MAX; n];
    if 2 * max_group <= n {
        for p in 0..n {
            donor_of[order[p]] = order[(p + max_group) % n];
        }
    }

    let mut windows = Vec::with_capacity(n);
    for i in 0..n {
        let donor = donor_of[i];
        let donor = if donor != usize::MAX && batch.windows[donor].source != batch.windows[i].source
        {
            donor
        } else {
            // Fallback: redraw until the source differs (terminates since at
            // least two sources exist).
            loop {
                let j = rng.below(n);
                if batch.windows[j].source != batch.windows[i].source {
                    break j;
                }
            }
        };
        let src = &batch.windows[i];
        let d = &batch.windows[donor];
        windows.push(Window {
            x: src.x.clone(),
            y: d.y.clone(),
            soft: src.soft,
            source: src.source,
            source_id: src.source_id.clone(),
            start: src.start,
            valid: src.valid.min(d.valid),
        });
    }
    Ok(WindowBatch { windows })
}

/// Utterance-level indices of a train/validation/test split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    /// Training utterance indices.
    pub train: Vec<usize>,
    /// Validation utterance indices.
    pub val: Vec<usize>,
    /// Test utterance indices.
    pub test: Vec<usize>,
}

/// Deterministic utterance-level split, stratified by (speaker, hard
/// emotion) where possible.
pub fn split_corpus(corpus: &Corpus, ratios: (f64, f64, f64), seed: u64) -> Result<CorpusSplit> {
    let n = corpus.len();
    if n < 5 {
        return Err(Error::InvalidArgument(format!(
            "split needs at least 5 utterances, got {n}"
        )));
    }
    let (rt, rv, rs) = ratios;
    if rt <= 0.0 || rv < 0.0 || rs < 0.0 || (rt + rv + rs - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "split ratios must be nonnegative and sum to 1".into(),
        ));
    }

    // Global targets first, so exact totals are honored.
    let n_train = crate::num::round(n as f64 * rt) as usize;
    let n_val = (crate::num::round(n as f64 * rv) as usize).min(n - n_train);

    // Strata keyed by (speaker, hard emotion), deterministic order.
    let mut keys: Vec<(String, usize, usize)> = corpus
        .utterances
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let e = u.emotion.hard().map_or(EMOTION_CLASSES, |e| e.index());
            (u.speaker.clone(), e, i)
        })
        .collect();
    keys.sort();
    let mut strata: Vec<Vec<usize>> = Vec::new();
    let mut current_key: Option<(&str, usize)> = None;
    for (spk, e, i) in &keys {
        if current_key != Some((spk.as_str(), *e)) {
            strata.push(Vec::new());
            current_key = Some((spk.as_str(), *e));
        }
        strata.last_mut().unwrap().push(*i);
    }

    let mut rng = SeededRng::with_stream(seed, 0x517);
    for s in &mut strata {
        rng.shuffle(s);
    }

    // Largest-remainder allocation of the train quota across strata, then
    // of the validation quota over what is left.
    let allocate = |sizes: &[usize], quota: usize| -> Vec<usize> {
        let total: usize = sizes.iter().sum();
        if total == 0 || quota == 0 {
            return vec![0; sizes.len()];
        }
        let mut counts: Vec<usize> = sizes.iter().map(|&s| (s * quota) / total).collect();
        let mut remainders: Vec<(usize, usize)> = sizes
            .iter()
            .enumerate()
            .map(|(k, &s)| (k, (s * quota) % total))
            .collect();
        remainders.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut deficit = quota - counts.iter().sum::<usize>();
        for (k, _) in remainders {
            if deficit == 0 {
                break;
            }
            if counts[k] < sizes[k] {
                counts[k] += 1;
                deficit -= 1;
            }
        }
        // Quota can still be short when strata saturate; sweep again.
        let mut k = 0;
        while deficit > 0 {
            if counts[k] < sizes[k] {
                counts[k] += 1;
                deficit -= 1;
            }
            k = (k + 1) % sizes.len();
        }
        counts
    };

    let sizes: Vec<usize> = strata.iter().map(|s| s.len()).collect();
    let train_counts = allocate(&sizes, n_train);
    let remaining: Vec<usize> = sizes
        .iter()
        .zip(train_counts.iter())
        .map(|(s, t)| s - t)
        .collect();
    let val_counts = allocate(&remaining, n_val);

    let mut split = CorpusSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for ((stratum, &tc), &vc) in strata.iter().zip(train_counts.iter()).zip(val_counts.iter()) {
        split.train.extend_from_slice(&stratum[..tc]);
        split.val.extend_from_slice(&stratum[tc..tc + vc]);
        split.test.extend_from_slice(&stratum[tc + vc..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Parameters of the synthetic paired corpus.
///
/// The corpus is fully determined by the seed: features are smoothed
/// Gaussian processes, and motion is a fixed seeded linear mixture of the
/// re-smoothed features plus a per-emotion gain row and optional white
/// noise. The deterministic part of the construction is exposed through
/// [`SynthOracle`].
#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Number of utterances; class assignment cycles through the four
    /// adaptable emotions unless `class_counts` is set.
    pub n_utterances: usize,
    /// Inclusive range of utterance lengths in frames.
    pub t_range: (usize, usize),
    /// Feature dimensionality F.
    pub feature_dim: usize,
    /// Root seed; everything derives from it.
    pub seed: u64,
    /// Per-class additive offsets, 6 x 45.
    pub emotion_gains: Matrix,
    /// Box-smoothing radius (frames) used both for feature generation and
    /// inside the feature-to-motion map.
    pub smoothing_radius: usize,
    /// Standard deviation of the additive motion noise.
    pub noise_sd: f64,
    /// Number of synthetic speakers (round-robin assignment).
    pub n_speakers: usize,
    /// Per-class utterance counts over the six classes; overrides the
    /// round-robin assignment when set.
    pub class_counts: Option<[usize; EMOTION_CLASSES]>,
    /// Annotators simulated per utterance.
    pub annotators: usize,
    /// Probability that one annotation deviates from the target class.
    pub annotation_noise: f64,
}

impl SynthSpec {
    /// Spec with documented defaults: gain amplitude 1 for the four
    /// adaptable classes, radius 4, three annotators.
    pub fn new(n_utterances: usize, feature_dim: usize, seed: u64) -> SynthSpec {
        SynthSpec {
            n_utterances,
            t_range: (300, 600),
            feature_dim,
            seed,
            emotion_gains: default_emotion_gains(seed, 1.0),
            smoothing_radius: 4,
            noise_sd: 0.05,
            n_speakers: 5,
            class_counts: None,
            annotators: 3,
            annotation_noise: 0.25,
        }
    }

    /// The deterministic feature-to-motion map this spec induces.
    pub fn oracle(&self) -> SynthOracle {
        let mut rng = SeededRng::with_stream(self.seed, 1);
        let scale = 1.0 / crate::num::sqrt(self.feature_dim as f64);
        let mixing = Matrix::from_fn(MOTION_DIM, self.feature_dim, |_, _| rng.gaussian() * scale);
        SynthOracle {
            mixing,
            gains: self.emotion_gains.clone(),
            radius: self.smoothing_radius,
        }
    }

    /// Emotion class of utterance `i`.
    fn class_of(&self, i: usize) -> Emotion {
        match &self.class_counts {
            None => Emotion::ADAPTABLE[i % Emotion::ADAPTABLE.len()],
            Some(counts) => {
                let mut remaining = i;
                for (c, &count) in counts.iter().enumerate() {
                    if remaining < count {
                        return Emotion::from_index(c).unwrap();
                    }
                    remaining -= count;
                }
                Emotion::Other
            }
        }
    }
}

/// Seeded per-class gain rows: zero for neutral, +/- amplitude patterns for
/// the four adaptable classes, +/- amplitude/4 for `other`.
pub fn default_emotion_gains(seed: u64, amplitude: f64) -> Matrix {
    let mut rng = SeededRng::with_stream(seed, 2);
    Matrix::from_fn(EMOTION_CLASSES, MOTION_DIM, |c, _| {
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        match c {
            0 => 0.0,
            5 => sign * amplitude * 0.25,
            _ => sign * amplitude,
        }
    })
}

/// The deterministic part of the synthetic construction: motion prediction
/// given features and an emotion class.
#[derive(Debug, Clone)]
pub struct SynthOracle {
    mixing: Matrix,
    gains: Matrix,
    radius: usize,
}

impl SynthOracle {
    /// The 45 x F mixing matrix.
    pub fn mixing(&self) -> &Matrix {
        &self.mixing
    }

    /// The 6 x 45 gain table.
    pub fn gains(&self) -> &Matrix {
        &self.gains
    }

    /// Noise-free motion for `features` under `emotion`.
    pub fn predict(&self, features: &FeatureSequence, emotion: Emotion) -> MotionSequence {
        let smoothed = boxsmooth_columns(features.frames(), self.radius);
        let t = smoothed.rows();
        let mut frames = Matrix::zeros(t, MOTION_DIM);
        let gain = self.gains.row(emotion.index());
        for r in 0..t {
            let x = smoothed.row(r);
            let out = frames.row_mut(r);
            for (j, o) in out.iter_mut().enumerate() {
                let w = self.mixing.row(j);
                let mut acc = 0.0;
                for (wk, xk) in w.iter().zip(x.iter()) {
                    acc += wk * xk;
                }
                *o = acc + gain[j];
            }
        }
        MotionSequence::new(frames, crate::speech::FRAME_RATE).unwrap()
    }
}

/// Edge-truncated moving average over each column.
pub fn boxsmooth_columns(m: &Matrix, radius: usize) -> Matrix {
    let (t, f) = m.shape();
    let mut out = Matrix::zeros(t, f);
    for c in 0..f {
        for r in 0..t {
            let lo = r.saturating_sub(radius);
            let hi = (r + radius).min(t - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += m.get(k, c);
            }
            out.set(r, c, acc / (hi - lo + 1) as f64);
        }
    }
    out
}

/// Generate the synthetic corpus described by `spec`. Bit-identical for a
/// given spec.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Corpus> {
    if spec.n_utterances == 0 {
        return Err(Error::InvalidArgument("n_utterances must be >= 1".into()));
    }
    if spec.t_range.0 == 0 || spec.t_range.0 > spec.t_range.1 {
        return Err(Error::InvalidArgument("invalid t_range".into()));
    }
    if spec.feature_dim == 0 {
        return Err(Error::InvalidArgument("feature_dim must be >= 1".into()));
    }
    if spec.annotators == 0 {
        return Err(Error::InvalidArgument("annotators must be >= 1".into()));
    }
    let total = spec
        .class_counts
        .as_ref()
        .map(|c| c.iter().sum::<usize>())
        .unwrap_or(spec.n_utterances);
    if total != spec.n_utterances {
        return Err(Error::InvalidArgument(format!(
            "class_counts sum {total} != n_utterances {}",
            spec.n_utterances
        )));
    }

    let oracle = spec.oracle();
    let mut len_rng = SeededRng::with_stream(spec.seed, 3);
    let mut feat_rng = SeededRng::with_stream(spec.seed, 4);
    let mut noise_rng = SeededRng::with_stream(spec.seed, 5);
    let mut anno_rng = SeededRng::with_stream(spec.seed, 6);

    let feature_names: Vec<String> = (0..spec.feature_dim)
        .map(|i| format!("synth{i:02}"))
        .collect();
    let smooth_gain = crate::num::sqrt((2 * spec.smoothing_radius + 1) as f64);

    let mut utterances = Vec::with_capacity(spec.n_utterances);
    for i in 0..spec.n_utterances {
        let t = spec.t_range.0 + len_rng.below(spec.t_range.1 - spec.t_range.0 + 1);
        let class = spec.class_of(i);

        // Smoothed Gaussian features, rescaled back to roughly unit variance.
        let mut raw = Matrix::zeros(t, spec.feature_dim);
        for v in raw.as_mut_slice() {
            *v = feat_rng.gaussian();
        }
        let mut features = boxsmooth_columns(&raw, spec.smoothing_radius);
        features.map_inplace(|v| v * smooth_gain);
        let features =
            FeatureSequence::new(features, crate::speech::FRAME_RATE, feature_names.clone())?;

        let mut motion = oracle.predict(&features, class);
        if spec.noise_sd > 0.0 {
            for v in motion.frames.as_mut_slice() {
                *v += spec.noise_sd * noise_rng.gaussian();
            }
        }

        // Simulated annotators: target class, with an occasional deviation
        // to a random other class so soft labels are not always one-hot.
        let mut annotations = vec![class; spec.annotators];
        if spec.annotators >= 3 && anno_rng.next_f64() < spec.annotation_noise {
            let mut alt = class;
            while alt == class {
                alt = Emotion::from_index(anno_rng.below(EMOTION_CLASSES)).unwrap();
            }
            annotations[spec.annotators - 1] = alt;
        }

        utterances.push(Utterance::new(
            format!("synth{i:04}"),
            format!("spk{:02}", i % spec.n_speakers),
            features,
            motion,
            EmotionLabel::from_annotations(&annotations)?,
        )?);
    }
    Corpus::new(utterances)
}
