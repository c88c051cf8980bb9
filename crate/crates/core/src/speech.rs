//! Per-frame speech features at the motion-capture frame rate.
//!
//! Extracts 25 MFCCs plus fundamental frequency and intensity over 25 ms
//! windows hopped so that one second of audio yields exactly 120 frames.
//! Externally computed low-level descriptors can be ingested through the
//! companion IO crate and resampled here.
//!
//! The DSP chain is fixed and documented by this module (the reference
//! extractors it stands in for never publish theirs): pre-emphasis 0.97,
//! frames centered at (k + 1/2) * hop with zero padding at the edges,
//! symmetric Hann window, power spectrum over a zero-padded radix-2 FFT,
//! 26 triangular mel filters spanning 0-8000 Hz, natural log floored at
//! 1e-10, orthonormal DCT-II keeping the first 25 coefficients. Pitch uses
//! the normalized autocorrelation peak inside the configured range with
//! parabolic refinement; intensity is RMS energy in dB re full scale with a
//! -100 dB floor. Extraction is deterministic: no randomness anywhere.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::MotionSequence;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

mod fft;

/// Frame rate shared by features and motion capture.
pub const FRAME_RATE: f64 = 120.0;

/// Mono audio in [-1, 1].
#[derive(Debug, Clone)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Wrap samples; errors on an empty buffer, a zero rate, or non-finite
    /// values.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample_rate must be > 0".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("waveform"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "waveform sample",
                index: Some(i),
            });
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    /// Samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sample rate in Hz.
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// A T x F block of per-frame features with named channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: Matrix,
    frame_rate: f64,
    channel_names: Vec<String>,
}

impl FeatureSequence {
    /// Build from frames and channel names; the name count must match the
    /// column count.
    pub fn new(frames: Matrix, frame_rate: f64, channel_names: Vec<String>) -> Result<Self> {
        if channel_names.len() != frames.cols() {
            return Err(Error::InvalidArgument(format!(
                "{} channel names for {} columns",
                channel_names.len(),
                frames.cols()
            )));
        }
        if frame_rate <= 0.0 {
            return Err(Error::InvalidArgument("frame_rate must be > 0".into()));
        }
        Ok(FeatureSequence {
            frames,
            frame_rate,
            channel_names,
        })
    }

    /// Frame matrix (T x F).
    pub fn frames(&self) -> &Matrix {
        &self.frames
    }

    /// Number of frames T.
    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    /// True when there are no frames.
    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }

    /// Number of channels F.
    pub fn dim(&self) -> usize {
        self.frames.cols()
    }

    /// Frame rate in Hz.
    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    /// Channel names, one per column.
    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    /// Truncate to the first `t` frames.
    pub fn truncated(&self, t: usize) -> FeatureSequence {
        let t = t.min(self.len());
        let mut m = Matrix::zeros(t, self.dim());
        for r in 0..t {
            m.row_mut(r).copy_from_slice(self.frames.row(r));
        }
        FeatureSequence {
            frames: m,
            frame_rate: self.frame_rate,
            channel_names: self.channel_names.clone(),
        }
    }

    /// Resample to `target_rate` by per-channel linear interpolation on the
    /// frame-time grid. Endpoints are preserved; a no-op when the rate
    /// already matches.
    pub fn resampled(&self, target_rate: f64) -> Result<FeatureSequence> {
        if target_rate <= 0.0 {
            return Err(Error::InvalidArgument("target rate must be > 0".into()));
        }
        if (target_rate - self.frame_rate).abs() < 1e-9 {
            return Ok(self.clone());
        }
        if self.len() < 2 {
            return Err(Error::EmptyInput("resample needs at least 2 frames"));
        }
        let src_t = self.len();
        let duration = (src_t - 1) as f64 / self.frame_rate;
        let dst_t = num::floor(duration * target_rate) as usize + 1;
        let mut out = Matrix::zeros(dst_t, self.dim());
        for r in 0..dst_t {
            let time = r as f64 / target_rate;
            let pos = (time * self.frame_rate).min((src_t - 1) as f64);
            let lo = num::floor(pos) as usize;
            let hi = (lo + 1).min(src_t - 1);
            let frac = pos - lo as f64;
            let (a, b) = (self.frames.row(lo), self.frames.row(hi));
            let row = out.row_mut(r);
            for c in 0..row.len() {
                row[c] = a[c] + frac * (b[c] - a[c]);
            }
        }
        FeatureSequence::new(out, target_rate, self.channel_names.clone())
    }
}

/// Extraction parameters. Defaults match the documented chain.
#[derive(Debug, Clone)]
pub struct FeatureConfig {
    /// Number of cepstral coefficients kept (<= n_mel).
    pub n_mfcc: usize,
    /// Analysis window length in milliseconds.
    pub window_ms: f64,
    /// Number of triangular mel filters.
    pub n_mel: usize,
    /// Pre-emphasis coefficient.
    pub preemphasis: f64,
    /// Pitch search range (min Hz, max Hz).
    pub f0_range: (f64, f64),
    /// Upper edge of the mel filterbank in Hz.
    pub mel_fmax: f64,
    /// Normalized autocorrelation threshold below which a frame is unvoiced.
    pub voicing_threshold: f64,
    /// Floor applied inside the filterbank log.
    pub log_floor: f64,
    /// Intensity floor in dB.
    pub intensity_floor_db: f64,
    /// Output frame rate; the hop is derived from it so the spacing is exact.
    pub frame_rate: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            n_mfcc: 25,
            window_ms: 25.0,
            n_mel: 26,
            preemphasis: 0.97,
            f0_range: (75.0, 500.0),
            mel_fmax: 8000.0,
            voicing_threshold: 0.3,
            log_floor: 1e-10,
            intensity_floor_db: -100.0,
            frame_rate: FRAME_RATE,
        }
    }
}

impl FeatureConfig {
    /// Hop in milliseconds (1000 / frame_rate; 8.333... at 120 fps).
    pub fn hop_ms(&self) -> f64 {
        1000.0 / self.frame_rate
    }

    fn window_samples(&self, sample_rate: u32) -> usize {
        num::round(self.window_ms / 1000.0 * sample_rate as f64) as usize
    }

    fn frame_count(&self, n_samples: usize, sample_rate: u32) -> usize {
        num::floor(n_samples as f64 * self.frame_rate / sample_rate as f64) as usize
    }

    /// Center sample of frame `k` (frames sit at (k + 1/2) * hop).
    fn frame_center(&self, k: usize, sample_rate: u32) -> i64 {
        num::round((k as f64 + 0.5) * sample_rate as f64 / self.frame_rate) as i64
    }
}

fn gather_frame(samples: &[f64], center: i64, width: usize, out: &mut [f64]) {
    let start = center - (width / 2) as i64;
    for (i, o) in out.iter_mut().enumerate() {
        let idx = start + i as i64;
        *o = if idx >= 0 && (idx as usize) < samples.len() {
            samples[idx as usize]
        } else {
            0.0
        };
    }
}

fn hann(width: usize) -> Vec<f64> {
    if width == 1 {
        return vec![1.0];
    }
    (0..width)
        .map(|n| 0.5 - 0.5 * num::cos(2.0 * core::f64::consts::PI * n as f64 / (width - 1) as f64))
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * num::log10(1.0 + f / 700.0)
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (num::powf(10.0, m / 2595.0) - 1.0)
}

/// Triangular mel filterbank as a (n_mel x n_bins) weight matrix.
fn mel_filterbank(n_mel: usize, n_fft: usize, sample_rate: u32, fmax: f64) -> Matrix {
    let n_bins = n_fft / 2 + 1;
    let fmax = fmax.min(sample_rate as f64 / 2.0);
    let mel_points: Vec<f64> = (0..n_mel + 2)
        .map(|i| mel_to_hz(hz_to_mel(fmax) * i as f64 / (n_mel + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / n_fft as f64;
    Matrix::from_fn(n_mel, n_bins, |m, b| {
        let f = b as f64 * bin_hz;
        let (left, center, right) = (mel_points[m], mel_points[m + 1], mel_points[m + 2]);
        if f <= left || f >= right {
            0.0
        } else if f <= center {
            (f - left) / (center - left)
        } else {
            (right - f) / (right - center)
        }
    })
}

/// Orthonormal DCT-II basis (n_keep x n_input).
fn dct_basis(n_keep: usize, n_input: usize) -> Matrix {
    let m = n_input as f64;
    Matrix::from_fn(n_keep, n_input, |k, i| {
        let scale = if k == 0 {
            num::sqrt(1.0 / m)
        } else {
            num::sqrt(2.0 / m)
        };
        scale * num::cos(core::f64::consts::PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * m))
    })
}

fn check_audio_length(w: &Waveform, cfg: &FeatureConfig) -> Result<(usize, usize)> {
    let width = cfg.window_samples(w.sample_rate());
    let t = cfg.frame_count(w.samples().len(), w.sample_rate());
    if w.samples().len() < width || t == 0 {
        return Err(Error::EmptyInput("audio shorter than one analysis window"));
    }
    Ok((width, t))
}

/// Mel-frequency cepstral coefficients, `cfg.n_mfcc` per frame.
pub fn extract_mfcc(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureSequence> {
    if cfg.n_mfcc == 0 || cfg.n_mfcc > cfg.n_mel {
        return Err(Error::InvalidArgument(format!(
            "n_mfcc {} must be in 1..=n_mel {}",
            cfg.n_mfcc, cfg.n_mel
        )));
    }
    let (width, t) = check_audio_length(w, cfg)?;
    let n_fft = width.next_power_of_two();

    // Pre-emphasis over the whole signal.
    let src = w.samples();
    let mut emphasized = Vec::with_capacity(src.len());
    emphasized.push(src[0]);
    for n in 1..src.len() {
        emphasized.push(src[n] - cfg.preemphasis * src[n - 1]);
    }

    let window = hann(width);
    let bank = mel_filterbank(cfg.n_mel, n_fft, w.sample_rate(), cfg.mel_fmax);
    let dct = dct_basis(cfg.n_mfcc, cfg.n_mel);

    let mut frames = Matrix::zeros(t, cfg.n_mfcc);
    let mut frame = vec![0.0; width];
    let mut re = vec![0.0; n_fft];
    let mut im = vec![0.0; n_fft];
    let mut power = vec![0.0; n_fft / 2 + 1];
    let mut mel = vec![0.0; cfg.n_mel];

    for k in 0..t {
        gather_frame(&emphasized, cfg.frame_center(k, w.sample_rate()), width, &mut frame);
        for i in 0..n_fft {
            re[i] = if i < width { frame[i] * window[i] } else { 0.0 };
            im[i] = 0.0;
        }
        fft::fft_in_place(&mut re, &mut im);
        for (b, p) in power.iter_mut().enumerate() {
            *p = re[b] * re[b] + im[b] * im[b];
        }
        for (m, e) in mel.iter_mut().enumerate() {
            let weights = bank.row(m);
            let mut acc = 0.0;
            for (wgt, p) in weights.iter().zip(power.iter()) {
                acc += wgt * p;
            }
            *e = num::ln(acc.max(cfg.log_floor));
        }
        let out = frames.row_mut(k);
        for (c, o) in out.iter_mut().enumerate() {
            let basis = dct.row(c);
            let mut acc = 0.0;
            for (b, l) in basis.iter().zip(mel.iter()) {
                acc += b * l;
            }
            *o = acc;
        }
    }

    let names = (0..cfg.n_mfcc).map(|i| format!("mfcc{i:02}")).collect();
    FeatureSequence::new(frames, cfg.frame_rate, names)
}

/// Fundamental frequency (0 when unvoiced) and RMS intensity in dB.
pub fn extract_f0_intensity(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureSequence> {
    let (width, t) = check_audio_length(w, cfg)?;
    let sr = w.sample_rate() as f64;
    let (f_min, f_max) = cfg.f0_range;
    if !(0.0 < f_min && f_min < f_max) {
        return Err(Error::InvalidArgument(
            "f0_range must satisfy 0 < min < max".into(),
        ));
    }
    let lag_min = num::floor(sr / f_max).max(1.0) as usize;
    let lag_max = (num::ceil(sr / f_min) as usize).min(width - 1);

    let mut frames = Matrix::zeros(t, 2);
    let mut frame = vec![0.0; width];
    for k in 0..t {
        gather_frame(w.samples(), cfg.frame_center(k, w.sample_rate()), width, &mut frame);

        let mean_sq = frame.iter().map(|v| v * v).sum::<f64>() / width as f64;
        let intensity = (10.0 * num::log10(mean_sq.max(1e-30))).max(cfg.intensity_floor_db);

        let mean = frame.iter().sum::<f64>() / width as f64;
        let centered: Vec<f64> = frame.iter().map(|v| v - mean).collect();
        let r0: f64 = centered.iter().map(|v| v * v).sum();

        let mut f0 = 0.0;
        if r0 > 1e-12 {
            let corr = |lag: usize| -> f64 {
                let mut acc = 0.0;
                for n in 0..width - lag {
                    acc += centered[n] * centered[n + lag];
                }
                acc / r0
            };
            let mut best_lag = 0usize;
            let mut best = cfg.voicing_threshold;
            for lag in lag_min..=lag_max {
                let c = corr(lag);
                if c > best {
                    best = c;
                    best_lag = lag;
                }
            }
            if best_lag > 0 {
                // Parabolic refinement around the integer peak.
                let mut lag = best_lag as f64;
                if best_lag > lag_min && best_lag < lag_max {
                    let (cm, c0, cp) = (corr(best_lag - 1), best, corr(best_lag + 1));
                    let denom = cm - 2.0 * c0 + cp;
                    if denom.abs() > 1e-12 {
                        let delta = 0.5 * (cm - cp) / denom;
                        if delta.abs() <= 1.0 {
                            lag += delta;
                        }
                    }
                }
                f0 = sr / lag;
            }
        }
        frames.set(k, 0, f0);
        frames.set(k, 1, intensity);
    }
    FeatureSequence::new(
        frames,
        cfg.frame_rate,
        vec!["f0".to_string(), "intensity".to_string()],
    )
}

/// Concatenate feature streams channel-wise and align them with motion by
/// truncating everything to the shortest length.
///
/// Channel order follows the argument order; the conventional full stack is
/// MFCC(25), F0, intensity, then external LLDs.
pub fn concat_align(
    streams: &[&FeatureSequence],
    motion: &MotionSequence,
) -> Result<(FeatureSequence, MotionSequence)> {
    if streams.is_empty() {
        return Err(Error::EmptyInput("no feature streams"));
    }
    for s in streams {
        if (s.frame_rate() - FRAME_RATE).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "stream at {} fps; expected {FRAME_RATE}",
                s.frame_rate()
            )));
        }
    }
    if (motion.frame_rate() - FRAME_RATE).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "motion at {} fps; expected {FRAME_RATE}",
            motion.frame_rate()
        )));
    }
    let t = streams
        .iter()
        .map(|s| s.len())
        .chain(core::iter::once(motion.len()))
        .min()
        .unwrap();
    if t == 0 {
        return Err(Error::EmptyInput("zero aligned frames"));
    }

    let total_dim: usize = streams.iter().map(|s| s.dim()).sum();
    let mut frames = Matrix::zeros(t, total_dim);
    let mut names = Vec::with_capacity(total_dim);
    for s in streams {
        names.extend(s.channel_names().iter().cloned());
    }
    for r in 0..t {
        let row = frames.row_mut(r);
        let mut offset = 0;
        for s in streams {
            let src = s.frames().row(r);
            row[offset..offset + src.len()].copy_from_slice(src);
            offset += src.len();
        }
    }
    let features = FeatureSequence::new(frames, FRAME_RATE, names)?;
    let motion = motion.truncated(t);
    Ok((features, motion))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, amplitude: f64, seconds: f64, sr: u32) -> Waveform {
        let n = (seconds * sr as f64) as usize;
        let samples = (0..n)
            .map(|i| {
                amplitude * num::sin(2.0 * core::f64::consts::PI * freq * i as f64 / sr as f64)
            })
            .collect();
        Waveform::new(samples, sr).unwrap()
    }

    #[test]
    fn one_second_yields_120_frames() {
        let w = tone(220.0, 0.5, 1.0, 16000);
        let cfg = FeatureConfig::default();
        let feats = extract_mfcc(&w, &cfg).unwrap();
        assert_eq!(feats.len(), 120);
        assert_eq!(feats.dim(), 25);
        let fi = extract_f0_intensity(&w, &cfg).unwrap();
        assert_eq!(fi.len(), 120);
    }

    #[test]
    fn silence_is_finite_and_flat() {
        let w = Waveform::new(vec![0.0; 16000], 16000).unwrap();
        let cfg = FeatureConfig::default();
        let feats = extract_mfcc(&w, &cfg).unwrap();
        assert!(feats.frames().all_finite());
        let first = feats.frames().row(0).to_vec();
        for r in 1..feats.len() {
            assert_eq!(feats.frames().row(r), &first[..]);
        }
        let fi = extract_f0_intensity(&w, &cfg).unwrap();
        for r in 0..fi.len() {
            assert_eq!(fi.frames().get(r, 0), 0.0);
            assert_eq!(fi.frames().get(r, 1), cfg.intensity_floor_db);
        }
    }

    #[test]
    fn short_audio_is_an_error() {
        let w = Waveform::new(vec![0.1; 100], 16000).unwrap();
        let cfg = FeatureConfig::default();
        assert!(extract_mfcc(&w, &cfg).is_err());
        assert!(extract_f0_intensity(&w, &cfg).is_err());
    }

    #[test]
    fn pure_tone_pitch_within_2hz() {
        let w = tone(440.0, 0.8, 1.0, 16000);
        let cfg = FeatureConfig::default();
        let fi = extract_f0_intensity(&w, &cfg).unwrap();
        // Interior frames: full windows, no edge padding.
        for r in 10..fi.len() - 10 {
            let f0 = fi.frames().get(r, 0);
            assert!((f0 - 440.0).abs() < 2.0, "frame {r}: f0 {f0}");
        }
    }

    #[test]
    fn halving_amplitude_drops_6db_keeps_f0() {
        let loud = tone(220.0, 0.8, 1.0, 16000);
        let soft = tone(220.0, 0.4, 1.0, 16000);
        let cfg = FeatureConfig::default();
        let a = extract_f0_intensity(&loud, &cfg).unwrap();
        let b = extract_f0_intensity(&soft, &cfg).unwrap();
        for r in 10..a.len() - 10 {
            let drop = a.frames().get(r, 1) - b.frames().get(r, 1);
            assert!((drop - 6.02).abs() < 0.1, "frame {r}: drop {drop}");
            assert!((a.frames().get(r, 0) - b.frames().get(r, 0)).abs() < 1e-9);
        }
    }

    #[test]
    fn hop_multiple_shift_shifts_frames() {
        // 3 hops at 16 kHz / 120 fps = exactly 400 samples.
        let mut rng = crate::rng::SeededRng::new(99);
        let base: Vec<f64> = (0..16000).map(|_| rng.uniform(-0.8, 0.8)).collect();
        let shifted: Vec<f64> = base[400..].to_vec();
        let cfg = FeatureConfig::default();
        let a = extract_mfcc(&Waveform::new(base, 16000).unwrap(), &cfg).unwrap();
        let b = extract_mfcc(&Waveform::new(shifted, 16000).unwrap(), &cfg).unwrap();
        for r in 2..b.len() - 2 {
            let (x, y) = (a.frames().row(r + 3), b.frames().row(r));
            for (xa, ya) in x.iter().zip(y.iter()) {
                assert!((xa - ya).abs() < 1e-9, "frame {r}");
            }
        }
    }

    #[test]
    fn amplitude_scaling_only_shifts_c0() {
        let mut rng = crate::rng::SeededRng::new(5);
        let noise: Vec<f64> = (0..16000).map(|_| rng.uniform(-0.45, 0.45)).collect();
        let doubled: Vec<f64> = noise.iter().map(|v| v * 2.0).collect();
        let cfg = FeatureConfig::default();
        let a = extract_mfcc(&Waveform::new(noise, 16000).unwrap(), &cfg).unwrap();
        let b = extract_mfcc(&Waveform::new(doubled, 16000).unwrap(), &cfg).unwrap();
        // Power spectrum scales by 4: every log mel energy shifts by ln(4),
        // so only the DCT's constant component (c0) moves.
        let expected_c0_shift = num::ln(4.0) * num::sqrt(cfg.n_mel as f64);
        for r in 3..a.len() - 3 {
            let shift = b.frames().get(r, 0) - a.frames().get(r, 0);
            assert!(
                (shift - expected_c0_shift).abs() < 1e-6,
                "frame {r}: {shift}"
            );
            for c in 1..25 {
                let d = (b.frames().get(r, c) - a.frames().get(r, c)).abs();
                assert!(d < 1e-6, "frame {r} coeff {c}: {d}");
            }
        }
    }

    #[test]
    fn resample_60_to_120_preserves_endpoints() {
        let frames = Matrix::from_fn(31, 2, |r, c| (r * 2 + c) as f64);
        let fs = FeatureSequence::new(frames, 60.0, vec!["a".into(), "b".into()]).unwrap();
        let up = fs.resampled(120.0).unwrap();
        assert_eq!(up.len(), 61);
        assert_eq!(up.frames().row(0), fs.frames().row(0));
        assert_eq!(up.frames().row(60), fs.frames().row(30));
        // Linear data stays linear under linear interpolation.
        for r in 0..up.len() {
            assert!((up.frames().get(r, 0) - r as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn concat_align_truncates_to_min_and_orders_channels() {
        let s1 = FeatureSequence::new(
            Matrix::filled(120, 2, 1.0),
            120.0,
            vec!["mfcc00".into(), "mfcc01".into()],
        )
        .unwrap();
        let s2 = FeatureSequence::new(Matrix::filled(118, 1, 2.0), 120.0, vec!["f0".into()]).unwrap();
        let s3 =
            FeatureSequence::new(Matrix::filled(121, 1, 3.0), 120.0, vec!["intensity".into()])
                .unwrap();
        let motion = MotionSequence::new(Matrix::zeros(119, 45), 120.0).unwrap();
        let (f, m) = concat_align(&[&s1, &s2, &s3], &motion).unwrap();
        assert_eq!(f.len(), 118);
        assert_eq!(m.len(), 118);
        assert_eq!(f.dim(), 4);
        assert_eq!(f.channel_names(), &["mfcc00", "mfcc01", "f0", "intensity"]);
        assert_eq!(f.frames().row(0), &[1.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn concat_align_rejects_rate_mismatch() {
        let s1 = FeatureSequence::new(Matrix::zeros(10, 1), 60.0, vec!["x".into()]).unwrap();
        let motion = MotionSequence::new(Matrix::zeros(10, 45), 120.0).unwrap();
        assert!(concat_align(&[&s1], &motion).is_err());
    }
}
