//! Feature and motion CSV files.
//!
//! Format: a header line
//! `#fps=<rate>,channels=<name>,<name>,...` followed by one row of decimal
//! values per frame. Motion files are the same format with the 45 canonical
//! channels `m01_x .. m15_z`. An optional leading `time` channel carries
//! per-row timestamps in seconds; it is consumed (and validated as strictly
//! increasing) rather than returned as data.

use std::fs;
use std::path::Path;

use lipsyn_core::dataset::{motion_channel_names, MotionSequence, MOTION_DIM};
use lipsyn_core::matrix::Matrix;
use lipsyn_core::speech::{FeatureSequence, FRAME_RATE};

use crate::{CliError, CliResult};

fn parse_header(line: &str, path: &Path) -> CliResult<(f64, Vec<String>)> {
    let rest = line
        .strip_prefix("#fps=")
        .ok_or_else(|| CliError::data(format!("{}: missing #fps= header", path.display())))?;
    let (fps_str, channels_part) = rest.split_once(",channels=").ok_or_else(|| {
        CliError::data(format!("{}: header lacks channels= field", path.display()))
    })?;
    let fps: f64 = fps_str
        .parse()
        .map_err(|_| CliError::data(format!("{}: bad fps value {fps_str:?}", path.display())))?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(CliError::data(format!("{}: fps must be positive", path.display())));
    }
    let channels: Vec<String> = channels_part.split(',').map(str::to_string).collect();
    if channels.iter().any(|c| c.is_empty()) {
        return Err(CliError::data(format!("{}: empty channel name", path.display())));
    }
    Ok((fps, channels))
}

fn parse_rows(path: &Path, text: &str, n_cols: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(n_cols);
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::data(format!(
                    "{}:{}: bad value {field:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            row.push(v);
        }
        if row.len() != n_cols {
            return Err(CliError::data(format!(
                "{}:{}: {} values for {} channels",
                path.display(),
                lineno + 1,
                row.len(),
                n_cols
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no frames", path.display())));
    }
    Ok(rows)
}

/// Load a feature CSV. When the first channel is `time`, rows are resampled
/// onto a uniform grid using the timestamps (which must be strictly
/// increasing); otherwise rows are taken at the header rate.
pub fn load_feature_csv(path: &Path) -> CliResult<FeatureSequence> {
    let text = fs::read_to_string(path)?;
    let header = text
        .lines()
        .next()
        .ok_or_else(|| CliError::data(format!("{}: empty file", path.display())))?;
    let (fps, mut channels) = parse_header(header, path)?;
    let rows = parse_rows(path, &text, channels.len())?;

    let has_time = channels.first().map(String::as_str) == Some("time");
    if !has_time {
        let mut frames = Matrix::zeros(rows.len(), channels.len());
        for (r, row) in rows.iter().enumerate() {
            frames.row_mut(r).copy_from_slice(row);
        }
        return Ok(FeatureSequence::new(frames, fps, channels)?);
    }

    // Timestamped rows: validate monotonicity, then sample value channels on
    // the uniform grid implied by the header rate.
    channels.remove(0);
    if channels.is_empty() {
        return Err(CliError::data(format!(
            "{}: time column with no value channels",
            path.display()
        )));
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CliError::data(format!(
                "{}: non-monotone timestamps ({} then {})",
                path.display(),
                w[0],
                w[1]
            )));
        }
    }
    let t0 = times[0];
    let t_end = *times.last().unwrap();
    let n_out = ((t_end - t0) * fps).floor() as usize + 1;
    let mut frames = Matrix::zeros(n_out, channels.len());
    let mut src = 0usize;
    for r in 0..n_out {
        let t = t0 + r as f64 / fps;
        while src + 1 < times.len() && times[src + 1] <= t {
            src += 1;
        }
        let (lo, hi) = (src, (src + 1).min(times.len() - 1));
        let span = times[hi] - times[lo];
        let frac = if span > 0.0 {
            ((t - times[lo]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for c in 0..channels.len() {
            let a = rows[lo][c + 1];
            let b = rows[hi][c + 1];
            frames.set(r, c, a + frac * (b - a));
        }
    }
    Ok(FeatureSequence::new(frames, fps, channels)?)
}

/// Load an externally computed LLD file, check its channel count and
/// resample it to 120 fps.
pub fn load_external_lld(path: &Path, expected_channels: usize) -> CliResult<FeatureSequence> {
    let fs = load_feature_csv(path)?;
    if fs.dim() != expected_channels {
        return Err(CliError::data(format!(
            "{}: {} channels where {} expected",
            path.display(),
            fs.dim(),
            expected_channels
        )));
    }
    Ok(fs.resampled(FRAME_RATE)?)
}

/// Write a feature CSV.
pub fn save_feature_csv(path: &Path, fs: &FeatureSequence) -> CliResult<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "#fps={},channels={}\n",
        fs.frame_rate(),
        fs.channel_names().join(",")
    ));
    for r in 0..fs.len() {
        let row: Vec<String> = fs.frames().row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Load a motion CSV (45 channels required).
pub fn load_motion_csv(path: &Path) -> CliResult<MotionSequence> {
    let fs = load_feature_csv(path)?;
    if fs.dim() != MOTION_DIM {
        return Err(CliError::data(format!(
            "{}: motion needs {MOTION_DIM} channels, found {}",
            path.display(),
            fs.dim()
        )));
    }
    let rate = fs.frame_rate();
    Ok(MotionSequence::new(fs.frames().clone(), rate)?)
}

/// Write a motion CSV with the canonical channel names.
pub fn save_motion_csv(path: &Path, motion: &MotionSequence) -> CliResult<()> {
    let fs = FeatureSequence::new(
        motion.frames().clone(),
        motion.frame_rate(),
        motion_channel_names(),
    )?;
    save_feature_csv(path, &fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipsyn_core::rng::SeededRng;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("lipsyn-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn feature_round_trip_is_exact() {
        let mut rng = SeededRng::new(5);
        let frames = Matrix::from_fn(37, 3, |_, _| rng.gaussian() * 1e3);
        let fs = FeatureSequence::new(
            frames,
            FRAME_RATE,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let path = tmpdir().join("roundtrip.csv");
        save_feature_csv(&path, &fs).unwrap();
        let loaded = load_feature_csv(&path).unwrap();
        assert_eq!(loaded.frames(), fs.frames());
        assert_eq!(loaded.channel_names(), fs.channel_names());
        assert_eq!(loaded.frame_rate(), fs.frame_rate());
    }

    #[test]
    fn sixty_fps_file_interpolates_to_120() {
        let frames = Matrix::from_fn(31, 2, |r, c| (r * 2 + c) as f64);
        let fs = FeatureSequence::new(frames, 60.0, vec!["x".into(), "y".into()]).unwrap();
        let path = tmpdir().join("rate60.csv");
        save_feature_csv(&path, &fs).unwrap();
        let lld = load_external_lld(&path, 2).unwrap();
        assert_eq!(lld.frame_rate(), FRAME_RATE);
        assert_eq!(lld.len(), 61);
        assert_eq!(lld.frames().row(0), fs.frames().row(0));
        assert_eq!(lld.frames().row(60), fs.frames().row(30));
    }

    #[test]
    fn channel_count_mismatch_is_an_error() {
        let frames = Matrix::zeros(10, 16);
        let names: Vec<String> = (0..16).map(|i| format!("lld{i:02}")).collect();
        let fs = FeatureSequence::new(frames, FRAME_RATE, names).unwrap();
        let path = tmpdir().join("lld16.csv");
        save_feature_csv(&path, &fs).unwrap();
        assert!(load_external_lld(&path, 17).is_err());
    }

    #[test]
    fn non_monotone_timestamps_are_rejected() {
        let path = tmpdir().join("bad_time.csv");
        std::fs::write(
            &path,
            "#fps=120,channels=time,v\n0.0,1.0\n0.01,2.0\n0.005,3.0\n",
        )
        .unwrap();
        let err = load_feature_csv(&path).unwrap_err();
        assert!(format!("{err}").contains("non-monotone"));
    }

    #[test]
    fn timestamped_rows_resample_onto_uniform_grid() {
        let path = tmpdir().join("timed.csv");
        // 60 fps timestamps, linear signal v = 10 t.
        let mut text = String::from("#fps=120,channels=time,v\n");
        for i in 0..31 {
            let t = i as f64 / 60.0;
            text.push_str(&format!("{t},{}\n", 10.0 * t));
        }
        std::fs::write(&path, text).unwrap();
        let fs = load_feature_csv(&path).unwrap();
        assert_eq!(fs.dim(), 1);
        assert_eq!(fs.len(), 61);
        for r in 0..fs.len() {
            let t = r as f64 / 120.0;
            assert!((fs.frames().get(r, 0) - 10.0 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn malformed_header_is_an_error() {
        let path = tmpdir().join("noheader.csv");
        std::fs::write(&path, "1.0,2.0\n").unwrap();
        assert!(load_feature_csv(&path).is_err());
    }

    #[test]
    fn motion_round_trip_and_channel_check() {
        let mut rng = SeededRng::new(9);
        let motion =
            MotionSequence::new(Matrix::from_fn(20, MOTION_DIM, |_, _| rng.gaussian()), 120.0)
                .unwrap();
        let path = tmpdir().join("motion.csv");
        save_motion_csv(&path, &motion).unwrap();
        let loaded = load_motion_csv(&path).unwrap();
        for (a, b) in loaded
            .frames()
            .as_slice()
            .iter()
            .zip(motion.frames().as_slice())
        {
            assert!((a - b).abs() < 1e-12);
        }
        // A 3-channel file is not motion.
        let small = FeatureSequence::new(
            Matrix::zeros(5, 3),
            120.0,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let path2 = tmpdir().join("notmotion.csv");
        save_feature_csv(&path2, &small).unwrap();
        assert!(load_motion_csv(&path2).is_err());
    }
}
