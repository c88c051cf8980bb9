//! `lipsyn features`: WAV in, feature CSV out.

use std::path::{Path, PathBuf};

use lipsyn_core::matrix::Matrix;
use lipsyn_core::speech::{
    extract_f0_intensity, extract_mfcc, FeatureConfig, FeatureSequence, FRAME_RATE,
};

use super::Args;
use crate::formats::{load_external_lld, save_feature_csv};
use crate::wav::load_wav;
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn features <audio.wav>... -o <dir> [options]

options:
  -o <dir>            output directory (writes <stem>.feat.csv per input)
  --mfcc-only         skip the F0/intensity channels
  --lld <path>        external LLD CSV appended to a single input
  --lld-dir <dir>     per-input external LLDs named <stem>.lld.csv
  --lld-channels <n>  expected LLD channel count (default 17)";

/// Channel-wise concatenation of feature streams, truncated to the
/// shortest stream.
fn concat_streams(streams: &[&FeatureSequence]) -> CliResult<FeatureSequence> {
    let t = streams.iter().map(|s| s.len()).min().unwrap();
    let dim: usize = streams.iter().map(|s| s.dim()).sum();
    let mut frames = Matrix::zeros(t, dim);
    let mut names = Vec::with_capacity(dim);
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
    Ok(FeatureSequence::new(frames, FRAME_RATE, names)?)
}

fn process_one(
    input: &Path,
    out_dir: &Path,
    cfg: &FeatureConfig,
    mfcc_only: bool,
    lld: Option<(&Path, usize)>,
) -> CliResult<PathBuf> {
    let wave = load_wav(input)?;
    let mfcc = extract_mfcc(&wave, cfg)?;
    let mut streams: Vec<FeatureSequence> = vec![mfcc];
    if !mfcc_only {
        streams.push(extract_f0_intensity(&wave, cfg)?);
    }
    if let Some((path, channels)) = lld {
        streams.push(load_external_lld(path, channels)?);
    }
    let refs: Vec<&FeatureSequence> = streams.iter().collect();
    let combined = concat_streams(&refs)?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CliError::usage(format!("bad input path {}", input.display())))?;
    let out_path = out_dir.join(format!("{stem}.feat.csv"));
    save_feature_csv(&out_path, &combined)?;
    Ok(out_path)
}

pub fn run(tokens: &[String]) -> CliResult<()> {
    let args = Args::parse(tokens, &["mfcc-only", "help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&["out", "lld", "lld-dir", "lld-channels"])?;
    if args.positional().is_empty() {
        return Err(CliError::usage("no input audio files"));
    }
    let out = super::out_dir(&args)?;
    let lld_channels: usize = match args.get("lld-channels") {
        Some(v) => v
            .parse()
            .map_err(|_| CliError::usage("--lld-channels expects a count"))?,
        None => 17,
    };
    if args.get("lld").is_some() && args.positional().len() > 1 {
        return Err(CliError::usage(
            "--lld applies to a single input; use --lld-dir for batches",
        ));
    }

    let cfg = FeatureConfig::default();
    let mut failures = 0usize;
    for input in args.positional() {
        let input = Path::new(input);
        let lld: Option<(PathBuf, usize)> = if let Some(p) = args.get("lld") {
            Some((PathBuf::from(p), lld_channels))
        } else {
            args.get("lld-dir").map(|dir| {
                let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
                (Path::new(dir).join(format!("{stem}.lld.csv")), lld_channels)
            })
        };
        match process_one(
            input,
            &out,
            &cfg,
            args.has("mfcc-only"),
            lld.as_ref().map(|(p, c)| (p.as_path(), *c)),
        ) {
            Ok(path) => eprintln!("lipsyn: wrote {}", path.display()),
            Err(e) => {
                eprintln!("lipsyn: {}: {e}", input.display());
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(CliError::data(format!("{failures} input(s) failed")));
    }
    Ok(())
}
