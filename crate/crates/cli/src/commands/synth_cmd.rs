//! `lipsyn synth`: trajectory generation from a checkpoint.

use std::path::Path;

use lipsyn_core::dataset::{Emotion, EMOTION_CLASSES};
use lipsyn_core::synth::{synthesize, FapMapping, SynthesisMode, SynthesisRequest};

use super::Args;
use crate::formats::{load_checkpoint, load_feature_csv, load_motion_csv, save_fap, save_motion_csv};
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn synth --ckpt <model.ckpt> --features <f.csv> -o <file> [options]

options:
  --noise-seed <n>      per-utterance noise seed (default 0)
  --emotion <e|soft>    emotion for emotion-aware models: class name or six
                        comma-separated weights
  --mode <full|windowed>  coverage mode (default full)
  --format <csv|fap>    output format (default csv)
  --fap-fit <motion.csv>  reference motion used to fit the FAP mapping
                          (required with --format fap)";

fn parse_emotion(raw: &str) -> CliResult<[f64; EMOTION_CLASSES]> {
    if let Some(e) = Emotion::parse(raw) {
        let mut soft = [0.0; EMOTION_CLASSES];
        soft[e.index()] = 1.0;
        return Ok(soft);
    }
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != EMOTION_CLASSES {
        return Err(CliError::usage(format!(
            "--emotion expects a class name or {EMOTION_CLASSES} comma-separated weights"
        )));
    }
    let mut soft = [0.0; EMOTION_CLASSES];
    for (slot, part) in soft.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad emotion weight {part:?}")))?;
    }
    Ok(soft)
}

pub fn run(tokens: &[String]) -> CliResult<()> {
    let args = Args::parse(tokens, &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&[
        "ckpt",
        "features",
        "out",
        "noise-seed",
        "emotion",
        "mode",
        "format",
        "fap-fit",
    ])?;
    let ckpt = load_checkpoint(Path::new(args.require("ckpt")?))?;
    let features = load_feature_csv(Path::new(args.require("features")?))?;
    let out = args.require("out")?;
    let noise_seed: u64 = match args.get("noise-seed") {
        Some(v) => v
            .parse()
            .map_err(|_| CliError::usage("--noise-seed expects an integer"))?,
        None => 0,
    };
    let emotion = match args.get("emotion") {
        Some(raw) => Some(parse_emotion(raw)?),
        None => None,
    };
    let mode = match args.get("mode").unwrap_or("full") {
        "full" => SynthesisMode::FullSequence,
        "windowed" => SynthesisMode::windowed_default(),
        other => return Err(CliError::usage(format!("unknown mode {other:?}"))),
    };

    let request = SynthesisRequest {
        checkpoint: &ckpt,
        features: &features,
        noise_seed,
        emotion,
        mode,
    };
    let motion = synthesize(&request)?;

    match args.get("format").unwrap_or("csv") {
        "csv" => save_motion_csv(Path::new(out), &motion)?,
        "fap" => {
            let reference = args.get("fap-fit").ok_or_else(|| {
                CliError::usage("--format fap needs --fap-fit <motion.csv> for the mapping")
            })?;
            let reference = load_motion_csv(Path::new(reference))?;
            let mapping = FapMapping::fit(&reference, (-100.0, 100.0))?;
            save_fap(Path::new(out), &motion, &mapping)?;
        }
        other => return Err(CliError::usage(format!("unknown format {other:?}"))),
    }
    eprintln!("lipsyn: wrote {} frames to {out}", motion.len());
    Ok(())
}
