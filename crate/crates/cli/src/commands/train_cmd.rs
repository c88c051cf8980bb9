//! `lipsyn train`: train a model and write checkpoint, log and resolved
//! config into the output directory.

use std::time::Instant;

use lipsyn_core::rng::SeededRng;
use lipsyn_core::train::{train_baseline, train_csg, BaselineKind, TrainOutcome};

use super::Args;
use crate::formats::{save_checkpoint, save_training_log};
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn train --model <kind> --manifest <m> --split <s> -o <dir> [options]

model kinds: swdnn | blstm-mse | blstm-ccc | csg | csg-emo-aware

options:
  --config <run.cfg>   configuration file (flags override it)
  --seed <n>           root seed override
  --set key=value      set any config key (repeatable)
  -o <dir>             output directory: model.ckpt, train.log, resolved.cfg";

pub fn run(tokens: &[String]) -> CliResult<()> {
    let args = Args::parse(tokens, &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&["model", "manifest", "split", "out", "config", "seed", "set"])?;
    let cfg = super::load_config(&args)?;
    let (corpus, split) = super::load_corpus_and_split(&args)?;
    let out = super::out_dir(&args)?;

    std::fs::write(out.join("resolved.cfg"), cfg.render())?;
    let rng = SeededRng::with_stream(cfg.seed, 0x7121);

    let started = Instant::now();
    let outcome: TrainOutcome = match cfg.model.as_str() {
        "swdnn" => train_baseline(BaselineKind::Swdnn, &corpus, &split, &cfg.schedule, rng)?,
        "blstm-mse" => train_baseline(BaselineKind::BlstmMse, &corpus, &split, &cfg.schedule, rng)?,
        "blstm-ccc" => train_baseline(BaselineKind::BlstmCcc, &corpus, &split, &cfg.schedule, rng)?,
        "csg" => train_csg(&corpus, &split, &cfg.schedule, cfg.noise_dim, false, rng)?,
        "csg-emo-aware" => train_csg(&corpus, &split, &cfg.schedule, cfg.noise_dim, true, rng)?,
        other => return Err(CliError::usage(format!("unknown model kind {other:?}"))),
    };
    eprintln!(
        "lipsyn: trained {} in {:.1?} ({} epochs logged)",
        cfg.model,
        started.elapsed(),
        outcome.log.len()
    );

    save_checkpoint(&out.join("model.ckpt"), &outcome.checkpoint)?;
    save_training_log(&out.join("train.log"), &outcome.log)?;
    if outcome.diverged {
        return Err(CliError::Numeric(
            outcome
                .diagnostics
                .unwrap_or_else(|| "training diverged".into()),
        ));
    }
    Ok(())
}
