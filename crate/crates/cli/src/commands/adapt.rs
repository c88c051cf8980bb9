//! `lipsyn adapt`: emotion-dependent fine-tuning of a trained csg model.

use std::path::Path;

use lipsyn_core::dataset::Emotion;
use lipsyn_core::rng::SeededRng;
use lipsyn_core::train::adapt_emotion;

use super::Args;
use crate::formats::{load_checkpoint, save_checkpoint, save_training_log};
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn adapt --ckpt <csg.ckpt> --manifest <m> --split <s> -o <dir> [options]

options:
  --emotion <e|all>    one of ang/hap/sad/fru, or all four (default all)
  --config <run.cfg>   configuration file (adapt_epochs, lr, ...)
  --seed <n>           root seed override
  --set key=value      config override (repeatable)
  -o <dir>             writes model-<emotion>.ckpt and adapt-<emotion>.log";

pub fn run(tokens: &[String]) -> CliResult<()> {
    let args = Args::parse(tokens, &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&[
        "ckpt", "manifest", "split", "out", "emotion", "config", "seed", "set",
    ])?;
    let cfg = super::load_config(&args)?;
    let base = load_checkpoint(Path::new(args.require("ckpt")?))?;
    let (corpus, split) = super::load_corpus_and_split(&args)?;
    let out = super::out_dir(&args)?;
    std::fs::write(out.join("resolved.cfg"), cfg.render())?;

    let emotions: Vec<Emotion> = match args.get("emotion") {
        None => Emotion::ADAPTABLE.to_vec(),
        Some("all") => Emotion::ADAPTABLE.to_vec(),
        Some(name) => {
            let e = Emotion::parse(name)
                .ok_or_else(|| CliError::usage(format!("unknown emotion {name:?}")))?;
            if !Emotion::ADAPTABLE.contains(&e) {
                return Err(CliError::usage(format!(
                    "{name} is not an adaptable emotion (ang/hap/sad/fru)"
                )));
            }
            vec![e]
        }
    };

    let train_corpus = corpus.subset(&split.train);
    for (i, &emotion) in emotions.iter().enumerate() {
        let indices = train_corpus.indices_with_emotion(emotion);
        if indices.is_empty() {
            return Err(CliError::data(format!(
                "no training utterances with consensus {}",
                emotion.name()
            )));
        }
        let subset = train_corpus.subset(&indices);
        let rng = SeededRng::with_stream(cfg.seed, 0xada_0 + i as u64);
        let outcome = adapt_emotion(&base, &subset, &cfg.schedule, rng)?;
        let name = emotion.name();
        save_checkpoint(&out.join(format!("model-{name}.ckpt")), &outcome.checkpoint)?;
        save_training_log(&out.join(format!("adapt-{name}.log")), &outcome.log)?;
        eprintln!(
            "lipsyn: adapted {} on {} utterances ({} epochs)",
            name,
            subset.len(),
            outcome.log.len()
        );
        if outcome.diverged {
            return Err(CliError::Numeric(format!("adaptation to {name} diverged")));
        }
    }
    Ok(())
}
