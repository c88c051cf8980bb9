//! `lipsyn corpus`: synthetic corpus generation and split files.

use std::path::Path;

use lipsyn_core::dataset::{generate_synthetic, split_corpus};

use super::Args;
use crate::config::load_synth_spec;
use crate::formats::{load_manifest, save_manifest, save_motion_csv, save_split, ManifestEntry};
use crate::formats::save_feature_csv;
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn corpus <subcommand> [options]

subcommands:
  synth --spec <spec.cfg> -o <dir>       generate a synthetic corpus
      writes per-utterance CSVs, corpus.manifest and split.tsv
  split --manifest <m> --seed <n> -o <file>
      write a deterministic 60/20/20 split for an existing corpus
      (--ratios a,b,c overrides the proportions)";

fn run_synth(args: &Args) -> CliResult<()> {
    args.check_known(&["spec", "out", "seed"])?;
    let spec_path = args.require("spec")?;
    let mut spec = load_synth_spec(Path::new(spec_path))?;
    if let Some(seed) = args.get("seed") {
        spec.seed = seed
            .parse()
            .map_err(|_| CliError::usage("--seed expects an integer"))?;
    }
    let out = super::out_dir(args)?;

    let corpus = generate_synthetic(&spec)?;
    let mut entries = Vec::with_capacity(corpus.len());
    for u in &corpus.utterances {
        let feat_rel = format!("{}.feat.csv", u.id);
        let motion_rel = format!("{}.motion.csv", u.id);
        save_feature_csv(&out.join(&feat_rel), &u.features)?;
        save_motion_csv(&out.join(&motion_rel), &u.motion)?;
        // Annotation reconstruction: the soft label times the annotator
        // count is the vote histogram by construction.
        let mut annotations = Vec::new();
        for (idx, &share) in u.emotion.soft().iter().enumerate() {
            let votes = (share * spec.annotators as f64).round() as usize;
            for _ in 0..votes {
                annotations.push(lipsyn_core::dataset::Emotion::from_index(idx).unwrap());
            }
        }
        entries.push(ManifestEntry {
            id: u.id.clone(),
            speaker: u.speaker.clone(),
            features: feat_rel,
            motion: motion_rel,
            annotations,
        });
    }
    let manifest_path = out.join("corpus.manifest");
    save_manifest(&manifest_path, &entries)?;
    let split = split_corpus(&corpus, (0.6, 0.2, 0.2), spec.seed)?;
    save_split(&out.join("split.tsv"), &corpus, &split)?;
    eprintln!(
        "lipsyn: wrote {} utterances, {} and split.tsv",
        corpus.len(),
        manifest_path.display()
    );
    Ok(())
}

fn run_split(args: &Args) -> CliResult<()> {
    args.check_known(&["manifest", "seed", "out", "ratios"])?;
    let manifest = args.require("manifest")?;
    let seed: u64 = args
        .require("seed")?
        .parse()
        .map_err(|_| CliError::usage("--seed expects an integer"))?;
    let ratios = match args.get("ratios") {
        None => (0.6, 0.2, 0.2),
        Some(raw) => {
            let parts: Vec<&str> = raw.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::usage("--ratios expects three comma-separated numbers"));
            }
            let p: Vec<f64> = parts
                .iter()
                .map(|s| s.parse().map_err(|_| CliError::usage("bad ratio")))
                .collect::<CliResult<_>>()?;
            (p[0], p[1], p[2])
        }
    };
    let out = args.require("out")?;
    let corpus = load_manifest(Path::new(manifest))?;
    let split = split_corpus(&corpus, ratios, seed)?;
    save_split(Path::new(out), &corpus, &split)?;
    eprintln!(
        "lipsyn: split {} utterances into {}/{}/{}",
        corpus.len(),
        split.train.len(),
        split.val.len(),
        split.test.len()
    );
    Ok(())
}

pub fn run(tokens: &[String]) -> CliResult<()> {
    let Some(sub) = tokens.first() else {
        println!("{HELP}");
        return Err(CliError::usage("corpus: no subcommand"));
    };
    let args = Args::parse(&tokens[1..], &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    match sub.as_str() {
        "synth" => run_synth(&args),
        "split" => run_split(&args),
        other => Err(CliError::usage(format!("corpus: unknown subcommand {other:?}"))),
    }
}
