//! Subcommand dispatch and shared helpers.

mod adapt;
mod corpus_cmd;
mod eval_cmd;
mod features;
mod plot;
mod stats;
mod synth_cmd;
mod train_cmd;

pub use eval_cmd::{generated_motion_for, pooled_real_frames};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lipsyn_core::dataset::{Corpus, CorpusSplit};

use crate::config::RunConfig;
use crate::formats::{load_manifest, load_split};
use crate::{CliError, CliResult};

const USAGE: &str = "\
usage: lipsyn <command> [options]

commands:
  features   extract per-frame speech features from WAV files
  corpus     build synthetic corpora and train/val/test splits
  train      train a model (swdnn | blstm-mse | blstm-ccc | csg | csg-emo-aware)
  adapt      adapt a trained csg checkpoint to each emotion
  synth      generate a motion trajectory from a checkpoint
  eval       objective evaluation (parzen | emotion)
  stats      preference statistics from evaluation tables
  plot       render motion trajectories as SVG

run `lipsyn <command> --help` for command options.";

/// Minimal flag parser: `--name value` pairs, repeatable flags, `--bool`
/// switches, and positional arguments.
pub struct Args {
    positional: Vec<String>,
    flags: BTreeMap<String, Vec<String>>,
    switches: Vec<String>,
}

impl Args {
    /// Parse tokens; `switch_names` take no value.
    pub fn parse(tokens: &[String], switch_names: &[&str]) -> CliResult<Args> {
        let mut positional = Vec::new();
        let mut flags: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut switches = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            if let Some(name) = tok.strip_prefix("--") {
                if switch_names.contains(&name) {
                    switches.push(name.to_string());
                } else {
                    i += 1;
                    let value = tokens.get(i).ok_or_else(|| {
                        CliError::usage(format!("flag --{name} needs a value"))
                    })?;
                    flags.entry(name.to_string()).or_default().push(value.clone());
                }
            } else if tok == "-o" {
                i += 1;
                let value = tokens
                    .get(i)
                    .ok_or_else(|| CliError::usage("-o needs a value"))?;
                flags.entry("out".to_string()).or_default().push(value.clone());
            } else {
                positional.push(tok.clone());
            }
            i += 1;
        }
        Ok(Args {
            positional,
            flags,
            switches,
        })
    }

    /// Positional arguments.
    pub fn positional(&self) -> &[String] {
        &self.positional
    }

    /// Last value of a flag.
    pub fn get(&self, name: &str) -> Option<&str> {
        self.flags.get(name).and_then(|v| v.last()).map(String::as_str)
    }

    /// All values of a repeatable flag.
    pub fn get_all(&self, name: &str) -> &[String] {
        self.flags.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Required flag.
    pub fn require(&self, name: &str) -> CliResult<&str> {
        self.get(name)
            .ok_or_else(|| CliError::usage(format!("missing required flag --{name}")))
    }

    /// Boolean switch presence.
    pub fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    /// Error on unknown flags.
    pub fn check_known(&self, known: &[&str]) -> CliResult<()> {
        for k in self.flags.keys() {
            if !known.contains(&k.as_str()) {
                return Err(CliError::usage(format!("unknown flag --{k}")));
            }
        }
        Ok(())
    }
}

/// Dispatch to the named subcommand.
pub fn dispatch(args: &[String]) -> CliResult<()> {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return Err(CliError::usage("no command"));
    };
    let rest = &args[1..];
    match cmd.as_str() {
        "features" => features::run(rest),
        "corpus" => corpus_cmd::run(rest),
        "train" => train_cmd::run(rest),
        "adapt" => adapt::run(rest),
        "synth" => synth_cmd::run(rest),
        "eval" => eval_cmd::run(rest),
        "stats" => stats::run(rest),
        "plot" => plot::run(rest),
        "--help" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::usage(format!("unknown command {other:?}"))),
    }
}

/// Load a run config (if given) and apply `--set key=value` overrides.
pub fn load_config(args: &Args) -> CliResult<RunConfig> {
    let mut cfg = match args.get("config") {
        Some(path) => RunConfig::load(Path::new(path))?,
        None => RunConfig::default(),
    };
    let mut overrides = BTreeMap::new();
    for kv in args.get_all("set") {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects key=value, got {kv:?}")))?;
        overrides.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(seed) = args.get("seed") {
        overrides.insert("seed".into(), seed.to_string());
    }
    if let Some(model) = args.get("model") {
        overrides.insert("model".into(), model.to_string());
    }
    cfg.apply(Path::new("<command line>"), &overrides)?;
    Ok(cfg)
}

/// Load corpus and split from the standard flags.
pub fn load_corpus_and_split(args: &Args) -> CliResult<(Corpus, CorpusSplit)> {
    let manifest = args.require("manifest")?;
    let split_path = args.require("split")?;
    let corpus = load_manifest(Path::new(manifest))?;
    let split = load_split(Path::new(split_path), &corpus)?;
    Ok((corpus, split))
}

/// Create the output directory and return it.
pub fn out_dir(args: &Args) -> CliResult<PathBuf> {
    let out = args.require("out")?;
    let dir = PathBuf::from(out);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
