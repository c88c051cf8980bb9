//! `lipsyn plot`: SVG trajectory figures.

use std::path::Path;

use lipsyn_core::dataset::motion_channel_names;

use super::Args;
use crate::formats::load_motion_csv;
use crate::svgplot::plot_trajectories;
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn plot --motion <a.csv> [--motion <b.csv> ...] --channels <list> -o <out.svg>

--channels takes comma-separated channel names (m01_x .. m15_z) or indices.";

pub fn run(tokens: &[String]) -> CliResult<()> {
    let args = Args::parse(tokens, &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&["motion", "channels", "out"])?;
    let motion_paths = args.get_all("motion");
    if motion_paths.is_empty() {
        return Err(CliError::usage("plot needs at least one --motion file"));
    }
    let channels_raw = args.require("channels")?;
    let out = args.require("out")?;

    let names = motion_channel_names();
    let mut channels = Vec::new();
    for part in channels_raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let idx = match names.iter().position(|n| n == part) {
            Some(i) => i,
            None => part
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("unknown channel {part:?}")))?,
        };
        channels.push(idx);
    }

    let mut sequences = Vec::new();
    for path in motion_paths {
        let label = Path::new(path)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(path)
            .to_string();
        sequences.push((label, load_motion_csv(Path::new(path))?));
    }
    let refs: Vec<(String, &lipsyn_core::dataset::MotionSequence)> = sequences
        .iter()
        .map(|(label, seq)| (label.clone(), seq))
        .collect();
    plot_trajectories(Path::new(out), &refs, &channels)?;
    eprintln!("lipsyn: wrote {out}");
    Ok(())
}
