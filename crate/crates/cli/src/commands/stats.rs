//! `lipsyn stats`: preference statistics from evaluation tables.

use std::collections::BTreeMap;
use std::path::Path;

use lipsyn_core::eval::{
    cronbach_alpha, hard_proportion, preference_soft, proportion_test, z_test_mean50,
    PreferenceRecord,
};
use lipsyn_core::matrix::Matrix;

use super::Args;
use crate::formats::load_preference_csv;
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn stats preference <prefs.csv> [-o <report>]

Input: CSV with header 'pair,evaluator,option', one evaluation per row.
Reports the Eq.-style hard-assignment proportion toward video 1, the
two-sided z-test of the soft scores against 50%, the proportion test
against 0.5, and Cronbach's alpha over the pair-by-evaluator grid when it
is complete.";

pub fn run(tokens: &[String]) -> CliResult<()> {
    let Some(sub) = tokens.first() else {
        println!("{HELP}");
        return Err(CliError::usage("stats: no subcommand"));
    };
    if sub != "preference" {
        return Err(CliError::usage(format!("stats: unknown subcommand {sub:?}")));
    }
    let args = Args::parse(&tokens[1..], &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&["out"])?;
    let [input] = args.positional() else {
        return Err(CliError::usage("stats preference expects one input CSV"));
    };

    let rows = load_preference_csv(Path::new(input))?;
    let scores: Vec<f64> = rows.iter().map(|(_, _, o)| preference_soft(*o).0).collect();
    let record = PreferenceRecord::new(scores)?;
    let p = hard_proportion(&record);
    let z_p = z_test_mean50(&record)?;
    let prop_p = proportion_test(p, record.len());

    // Cronbach's alpha over the pair x evaluator grid, when complete.
    let mut pairs: Vec<&str> = rows.iter().map(|(p, _, _)| p.as_str()).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut evaluators: Vec<&str> = rows.iter().map(|(_, e, _)| e.as_str()).collect();
    evaluators.sort_unstable();
    evaluators.dedup();
    let mut grid: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (pair, evaluator, option) in &rows {
        grid.insert((pair.as_str(), evaluator.as_str()), preference_soft(*option).0);
    }
    let alpha = if pairs.len() >= 2
        && evaluators.len() >= 2
        && grid.len() == pairs.len() * evaluators.len()
    {
        let ratings = Matrix::from_fn(pairs.len(), evaluators.len(), |r, c| {
            grid[&(pairs[r], evaluators[c])]
        });
        cronbach_alpha(&ratings).ok()
    } else {
        None
    };

    let mut report = format!(
        "#lipsyn-stats preference v1\n\
         evaluations = {}\n\
         hard_proportion = {p}\n\
         z_test_p_value = {z_p}\n\
         proportion_test_p_value = {prop_p}\n",
        record.len(),
    );
    match alpha {
        Some(a) => report.push_str(&format!("cronbach_alpha = {a}\n")),
        None => report.push_str("cronbach_alpha = n/a (incomplete rating grid)\n"),
    }
    if let Some(out) = args.get("out") {
        std::fs::write(out, &report)?;
    }
    print!("{report}");
    Ok(())
}
