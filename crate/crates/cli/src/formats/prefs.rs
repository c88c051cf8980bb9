//! Preference CSV for subjective comparisons: header `pair,evaluator,option`
//! then one evaluation per row. Options are the five scale tags
//! (`definitely1`, `moderately1`, `tie`, `moderately2`, `definitely2`) or
//! their percentage equivalents (100/75/50/25/0 toward video 1).

use std::path::Path;

use lipsyn_core::eval::PreferenceOption;

use crate::{CliError, CliResult};

/// Parsed rows: (pair id, evaluator id, option).
pub fn load_preference_csv(path: &Path) -> CliResult<Vec<(String, String, PreferenceOption)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "pair,evaluator,option" => {}
        _ => {
            return Err(CliError::data(format!(
                "{}: expected header 'pair,evaluator,option'",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(CliError::data(format!(
                "{}:{}: expected 3 fields",
                path.display(),
                lineno + 1
            )));
        }
        let option = PreferenceOption::parse(parts[2]).ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: unknown option {:?}",
                path.display(),
                lineno + 1,
                parts[2]
            ))
        })?;
        rows.push((parts[0].to_string(), parts[1].to_string(), option));
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no evaluations", path.display())));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tags_and_percentages() {
        let dir = std::env::temp_dir().join(format!("lipsyn-prefs-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("prefs.csv");
        std::fs::write(
            &path,
            "pair,evaluator,option\np1,e1,definitely1\np1,e2,75\np2,e1,tie\np2,e2,25\n",
        )
        .unwrap();
        let rows = load_preference_csv(&path).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].2, PreferenceOption::Definitely1);
        assert_eq!(rows[1].2, PreferenceOption::Moderately1);
        assert_eq!(rows[3].2, PreferenceOption::Moderately2);
    }

    #[test]
    fn bad_option_is_an_error() {
        let dir = std::env::temp_dir().join(format!("lipsyn-prefs-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "pair,evaluator,option\np1,e1,60\n").unwrap();
        assert!(load_preference_csv(&path).is_err());
    }
}
