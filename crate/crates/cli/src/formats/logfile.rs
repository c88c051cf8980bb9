//! Training log files: `#lipsyn-trainlog v1`, then one tab-separated
//! `key=value` record per epoch. Only deterministic fields are written so
//! reruns with the same seed produce identical bytes; wall-clock progress
//! goes to stderr instead.

use std::path::Path;

use lipsyn_core::train::LogRecord;

use crate::CliResult;

const HEADER: &str = "#lipsyn-trainlog v1";

/// One record as a log line.
pub fn format_log_record(r: &LogRecord) -> String {
    let mut line = format!(
        "phase={}\tepoch={}\ttrain_loss={}",
        r.phase, r.epoch, r.train_loss
    );
    if let Some(v) = r.val_loss {
        line.push_str(&format!("\tval_loss={v}"));
    }
    if let Some(v) = r.d_loss {
        line.push_str(&format!("\td_loss={v}"));
    }
    if let Some(v) = r.g_loss {
        line.push_str(&format!("\tg_loss={v}"));
    }
    if let Some(v) = r.d_accuracy {
        line.push_str(&format!("\td_accuracy={v}"));
    }
    line
}

/// Write the whole log.
pub fn save_training_log(path: &Path, records: &[LogRecord]) -> CliResult<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format_log_record(r));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_format_without_missing_fields() {
        let r = LogRecord {
            phase: "baseline".into(),
            epoch: 3,
            train_loss: 0.5,
            val_loss: Some(0.25),
            d_loss: None,
            g_loss: None,
            d_accuracy: None,
        };
        assert_eq!(
            format_log_record(&r),
            "phase=baseline\tepoch=3\ttrain_loss=0.5\tval_loss=0.25"
        );
    }
}
