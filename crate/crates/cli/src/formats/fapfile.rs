//! FAP text stream: a header with frame rate and the channel mapping table,
//! then one line of mapped values per frame.
//!
//! ```text
//! #lipsyn-fap v1 fps=<rate> channels=<n>
//! #map fap=<id> src=<channel index> range=<min>..<max> neutral=<v> span=<lo>..<hi>
//! <v> <v> ... (one line per frame, space separated)
//! ```

use std::path::Path;

use lipsyn_core::dataset::MotionSequence;
use lipsyn_core::synth::FapMapping;

use crate::CliResult;

/// Map a trajectory and write the FAP stream.
pub fn save_fap(path: &Path, seq: &MotionSequence, mapping: &FapMapping) -> CliResult<()> {
    let mapped = mapping.apply(seq)?;
    let mut out = format!(
        "#lipsyn-fap v1 fps={} channels={}\n",
        seq.frame_rate(),
        mapping.channels.len()
    );
    for ch in &mapping.channels {
        let (lo, hi) = mapping.ranges[ch.channel];
        out.push_str(&format!(
            "#map fap={} src={} range={}..{} neutral={} span={}..{}\n",
            ch.fap_id,
            ch.channel,
            ch.fap_range.0,
            ch.fap_range.1,
            mapping.neutral_pose[ch.channel],
            lo,
            hi
        ));
    }
    for r in 0..mapped.rows() {
        let row: Vec<String> = mapped.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipsyn_core::dataset::MOTION_DIM;
    use lipsyn_core::matrix::Matrix;

    #[test]
    fn writes_header_map_and_frames() {
        let dir = std::env::temp_dir().join(format!("lipsyn-fap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.fap");

        let mut frames = Matrix::zeros(4, MOTION_DIM);
        for r in 0..4 {
            frames.set(r, 0, r as f64);
        }
        let seq = MotionSequence::new(frames, 120.0).unwrap();
        let mapping = FapMapping::fit(&seq, (-100.0, 100.0)).unwrap();
        save_fap(&path, &seq, &mapping).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("#lipsyn-fap v1 fps=120"));
        let map_lines = text.lines().filter(|l| l.starts_with("#map")).count();
        assert_eq!(map_lines, mapping.channels.len());
        let frame_lines = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(frame_lines, 4);
    }
}
