//! Deterministic SVG trajectory plots: one panel per requested channel,
//! one polyline per sequence. Identical inputs produce identical bytes.

use std::path::Path;

use lipsyn_core::dataset::{motion_channel_names, MotionSequence};

use crate::{CliError, CliResult};

const PANEL_W: f64 = 800.0;
const PANEL_H: f64 = 160.0;
const MARGIN: f64 = 36.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Render the requested channels of the given (label, sequence) pairs.
pub fn render_trajectories(
    sequences: &[(String, &MotionSequence)],
    channels: &[usize],
) -> CliResult<String> {
    if channels.is_empty() {
        return Err(CliError::usage("no channels requested"));
    }
    if sequences.is_empty() {
        return Err(CliError::usage("no sequences to plot"));
    }
    let names = motion_channel_names();
    for &c in channels {
        if c >= names.len() {
            return Err(CliError::usage(format!("channel index {c} out of range")));
        }
    }

    let width = PANEL_W + 2.0 * MARGIN;
    let height = channels.len() as f64 * (PANEL_H + MARGIN) + MARGIN;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for (panel, &channel) in channels.iter().enumerate() {
        let top = MARGIN + panel as f64 * (PANEL_H + MARGIN);

        // Shared vertical scale across sequences for this channel.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, seq) in sequences {
            for t in 0..seq.len() {
                let v = seq.frames().get(t, channel);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !(hi > lo) {
            hi = lo + 1.0;
        }
        let t_max = sequences.iter().map(|(_, s)| s.len()).max().unwrap().max(2);

        svg.push_str(&format!(
            "<g data-panel=\"{}\">\n<rect x=\"{MARGIN}\" y=\"{top}\" width=\"{PANEL_W}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
            names[channel]
        ));
        svg.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            top - 6.0,
            names[channel]
        ));
        for (s_idx, (label, seq)) in sequences.iter().enumerate() {
            let color = PALETTE[s_idx % PALETTE.len()];
            let mut points = String::new();
            for t in 0..seq.len() {
                let x = MARGIN + PANEL_W * t as f64 / (t_max - 1) as f64;
                let v = seq.frames().get(t, channel);
                let y = top + PANEL_H - PANEL_H * (v - lo) / (hi - lo);
                points.push_str(&format!("{x},{y} "));
            }
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" data-label=\"{label}\" points=\"{}\"/>\n",
                points.trim_end()
            ));
            // Legend entry (first panel only).
            if panel == 0 {
                let ly = top + 14.0 + 14.0 * s_idx as f64;
                svg.push_str(&format!(
                    "<text x=\"{}\" y=\"{ly}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
                    MARGIN + 8.0
                ));
            }
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render to a file.
pub fn plot_trajectories(
    path: &Path,
    sequences: &[(String, &MotionSequence)],
    channels: &[usize],
) -> CliResult<()> {
    let svg = render_trajectories(sequences, channels)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipsyn_core::dataset::MOTION_DIM;
    use lipsyn_core::matrix::Matrix;

    fn seq(seed: u64) -> MotionSequence {
        let mut rng = lipsyn_core::rng::SeededRng::new(seed);
        MotionSequence::new(Matrix::from_fn(50, MOTION_DIM, |_, _| rng.gaussian()), 120.0).unwrap()
    }

    #[test]
    fn same_input_same_bytes() {
        let a = seq(1);
        let sequences = vec![("real".to_string(), &a)];
        let s1 = render_trajectories(&sequences, &[0, 7]).unwrap();
        let s2 = render_trajectories(&sequences, &[0, 7]).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn one_panel_per_channel() {
        let a = seq(2);
        let b = seq(3);
        let sequences = vec![("real".to_string(), &a), ("generated".to_string(), &b)];
        let svg = render_trajectories(&sequences, &[0, 1, 44]).unwrap();
        assert_eq!(svg.matches("data-panel=").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 6);
    }

    #[test]
    fn empty_channel_list_is_an_error() {
        let a = seq(4);
        let sequences = vec![("x".to_string(), &a)];
        assert!(render_trajectories(&sequences, &[]).is_err());
    }
}
