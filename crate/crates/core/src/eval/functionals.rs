//! Sentence-level functionals over motion channels.

use alloc::vec::Vec;

use crate::dataset::{MotionSequence, MOTION_DIM};
use crate::error::Error;
use crate::num;
use crate::Result;

/// Statistics per channel: mean, median, Q1, Q3, min, max, std.
pub const FUNCTIONALS_PER_CHANNEL: usize = 7;
/// Full feature width: 45 channels x 7 functionals.
pub const FUNCTIONAL_DIM: usize = MOTION_DIM * FUNCTIONALS_PER_CHANNEL;

/// Quantile by linear interpolation between order statistics: position
/// (n - 1) * q on the sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = (n - 1) as f64 * q;
    let lo = num::floor(pos) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// 315-D functional vector in channel-major order: for each of the 45
/// channels, [mean, median, Q1, Q3, min, max, std] (population std).
pub fn functionals(seq: &MotionSequence) -> Result<Vec<f64>> {
    let t = seq.len();
    if t < 2 {
        return Err(Error::InvalidArgument(
            "functionals need at least 2 frames".into(),
        ));
    }
    let mut out = Vec::with_capacity(FUNCTIONAL_DIM);
    let mut column = Vec::with_capacity(t);
    for c in 0..MOTION_DIM {
        column.clear();
        for r in 0..t {
            column.push(seq.frames().get(r, c));
        }
        let mean = column.iter().sum::<f64>() / t as f64;
        let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t as f64;
        let mut sorted = column.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(mean);
        out.push(quantile(&sorted, 0.5));
        out.push(quantile(&sorted, 0.25));
        out.push(quantile(&sorted, 0.75));
        out.push(sorted[0]);
        out.push(sorted[t - 1]);
        out.push(num::sqrt(var));
    }
    Ok(out)
}
