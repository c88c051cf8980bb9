//! Preference statistics for pairwise subjective comparisons, plus rating
//! agreement and ranking helpers.

use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

/// The five-option preference scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferenceOption {
    /// Definitely the first video.
    Definitely1,
    /// Moderately the first video.
    Moderately1,
    /// Tie.
    Tie,
    /// Moderately the second video.
    Moderately2,
    /// Definitely the second video.
    Definitely2,
}

impl PreferenceOption {
    /// Stable tag used in preference CSV files.
    pub fn tag(self) -> &'static str {
        match self {
            PreferenceOption::Definitely1 => "definitely1",
            PreferenceOption::Moderately1 => "moderately1",
            PreferenceOption::Tie => "tie",
            PreferenceOption::Moderately2 => "moderately2",
            PreferenceOption::Definitely2 => "definitely2",
        }
    }

    /// Parse a tag (also accepts the percentage values 100/75/50/25/0).
    pub fn parse(s: &str) -> Option<PreferenceOption> {
        match s {
            "definitely1" | "100" => Some(PreferenceOption::Definitely1),
            "moderately1" | "75" => Some(PreferenceOption::Moderately1),
            "tie" | "50" => Some(PreferenceOption::Tie),
            "moderately2" | "25" => Some(PreferenceOption::Moderately2),
            "definitely2" | "0" => Some(PreferenceOption::Definitely2),
            _ => None,
        }
    }
}

/// Map an option to percentages for (video 1, video 2).
pub fn preference_soft(option: PreferenceOption) -> (f64, f64) {
    match option {
        PreferenceOption::Definitely1 => (100.0, 0.0),
        PreferenceOption::Moderately1 => (75.0, 25.0),
        PreferenceOption::Tie => (50.0, 50.0),
        PreferenceOption::Moderately2 => (25.0, 75.0),
        PreferenceOption::Definitely2 => (0.0, 100.0),
    }
}

/// Soft preference scores toward video 1, each in {0, 25, 50, 75, 100}.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceRecord {
    scores: Vec<f64>,
}

impl PreferenceRecord {
    /// Validate that every score sits on the five-point scale.
    pub fn new(scores: Vec<f64>) -> Result<PreferenceRecord> {
        if scores.is_empty() {
            return Err(Error::EmptyInput("preference scores"));
        }
        for &s in &scores {
            if ![0.0, 25.0, 50.0, 75.0, 100.0].contains(&s) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "preference score {s} is not on the 5-option scale"
                )));
            }
        }
        Ok(PreferenceRecord { scores })
    }

    /// Build from options.
    pub fn from_options(options: &[PreferenceOption]) -> Result<PreferenceRecord> {
        PreferenceRecord::new(options.iter().map(|&o| preference_soft(o).0).collect())
    }

    /// The raw scores.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Number of evaluations.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    /// True when empty (cannot happen for a constructed record).
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// The record with the roles of the two videos swapped.
    pub fn swapped(&self) -> PreferenceRecord {
        PreferenceRecord {
            scores: self.scores.iter().map(|s| 100.0 - s).collect(),
        }
    }
}

/// Hard-assignment proportion toward video 1: votes with e >= 50 over
/// n plus the tie count (ties award one vote to each side).
pub fn hard_proportion(rec: &PreferenceRecord) -> f64 {
    let n = rec.scores.len() as f64;
    let wins = rec.scores.iter().filter(|&&e| e >= 50.0).count() as f64;
    let ties = rec.scores.iter().filter(|&&e| e == 50.0).count() as f64;
    wins / (n + ties)
}

/// Two-sided z-test of the soft scores against a mean of 50%.
///
/// Zero-variance convention: p = 1 when the mean is exactly 50, else 0.
pub fn z_test_mean50(rec: &PreferenceRecord) -> Result<f64> {
    let n = rec.scores.len();
    if n < 2 {
        return Err(Error::InvalidArgument("z-test needs at least 2 scores".into()));
    }
    let mean = rec.scores.iter().sum::<f64>() / n as f64;
    let var = rec
        .scores
        .iter()
        .map(|s| (s - mean) * (s - mean))
        .sum::<f64>()
        / (n - 1) as f64;
    if var == 0.0 {
        return Ok(if mean == 50.0 { 1.0 } else { 0.0 });
    }
    let z = (mean - 50.0) / num::sqrt(var / n as f64);
    Ok(2.0 * (1.0 - num::normal_cdf(z.abs())))
}

/// Two-sided one-sample proportion test against 0.5:
/// z = (p_hat - 0.5) / sqrt(0.25 / n).
pub fn proportion_test(p_hat: f64, n: usize) -> f64 {
    assert!(n >= 1, "proportion test needs n >= 1");
    let z = (p_hat - 0.5) / num::sqrt(0.25 / n as f64);
    2.0 * (1.0 - num::normal_cdf(z.abs()))
}

/// Cronbach's alpha over a ratings matrix (rows = cases, columns = raters),
/// using sample variances.
pub fn cronbach_alpha(ratings: &Matrix) -> Result<f64> {
    let (n, k) = ratings.shape();
    if n < 2 || k < 2 {
        return Err(Error::InvalidArgument(
            "cronbach alpha needs at least 2 cases and 2 raters".into(),
        ));
    }
    let sample_var = |xs: &[f64]| -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let mut item_var_sum = 0.0;
    for c in 0..k {
        let col: Vec<f64> = (0..n).map(|r| ratings.get(r, c)).collect();
        item_var_sum += sample_var(&col);
    }
    let totals: Vec<f64> = (0..n).map(|r| ratings.row(r).iter().sum()).collect();
    let total_var = sample_var(&totals);
    if total_var == 0.0 {
        return Err(Error::InvalidArgument(
            "cronbach alpha undefined: total score has zero variance".into(),
        ));
    }
    Ok(k as f64 / (k as f64 - 1.0) * (1.0 - item_var_sum / total_var))
}

/// Area under the ROC curve via the rank statistic (ties get half credit).
pub fn auc(positive_scores: &[f64], negative_scores: &[f64]) -> f64 {
    assert!(
        !positive_scores.is_empty() && !negative_scores.is_empty(),
        "auc needs both classes"
    );
    let mut hits = 0.0;
    for &p in positive_scores {
        for &n in negative_scores {
            if p > n {
                hits += 1.0;
            } else if p == n {
                hits += 0.5;
            }
        }
    }
    hits / (positive_scores.len() * negative_scores.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_mapping_reference_points() {
        assert_eq!(preference_soft(PreferenceOption::Definitely1), (100.0, 0.0));
        assert_eq!(preference_soft(PreferenceOption::Moderately1), (75.0, 25.0));
        assert_eq!(preference_soft(PreferenceOption::Tie), (50.0, 50.0));
        assert_eq!(preference_soft(PreferenceOption::Moderately2), (25.0, 75.0));
        assert_eq!(preference_soft(PreferenceOption::Definitely2), (0.0, 100.0));
    }

    #[test]
    fn hard_proportion_reference_case() {
        let rec = PreferenceRecord::new(vec![100.0, 75.0, 50.0, 25.0]).unwrap();
        assert_eq!(hard_proportion(&rec), 0.6);

        let all_wins = PreferenceRecord::new(vec![100.0; 7]).unwrap();
        assert_eq!(hard_proportion(&all_wins), 1.0);

        let all_ties = PreferenceRecord::new(vec![50.0; 9]).unwrap();
        assert_eq!(hard_proportion(&all_ties), 0.5);
    }

    #[test]
    fn hard_proportion_swap_identity() {
        // Swapping video roles computes the complementary proportion with
        // the same tie rule.
        let rec = PreferenceRecord::new(vec![100.0, 75.0, 50.0, 25.0, 0.0]).unwrap();
        let p = hard_proportion(&rec);
        let q = hard_proportion(&rec.swapped());
        let ties = rec.scores().iter().filter(|&&e| e == 50.0).count() as f64;
        let n = rec.len() as f64;
        // p + q = (wins1 + wins2) / (n + ties) = (n + ties) / (n + ties).
        assert!((p + q - 1.0).abs() < 1e-12, "{p} + {q}");
        assert!((p + q) * (n + ties) - (n + ties) < 1e-9);
    }

    #[test]
    fn scores_off_scale_are_rejected() {
        assert!(PreferenceRecord::new(vec![60.0]).is_err());
        assert!(PreferenceRecord::new(vec![]).is_err());
    }

    #[test]
    fn z_test_reference_points() {
        let balanced = PreferenceRecord::new(vec![75.0, 25.0, 100.0, 0.0]).unwrap();
        assert!((z_test_mean50(&balanced).unwrap() - 1.0).abs() < 1e-12);

        // Symmetric under swapping the videos.
        let rec = PreferenceRecord::new(vec![100.0, 75.0, 75.0, 50.0, 25.0]).unwrap();
        let p1 = z_test_mean50(&rec).unwrap();
        let p2 = z_test_mean50(&rec.swapped()).unwrap();
        assert!((p1 - p2).abs() < 1e-12);

        // Zero variance conventions.
        let flat = PreferenceRecord::new(vec![75.0; 5]).unwrap();
        assert_eq!(z_test_mean50(&flat).unwrap(), 0.0);
        let flat50 = PreferenceRecord::new(vec![50.0; 5]).unwrap();
        assert_eq!(z_test_mean50(&flat50).unwrap(), 1.0);
    }

    #[test]
    fn z_of_1_96_gives_p_of_0_05() {
        // Normal CDF oracle point: 2 (1 - Phi(1.96)) = 0.05.
        let p = 2.0 * (1.0 - num::normal_cdf(1.959963984540054));
        assert!((p - 0.05).abs() < 1e-9);
    }

    #[test]
    fn proportion_test_reference_points() {
        assert!((proportion_test(0.5, 40) - 1.0).abs() < 1e-12);
        // Large-n significant preference.
        let p = proportion_test(0.68, 400);
        assert!(p < 0.01, "p {p}");
    }

    #[test]
    fn proportion_test_tracks_exact_binomial_for_n_40() {
        // Oracle: exact two-sided binomial tail under p = 0.5.
        let n = 40usize;
        let ln_fact: Vec<f64> = {
            let mut v = vec![0.0];
            for i in 1..=n {
                v.push(v[i - 1] + num::ln(i as f64));
            }
            v
        };
        let pmf = |k: usize| -> f64 {
            num::exp(
                ln_fact[n] - ln_fact[k] - ln_fact[n - k] + n as f64 * num::ln(0.5),
            )
        };
        // The pinned statistic has no continuity correction, so binomial
        // agreement within 0.02 holds from the 5% significance region
        // outward (k >= 27 of 40); nearer the null the normal curve reads
        // high by up to 0.12 and the z-value itself is the reference.
        for k in [27usize, 28, 30, 32, 35] {
            let p_hat = k as f64 / n as f64;
            let approx = proportion_test(p_hat, n);
            // Two-sided exact tail: |X - 20| >= |k - 20|.
            let dev = k.abs_diff(n / 2);
            let mut exact = 0.0;
            for j in 0..=n {
                if j.abs_diff(n / 2) >= dev {
                    exact += pmf(j);
                }
            }
            assert!(
                (approx - exact).abs() < 0.02,
                "k={k}: normal {approx} vs exact {exact}"
            );
        }
    }

    #[test]
    fn cronbach_alpha_reference_behavior() {
        // Perfectly consistent raters -> alpha = 1.
        let consistent = Matrix::from_fn(6, 3, |r, _| r as f64);
        assert!((cronbach_alpha(&consistent).unwrap() - 1.0).abs() < 1e-12);

        // Independent noise -> alpha near 0 (can be negative).
        let mut rng = crate::rng::SeededRng::new(3);
        let noise = Matrix::from_fn(400, 3, |_, _| rng.gaussian());
        let alpha = cronbach_alpha(&noise).unwrap();
        assert!(alpha.abs() < 0.25, "alpha {alpha}");
    }

    #[test]
    fn auc_matches_threshold_sweep_oracle() {
        let mut rng = crate::rng::SeededRng::new(8);
        let pos: Vec<f64> = (0..60).map(|_| rng.gaussian() + 1.0).collect();
        let neg: Vec<f64> = (0..80).map(|_| rng.gaussian()).collect();
        let fast = auc(&pos, &neg);

        // Oracle: trapezoidal area under the empirical ROC curve swept over
        // all distinct thresholds.
        let mut thresholds: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        let mut points = vec![(0.0f64, 0.0f64)];
        for &th in &thresholds {
            let tpr = pos.iter().filter(|&&v| v >= th).count() as f64 / pos.len() as f64;
            let fpr = neg.iter().filter(|&&v| v >= th).count() as f64 / neg.len() as f64;
            points.push((fpr, tpr));
        }
        points.push((1.0, 1.0));
        let mut area = 0.0;
        for w in points.windows(2) {
            area += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
        }
        assert!((fast - area).abs() < 1e-9, "{fast} vs {area}");

        // Sanity: separated classes near 1, identical classes 0.5.
        assert!(fast > 0.7);
        assert_eq!(auc(&[1.0, 2.0], &[1.0, 2.0]), 0.5);
    }
}
