//! Run configuration files: `key = value` lines, `#` comments, unknown keys
//! rejected. Command-line flags override config values; every command that
//! takes a config echoes the fully resolved configuration into its output
//! directory as `resolved.cfg`.

use std::collections::BTreeMap;
use std::path::Path;

use lipsyn_core::dataset::{default_emotion_gains, SynthSpec, EMOTION_CLASSES};
use lipsyn_core::train::ScheduleSpec;

use crate::{CliError, CliResult};

/// Resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Root seed threaded into every component.
    pub seed: u64,
    /// Model kind tag for `train`.
    pub model: String,
    /// Noise dimensionality m.
    pub noise_dim: usize,
    /// Training schedule.
    pub schedule: ScheduleSpec,
    /// Bandwidth grid size for the Parzen evaluation.
    pub bandwidth_grid: usize,
    /// Folds for the bandwidth cross-validation.
    pub parzen_folds: usize,
    /// PCA components for the objective evaluation.
    pub pca_components: usize,
    /// Soft-margin grid for the emotion classifier.
    pub classifier_grid: Vec<f64>,
    /// Synthesis noise seed base.
    pub noise_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            model: "csg".into(),
            noise_dim: 10,
            schedule: ScheduleSpec::default(),
            bandwidth_grid: 20,
            parzen_folds: 5,
            pca_components: 15,
            classifier_grid: vec![0.1, 0.3, 0.8, 2.0],
            noise_seed: 0,
        }
    }
}

/// Parse `key = value` lines into a map, rejecting duplicates.
pub fn parse_kv(path: &Path, text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: expected key = value",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::data(format!(
                "{}:{}: duplicate key {key}",
                path.display(),
                lineno + 1
            )));
        }
    }
    Ok(map)
}

fn parse_field<T: std::str::FromStr>(path: &Path, key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| {
        CliError::data(format!("{}: bad value for {key}: {value:?}", path.display()))
    })
}

impl RunConfig {
    /// Load from a config file on top of the defaults.
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let map = parse_kv(path, &text)?;
        let mut cfg = RunConfig::default();
        cfg.apply(path, &map)?;
        Ok(cfg)
    }

    /// Apply key/value overrides (config file content or CLI flags).
    pub fn apply(&mut self, path: &Path, map: &BTreeMap<String, String>) -> CliResult<()> {
        for (key, value) in map {
            match key.as_str() {
                "seed" => self.seed = parse_field(path, key, value)?,
                "model" => self.model = value.clone(),
                "noise_dim" => self.noise_dim = parse_field(path, key, value)?,
                "window" => self.schedule.window = parse_field(path, key, value)?,
                "hop" => self.schedule.hop = parse_field(path, key, value)?,
                "batch" => self.schedule.batch = parse_field(path, key, value)?,
                "lr" => self.schedule.lr = parse_field(path, key, value)?,
                "adversarial_lr" => {
                    self.schedule.adversarial_lr = Some(parse_field(path, key, value)?)
                }
                "pretrain_g_epochs" => {
                    self.schedule.pretrain_g_epochs = parse_field(path, key, value)?
                }
                "pretrain_d_epochs" => {
                    self.schedule.pretrain_d_epochs = parse_field(path, key, value)?
                }
                "adversarial_epochs" => {
                    self.schedule.adversarial_epochs = parse_field(path, key, value)?
                }
                "adapt_epochs" => self.schedule.adapt_epochs = parse_field(path, key, value)?,
                "baseline_epochs" => {
                    self.schedule.baseline_epochs = parse_field(path, key, value)?
                }
                "swdnn_extra_epochs" => {
                    self.schedule.swdnn_extra_epochs = parse_field(path, key, value)?
                }
                "g_hidden" => self.schedule.g_hidden = parse_field(path, key, value)?,
                "d_hidden" => self.schedule.d_hidden = parse_field(path, key, value)?,
                "swdnn_hidden" => self.schedule.swdnn_hidden = parse_field(path, key, value)?,
                "fake_mix" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 3 {
                        return Err(CliError::data(format!(
                            "{}: fake_mix needs three comma-separated counts",
                            path.display()
                        )));
                    }
                    self.schedule.fake_mix = (
                        parse_field(path, key, parts[0])?,
                        parse_field(path, key, parts[1])?,
                        parse_field(path, key, parts[2])?,
                    );
                }
                "bandwidth_grid" => self.bandwidth_grid = parse_field(path, key, value)?,
                "parzen_folds" => self.parzen_folds = parse_field(path, key, value)?,
                "pca_components" => self.pca_components = parse_field(path, key, value)?,
                "classifier_grid" => {
                    let mut grid = Vec::new();
                    for part in value.split(',') {
                        grid.push(parse_field(path, key, part.trim())?);
                    }
                    self.classifier_grid = grid;
                }
                "noise_seed" => self.noise_seed = parse_field(path, key, value)?,
                other => {
                    return Err(CliError::data(format!(
                        "{}: unknown config key {other:?}",
                        path.display()
                    )))
                }
            }
        }
        Ok(())
    }

    /// Render the fully resolved configuration (stable key order).
    pub fn render(&self) -> String {
        let s = &self.schedule;
        let mut out = String::new();
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("model = {}\n", self.model));
        out.push_str(&format!("noise_dim = {}\n", self.noise_dim));
        out.push_str(&format!("window = {}\n", s.window));
        out.push_str(&format!("hop = {}\n", s.hop));
        out.push_str(&format!("batch = {}\n", s.batch));
        out.push_str(&format!("lr = {}\n", s.lr));
        if let Some(lr) = s.adversarial_lr {
            out.push_str(&format!("adversarial_lr = {lr}\n"));
        }
        out.push_str(&format!("pretrain_g_epochs = {}\n", s.pretrain_g_epochs));
        out.push_str(&format!("pretrain_d_epochs = {}\n", s.pretrain_d_epochs));
        out.push_str(&format!("adversarial_epochs = {}\n", s.adversarial_epochs));
        out.push_str(&format!("adapt_epochs = {}\n", s.adapt_epochs));
        out.push_str(&format!("baseline_epochs = {}\n", s.baseline_epochs));
        out.push_str(&format!("swdnn_extra_epochs = {}\n", s.swdnn_extra_epochs));
        out.push_str(&format!("g_hidden = {}\n", s.g_hidden));
        out.push_str(&format!("d_hidden = {}\n", s.d_hidden));
        out.push_str(&format!("swdnn_hidden = {}\n", s.swdnn_hidden));
        out.push_str(&format!(
            "fake_mix = {},{},{}\n",
            s.fake_mix.0, s.fake_mix.1, s.fake_mix.2
        ));
        out.push_str(&format!("bandwidth_grid = {}\n", self.bandwidth_grid));
        out.push_str(&format!("parzen_folds = {}\n", self.parzen_folds));
        out.push_str(&format!("pca_components = {}\n", self.pca_components));
        let grid: Vec<String> = self.classifier_grid.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("classifier_grid = {}\n", grid.join(",")));
        out.push_str(&format!("noise_seed = {}\n", self.noise_seed));
        out
    }
}

/// Synthetic corpus spec file: same `key = value` syntax.
pub fn load_synth_spec(path: &Path) -> CliResult<SynthSpec> {
    let text = std::fs::read_to_string(path)?;
    let map = parse_kv(path, &text)?;
    let mut n_utterances = 60usize;
    let mut feature_dim = 27usize;
    let mut seed = 0u64;
    let mut t_min = 300usize;
    let mut t_max = 600usize;
    let mut smoothing_radius = 4usize;
    let mut noise_sd = 0.05f64;
    let mut gain_amplitude = 1.0f64;
    let mut n_speakers = 5usize;
    let mut annotators = 3usize;
    let mut annotation_noise = 0.25f64;
    let mut class_counts: Option<[usize; EMOTION_CLASSES]> = None;

    for (key, value) in &map {
        match key.as_str() {
            "n_utterances" => n_utterances = parse_field(path, key, value)?,
            "feature_dim" => feature_dim = parse_field(path, key, value)?,
            "seed" => seed = parse_field(path, key, value)?,
            "t_min" => t_min = parse_field(path, key, value)?,
            "t_max" => t_max = parse_field(path, key, value)?,
            "smoothing_radius" => smoothing_radius = parse_field(path, key, value)?,
            "noise_sd" => noise_sd = parse_field(path, key, value)?,
            "gain_amplitude" => gain_amplitude = parse_field(path, key, value)?,
            "n_speakers" => n_speakers = parse_field(path, key, value)?,
            "annotators" => annotators = parse_field(path, key, value)?,
            "annotation_noise" => annotation_noise = parse_field(path, key, value)?,
            "class_counts" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != EMOTION_CLASSES {
                    return Err(CliError::data(format!(
                        "{}: class_counts needs {EMOTION_CLASSES} comma-separated counts",
                        path.display()
                    )));
                }
                let mut counts = [0usize; EMOTION_CLASSES];
                for (slot, part) in counts.iter_mut().zip(parts) {
                    *slot = parse_field(path, key, part)?;
                }
                class_counts = Some(counts);
            }
            other => {
                return Err(CliError::data(format!(
                    "{}: unknown synth spec key {other:?}",
                    path.display()
                )))
            }
        }
    }
    let mut spec = SynthSpec::new(n_utterances, feature_dim, seed);
    spec.t_range = (t_min, t_max);
    spec.smoothing_radius = smoothing_radius;
    spec.noise_sd = noise_sd;
    spec.emotion_gains = default_emotion_gains(seed, gain_amplitude);
    spec.n_speakers = n_speakers;
    spec.annotators = annotators;
    spec.annotation_noise = annotation_noise;
    spec.class_counts = class_counts;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpfile(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("lipsyn-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn config_round_trip_through_render() {
        let path = tmpfile(
            "run.cfg",
            "seed = 7\nmodel = blstm-ccc\nbatch = 32\nlr = 0.003\nfake_mix = 2,1,3\n# comment\n",
        );
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model, "blstm-ccc");
        assert_eq!(cfg.schedule.batch, 32);
        assert_eq!(cfg.schedule.fake_mix, (2, 1, 3));

        let rendered = tmpfile("rendered.cfg", &cfg.render());
        let again = RunConfig::load(&rendered).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let path = tmpfile("bad.cfg", "seed = 1\nnot_a_key = 2\n");
        assert!(RunConfig::load(&path).is_err());
    }

    #[test]
    fn synth_spec_parses() {
        let path = tmpfile(
            "spec.cfg",
            "n_utterances = 12\nfeature_dim = 5\nseed = 3\nt_min = 100\nt_max = 150\nnoise_sd = 0\n",
        );
        let spec = load_synth_spec(&path).unwrap();
        assert_eq!(spec.n_utterances, 12);
        assert_eq!(spec.feature_dim, 5);
        assert_eq!(spec.t_range, (100, 150));
        assert_eq!(spec.noise_sd, 0.0);
    }
}
