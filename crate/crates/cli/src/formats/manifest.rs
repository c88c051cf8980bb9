//! Corpus manifest and split files.
//!
//! Manifest (`#lipsyn-corpus v1`): one record per utterance, tab-separated
//! `key=value` fields: `id`, `speaker`, `features` (path), `motion` (path),
//! `annotations` (comma-separated emotion names). Paths are relative to the
//! manifest's directory unless absolute.
//!
//! Split (`#lipsyn-split v1`): one `part<TAB>id` line per utterance with
//! part in {train, val, test}.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lipsyn_core::dataset::{Corpus, CorpusSplit, Emotion, EmotionLabel, Utterance};
use lipsyn_core::speech::{concat_align, FRAME_RATE};

use super::csv::{load_feature_csv, load_motion_csv};
use crate::{resolve_path, CliError, CliResult};

const MANIFEST_HEADER: &str = "#lipsyn-corpus v1";
const SPLIT_HEADER: &str = "#lipsyn-split v1";

/// One manifest record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Utterance id (unique).
    pub id: String,
    /// Speaker id.
    pub speaker: String,
    /// Feature CSV path (manifest-relative or absolute).
    pub features: String,
    /// Motion CSV path.
    pub motion: String,
    /// Raw annotations.
    pub annotations: Vec<Emotion>,
}

/// Write a manifest.
pub fn save_manifest(path: &Path, entries: &[ManifestEntry]) -> CliResult<()> {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for e in entries {
        let annotations: Vec<&str> = e.annotations.iter().map(|a| a.name()).collect();
        out.push_str(&format!(
            "utterance\tid={}\tspeaker={}\tfeatures={}\tmotion={}\tannotations={}\n",
            e.id,
            e.speaker,
            e.features,
            e.motion,
            annotations.join(",")
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_entry(path: &Path, lineno: usize, line: &str) -> CliResult<ManifestEntry> {
    let mut fields = BTreeMap::new();
    for part in line.split('\t').skip(1) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: field {part:?} is not key=value",
                path.display(),
                lineno
            ))
        })?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |key: &str| -> CliResult<String> {
        fields
            .get(key)
            .cloned()
            .ok_or_else(|| CliError::data(format!("{}:{}: missing {key}=", path.display(), lineno)))
    };
    let annotations_raw = get("annotations")?;
    let mut annotations = Vec::new();
    for name in annotations_raw.split(',') {
        let e = Emotion::parse(name).ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: unknown emotion {name:?}",
                path.display(),
                lineno
            ))
        })?;
        annotations.push(e);
    }
    Ok(ManifestEntry {
        id: get("id")?,
        speaker: get("speaker")?,
        features: get("features")?,
        motion: get("motion")?,
        annotations,
    })
}

/// Read manifest records (no data loading).
pub fn read_manifest_entries(path: &Path) -> CliResult<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == MANIFEST_HEADER => {}
        _ => {
            return Err(CliError::data(format!(
                "{}: not a {MANIFEST_HEADER} file",
                path.display()
            )))
        }
    }
    let mut entries = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (lineno, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !line.starts_with("utterance\t") {
            return Err(CliError::data(format!(
                "{}:{}: unknown record type",
                path.display(),
                lineno + 1
            )));
        }
        let entry = parse_entry(path, lineno + 1, line)?;
        if !seen.insert(entry.id.clone()) {
            return Err(CliError::data(format!(
                "{}: duplicate utterance id {}",
                path.display(),
                entry.id
            )));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(CliError::data(format!("{}: no utterances", path.display())));
    }
    Ok(entries)
}

/// Load a manifest and all referenced data into a corpus. Feature and
/// motion lengths are aligned by truncation to the shorter of the two; a
/// note is printed to stderr when truncation happens.
pub fn load_manifest(path: &Path) -> CliResult<Corpus> {
    let entries = read_manifest_entries(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut utterances = Vec::with_capacity(entries.len());
    for e in &entries {
        let features = load_feature_csv(&resolve_path(base, &e.features))?;
        let motion = load_motion_csv(&resolve_path(base, &e.motion))?;
        if (features.frame_rate() - FRAME_RATE).abs() > 1e-9 {
            return Err(CliError::data(format!(
                "utterance {}: features at {} fps (expected {FRAME_RATE})",
                e.id,
                features.frame_rate()
            )));
        }
        if features.len() != motion.len() {
            eprintln!(
                "lipsyn: note: utterance {}: aligning features ({} frames) and motion ({} frames) by truncation",
                e.id,
                features.len(),
                motion.len()
            );
        }
        let (features, motion) = concat_align(&[&features], &motion)?;
        let label = EmotionLabel::from_annotations(&e.annotations)?;
        utterances.push(Utterance::new(
            e.id.clone(),
            e.speaker.clone(),
            features,
            motion,
            label,
        )?);
    }
    Ok(Corpus::new(utterances)?)
}

/// Write a split file (ids, not indices, so it survives reordering).
pub fn save_split(path: &Path, corpus: &Corpus, split: &CorpusSplit) -> CliResult<()> {
    let mut out = String::from(SPLIT_HEADER);
    out.push('\n');
    for (name, part) in [
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        for &i in part {
            out.push_str(&format!("{name}\t{}\n", corpus.utterances[i].id));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a split file back against a corpus.
pub fn load_split(path: &Path, corpus: &Corpus) -> CliResult<CorpusSplit> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SPLIT_HEADER => {}
        _ => {
            return Err(CliError::data(format!(
                "{}: not a {SPLIT_HEADER} file",
                path.display()
            )))
        }
    }
    let index_of: BTreeMap<&str, usize> = corpus
        .utterances
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    let mut split = CorpusSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (part, id) = line.split_once('\t').ok_or_else(|| {
            CliError::data(format!("{}:{}: bad split line", path.display(), lineno + 2))
        })?;
        let &idx = index_of.get(id).ok_or_else(|| {
            CliError::data(format!(
                "{}: split references unknown utterance {id}",
                path.display()
            ))
        })?;
        match part {
            "train" => split.train.push(idx),
            "val" => split.val.push(idx),
            "test" => split.test.push(idx),
            other => {
                return Err(CliError::data(format!(
                    "{}: unknown split part {other:?}",
                    path.display()
                )))
            }
        }
    }
    if split.train.is_empty() {
        return Err(CliError::data(format!("{}: empty train part", path.display())));
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipsyn_core::dataset::{generate_synthetic, split_corpus, SynthSpec};

    #[test]
    fn manifest_entries_round_trip() {
        let dir = std::env::temp_dir().join(format!("lipsyn-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let entries = vec![
            ManifestEntry {
                id: "u1".into(),
                speaker: "spk00".into(),
                features: "u1.feat.csv".into(),
                motion: "u1.motion.csv".into(),
                annotations: vec![Emotion::Anger, Emotion::Anger, Emotion::Frustration],
            },
            ManifestEntry {
                id: "u2".into(),
                speaker: "spk01".into(),
                features: "u2.feat.csv".into(),
                motion: "u2.motion.csv".into(),
                annotations: vec![Emotion::Happiness],
            },
        ];
        let path = dir.join("corpus.manifest");
        save_manifest(&path, &entries).unwrap();
        let loaded = read_manifest_entries(&path).unwrap();
        assert_eq!(loaded, entries);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = std::env::temp_dir().join(format!("lipsyn-manifest-dup-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dup.manifest");
        let e = ManifestEntry {
            id: "same".into(),
            speaker: "s".into(),
            features: "f.csv".into(),
            motion: "m.csv".into(),
            annotations: vec![Emotion::Neutral],
        };
        save_manifest(&path, &[e.clone(), e]).unwrap();
        assert!(read_manifest_entries(&path).is_err());
    }

    #[test]
    fn split_round_trip() {
        let dir = std::env::temp_dir().join(format!("lipsyn-split-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut spec = SynthSpec::new(10, 3, 7);
        spec.t_range = (80, 100);
        let corpus = generate_synthetic(&spec).unwrap();
        let split = split_corpus(&corpus, (0.6, 0.2, 0.2), 3).unwrap();
        let path = dir.join("split.tsv");
        save_split(&path, &corpus, &split).unwrap();
        let loaded = load_split(&path, &corpus).unwrap();
        assert_eq!(loaded, split);
    }
}
