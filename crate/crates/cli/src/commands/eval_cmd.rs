//! `lipsyn eval`: objective evaluation reports.
//!
//! `eval parzen` fits PCA on real training frames, projects the model's
//! generated test trajectories as the KDE support, cross-validates the
//! bandwidth, and reports the mean/std log-likelihood of the real test
//! frames. `eval emotion` trains the functional-feature classifier on real
//! motion and scores the generated motion of a set of checkpoints.

use std::path::Path;

use lipsyn_core::dataset::{Corpus, Emotion, MotionSequence, MOTION_DIM};
use lipsyn_core::eval::{
    class_metrics_all, default_bandwidth_grid, fit_parzen, fit_pca, functionals, loglik, macro_f1,
    train_classifier,
};
use lipsyn_core::matrix::Matrix;
use lipsyn_core::nets::{Checkpoint, ModelKind};
use lipsyn_core::synth::{synthesize, SynthesisMode, SynthesisRequest};

use super::Args;
use crate::config::RunConfig;
use crate::formats::load_checkpoint;
use crate::{CliError, CliResult};

const HELP: &str = "\
usage: lipsyn eval <parzen|emotion> --ckpt <model.ckpt> --manifest <m> --split <s> -o <report>

options:
  --ckpt <path>        checkpoint to evaluate (repeatable for eval emotion;
                       adapted checkpoints score their own emotion's test
                       utterances)
  --config <run.cfg>   evaluation settings (pca_components, bandwidth_grid,
                       parzen_folds, classifier_grid, noise_seed)
  --seed / --set       config overrides as in train";

/// Pool the motion frames of the selected utterances into one matrix.
pub fn pooled_real_frames(corpus: &Corpus, indices: &[usize]) -> Matrix {
    let total: usize = indices.iter().map(|&i| corpus.utterances[i].motion.len()).sum();
    let mut out = Matrix::zeros(total, MOTION_DIM);
    let mut row = 0;
    for &i in indices {
        let u = &corpus.utterances[i];
        for t in 0..u.motion.len() {
            out.row_mut(row).copy_from_slice(u.motion.frames().row(t));
            row += 1;
        }
    }
    out
}

/// Generate one trajectory per selected utterance (noise seed = base + index;
/// emotion-aware models receive the utterance's one-hot consensus emotion,
/// or its soft label when no consensus exists).
pub fn generated_motion_for(
    ckpt: &Checkpoint,
    corpus: &Corpus,
    indices: &[usize],
    noise_seed_base: u64,
) -> CliResult<Vec<(usize, MotionSequence)>> {
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let u = &corpus.utterances[i];
        let emotion = if ckpt.arch.kind.emotion_aware() {
            Some(match u.emotion.hard() {
                Some(e) => {
                    let mut soft = [0.0; 6];
                    soft[e.index()] = 1.0;
                    soft
                }
                None => *u.emotion.soft(),
            })
        } else {
            None
        };
        let request = SynthesisRequest {
            checkpoint: ckpt,
            features: &u.features,
            noise_seed: noise_seed_base.wrapping_add(i as u64),
            emotion,
            mode: SynthesisMode::FullSequence,
        };
        out.push((i, synthesize(&request)?));
    }
    Ok(out)
}

fn pooled_generated_frames(generated: &[(usize, MotionSequence)]) -> Matrix {
    let total: usize = generated.iter().map(|(_, m)| m.len()).sum();
    let mut out = Matrix::zeros(total, MOTION_DIM);
    let mut row = 0;
    for (_, m) in generated {
        for t in 0..m.len() {
            out.row_mut(row).copy_from_slice(m.frames().row(t));
            row += 1;
        }
    }
    out
}

fn run_parzen(args: &Args, cfg: &RunConfig) -> CliResult<()> {
    let ckpt = load_checkpoint(Path::new(args.require("ckpt")?))?;
    let (corpus, split) = super::load_corpus_and_split(args)?;
    let out = args.require("out")?;

    let real_train = pooled_real_frames(&corpus, &split.train);
    let real_test = pooled_real_frames(&corpus, &split.test);
    let pca = fit_pca(&real_train, cfg.pca_components)?;

    let generated = generated_motion_for(&ckpt, &corpus, &split.test, cfg.noise_seed)?;
    let support = pca.project(&pooled_generated_frames(&generated))?;
    let grid = default_bandwidth_grid(&support, cfg.bandwidth_grid);
    let model = fit_parzen(&support, &grid, cfg.parzen_folds)?;
    let test_proj = pca.project(&real_test)?;
    let (mean, std) = loglik(&model, &test_proj)?;

    let report = format!(
        "#lipsyn-eval parzen v1\n\
         model = {}\n\
         generated_samples = {}\n\
         test_samples = {}\n\
         pca_components = {}\n\
         pca_explained_variance = {}\n\
         bandwidth = {}\n\
         loglik_mean = {mean}\n\
         loglik_std = {std}\n",
        ckpt.arch.kind.tag(),
        support.rows(),
        test_proj.rows(),
        cfg.pca_components,
        pca.cumulative_explained(),
        model.bandwidth,
    );
    std::fs::write(out, &report)?;
    print!("{report}");
    Ok(())
}

fn run_emotion(args: &Args, cfg: &RunConfig) -> CliResult<()> {
    let (corpus, split) = super::load_corpus_and_split(args)?;
    let out = args.require("out")?;
    let ckpt_paths = args.get_all("ckpt");
    if ckpt_paths.is_empty() {
        return Err(CliError::usage("eval emotion needs at least one --ckpt"));
    }

    // Real-data classifier over the four adaptable emotions.
    let gather = |indices: &[usize]| -> CliResult<(Matrix, Vec<Emotion>)> {
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for &i in indices {
            let u = &corpus.utterances[i];
            if let Some(e) = u.emotion.hard() {
                if Emotion::ADAPTABLE.contains(&e) {
                    feats.push(functionals(&u.motion)?);
                    labels.push(e);
                }
            }
        }
        if feats.is_empty() {
            return Err(CliError::data("no labeled utterances in this part"));
        }
        let mut m = Matrix::zeros(feats.len(), feats[0].len());
        for (r, f) in feats.iter().enumerate() {
            m.row_mut(r).copy_from_slice(f);
        }
        Ok((m, labels))
    };
    let (train_x, train_y) = gather(&split.train)?;
    let (val_x, val_y) = gather(&split.val)?;
    let classifier = train_classifier(&train_x, &train_y, &val_x, &val_y, &cfg.classifier_grid)?;

    // Generated test motion: adapted checkpoints score only their own
    // emotion's test utterances.
    let mut rows: Vec<(String, f64, f64, f64, f64)> = Vec::new();
    let mut report = format!(
        "#lipsyn-eval emotion v1\nclassifier_c = {}\nclasses = ang,hap,sad,fru\n",
        classifier.c
    );
    for path in ckpt_paths {
        let ckpt = load_checkpoint(Path::new(path))?;
        let target: Vec<usize> = match ckpt.arch.kind {
            ModelKind::CsgEmoAdapted(e) => split
                .test
                .iter()
                .copied()
                .filter(|&i| corpus.utterances[i].emotion.hard() == Some(e))
                .collect(),
            _ => split
                .test
                .iter()
                .copied()
                .filter(|&i| {
                    corpus.utterances[i]
                        .emotion
                        .hard()
                        .is_some_and(|e| Emotion::ADAPTABLE.contains(&e))
                })
                .collect(),
        };
        if target.is_empty() {
            return Err(CliError::data(format!(
                "{}: no matching test utterances",
                ckpt.arch.kind.tag()
            )));
        }
        let generated = generated_motion_for(&ckpt, &corpus, &target, cfg.noise_seed)?;
        let mut predictions = Vec::with_capacity(generated.len());
        let mut labels = Vec::with_capacity(generated.len());
        for (i, motion) in &generated {
            predictions.push(classifier.predict(&functionals(motion)?)?);
            labels.push(corpus.utterances[*i].emotion.hard().unwrap());
        }
        let (accuracy, precision, recall) =
            class_metrics_all(&predictions, &labels, &classifier.classes);
        let f1 = macro_f1(&predictions, &labels, &classifier.classes);
        rows.push((ckpt.arch.kind.tag(), accuracy, precision, recall, f1));
    }
    report.push_str("model\taccuracy\tprecision\trecall\tf1\n");
    for (tag, acc, prec, rec, f1) in &rows {
        report.push_str(&format!("{tag}\t{acc}\t{prec}\t{rec}\t{f1}\n"));
    }
    std::fs::write(out, &report)?;
    print!("{report}");
    Ok(())
}

pub fn run(tokens: &[String]) -> CliResult<()> {
    let Some(sub) = tokens.first() else {
        println!("{HELP}");
        return Err(CliError::usage("eval: no subcommand"));
    };
    let args = Args::parse(&tokens[1..], &["help"])?;
    if args.has("help") {
        println!("{HELP}");
        return Ok(());
    }
    args.check_known(&["ckpt", "manifest", "split", "out", "config", "seed", "set"])?;
    let cfg = super::load_config(&args)?;
    match sub.as_str() {
        "parzen" => run_parzen(&args, &cfg),
        "emotion" => run_emotion(&args, &cfg),
        other => Err(CliError::usage(format!("eval: unknown subcommand {other:?}"))),
    }
}
