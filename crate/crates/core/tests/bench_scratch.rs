use lipsyn_core::dataset::*;
use lipsyn_core::eval::*;
use lipsyn_core::matrix::Matrix;
use lipsyn_core::rng::SeededRng;
use lipsyn_core::synth::{synthesize, SynthesisMode, SynthesisRequest};
use lipsyn_core::train::*;

fn pooled_frames(corpus: &Corpus, idx: &[usize]) -> Matrix {
    let total: usize = idx.iter().map(|&i| corpus.utterances[i].motion.len()).sum();
    let mut m = Matrix::zeros(total, 45);
    let mut r = 0;
    for &i in idx {
        let u = &corpus.utterances[i];
        for t in 0..u.motion.len() { m.row_mut(r).copy_from_slice(u.motion.frames().row(t)); r += 1; }
    }
    m
}
fn gen_frames(corpus: &Corpus, idx: &[usize], ckpt: &lipsyn_core::nets::Checkpoint) -> Matrix {
    let total: usize = idx.iter().map(|&i| corpus.utterances[i].motion.len()).sum();
    let mut m = Matrix::zeros(total, 45);
    let mut r = 0;
    for &i in idx {
        let u = &corpus.utterances[i];
        let req = SynthesisRequest { checkpoint: ckpt, features: &u.features, noise_seed: 1000 + i as u64, emotion: None, mode: SynthesisMode::FullSequence };
        let g = synthesize(&req).unwrap();
        for t in 0..g.len() { m.row_mut(r).copy_from_slice(g.frames().row(t)); r += 1; }
    }
    m
}
fn loglik_of(real_train: &Matrix, generated: &Matrix, real_test: &Matrix) -> f64 {
    let pca = fit_pca(real_train, 15).unwrap();
    let support = pca.project(generated).unwrap();
    let grid = default_bandwidth_grid(&support, 10);
    let model = fit_parzen(&support, &grid, 5).unwrap();
    loglik(&model, &pca.project(real_test).unwrap()).unwrap().0
}

#[test]
fn bench() {
    let mut spec = SynthSpec::new(60, 27, 42);
    spec.emotion_gains = default_emotion_gains(42, 0.35);
    spec.noise_sd = 0.25;
    let corpus = generate_synthetic(&spec).unwrap();
    let split = split_corpus(&corpus, (0.6, 0.2, 0.2), 42).unwrap();
    let train_part = corpus.subset(&split.train);
    let real_train = pooled_frames(&corpus, &split.train);
    let real_test = pooled_frames(&corpus, &split.test);

    let schedule = ScheduleSpec {
        pretrain_g_epochs: 70, pretrain_d_epochs: 10, adversarial_epochs: 4,
        baseline_epochs: 70, batch: 32, hop: 35, g_hidden: 16, d_hidden: 12, lr: 3e-3,
        ..ScheduleSpec::default()
    };
    for seed in [1u64, 2, 3] {
        let ccc = train_baseline(BaselineKind::BlstmCcc, &corpus, &split, &schedule, SeededRng::new(seed)).unwrap();
        let ll_ccc = loglik_of(&real_train, &gen_frames(&corpus, &split.test, &ccc.checkpoint), &real_test);
        let mse = train_baseline(BaselineKind::BlstmMse, &corpus, &split, &schedule, SeededRng::new(seed + 10)).unwrap();
        let ll_mse = loglik_of(&real_train, &gen_frames(&corpus, &split.test, &mse.checkpoint), &real_test);

        let mut tr = CsgTrainer::new(27, &schedule, 10, false, SeededRng::new(seed + 20)).unwrap();
        tr.run_epochs(&train_part, schedule.pretrain_g_epochs + schedule.pretrain_d_epochs).unwrap();
        let pre = tr.snapshot();
        let ll_pre = loglik_of(&real_train, &gen_frames(&corpus, &split.test, &pre), &real_test);
        tr.adam_g.lr = 1e-4;
        tr.adam_d.lr = 1e-4;
        tr.run_to_completion(&train_part).unwrap();
        let ck = tr.finish();
        let ll_csg = loglik_of(&real_train, &gen_frames(&corpus, &split.test, &ck), &real_test);
        println!("seed {seed}: mse={ll_mse:.3} ccc={ll_ccc:.3} csg-pre={ll_pre:.3} csg={ll_csg:.3}  csg>=ccc: {}", ll_csg >= ll_ccc);
    }
    panic!("bench done");
}
