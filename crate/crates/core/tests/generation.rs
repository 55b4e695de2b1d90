//! Gradients, initialization, sampling and end-to-end generation runs.

use affectsynth::codebook::{decode_soft_with_tape, softmax_backward};
use affectsynth::optimizer::spec_seed;
use affectsynth::{
    argmax_codes, batch_generate, decode_hard, decode_soft, enumerate_dataset, init_logit_grid, run_generation,
    sample_codes, softmax_grid, AdamWConfig, Codebook, GenerationConfig, ImageBuffer, LogitGrid, ProbGrid,
    RelaxationMode, ScorerBackend, ToyScorer,
};

fn small_config(steps: usize, mode: RelaxationMode) -> GenerationConfig {
    GenerationConfig {
        optimizer: AdamWConfig {
            steps,
            ..AdamWConfig::default()
        },
        grid_rows: 2,
        grid_cols: 3,
        mode,
        ..GenerationConfig::default()
    }
}

fn soft_image(values: &[f64], cb: &Codebook) -> ImageBuffer {
    let lg = LogitGrid::new(2, 2, 4, values.to_vec()).unwrap();
    decode_soft(&softmax_grid(&lg).unwrap(), cb).unwrap()
}

#[test]
fn pixel_gradients_match_finite_differences() {
    let cb = Codebook::toy(4, 6, 3, 0.05, 1).unwrap();
    let logits = init_logit_grid(2, 2, 4, 1.0, 4).unwrap();
    let pg = softmax_grid(&logits).unwrap();
    let (img, tape) = decode_soft_with_tape(&pg, &cb).unwrap();
    let n = img.pixels().len();
    // a handful of single-pixel probes
    for pixel in [0, 7, n / 2, n - 1] {
        let mut seed_grad = vec![0.0; n];
        seed_grad[pixel] = 1.0;
        let grad = softmax_backward(&pg, &tape.backward(&cb, &seed_grad));
        let h = 1e-6;
        for i in 0..logits.as_slice().len() {
            let mut plus = logits.as_slice().to_vec();
            let mut minus = plus.clone();
            plus[i] += h;
            minus[i] -= h;
            let fd = (soft_image(&plus, &cb).pixels()[pixel] - soft_image(&minus, &cb).pixels()[pixel]) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() < 1e-7,
                "pixel {pixel}, logit {i}: {fd} vs {}",
                grad[i]
            );
        }
    }
}

#[test]
fn image_embedding_gradient_matches_finite_differences() {
    let scorer = ToyScorer::default();
    let pe = scorer.embed_text("A calm portrait").unwrap();
    let px: Vec<f64> = (0..6 * 6 * 3)
        .map(|i| 0.2 + 0.6 * ((i * 37 % 101) as f64 / 101.0))
        .collect();
    let img = ImageBuffer::new(6, 6, px.clone()).unwrap();
    let (_, grad) = scorer.loss_and_pixel_grad(&img, &pe).unwrap();
    let loss = |p: Vec<f64>| {
        let ie = scorer.embed_image(&ImageBuffer::new(6, 6, p).unwrap()).unwrap();
        affectsynth::similarity_loss(&ie, &pe)
    };
    let h = 1e-6;
    for i in (0..px.len()).step_by(5) {
        let mut plus = px.clone();
        let mut minus = px.clone();
        plus[i] += h;
        minus[i] -= h;
        let fd = (loss(plus) - loss(minus)) / (2.0 * h);
        let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
        assert!(rel < 1e-5, "pixel {i}: {fd} vs {}", grad[i]);
    }
}

/// Standard normal draws from Box-Muller over a separate generator.
fn box_muller(n: usize, mut state: u64) -> Vec<f64> {
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let (u, v) = (next(), next());
            (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
        })
        .collect()
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn within_one_sd(xs: &[f64]) -> f64 {
    xs.iter().filter(|x| x.abs() < 1.0).count() as f64 / xs.len() as f64
}

#[test]
fn init_statistics_match_a_standard_normal() {
    let lg = init_logit_grid(16, 16, 1024, 1.0, 0).unwrap();
    let (mean, sd) = moments(lg.as_slice());
    assert!(mean.abs() < 0.01, "mean {mean}");
    assert!((sd - 1.0).abs() < 0.02, "sd {sd}");

    let oracle = box_muller(lg.as_slice().len(), 99);
    let (om, osd) = moments(&oracle);
    assert!((mean - om).abs() < 0.02 && (sd - osd).abs() < 0.02);
    assert!((within_one_sd(lg.as_slice()) - within_one_sd(&oracle)).abs() < 0.01);

    let scaled = init_logit_grid(4, 4, 64, 0.5, 3).unwrap();
    let (_, sd) = moments(scaled.as_slice());
    assert!((sd - 0.5).abs() < 0.05);
}

#[test]
fn sampling_concentrates_on_degenerate_cells() {
    let pg = ProbGrid::new(1, 2, 3, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    for seed in 0..200 {
        assert_eq!(sample_codes(&pg, seed).as_slice(), &[0, 2]);
    }
}

#[test]
fn trajectories_stay_finite() {
    let cb = Codebook::toy(8, 8, 4, 0.5, 2).unwrap();
    let scorer = ToyScorer::default();
    for seed in 0..50u64 {
        let mode = if seed % 2 == 0 {
            RelaxationMode::Soft
        } else {
            RelaxationMode::StraightThrough
        };
        let mut cfg = small_config(25, mode);
        cfg.optimizer.learning_rate = [0.01, 0.1, 1.0][seed as usize % 3];
        cfg.init_std = [0.1, 1.0, 5.0][seed as usize % 3];
        let r = run_generation("A depressed cityscape", &cb, &scorer, &cfg, seed).unwrap();
        assert_eq!(r.loss_trajectory.len(), 26);
        assert!(r
            .loss_trajectory
            .iter()
            .all(|l| l.is_finite() && (0.0..=2.0).contains(l)));
        assert!(r.final_logits.as_slice().iter().all(|x| x.is_finite()));
    }
}

#[test]
fn zero_steps_returns_the_initial_argmax_image() {
    let cb = Codebook::toy(5, 4, 4, 0.3, 0).unwrap();
    let cfg = small_config(0, RelaxationMode::Soft);
    let r = run_generation("An angry landscape", &cb, &ToyScorer::default(), &cfg, 9).unwrap();
    assert_eq!(r.loss_trajectory.len(), 1);
    let expected = decode_hard(&argmax_codes(&r.final_logits), &cb).unwrap();
    assert_eq!(r.final_image, expected);
}

#[test]
fn reruns_are_bit_identical() {
    let cb = Codebook::toy(6, 4, 4, 0.3, 0).unwrap();
    let scorer = ToyScorer::default();
    for mode in [RelaxationMode::Soft, RelaxationMode::StraightThrough] {
        let cfg = small_config(15, mode);
        let a = run_generation("A happy portrait", &cb, &scorer, &cfg, 3).unwrap();
        let b = run_generation("A happy portrait", &cb, &scorer, &cfg, 3).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn batch_results_do_not_depend_on_order_or_workers() {
    let cb = Codebook::toy(6, 4, 4, 0.3, 0).unwrap();
    let scorer = ToyScorer::default();
    let cfg = small_config(5, RelaxationMode::Soft);
    let specs = enumerate_dataset();
    let forward: Vec<_> = batch_generate(&specs, &cb, &scorer, &cfg, 17, Some(1))
        .unwrap()
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let mut reversed_specs = specs.clone();
    reversed_specs.reverse();
    let reversed: Vec<_> = batch_generate(&reversed_specs, &cb, &scorer, &cfg, 17, Some(4))
        .unwrap()
        .into_iter()
        .map(Result::unwrap)
        .collect();
    for (spec, r) in reversed_specs.iter().zip(&reversed) {
        assert_eq!(r, &forward[spec.index]);
    }
    let seeds: std::collections::BTreeSet<u64> = forward.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 32);

    let single = run_generation(&specs[5].text, &cb, &scorer, &cfg, spec_seed(17, 5)).unwrap();
    let one = batch_generate(&specs[5..6], &cb, &scorer, &cfg, 17, None).unwrap();
    assert_eq!(one[0].as_ref().unwrap(), &single);
}

#[test]
fn empty_batch_is_rejected() {
    let cb = Codebook::toy(4, 4, 4, 0.3, 0).unwrap();
    let cfg = small_config(1, RelaxationMode::Soft);
    assert!(batch_generate(&[], &cb, &ToyScorer::default(), &cfg, 0, None).is_err());
}
