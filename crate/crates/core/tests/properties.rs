//! Property tests over the pure building blocks.

use affectsynth::codebook::{argmax_codes, softmax_grid, LogitGrid};
use affectsynth::palette::{palette_profile, quantize_pixel, BLACK, GRAY, WHITE};
use affectsynth::scorer::{ImageEmbedding, PromptEmbedding};
use affectsynth::stats::{mean_ci95, pearson};
use affectsynth::survey::{
    confusion_matrix, overall_accuracy, per_group_summary, EmotionAnswer, SurveyDataset, SurveyResponse,
};
use affectsynth::{enumerate_dataset, similarity_loss, Affect, Grouping, ImageBuffer};
use proptest::prelude::*;

fn logit_grid() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>)> {
    (1usize..4, 1usize..4, 2usize..7).prop_flat_map(|(r, c, k)| {
        (
            Just(r),
            Just(c),
            Just(k),
            prop::collection::vec(-1e3f64..1e3, r * c * k),
        )
    })
}

fn unit_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one((r, c, k, v) in logit_grid()) {
        let pg = softmax_grid(&LogitGrid::new(r, c, k, v).unwrap()).unwrap();
        for cell in pg.as_slice().chunks(k) {
            prop_assert!((cell.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(cell.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn argmax_ignores_per_cell_shift(
        (r, c, k, v) in (1usize..4, 1usize..4, 2usize..7).prop_flat_map(|(r, c, k)| {
            (Just(r), Just(c), Just(k), prop::collection::vec(-50i32..50, r * c * k))
        }),
        shifts in prop::collection::vec(-1000i32..1000, 9),
    ) {
        let base: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let shifted: Vec<f64> = base
            .chunks(k)
            .enumerate()
            .flat_map(|(cell, xs)| {
                let s = f64::from(shifts[cell]);
                xs.iter().map(move |x| x + s)
            })
            .collect();
        let a = argmax_codes(&LogitGrid::new(r, c, k, base).unwrap());
        let b = argmax_codes(&LogitGrid::new(r, c, k, shifted).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn similarity_is_symmetric_and_rotation_invariant(
        (a, b) in (2usize..12).prop_flat_map(|d| (unit_vector(d), unit_vector(d))),
        theta in -3.2f64..3.2,
        plane in (0usize..100, 0usize..100),
    ) {
        let ab = similarity_loss(&ImageEmbedding::new(a.clone()).unwrap(), &PromptEmbedding::new(b.clone()).unwrap());
        let ba = similarity_loss(&ImageEmbedding::new(b.clone()).unwrap(), &PromptEmbedding::new(a.clone()).unwrap());
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=2.0).contains(&ab));

        let d = a.len();
        let (i, j) = (plane.0 % d, (plane.0 % d + 1 + plane.1 % (d - 1)) % d);
        let rotate = |v: &[f64]| {
            let mut w = v.to_vec();
            w[i] = theta.cos() * v[i] - theta.sin() * v[j];
            w[j] = theta.sin() * v[i] + theta.cos() * v[j];
            w
        };
        let rot = similarity_loss(
            &ImageEmbedding::normalized(rotate(&a)).unwrap(),
            &PromptEmbedding::normalized(rotate(&b)).unwrap(),
        );
        prop_assert!((ab - rot).abs() < 1e-12);
    }

    #[test]
    fn palette_ignores_pixel_order(
        px in prop::collection::vec(prop::array::uniform3(0.0f64..=1.0), 1..200),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = px.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let img = |p: &[[f64; 3]]| ImageBuffer::new(1, p.len(), p.concat()).unwrap();
        let a = palette_profile(&img(&px), "a");
        let b = palette_profile(&img(&shuffled), "a");
        prop_assert_eq!(a.ratios, b.ratios);
        prop_assert!((a.ratios.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn pearson_affine_invariance(
        pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..40),
        a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        b in -5.0f64..5.0,
        c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        d in -5.0f64..5.0,
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(pearson(&xs, &ys).is_ok());
        let r = pearson(&xs, &ys).unwrap();
        let xs2: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
        let r2 = pearson(&xs2, &ys2).unwrap();
        prop_assert!((r2 - (a * c).signum() * r).abs() < 1e-9, "{} vs {}", r, r2);
    }
}

/// Integer-arithmetic oracle for channels that are multiples of 1/64.
fn quantize_oracle(r: i64, g: i64, b: i64) -> usize {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    if max == 0 || 100 * d < 15 * max {
        return if 100 * max >= 85 * 64 {
            WHITE
        } else if 100 * max <= 15 * 64 {
            BLACK
        } else {
            GRAY
        };
    }
    // hue in degrees times d
    let h = if max == r {
        (60 * (g - b)).rem_euclid(360 * d)
    } else if max == g {
        60 * (b - r) + 120 * d
    } else {
        60 * (r - g) + 240 * d
    };
    (((h + 15 * d).rem_euclid(360 * d)) / (30 * d)) as usize
}

#[test]
fn quantization_matches_oracle_on_full_grid() {
    for r in 0..=64i64 {
        for g in 0..=64i64 {
            for b in 0..=64i64 {
                let got = quantize_pixel(r as f64 / 64.0, g as f64 / 64.0, b as f64 / 64.0).unwrap();
                assert_eq!(got, quantize_oracle(r, g, b), "rgb = ({r}, {g}, {b})/64");
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    image: usize,
    answer: usize,
    quality: u8,
    novelty: u8,
}

fn rows() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec(
        (0usize..32, 0usize..6, 1u8..=5, 1u8..=5).prop_map(|(image, answer, quality, novelty)| Row {
            image,
            answer,
            quality,
            novelty,
        }),
        1..120,
    )
}

fn dataset(rows: &[Row], copies: usize) -> SurveyDataset {
    let mut responses = Vec::new();
    for copy in 0..copies {
        for (i, r) in rows.iter().enumerate() {
            let raw = match r.answer {
                0..=3 => Affect::ALL[r.answer].name(),
                4 => "awe",
                _ => "Mixed  Feelings",
            };
            responses.push(SurveyResponse {
                participant_id: format!("p{copy}_{i}"),
                image_index: r.image,
                answer: EmotionAnswer::parse(raw).unwrap(),
                quality: r.quality,
                novelty: r.novelty,
            });
        }
    }
    SurveyDataset::new(responses, enumerate_dataset()).unwrap()
}

proptest! {
    #[test]
    fn survey_tables_ignore_row_order(rows in rows(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let ds = dataset(&rows, 1);
        let mut responses = ds.responses().to_vec();
        responses.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = SurveyDataset::new(responses, enumerate_dataset()).unwrap();
        prop_assert_eq!(confusion_matrix(&ds), confusion_matrix(&shuffled));
        for g in [Grouping::Affect, Grouping::Genre] {
            let (a, b) = (per_group_summary(&ds, g), per_group_summary(&shuffled, g));
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.responses, y.responses);
                prop_assert_eq!(x.accuracy, y.accuracy);
                prop_assert_eq!(x.unique_answers, y.unique_answers);
                prop_assert!((x.quality.mean - y.quality.mean).abs() < 1e-12);
                prop_assert!((x.novelty.half_width - y.novelty.half_width).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn accuracy_views_agree(rows in rows()) {
        let ds = dataset(&rows, 1);
        let cm = confusion_matrix(&ds);
        let pct = cm.percentages();
        let summary = per_group_summary(&ds, Grouping::Affect);
        let mut weighted = 0.0;
        for s in &summary {
            let i = Affect::ALL.iter().position(|a| s.group.to_string() == a.to_string()).unwrap();
            prop_assert!((pct[i][i] - s.accuracy).abs() < 1e-9);
            weighted += s.accuracy * s.responses as f64;
        }
        prop_assert!((weighted / ds.len() as f64 - overall_accuracy(&ds)).abs() < 1e-9);
        for (i, row) in pct.iter().enumerate() {
            if cm.row_total(i) > 0 {
                prop_assert!((row.iter().sum::<f64>() - 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn intervals_shrink_with_replication(rows in rows()) {
        let widths: Vec<f64> = [1, 4, 16]
            .iter()
            .map(|&k| {
                let ds = dataset(&rows, k);
                let q: Vec<f64> = ds.responses().iter().map(|r| f64::from(r.quality)).collect();
                mean_ci95(&q).half_width
            })
            .collect();
        let varied = rows.iter().any(|r| r.quality != rows[0].quality);
        if varied {
            prop_assert!(widths[0] > widths[1] && widths[1] > widths[2], "{:?}", widths);
        } else {
            prop_assert!(widths.iter().all(|w| *w == 0.0));
        }
    }
}
