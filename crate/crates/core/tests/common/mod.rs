//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use affectsynth::{enumerate_dataset, Affect};

/// Answer counts per intended affect (rows) over anger, calmness,
/// depression, happiness and a freeform answer (columns). 400 responses per
/// row; the rounded row percentages give `TARGET_PERCENT`.
pub const TARGET_COUNTS: [[usize; 5]; 4] = [
    [259, 11, 39, 15, 76],
    [8, 248, 60, 32, 52],
    [8, 44, 272, 4, 72],
    [16, 96, 44, 144, 100],
];

pub const TARGET_PERCENT: [[u32; 5]; 4] = [
    [65, 3, 10, 4, 19],
    [2, 62, 15, 8, 13],
    [2, 11, 68, 1, 18],
    [4, 24, 11, 36, 25],
];

pub const TARGET_ACCURACY: [u32; 4] = [65, 62, 68, 36];

const FREEFORM: [&str; 4] = ["fear", "Nostalgia", "awe", "  mixed   feelings "];

pub fn csv_header() -> String {
    "participant_id,image_index,emotion_answer,quality,novelty\n".to_owned()
}

/// 50 participants each rate all 32 images. Within an affect row the answers
/// are dealt out in column order, 50 per image.
pub fn target_survey_csv() -> String {
    let specs = enumerate_dataset();
    let mut out = csv_header();
    for affect in Affect::ALL {
        let images: Vec<usize> = specs.iter().filter(|s| s.affect == affect).map(|s| s.index).collect();
        let mut answers = Vec::new();
        for (col, &count) in TARGET_COUNTS[affect.position()].iter().enumerate() {
            for k in 0..count {
                answers.push(match col {
                    0..=3 => Affect::ALL[col].name().to_owned(),
                    _ => FREEFORM[k % FREEFORM.len()].to_owned(),
                });
            }
        }
        assert_eq!(answers.len(), 400);
        for (k, answer) in answers.iter().enumerate() {
            let image = images[k / 50];
            let quality = (k * 7 + affect.position()) % 5 + 1;
            let novelty = (k * 3 + 1) % 5 + 1;
            out.push_str(&format!("p{:02},{image},\"{answer}\",{quality},{novelty}\n", k % 50));
        }
    }
    out
}

/// Four raters per image. Images 0..10 are named correctly by all raters,
/// 10..21 by exactly two (a tie, which counts as matched), the rest by one.
pub fn majority_survey_csv() -> String {
    let specs = enumerate_dataset();
    let mut out = csv_header();
    for spec in &specs {
        let hits = match spec.index {
            0..=9 => 4,
            10..=20 => 2,
            _ => 1,
        };
        let wrong = Affect::ALL[(spec.affect.position() + 1) % 4];
        for rater in 0..4 {
            let answer = if rater < hits { spec.affect.name() } else { wrong.name() };
            out.push_str(&format!("r{rater},{},{answer},3,3\n", spec.index));
        }
    }
    out
}

/// Rounds half away from zero, independent of the library's rounding.
pub fn round_pct(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}
