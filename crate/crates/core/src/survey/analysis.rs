use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SurveyDataset;
use crate::prompts::{Affect, GroupKey, Grouping};
use crate::stats::{mean_ci95, MeanCi};

/// Column index of "Other" in the confusion matrix.
pub const OTHER: usize = 4;

/// Intended affect (rows) against answered affect (columns, plus Other).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 5]; 4],
}

impl ConfusionMatrix {
    pub fn row_total(&self, row: usize) -> usize {
        self.counts[row].iter().sum()
    }

    /// Row percentages; an empty row is all zeros.
    pub fn percentages(&self) -> [[f64; 5]; 4] {
        let mut out = [[0.0; 5]; 4];
        for (row, o) in out.iter_mut().enumerate() {
            let n = self.row_total(row);
            if n > 0 {
                for (col, v) in o.iter_mut().enumerate() {
                    *v = 100.0 * self.counts[row][col] as f64 / n as f64;
                }
            }
        }
        out
    }

    /// Percentages rounded half away from zero.
    pub fn rounded(&self) -> [[u32; 5]; 4] {
        self.percentages().map(|row| row.map(|v| v.round() as u32))
    }
}

pub fn confusion_matrix(ds: &SurveyDataset) -> ConfusionMatrix {
    let mut counts = [[0usize; 5]; 4];
    for r in ds.responses() {
        let row = ds.prompt(r.image_index).affect.position();
        let col = r.answer.affect().map_or(OTHER, Affect::position);
        counts[row][col] += 1;
    }
    ConfusionMatrix { counts }
}

/// One line of the per-affect or per-genre table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: GroupKey,
    pub responses: usize,
    pub images: usize,
    /// Percentage of responses naming the intended affect.
    pub accuracy: f64,
    /// Distinct normalized answers per image, averaged over the group's images.
    pub unique_answers: f64,
    pub quality: MeanCi,
    pub novelty: MeanCi,
}

/// Summary per affect or genre. Groups without responses are omitted.
///
/// Confidence intervals are taken over individual ratings, so `n` is
/// raters × images.
pub fn per_group_summary(ds: &SurveyDataset, grouping: Grouping) -> Vec<GroupSummary> {
    grouping
        .keys()
        .into_iter()
        .filter_map(|key| {
            let members: Vec<_> = ds
                .responses()
                .iter()
                .filter(|r| key.matches(ds.prompt(r.image_index)))
                .collect();
            if members.is_empty() {
                return None;
            }
            let correct = members
                .iter()
                .filter(|r| r.answer.affect() == Some(ds.prompt(r.image_index).affect))
                .count();
            let mut distinct: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
            for r in &members {
                distinct.entry(r.image_index).or_default().insert(r.answer.normalized());
            }
            let unique_answers = distinct.values().map(|s| s.len() as f64).sum::<f64>() / distinct.len() as f64;
            let quality: Vec<f64> = members.iter().map(|r| f64::from(r.quality)).collect();
            let novelty: Vec<f64> = members.iter().map(|r| f64::from(r.novelty)).collect();
            Some(GroupSummary {
                group: key,
                responses: members.len(),
                images: distinct.len(),
                accuracy: 100.0 * correct as f64 / members.len() as f64,
                unique_answers,
                quality: mean_ci95(&quality),
                novelty: mean_ci95(&novelty),
            })
        })
        .collect()
}

/// Percentage of all responses naming the intended affect.
pub fn overall_accuracy(ds: &SurveyDataset) -> f64 {
    let correct = ds
        .responses()
        .iter()
        .filter(|r| r.answer.affect() == Some(ds.prompt(r.image_index).affect))
        .count();
    100.0 * correct as f64 / ds.len() as f64
}

/// How freeform ("Other") answers enter valence/arousal accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtherRule {
    /// Other answers stay in the denominator and count as misses.
    #[default]
    CountAsIncorrect,
    /// Only answers naming one of the four emotions are considered.
    Exclude,
}

/// Accuracy (percent) of recovering the intended valence and arousal.
///
/// `low_valence` is computed over prompts with negative valence (anger,
/// depression), `high_valence` over positive ones, and likewise for arousal.
/// Fields are NaN when their denominator is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValenceArousalSummary {
    pub rule: OtherRule,
    pub low_valence: f64,
    pub high_valence: f64,
    pub valence: f64,
    pub low_arousal: f64,
    pub high_arousal: f64,
    pub arousal: f64,
}

pub fn valence_arousal_summary(ds: &SurveyDataset, rule: OtherRule) -> ValenceArousalSummary {
    // [hit, total] indexed by [negative/low, positive/high]
    let mut valence = [[0usize; 2]; 2];
    let mut arousal = [[0usize; 2]; 2];
    for r in ds.responses() {
        let intended = ds.prompt(r.image_index).affect;
        let answered = r.answer.affect();
        if answered.is_none() && rule == OtherRule::Exclude {
            continue;
        }
        let v = intended.valence() as usize;
        let a = intended.arousal() as usize;
        valence[v][1] += 1;
        arousal[a][1] += 1;
        if let Some(ans) = answered {
            valence[v][0] += usize::from(ans.valence() == intended.valence());
            arousal[a][0] += usize::from(ans.arousal() == intended.arousal());
        }
    }
    let pct = |hit: usize, total: usize| {
        if total == 0 {
            f64::NAN
        } else {
            100.0 * hit as f64 / total as f64
        }
    };
    ValenceArousalSummary {
        rule,
        low_valence: pct(valence[0][0], valence[0][1]),
        high_valence: pct(valence[1][0], valence[1][1]),
        valence: pct(valence[0][0] + valence[1][0], valence[0][1] + valence[1][1]),
        low_arousal: pct(arousal[0][0], arousal[0][1]),
        high_arousal: pct(arousal[1][0], arousal[1][1]),
        arousal: pct(arousal[0][0] + arousal[1][0], arousal[0][1] + arousal[1][1]),
    }
}

/// Percentage of images (with at least one response) whose intended affect
/// was named by at least half of their raters.
pub fn images_majority_matched(ds: &SurveyDataset) -> f64 {
    let mut per_image: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in ds.responses() {
        let e = per_image.entry(r.image_index).or_default();
        e.1 += 1;
        if r.answer.affect() == Some(ds.prompt(r.image_index).affect) {
            e.0 += 1;
        }
    }
    let matched = per_image.values().filter(|(hit, n)| 2 * hit >= *n).count();
    100.0 * matched as f64 / per_image.len() as f64
}

#[cfg(test)]
mod tests {
    use super::super::{EmotionAnswer, SurveyResponse};
    use super::*;
    use crate::prompts::{enumerate_dataset, Genre};

    fn resp(p: usize, image: usize, answer: &str, q: u8) -> SurveyResponse {
        SurveyResponse {
            participant_id: format!("p{p}"),
            image_index: image,
            answer: EmotionAnswer::parse(answer).unwrap(),
            quality: q,
            novelty: 3,
        }
    }

    fn all_correct(participants: usize) -> SurveyDataset {
        let specs = enumerate_dataset();
        let responses = (0..participants)
            .flat_map(|p| specs.iter().map(move |s| resp(p, s.index, s.affect.name(), 3)))
            .collect();
        SurveyDataset::new(responses, enumerate_dataset()).unwrap()
    }

    #[test]
    fn identity_matrix() {
        let ds = all_correct(3);
        let m = confusion_matrix(&ds);
        for (i, row) in m.rounded().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 100 } else { 0 });
            }
        }
        for s in per_group_summary(&ds, Grouping::Affect) {
            assert_eq!(s.accuracy, 100.0);
            assert_eq!(s.unique_answers, 1.0);
            assert_eq!(s.quality.mean, 3.0);
            assert_eq!(s.quality.half_width, 0.0);
        }
        let va = valence_arousal_summary(&ds, OtherRule::CountAsIncorrect);
        assert_eq!((va.valence, va.arousal), (100.0, 100.0));
        assert_eq!(images_majority_matched(&ds), 100.0);
        assert_eq!(overall_accuracy(&ds), 100.0);
    }

    #[test]
    fn single_response() {
        let ds = SurveyDataset::new(vec![resp(0, 1, "fear", 2)], enumerate_dataset()).unwrap();
        let m = confusion_matrix(&ds);
        // image 1 is calmness
        assert_eq!(m.rounded()[1], [0, 0, 0, 0, 100]);
        assert_eq!(m.row_total(0), 0);
        let groups = per_group_summary(&ds, Grouping::Genre);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].group, GroupKey::Genre(Genre::Abstract));
        assert_eq!(groups[0].accuracy, 0.0);
        assert_eq!(images_majority_matched(&ds), 0.0);
    }

    #[test]
    fn same_valence_other_arousal() {
        // answer the emotion sharing valence but not arousal
        let swap = |a: Affect| match a {
            Affect::Anger => Affect::Depression,
            Affect::Depression => Affect::Anger,
            Affect::Calmness => Affect::Happiness,
            Affect::Happiness => Affect::Calmness,
        };
        let responses = enumerate_dataset()
            .iter()
            .map(|s| resp(0, s.index, swap(s.affect).name(), 3))
            .collect();
        let ds = SurveyDataset::new(responses, enumerate_dataset()).unwrap();
        let va = valence_arousal_summary(&ds, OtherRule::CountAsIncorrect);
        assert_eq!(va.valence, 100.0);
        assert_eq!(va.arousal, 0.0);
    }

    #[test]
    fn other_rule_changes_denominator() {
        // image 0 is anger: one depression answer, one freeform
        let ds = SurveyDataset::new(
            vec![resp(0, 0, "depression", 3), resp(1, 0, "awe", 3)],
            enumerate_dataset(),
        )
        .unwrap();
        let counted = valence_arousal_summary(&ds, OtherRule::CountAsIncorrect);
        let excluded = valence_arousal_summary(&ds, OtherRule::Exclude);
        assert_eq!(counted.low_valence, 50.0);
        assert_eq!(excluded.low_valence, 100.0);
        assert!(counted.high_valence.is_nan());
    }

    #[test]
    fn half_correct_counts_as_matched() {
        let specs = enumerate_dataset();
        let responses = specs
            .iter()
            .flat_map(|s| [resp(0, s.index, s.affect.name(), 3), resp(1, s.index, "meh", 3)])
            .collect();
        let ds = SurveyDataset::new(responses, specs).unwrap();
        assert_eq!(images_majority_matched(&ds), 100.0);
    }

    #[test]
    fn unique_answers_counts_freeform_strings() {
        // image 0: anger, "Fear", "fear " (same), "joy" -> 3 distinct
        // image 4 (calmness, cityscape) not in Abstract
        let ds = SurveyDataset::new(
            vec![
                resp(0, 0, "anger", 1),
                resp(1, 0, "Fear", 2),
                resp(2, 0, "fear ", 3),
                resp(3, 0, "joy", 4),
                resp(0, 1, "calmness", 5),
            ],
            enumerate_dataset(),
        )
        .unwrap();
        let g = per_group_summary(&ds, Grouping::Genre);
        assert_eq!(g[0].images, 2);
        assert_eq!(g[0].unique_answers, (3.0 + 1.0) / 2.0);
        assert_eq!(g[0].quality.mean, 3.0);
        assert_eq!(g[0].quality.n, 5);
    }
}
