//! Rater responses and the tables computed from them.
//!
//! Input is a UTF-8 CSV with the header
//! `participant_id,image_index,emotion_answer,quality,novelty`. Answers that
//! match one of the four emotion names (case-insensitively) are canonical;
//! anything else is kept as a freeform answer and counts as "Other".

mod analysis;
mod tables;

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompts::{enumerate_dataset, Affect, PromptSpec};

pub use analysis::{
    confusion_matrix, images_majority_matched, overall_accuracy, per_group_summary, valence_arousal_summary,
    ConfusionMatrix, GroupSummary, OtherRule, ValenceArousalSummary,
};
pub use tables::{confusion_csv, confusion_text, summary_csv, summary_text, valence_arousal_csv, valence_arousal_text};

pub const SURVEY_HEADER: [&str; 5] = ["participant_id", "image_index", "emotion_answer", "quality", "novelty"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmotionAnswer {
    Canonical(Affect),
    Freeform { original: String, normalized: String },
}

impl EmotionAnswer {
    pub fn parse(raw: &str) -> Option<Self> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return None;
        }
        Some(match Affect::parse(trimmed) {
            Some(a) => EmotionAnswer::Canonical(a),
            None => EmotionAnswer::Freeform {
                original: raw.to_owned(),
                normalized: trimmed
                    .split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
                    .join(" "),
            },
        })
    }

    pub fn affect(&self) -> Option<Affect> {
        match self {
            EmotionAnswer::Canonical(a) => Some(*a),
            EmotionAnswer::Freeform { .. } => None,
        }
    }

    /// Key used when counting distinct answers.
    pub fn normalized(&self) -> &str {
        match self {
            EmotionAnswer::Canonical(a) => a.name(),
            EmotionAnswer::Freeform { normalized, .. } => normalized,
        }
    }

    pub fn original(&self) -> &str {
        match self {
            EmotionAnswer::Canonical(a) => a.name(),
            EmotionAnswer::Freeform { original, .. } => original,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyResponse {
    pub participant_id: String,
    pub image_index: usize,
    pub answer: EmotionAnswer,
    pub quality: u8,
    pub novelty: u8,
}

/// Validated responses together with the prompt behind each image.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyDataset {
    responses: Vec<SurveyResponse>,
    prompts: BTreeMap<usize, PromptSpec>,
}

fn likert(field: &str, raw: &str, row: usize) -> Result<u8> {
    match raw.trim().parse::<u8>() {
        Ok(v) if (1..=5).contains(&v) => Ok(v),
        _ => Err(Error::SurveyRow {
            row,
            message: format!("{field} must be an integer 1-5, got {raw:?}"),
        }),
    }
}

impl SurveyDataset {
    /// Checks Likert bounds, image indices and (participant, image)
    /// uniqueness. Row numbers in errors are 1-based positions in
    /// `responses`.
    pub fn new(responses: Vec<SurveyResponse>, prompts: Vec<PromptSpec>) -> Result<Self> {
        let prompts: BTreeMap<usize, PromptSpec> = prompts.into_iter().map(|p| (p.index, p)).collect();
        let mut seen: HashMap<(&str, usize), usize> = HashMap::new();
        for (i, r) in responses.iter().enumerate() {
            let row = i + 1;
            Self::check_response(r, &prompts, row)?;
            if let Some(first) = seen.insert((&r.participant_id, r.image_index), row) {
                return Err(duplicate(r, first, row));
            }
        }
        Ok(Self { responses, prompts })
    }

    fn check_response(r: &SurveyResponse, prompts: &BTreeMap<usize, PromptSpec>, row: usize) -> Result<()> {
        let bad = |message: String| Error::SurveyRow { row, message };
        if !prompts.contains_key(&r.image_index) {
            return Err(bad(format!("unknown image_index {}", r.image_index)));
        }
        if !(1..=5).contains(&r.quality) {
            return Err(bad(format!("quality must be 1-5, got {}", r.quality)));
        }
        if !(1..=5).contains(&r.novelty) {
            return Err(bad(format!("novelty must be 1-5, got {}", r.novelty)));
        }
        if r.answer.normalized().is_empty() {
            return Err(bad("emotion_answer is empty".into()));
        }
        Ok(())
    }

    /// Parses survey CSV. Row numbers in errors are file line numbers (the
    /// header is line 1).
    pub fn from_csv_reader(reader: impl Read, prompts: Vec<PromptSpec>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let found: Vec<&str> = header.iter().map(str::trim).collect();
        if found != SURVEY_HEADER {
            return Err(Error::SurveyHeader {
                expected: SURVEY_HEADER.join(","),
                found: found.join(","),
            });
        }
        let prompt_map: BTreeMap<usize, PromptSpec> = prompts.iter().map(|p| (p.index, p.clone())).collect();
        let mut responses = Vec::new();
        let mut seen: HashMap<(String, usize), usize> = HashMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != SURVEY_HEADER.len() {
                return Err(Error::SurveyRow {
                    row,
                    message: format!("expected {} fields, found {}", SURVEY_HEADER.len(), rec.len()),
                });
            }
            let image_index = rec[1].trim().parse::<usize>().map_err(|_| Error::SurveyRow {
                row,
                message: format!("image_index {:?} is not a non-negative integer", &rec[1]),
            })?;
            let answer = EmotionAnswer::parse(&rec[2]).ok_or_else(|| Error::SurveyRow {
                row,
                message: "emotion_answer is empty".into(),
            })?;
            let r = SurveyResponse {
                participant_id: rec[0].trim().to_owned(),
                image_index,
                answer,
                quality: likert("quality", &rec[3], row)?,
                novelty: likert("novelty", &rec[4], row)?,
            };
            Self::check_response(&r, &prompt_map, row)?;
            if let Some(first) = seen.insert((r.participant_id.clone(), image_index), row) {
                return Err(duplicate(&r, first, row));
            }
            responses.push(r);
        }
        Ok(Self {
            responses,
            prompts: prompt_map,
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SURVEY_HEADER)?;
        for r in &self.responses {
            w.write_record([
                r.participant_id.as_str(),
                &r.image_index.to_string(),
                r.answer.original(),
                &r.quality.to_string(),
                &r.novelty.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn responses(&self) -> &[SurveyResponse] {
        &self.responses
    }

    pub fn prompts(&self) -> impl Iterator<Item = &PromptSpec> {
        self.prompts.values()
    }

    pub fn prompt(&self, image_index: usize) -> &PromptSpec {
        &self.prompts[&image_index]
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    /// Mean quality and novelty rating per image, for images with responses.
    pub fn per_image_ratings(&self) -> BTreeMap<usize, (f64, f64)> {
        let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
        for r in &self.responses {
            let e = acc.entry(r.image_index).or_default();
            e.0 += f64::from(r.quality);
            e.1 += f64::from(r.novelty);
            e.2 += 1;
        }
        acc.into_iter()
            .map(|(k, (q, n, c))| (k, (q / c as f64, n / c as f64)))
            .collect()
    }
}

fn duplicate(r: &SurveyResponse, first: usize, row: usize) -> Error {
    Error::SurveyRow {
        row,
        message: format!(
            "duplicate response from participant {:?} for image {} (first seen at row {first})",
            r.participant_id, r.image_index
        ),
    }
}

/// Loads a survey against the standard 32-prompt enumeration.
pub fn load_survey(path: impl AsRef<Path>) -> Result<SurveyDataset> {
    load_survey_with_prompts(path, enumerate_dataset())
}

pub fn load_survey_with_prompts(path: impl AsRef<Path>, prompts: Vec<PromptSpec>) -> Result<SurveyDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::File {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    SurveyDataset::from_csv_reader(std::io::BufReader::new(file), prompts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "participant_id,image_index,emotion_answer,quality,novelty\n";

    fn parse(body: &str) -> Result<SurveyDataset> {
        SurveyDataset::from_csv_reader(format!("{HEADER}{body}").as_bytes(), enumerate_dataset())
    }

    #[test]
    fn two_rows() {
        let ds = parse("p1,0,Anger,3,4\np2,0,  Nostalgia ,5,1\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.responses()[0].answer, EmotionAnswer::Canonical(Affect::Anger));
        assert_eq!(ds.responses()[1].answer.normalized(), "nostalgia");
        assert_eq!(ds.responses()[1].answer.original(), "  Nostalgia ");
    }

    #[test]
    fn likert_out_of_range_names_row() {
        let err = parse("p1,0,anger,3,4\np2,1,anger,6,4\n").unwrap_err();
        match err {
            Error::SurveyRow { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("quality"));
            }
            e => panic!("{e}"),
        }
        assert!(parse("p1,0,anger,3,0\n").is_err());
        assert!(parse("p1,0,anger,three,1\n").is_err());
    }

    #[test]
    fn duplicates_and_unknown_images() {
        let err = parse("p1,0,anger,3,4\np1,0,calmness,3,4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("row 2"), "{msg}");
        assert!(matches!(
            parse("p1,32,anger,3,4\n"),
            Err(Error::SurveyRow { row: 2, .. })
        ));
        assert!(parse("p1,0,,3,4\n").is_err());
        assert!(parse("p1,0,anger,3\n").is_err());
    }

    #[test]
    fn bad_header() {
        let err = SurveyDataset::from_csv_reader("a,b,c\n1,2,3\n".as_bytes(), enumerate_dataset()).unwrap_err();
        assert!(err
            .to_string()
            .contains("participant_id,image_index,emotion_answer,quality,novelty"));
    }

    #[test]
    fn csv_roundtrip() {
        let ds = parse("p1,0,Anger,3,4\np2,5,\"fear, mostly\",5,1\n").unwrap();
        let again = SurveyDataset::from_csv_reader(ds.to_csv().unwrap().as_bytes(), enumerate_dataset()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn constructor_validates() {
        let r = |p: &str, q| SurveyResponse {
            participant_id: p.into(),
            image_index: 0,
            answer: EmotionAnswer::Canonical(Affect::Anger),
            quality: q,
            novelty: 3,
        };
        assert!(SurveyDataset::new(vec![r("a", 3), r("b", 3)], enumerate_dataset()).is_ok());
        assert!(SurveyDataset::new(vec![r("a", 3), r("a", 3)], enumerate_dataset()).is_err());
        assert!(SurveyDataset::new(vec![r("a", 7)], enumerate_dataset()).is_err());
    }
}
