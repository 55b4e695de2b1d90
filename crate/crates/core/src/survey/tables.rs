//! CSV and aligned plain-text renderings of the survey tables.

use std::fmt::Write as _;

use super::analysis::{ConfusionMatrix, GroupSummary, ValenceArousalSummary};
use crate::error::Result;
use crate::prompts::{Affect, Grouping};

const COLUMNS: [&str; 5] = ["Anger", "Calmness", "Depression", "Happiness", "Other"];

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

/// Rounded row percentages under the same layout as the printed table.
pub fn confusion_text(m: &ConfusionMatrix) -> String {
    let mut out = format!("{:<12}", "");
    for c in COLUMNS {
        let _ = write!(out, "{c:>12}");
    }
    out.push('\n');
    for (affect, row) in Affect::ALL.iter().zip(m.rounded()) {
        let _ = write!(out, "{:<12}", affect.to_string());
        for v in row {
            let _ = write!(out, "{:>12}", format!("{v}%"));
        }
        out.push('\n');
    }
    out
}

/// Unrounded percentages plus the raw count per row.
pub fn confusion_csv(m: &ConfusionMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "intended",
        "anger",
        "calmness",
        "depression",
        "happiness",
        "other",
        "responses",
    ])?;
    for (i, (affect, row)) in Affect::ALL.iter().zip(m.percentages()).enumerate() {
        let mut rec = vec![affect.name().to_owned()];
        rec.extend(row.iter().map(f64::to_string));
        rec.push(m.row_total(i).to_string());
        w.write_record(rec)?;
    }
    finish(w)
}

fn first_column(grouping: Grouping) -> &'static str {
    match grouping {
        Grouping::Affect => "Affective prompt",
        Grouping::Genre => "Genre prompt",
    }
}

pub fn summary_text(rows: &[GroupSummary], grouping: Grouping) -> String {
    let mut out = format!(
        "{:<20}{:>10}{:>13}{:>12}{:>12}\n",
        first_column(grouping),
        "accuracy",
        "un. answers",
        "quality",
        "novelty"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<20}{:>10}{:>13.1}{:>12}{:>12}",
            r.group.to_string(),
            format!("{:.0}%", r.accuracy),
            r.unique_answers,
            r.quality.to_string(),
            r.novelty.to_string()
        );
    }
    out
}

pub fn summary_csv(rows: &[GroupSummary], grouping: Grouping) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        match grouping {
            Grouping::Affect => "affect",
            Grouping::Genre => "genre",
        },
        "responses",
        "images",
        "accuracy",
        "unique_answers",
        "quality_mean",
        "quality_ci95",
        "novelty_mean",
        "novelty_ci95",
    ])?;
    for r in rows {
        w.write_record([
            r.group.to_string(),
            r.responses.to_string(),
            r.images.to_string(),
            r.accuracy.to_string(),
            r.unique_answers.to_string(),
            r.quality.mean.to_string(),
            r.quality.half_width.to_string(),
            r.novelty.mean.to_string(),
            r.novelty.half_width.to_string(),
        ])?;
    }
    finish(w)
}

pub fn valence_arousal_text(s: &ValenceArousalSummary) -> String {
    format!(
        "valence: low {:.2}%  high {:.2}%  overall {:.2}%\narousal: low {:.2}%  high {:.2}%  overall {:.2}%\n",
        s.low_valence, s.high_valence, s.valence, s.low_arousal, s.high_arousal, s.arousal
    )
}

pub fn valence_arousal_csv(s: &ValenceArousalSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["axis", "low", "high", "overall"])?;
    w.write_record([
        "valence".to_owned(),
        s.low_valence.to_string(),
        s.high_valence.to_string(),
        s.valence.to_string(),
    ])?;
    w.write_record([
        "arousal".to_owned(),
        s.low_arousal.to_string(),
        s.high_arousal.to_string(),
        s.arousal.to_string(),
    ])?;
    finish(w)
}
