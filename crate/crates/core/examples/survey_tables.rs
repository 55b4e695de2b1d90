//! Survey tables from a small synthetic response set.

use affectsynth::survey::{
    confusion_matrix, confusion_text, images_majority_matched, overall_accuracy, per_group_summary, summary_text,
    valence_arousal_summary, valence_arousal_text, EmotionAnswer, OtherRule, SurveyDataset, SurveyResponse,
};
use affectsynth::{enumerate_dataset, Affect, Grouping};

fn main() -> affectsynth::Result<()> {
    let specs = enumerate_dataset();
    let mut responses = Vec::new();
    for participant in 0..12 {
        for spec in &specs {
            // most raters name the intended emotion; some drift to a neighbour or a word of their own
            let raw = match (participant + spec.index) % 6 {
                0 => Affect::ALL[(spec.affect.position() + 1) % 4].name(),
                1 => "nostalgia",
                _ => spec.affect.name(),
            };
            responses.push(SurveyResponse {
                participant_id: format!("p{participant}"),
                image_index: spec.index,
                answer: EmotionAnswer::parse(raw).expect("non-empty"),
                quality: (1 + (participant + spec.index) % 5) as u8,
                novelty: (1 + (participant * 3 + spec.index) % 5) as u8,
            });
        }
    }
    let ds = SurveyDataset::new(responses, specs)?;

    print!("{}", confusion_text(&confusion_matrix(&ds)));
    println!();
    print!(
        "{}",
        summary_text(&per_group_summary(&ds, Grouping::Affect), Grouping::Affect)
    );
    println!();
    print!(
        "{}",
        summary_text(&per_group_summary(&ds, Grouping::Genre), Grouping::Genre)
    );
    println!();
    for rule in [OtherRule::CountAsIncorrect, OtherRule::Exclude] {
        println!("{rule:?}");
        print!("{}", valence_arousal_text(&valence_arousal_summary(&ds, rule)));
    }
    println!("overall accuracy {:.1}%", overall_accuracy(&ds));
    println!("majority matched {:.1}%", images_majority_matched(&ds));
    Ok(())
}
