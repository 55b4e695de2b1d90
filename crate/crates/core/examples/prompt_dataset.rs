//! The 32 emotion × genre prompts and their JSON form.

use affectsynth::prompts::{dataset_json, shuffled_dataset};
use affectsynth::{build_prompt, enumerate_dataset, Affect, Genre};

fn main() -> serde_json::Result<()> {
    for spec in enumerate_dataset() {
        println!(
            "{:>2}  {:<10} {:<18} {:<8} {:<5}  {}",
            spec.index,
            spec.affect.to_string(),
            spec.genre.name(),
            format!("{:?}", spec.affect.valence()),
            format!("{:?}", spec.affect.arousal()),
            spec.text
        );
    }
    println!("{}", build_prompt(Affect::Anger, Genre::ReligiousPainting));

    let order: Vec<usize> = shuffled_dataset(5).iter().map(|s| s.index).collect();
    println!("presentation order for seed 5: {order:?}");
    println!("{}", &dataset_json()?[..120]);
    Ok(())
}
