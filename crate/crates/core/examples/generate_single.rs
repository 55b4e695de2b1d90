//! Optimize one image for a prompt with the toy scorer and save it.
//!
//! ```text
//! cargo run --example generate_single -- "A calm landscape" 3 st
//! ```

use affectsynth::{run_generation, AdamWConfig, Codebook, GenerationConfig, RelaxationMode, ScorerBackend, ToyScorer};

fn main() -> affectsynth::Result<()> {
    let mut args = std::env::args().skip(1);
    let prompt = args.next().unwrap_or_else(|| "A happy cityscape".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    // `st` optimizes through hard samples, which narrows the gap to the argmax image
    let mode: RelaxationMode = args.next().as_deref().unwrap_or("soft").parse()?;

    let codebook = Codebook::toy(64, 16, 16, 0.2, 0)?;
    let scorer = ToyScorer::default();
    let cfg = GenerationConfig {
        optimizer: AdamWConfig {
            steps: 150,
            learning_rate: 0.1,
            ..AdamWConfig::default()
        },
        grid_rows: 8,
        grid_cols: 8,
        mode,
        ..GenerationConfig::default()
    };

    let result = run_generation(&prompt, &codebook, &scorer, &cfg, seed)?;
    for (step, loss) in result.loss_trajectory.iter().enumerate().step_by(25) {
        println!("step {step:>3}  loss {loss:.4}");
    }
    println!(
        "final relaxed loss {:.4}, argmax image loss {:.4}",
        result.final_loss(),
        result.final_hard_loss
    );

    let path = std::env::temp_dir().join(format!("affectsynth_{seed}.png"));
    result.final_image.save_png(&path)?;
    let sidecar = result.sidecar(Some(path.display().to_string()), serde_json::Value::Null);
    println!("{} ({}), codes {:?}", path.display(), scorer.name(), sidecar.codes[0]);
    Ok(())
}
