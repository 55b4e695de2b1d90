//! Logit grids, per-cell softmax, sampling and argmax.

use affectsynth::{argmax_codes, init_logit_grid, sample_codes, softmax_grid, LogitGrid};

fn main() -> affectsynth::Result<()> {
    let logits = init_logit_grid(2, 3, 4, 1.0, 7)?;
    let probs = softmax_grid(&logits)?;
    for r in 0..2 {
        for c in 0..3 {
            let p: Vec<String> = probs.cell(r, c).iter().map(|p| format!("{p:.3}")).collect();
            println!("cell ({r},{c}) probs [{}]", p.join(", "));
        }
    }
    println!("argmax   {:?}", argmax_codes(&logits).to_rows());
    for seed in 0..3 {
        println!("sample {seed} {:?}", sample_codes(&probs, seed).to_rows());
    }

    // frequencies approach the cell probabilities
    let cell = LogitGrid::new(1, 1, 3, vec![2f64.ln(), 0.0, -1.0])?;
    let p = softmax_grid(&cell)?;
    let mut counts = [0usize; 3];
    let draws = 20_000;
    for seed in 0..draws {
        counts[sample_codes(&p, seed).get(0, 0)] += 1;
    }
    for (k, n) in counts.iter().enumerate() {
        println!(
            "code {k}: p = {:.4}, observed {:.4}",
            p.as_slice()[k],
            *n as f64 / draws as f64
        );
    }
    Ok(())
}
