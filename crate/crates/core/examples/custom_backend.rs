//! Plugging a different scorer into the registry and the optimizer.

use std::sync::Arc;

use affectsynth::scorer::{BackendConfig, BackendRegistry, ImageEmbedding, PromptEmbedding};
use affectsynth::{run_generation, Codebook, GenerationConfig, ImageBuffer, ScorerBackend};

/// Scores images by mean colour alone: warm prompts want red, others blue.
struct MeanColour;

impl ScorerBackend for MeanColour {
    fn name(&self) -> &str {
        "mean-colour"
    }

    fn embed_dim(&self) -> usize {
        3
    }

    fn differentiable(&self) -> bool {
        true
    }

    fn embed_text(&self, prompt: &str) -> affectsynth::Result<PromptEmbedding> {
        let p = prompt.to_lowercase();
        let warm = p.contains("angry") || p.contains("happy");
        PromptEmbedding::new(if warm { vec![1.0, 0.0, 0.0] } else { vec![0.0, 0.0, 1.0] })
    }

    fn embed_image(&self, img: &ImageBuffer) -> affectsynth::Result<ImageEmbedding> {
        ImageEmbedding::normalized(self.mean(img))
    }

    fn loss_and_pixel_grad(&self, img: &ImageBuffer, pe: &PromptEmbedding) -> affectsynth::Result<(f64, Vec<f64>)> {
        // loss = 1 − ⟨m/|m|, t⟩ with m the mean colour
        let m = self.mean(img);
        let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = m.iter().map(|x| x / norm).collect();
        let t = pe.as_slice();
        let cos: f64 = u.iter().zip(t).map(|(a, b)| a * b).sum();
        let n_px = (img.height() * img.width()) as f64;
        let dm: Vec<f64> = (0..3).map(|c| -(t[c] - cos * u[c]) / norm / n_px).collect();
        let grad = (0..img.pixels().len()).map(|i| dm[i % 3]).collect();
        Ok((1.0 - cos, grad))
    }
}

impl MeanColour {
    fn mean(&self, img: &ImageBuffer) -> Vec<f64> {
        let mut m = [0.0; 3];
        for px in img.rgb_iter() {
            for c in 0..3 {
                m[c] += px[c];
            }
        }
        let n = (img.height() * img.width()) as f64;
        m.iter().map(|v| v / n).collect()
    }
}

fn main() -> affectsynth::Result<()> {
    let mut registry = BackendRegistry::default();
    registry.register("mean-colour", |_| Ok(Arc::new(MeanColour)));
    println!("backends: {:?}", registry.names().collect::<Vec<_>>());

    let backend = registry.load(&BackendConfig {
        name: "mean-colour".into(),
        checkpoint: None,
    })?;
    let cb = Codebook::toy(32, 8, 8, 0.4, 0)?;
    let cfg = GenerationConfig {
        grid_rows: 4,
        grid_cols: 4,
        ..GenerationConfig::default()
    };
    for prompt in ["An angry portrait", "A calm landscape"] {
        let r = run_generation(prompt, &cb, backend.as_ref(), &cfg, 1)?;
        let m = MeanColour.mean(&r.final_image);
        println!(
            "{prompt:<20} loss {:.3} -> {:.3}, mean rgb [{:.2}, {:.2}, {:.2}]",
            r.initial_loss(),
            r.final_loss(),
            m[0],
            m[1],
            m[2]
        );
    }
    Ok(())
}
