//! Generate all 32 dataset prompts in parallel and write a manifest.

use affectsynth::manifest::{sha256_hex, Manifest, ManifestEntry, RunStatus};
use affectsynth::optimizer::spec_seed;
use affectsynth::{batch_generate, enumerate_dataset, AdamWConfig, Codebook, GenerationConfig, ToyScorer};

fn main() -> affectsynth::Result<()> {
    let out = std::env::temp_dir().join("affectsynth_batch");
    std::fs::create_dir_all(&out)?;
    let base_seed = 11;
    let cb = Codebook::toy(16, 16, 16, 0.2, 0)?;
    let cfg = GenerationConfig {
        optimizer: AdamWConfig {
            steps: 60,
            ..AdamWConfig::default()
        },
        grid_rows: 4,
        grid_cols: 4,
        ..GenerationConfig::default()
    };
    let specs = enumerate_dataset();
    let results = batch_generate(&specs, &cb, &ToyScorer::default(), &cfg, base_seed, None)?;

    let mut entries = Vec::new();
    for (spec, res) in specs.iter().zip(results) {
        let res = res?;
        let file = format!("{}.png", spec.slug());
        res.final_image.save_png(out.join(&file))?;
        println!("{:<42} {:.3} -> {:.3}", spec.text, res.initial_loss(), res.final_loss());
        entries.push(ManifestEntry {
            index: spec.index,
            affect: spec.affect,
            genre: spec.genre,
            prompt: spec.text.clone(),
            seed: spec_seed(base_seed, spec.index),
            status: RunStatus::Ok,
            image_sha256: Some(sha256_hex(&std::fs::read(out.join(&file))?)),
            image: Some(file),
            sidecar: None,
            sidecar_sha256: None,
            error: None,
        });
    }
    let manifest = Manifest {
        base_seed,
        config: serde_json::to_value(cfg)?,
        entries,
    };
    manifest.save(out.join("manifest.json"))?;
    println!("wrote {}", out.join("manifest.json").display());
    Ok(())
}
