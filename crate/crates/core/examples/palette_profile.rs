//! Palette profiles, group means and a rating correlation.

use affectsynth::palette::{aggregate_profiles, correlate_feature_ratings, palette_profile, BIN_NAMES};
use affectsynth::{enumerate_dataset, Grouping, ImageBuffer};

fn striped(index: usize) -> affectsynth::Result<ImageBuffer> {
    // a red band whose width grows with the index, the rest blue-gray
    let (h, w) = (16, 32);
    let red_cols = 1 + index % 31;
    let mut px = Vec::with_capacity(h * w * 3);
    for _ in 0..h {
        for x in 0..w {
            px.extend_from_slice(if x < red_cols {
                &[0.9, 0.1, 0.1]
            } else {
                &[0.3, 0.35, 0.6]
            });
        }
    }
    ImageBuffer::new(h, w, px)
}

fn main() -> affectsynth::Result<()> {
    let specs = enumerate_dataset();
    let mut items = Vec::new();
    for spec in &specs {
        items.push((spec.clone(), palette_profile(&striped(spec.index)?, spec.slug())));
    }

    let first = &items[3].1;
    for (name, ratio) in BIN_NAMES.iter().zip(first.ratios).filter(|(_, r)| *r > 0.0) {
        println!("{}: {name} = {ratio:.3}", first.image_id);
    }

    for g in aggregate_profiles(&items, Grouping::Affect)? {
        let d = g.derived;
        println!(
            "{:<10} warm {:.3}  blue {:.3}  mono {:.3}",
            g.group.to_string(),
            d.warm,
            d.blue,
            d.monochrome
        );
    }

    let warm: Vec<f64> = items.iter().map(|(_, p)| p.derived().warm).collect();
    let ratings: Vec<f64> = (0..warm.len()).map(|i| 2.0 + (i % 7) as f64 * 0.3).collect();
    let c = correlate_feature_ratings("warm", &warm, &ratings)?;
    println!(
        "warm vs rating: r = {:.3}, p = {:.3}, significant {}",
        c.r, c.p_value, c.significant
    );
    Ok(())
}
