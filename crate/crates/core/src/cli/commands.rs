use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Command, GenArgs, OtherArg, RunConfig, EXIT_FAILURE, EXIT_OK};
use crate::error::{invalid, Error, Result};
use crate::image_buffer::ImageBuffer;
use crate::manifest::{sha256_hex, Manifest, ManifestEntry, RunStatus};
use crate::optimizer::{batch_generate, run_generation, spec_seed, GenerationResult};
use crate::palette::{
    aggregate_profiles, correlate_feature_ratings, correlations_csv, group_palettes_csv, palette_profile, profiles_csv,
    CorrelationReport, PaletteProfile, FEATURE_NAMES,
};
use crate::prompts::{enumerate_dataset, Grouping, PromptSpec};
use crate::survey::{
    confusion_csv, confusion_matrix, confusion_text, images_majority_matched, load_survey_with_prompts,
    overall_accuracy, per_group_summary, summary_csv, summary_text, valence_arousal_csv, valence_arousal_summary,
    valence_arousal_text, OtherRule,
};

pub(super) fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Generate { prompt, gen } => generate(&prompt, &gen, out),
        Command::Dataset { gen, workers } => dataset(&gen, workers, out, err),
        Command::Palette {
            images,
            manifest,
            survey,
            out: dir,
        } => palette(&images, manifest.as_deref(), survey.as_deref(), dir, out, err),
        Command::Survey {
            csv,
            manifest,
            other_rule,
            out: dir,
        } => survey(&csv, manifest.as_deref(), other_rule, dir.as_deref(), out),
    }
}

/// Lowercase ASCII alphanumerics joined by single underscores.
fn prompt_slug(prompt: &str) -> String {
    let words: Vec<String> = prompt
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_ascii_lowercase)
        .collect();
    let mut slug = words.join("_");
    slug.truncate(64);
    if slug.is_empty() {
        slug.push_str("prompt");
    }
    slug
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::File {
        path: dir.to_owned(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::File {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Writes `<dir>/<stem>.png` and `<dir>/<stem>.json`, returning both file
/// names and their hashes.
fn write_run(dir: &Path, stem: &str, res: &GenerationResult, cfg: &RunConfig) -> Result<[String; 4]> {
    let png = format!("{stem}.png");
    let json = format!("{stem}.json");
    let png_path = dir.join(&png);
    res.final_image.save_png(&png_path)?;
    let png_bytes = std::fs::read(&png_path)?;
    let sidecar = res.sidecar(Some(png.clone()), serde_json::to_value(cfg)?);
    let json_bytes = (serde_json::to_string_pretty(&sidecar)? + "\n").into_bytes();
    write_file(&dir.join(&json), &json_bytes)?;
    Ok([png, json, sha256_hex(&png_bytes), sha256_hex(&json_bytes)])
}

fn generate(prompt: &str, gen: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    if prompt.trim().is_empty() {
        return Err(invalid("--prompt must not be empty"));
    }
    let cfg = RunConfig::resolve(gen)?;
    let cb = cfg.load_codebook()?;
    let backend = cfg.load_backend()?;
    let res = run_generation(prompt, &cb, backend.as_ref(), &cfg.generation_config(), cfg.seed)?;
    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let stem = format!("{}_s{}", prompt_slug(prompt), cfg.seed);
    let [png, json, ..] = write_run(&dir, &stem, &res, &cfg)?;
    writeln!(
        out,
        "loss {:.6} -> {:.6} (argmax image {:.6})",
        res.initial_loss(),
        res.final_loss(),
        res.final_hard_loss
    )?;
    writeln!(out, "wrote {}", dir.join(png).display())?;
    writeln!(out, "wrote {}", dir.join(json).display())?;
    Ok(EXIT_OK)
}

fn dataset(gen: &GenArgs, workers: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if workers == Some(0) {
        return Err(invalid("--workers must be at least 1"));
    }
    let cfg = RunConfig::resolve(gen)?;
    let cb = cfg.load_codebook()?;
    let backend = cfg.load_backend()?;
    let specs = enumerate_dataset();
    let results = batch_generate(
        &specs,
        &cb,
        backend.as_ref(),
        &cfg.generation_config(),
        cfg.seed,
        workers,
    )?;
    let dir = cfg.out_dir();
    create_dir(&dir)?;

    let mut entries = Vec::with_capacity(specs.len());
    for (spec, res) in specs.iter().zip(results) {
        let mut entry = ManifestEntry {
            index: spec.index,
            affect: spec.affect,
            genre: spec.genre,
            prompt: spec.text.clone(),
            seed: spec_seed(cfg.seed, spec.index),
            status: RunStatus::Ok,
            image: None,
            sidecar: None,
            image_sha256: None,
            sidecar_sha256: None,
            error: None,
        };
        match res.and_then(|r| write_run(&dir, &spec.slug(), &r, &cfg)) {
            Ok([png, json, png_sha, json_sha]) => {
                entry.image = Some(png);
                entry.sidecar = Some(json);
                entry.image_sha256 = Some(png_sha);
                entry.sidecar_sha256 = Some(json_sha);
            }
            Err(e) => {
                writeln!(err, "run {} failed: {e}", spec.index)?;
                entry.status = RunStatus::Failed;
                entry.error = Some(e.to_string());
            }
        }
        entries.push(entry);
    }
    let manifest = Manifest {
        base_seed: cfg.seed,
        config: serde_json::to_value(&cfg)?,
        entries,
    };
    let path = dir.join("manifest.json");
    manifest.save(&path)?;
    let failed = manifest.failures();
    writeln!(
        out,
        "{} of {} runs succeeded; wrote {}",
        manifest.entries.len() - failed,
        manifest.entries.len(),
        path.display()
    )?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn load_image(path: &Path) -> Result<ImageBuffer> {
    ImageBuffer::load(path).map_err(|e| Error::File {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Dataset spec for a file named like `07_happiness_portrait.png`.
fn spec_from_file_name(path: &Path, specs: &[PromptSpec]) -> Option<PromptSpec> {
    let stem = path.file_stem()?.to_str()?;
    let idx: usize = stem.split('_').next()?.parse().ok()?;
    specs.get(idx).filter(|s| s.slug() == stem).cloned()
}

/// Images to profile, each with its dataset spec when known.
fn palette_inputs(images: &[PathBuf], manifest: Option<&Path>) -> Result<Vec<(PathBuf, Option<PromptSpec>)>> {
    if let Some(mpath) = manifest {
        let m = Manifest::load(mpath)?;
        let base = mpath.parent().unwrap_or(Path::new("."));
        return Ok(m
            .entries
            .iter()
            .filter(|e| e.status == RunStatus::Ok)
            .filter_map(|e| e.image.as_ref().map(|img| (base.join(img), Some(e.spec()))))
            .collect());
    }
    let specs = enumerate_dataset();
    Ok(images
        .iter()
        .map(|p| (p.clone(), spec_from_file_name(p, &specs)))
        .collect())
}

fn palette(
    images: &[PathBuf],
    manifest: Option<&Path>,
    survey_path: Option<&Path>,
    dir: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let inputs = palette_inputs(images, manifest)?;
    if inputs.is_empty() {
        return Err(invalid("no images to profile: pass image paths or --manifest"));
    }
    let dir = dir.unwrap_or_else(|| RunConfig::default().out_dir());
    create_dir(&dir)?;

    let mut profiles = Vec::with_capacity(inputs.len());
    let mut labelled = Vec::new();
    for (path, spec) in &inputs {
        let id = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        let profile = palette_profile(&load_image(path)?, id);
        if let Some(spec) = spec {
            labelled.push((spec.clone(), profile.clone()));
        }
        profiles.push(profile);
    }
    let mut written = vec![dir.join("palette_profiles.csv")];
    write_file(&written[0], profiles_csv(&profiles)?.as_bytes())?;

    if labelled.len() == profiles.len() {
        for (grouping, name) in [
            (Grouping::Affect, "palette_by_affect.csv"),
            (Grouping::Genre, "palette_by_genre.csv"),
        ] {
            match aggregate_profiles(&labelled, grouping) {
                Ok(groups) => {
                    let p = dir.join(name);
                    write_file(&p, group_palettes_csv(&groups)?.as_bytes())?;
                    written.push(p);
                }
                Err(Error::EmptyGroup(g)) => writeln!(err, "note: skipped {name}: no images for {g}")?,
                Err(e) => return Err(e),
            }
        }
    } else {
        writeln!(err, "note: some images have no prompt label; group tables skipped")?;
    }

    if let Some(sp) = survey_path {
        let prompts = match manifest {
            Some(m) => Manifest::load(m)?.prompt_specs(),
            None => enumerate_dataset(),
        };
        let ds = load_survey_with_prompts(sp, prompts)?;
        let reports = correlations(&labelled, &ds.per_image_ratings(), err)?;
        let p = dir.join("palette_correlations.csv");
        write_file(&p, correlations_csv(&reports)?.as_bytes())?;
        written.push(p);
        for (rating, c) in &reports {
            writeln!(
                out,
                "{rating:<8} {:<11} r={:+.3} p={:.3}{}",
                c.feature,
                c.r,
                c.p_value,
                if c.significant { " *" } else { "" }
            )?;
        }
    }
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn correlations(
    labelled: &[(PromptSpec, PaletteProfile)],
    ratings: &BTreeMap<usize, (f64, f64)>,
    err: &mut dyn Write,
) -> Result<Vec<(String, CorrelationReport)>> {
    let rated: Vec<([f64; 4], (f64, f64))> = labelled
        .iter()
        .filter_map(|(s, p)| ratings.get(&s.index).map(|r| (p.derived().values(), *r)))
        .collect();
    let mut reports = Vec::new();
    for (rating, pick) in [("quality", 0usize), ("novelty", 1)] {
        let ys: Vec<f64> = rated.iter().map(|(_, r)| if pick == 0 { r.0 } else { r.1 }).collect();
        for (fi, feature) in FEATURE_NAMES.iter().enumerate() {
            let xs: Vec<f64> = rated.iter().map(|(f, _)| f[fi]).collect();
            match correlate_feature_ratings(feature, &xs, &ys) {
                Ok(c) => reports.push((rating.to_owned(), c)),
                Err(e @ (Error::UndefinedCorrelation(_) | Error::InvalidArgument(_))) => {
                    writeln!(err, "note: {rating} vs {feature} not computed: {e}")?;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(reports)
}

fn survey(csv: &Path, manifest: Option<&Path>, rule: OtherArg, dir: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let prompts = match manifest {
        Some(m) => Manifest::load(m)?.prompt_specs(),
        None => enumerate_dataset(),
    };
    let ds = load_survey_with_prompts(csv, prompts)?;
    let rule: OtherRule = rule.into();
    let cm = confusion_matrix(&ds);
    let by_affect = per_group_summary(&ds, Grouping::Affect);
    let by_genre = per_group_summary(&ds, Grouping::Genre);
    let va = valence_arousal_summary(&ds, rule);

    writeln!(out, "{} responses\n", ds.len())?;
    writeln!(out, "Intended emotion (rows) vs answered emotion (columns)")?;
    write!(out, "{}", confusion_text(&cm))?;
    writeln!(out)?;
    write!(out, "{}", summary_text(&by_affect, Grouping::Affect))?;
    writeln!(out)?;
    write!(out, "{}", summary_text(&by_genre, Grouping::Genre))?;
    writeln!(out)?;
    write!(out, "{}", valence_arousal_text(&va))?;
    writeln!(out, "overall accuracy: {:.1}%", overall_accuracy(&ds))?;
    writeln!(
        out,
        "images matched by at least half of raters: {:.1}%",
        images_majority_matched(&ds)
    )?;

    if let Some(dir) = dir {
        create_dir(dir)?;
        let files = [
            ("confusion.csv", confusion_csv(&cm)?),
            ("summary_by_affect.csv", summary_csv(&by_affect, Grouping::Affect)?),
            ("summary_by_genre.csv", summary_csv(&by_genre, Grouping::Genre)?),
            ("valence_arousal.csv", valence_arousal_csv(&va)?),
        ];
        for (name, body) in files {
            write_file(&dir.join(name), body.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}
