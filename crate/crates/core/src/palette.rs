//! Fifteen-colour palette statistics.
//!
//! Each pixel goes to one of twelve hue bins centred on 0°, 30°, …, 330°, or,
//! when it is nearly unsaturated, to white, black or gray. An image's profile
//! is the fraction of its pixels in each bin.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::image_buffer::ImageBuffer;
use crate::prompts::{GroupKey, Grouping, PromptSpec};
use crate::stats;

pub const NUM_BINS: usize = 15;
pub const HUE_BINS: usize = 12;
pub const WHITE: usize = 12;
pub const BLACK: usize = 13;
pub const GRAY: usize = 14;

/// Bins counted as warm: red (0°), orange (30°) and magenta (300°).
pub const WARM_BINS: [usize; 3] = [0, 1, 10];
pub const GREEN_BIN: usize = 4;
pub const BLUE_BIN: usize = 8;

/// Significance level used when flagging correlations.
pub const ALPHA: f64 = 0.05;

/// Column names, in CSV order.
pub const BIN_NAMES: [&str; NUM_BINS] = [
    "hue_000", "hue_030", "hue_060", "hue_090", "hue_120", "hue_150", "hue_180", "hue_210", "hue_240", "hue_270",
    "hue_300", "hue_330", "white", "black", "gray",
];

pub const FEATURE_NAMES: [&str; 4] = ["monochrome", "warm", "blue", "green"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaletteThresholds {
    /// Below this saturation a pixel is white, black or gray.
    pub saturation: f64,
    pub white_value: f64,
    pub black_value: f64,
}

impl Default for PaletteThresholds {
    fn default() -> Self {
        Self {
            saturation: 0.15,
            white_value: 0.85,
            black_value: 0.15,
        }
    }
}

/// Hue in degrees `[0, 360)`, saturation and value, all from RGB in `[0, 1]`.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let s = if max > 0.0 { d / max } else { 0.0 };
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    (h.rem_euclid(360.0), s, max)
}

/// Bin index `floor(((hue + 15) mod 360) / 30)`.
pub fn hue_bin(hue: f64) -> usize {
    (((hue + 15.0).rem_euclid(360.0) / 30.0).floor() as usize).min(HUE_BINS - 1)
}

pub fn quantize_pixel(r: f64, g: f64, b: f64) -> Result<usize> {
    quantize_pixel_with(r, g, b, &PaletteThresholds::default())
}

pub fn quantize_pixel_with(r: f64, g: f64, b: f64, t: &PaletteThresholds) -> Result<usize> {
    for (name, v) in [("r", r), ("g", g), ("b", b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(format!("channel {name} = {v} outside [0, 1]")));
        }
    }
    let (h, s, v) = rgb_to_hsv(r, g, b);
    Ok(if s < t.saturation {
        if v >= t.white_value {
            WHITE
        } else if v <= t.black_value {
            BLACK
        } else {
            GRAY
        }
    } else {
        hue_bin(h)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedFeatures {
    pub monochrome: f64,
    pub warm: f64,
    pub blue: f64,
    pub green: f64,
}

impl DerivedFeatures {
    pub fn from_ratios(r: &[f64; NUM_BINS]) -> Self {
        Self {
            monochrome: r[WHITE] + r[BLACK] + r[GRAY],
            warm: WARM_BINS.iter().map(|&b| r[b]).sum(),
            blue: r[BLUE_BIN],
            green: r[GREEN_BIN],
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "monochrome" => Some(self.monochrome),
            "warm" => Some(self.warm),
            "blue" => Some(self.blue),
            "green" => Some(self.green),
            _ => None,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.monochrome, self.warm, self.blue, self.green]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteProfile {
    pub image_id: String,
    pub ratios: [f64; NUM_BINS],
}

impl PaletteProfile {
    pub fn derived(&self) -> DerivedFeatures {
        DerivedFeatures::from_ratios(&self.ratios)
    }
}

pub fn palette_profile(img: &ImageBuffer, image_id: impl Into<String>) -> PaletteProfile {
    palette_profile_with(img, image_id, &PaletteThresholds::default())
}

pub fn palette_profile_with(img: &ImageBuffer, image_id: impl Into<String>, t: &PaletteThresholds) -> PaletteProfile {
    let mut counts = [0usize; NUM_BINS];
    for [r, g, b] in img.rgb_iter() {
        // ImageBuffer guarantees channels in [0, 1]
        counts[quantize_pixel_with(r, g, b, t).expect("valid pixel")] += 1;
    }
    let n = (img.height() * img.width()) as f64;
    PaletteProfile {
        image_id: image_id.into(),
        ratios: counts.map(|c| c as f64 / n),
    }
}

/// Mean profile of one group of images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPalette {
    pub group: GroupKey,
    pub count: usize,
    pub mean_ratios: [f64; NUM_BINS],
    pub derived: DerivedFeatures,
}

/// Per-group mean ratios over every affect (or genre) label.
///
/// Every label must have at least one image.
pub fn aggregate_profiles(items: &[(PromptSpec, PaletteProfile)], grouping: Grouping) -> Result<Vec<GroupPalette>> {
    grouping
        .keys()
        .into_iter()
        .map(|key| {
            let members: Vec<&PaletteProfile> = items.iter().filter(|(s, _)| key.matches(s)).map(|(_, p)| p).collect();
            if members.is_empty() {
                return Err(Error::EmptyGroup(key.to_string()));
            }
            let n = members.len() as f64;
            let mut mean = [0.0; NUM_BINS];
            for p in &members {
                for (m, r) in mean.iter_mut().zip(&p.ratios) {
                    *m += r;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            Ok(GroupPalette {
                group: key,
                count: members.len(),
                mean_ratios: mean,
                derived: DerivedFeatures::from_ratios(&mean),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub feature: String,
    pub r: f64,
    pub n: usize,
    pub p_value: f64,
    pub significant: bool,
}

/// Pearson r between a palette feature and ratings, with a two-sided
/// t-test p-value on `n − 2` degrees of freedom.
pub fn correlate_feature_ratings(feature: &str, values: &[f64], ratings: &[f64]) -> Result<CorrelationReport> {
    let r = stats::pearson(values, ratings).map_err(|e| match e {
        Error::UndefinedCorrelation(_) => {
            Error::UndefinedCorrelation(format!("{feature} has zero variance or ratings do"))
        }
        e => e,
    })?;
    let p_value = stats::pearson_p_value(r, values.len());
    Ok(CorrelationReport {
        feature: feature.to_owned(),
        r,
        n: values.len(),
        p_value,
        significant: p_value < ALPHA,
    })
}

fn fmt_row(id: &str, ratios: &[f64; NUM_BINS]) -> Vec<String> {
    let d = DerivedFeatures::from_ratios(ratios);
    std::iter::once(id.to_owned())
        .chain(ratios.iter().chain(d.values().iter()).map(|v| v.to_string()))
        .collect()
}

fn header(first: &str) -> Vec<&str> {
    std::iter::once(first).chain(BIN_NAMES).chain(FEATURE_NAMES).collect()
}

/// `image_id`, the 15 bin ratios, then the 4 derived features.
pub fn profiles_csv(profiles: &[PaletteProfile]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header("image_id"))?;
    for p in profiles {
        w.write_record(fmt_row(&p.image_id, &p.ratios))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

pub fn group_palettes_csv(groups: &[GroupPalette]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header("group"))?;
    for g in groups {
        w.write_record(fmt_row(&g.group.to_string(), &g.mean_ratios))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

pub fn correlations_csv(reports: &[(String, CorrelationReport)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rating", "feature", "r", "n", "p_value", "significant"])?;
    for (rating, c) in reports {
        w.write_record([
            rating.clone(),
            c.feature.clone(),
            c.r.to_string(),
            c.n.to_string(),
            c.p_value.to_string(),
            c.significant.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
