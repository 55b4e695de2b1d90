//! Text and image embeddings in a shared space, and the similarity loss.
//!
//! [`ScorerBackend`] is the adapter contract for a contrastive text–image
//! model. The crate ships [`ToyScorer`], a small differentiable backend that
//! needs no external weights. Pretrained models plug in through
//! [`BackendRegistry`].

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::image_buffer::ImageBuffer;
use crate::seed;

const UNIT_TOL: f64 = 1e-6;

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

macro_rules! unit_embedding {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Wraps an existing unit vector.
            pub fn new(vector: Vec<f64>) -> Result<Self> {
                let n = l2(&vector);
                if vector.is_empty() || !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                    return Err(invalid(format!("embedding norm {n} is not 1")));
                }
                Ok(Self(vector))
            }

            /// L2-normalizes `vector`.
            pub fn normalized(vector: Vec<f64>) -> Result<Self> {
                let n = l2(&vector);
                if !(n > 0.0 && n.is_finite()) {
                    return Err(invalid("cannot normalize a zero or non-finite vector"));
                }
                Ok(Self(vector.into_iter().map(|x| x / n).collect()))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }
        }
    };
}

unit_embedding!(PromptEmbedding);
unit_embedding!(ImageEmbedding);

/// `1 - cos(ie, pe)`, in `[0, 2]`.
pub fn similarity_loss(ie: &ImageEmbedding, pe: &PromptEmbedding) -> f64 {
    (1.0 - dot(ie.as_slice(), pe.as_slice())).clamp(0.0, 2.0)
}

/// A text–image embedding model.
///
/// Backends are immutable once built. Differentiable backends must implement
/// [`ScorerBackend::loss_and_pixel_grad`]; the others are only usable for
/// post-hoc scoring.
pub trait ScorerBackend: Send + Sync {
    fn name(&self) -> &str;

    fn embed_dim(&self) -> usize;

    fn differentiable(&self) -> bool;

    fn embed_text(&self, prompt: &str) -> Result<PromptEmbedding>;

    fn embed_image(&self, img: &ImageBuffer) -> Result<ImageEmbedding>;

    /// Loss against `pe` and its gradient with respect to every channel value
    /// of `img` (same layout as [`ImageBuffer::pixels`]).
    fn loss_and_pixel_grad(&self, img: &ImageBuffer, pe: &PromptEmbedding) -> Result<(f64, Vec<f64>)> {
        let _ = (img, pe);
        Err(Error::Unsupported(format!(
            "backend `{}` does not expose gradients",
            self.name()
        )))
    }
}

/// Lowercase and collapse runs of whitespace.
pub fn normalize_prompt(prompt: &str) -> String {
    prompt
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Differentiable image transform applied before embedding.
pub trait Augmentation: Send + Sync {
    fn forward(&self, img: &ImageBuffer) -> ImageBuffer;

    /// Maps a gradient w.r.t. the transformed image back to the input image.
    fn backward(&self, img: &ImageBuffer, grad: &[f64]) -> Vec<f64>;
}

/// Number of hand-built image features: four quadrant mean colours, the
/// global mean colour and the global per-channel variance.
pub const TOY_FEATURES: usize = 18;

/// Magnitude of the fixed offset added to every projected feature vector so a
/// feature vector of exactly zero (a uniform mid-gray image) still normalizes.
pub const TOY_FEATURE_EPSILON: f64 = 1e-6;

/// Built-in differentiable backend.
///
/// * Text: a pseudo-random direction in feature space, seeded by the SHA-256
///   of the normalized prompt (see [`normalize_prompt`]), pushed through the
///   same projection as images and L2-normalized. Text and image embeddings
///   therefore share one subspace, and every prompt has attainable targets.
/// * Image: [`TOY_FEATURES`] colour statistics (means centred at 0.5),
///   projected by a fixed seeded Gaussian matrix to `embed_dim`, offset by
///   [`TOY_FEATURE_EPSILON`] times a fixed unit vector, and L2-normalized.
pub struct ToyScorer {
    embed_dim: usize,
    seed: u64,
    /// `embed_dim x TOY_FEATURES`, row-major.
    projection: Vec<f64>,
    offset: Vec<f64>,
    augmentation: Option<Box<dyn Augmentation>>,
}

impl std::fmt::Debug for ToyScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToyScorer")
            .field("embed_dim", &self.embed_dim)
            .field("seed", &self.seed)
            .field("augmented", &self.augmentation.is_some())
            .finish()
    }
}

impl Default for ToyScorer {
    fn default() -> Self {
        Self::new(64, 0).expect("default toy scorer is valid")
    }
}

impl ToyScorer {
    pub fn new(embed_dim: usize, seed: u64) -> Result<Self> {
        if embed_dim == 0 {
            return Err(invalid("embed_dim must be positive"));
        }
        let mut rng = seed::rng(seed::stream_seed(seed, "toy-projection"));
        let projection = (0..embed_dim * TOY_FEATURES)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut rng = seed::rng(seed::stream_seed(seed, "toy-offset"));
        let raw: Vec<f64> = (0..embed_dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let n = l2(&raw);
        let offset = raw.into_iter().map(|x| TOY_FEATURE_EPSILON * x / n).collect();
        Ok(Self {
            embed_dim,
            seed,
            projection,
            offset,
            augmentation: None,
        })
    }

    pub fn with_augmentation(mut self, aug: Box<dyn Augmentation>) -> Self {
        self.augmentation = Some(aug);
        self
    }

    /// The raw feature vector (before projection).
    pub fn features(img: &ImageBuffer) -> [f64; TOY_FEATURES] {
        let (h, w) = (img.height(), img.width());
        let mut quad_sum = [[0.0; 3]; 4];
        let mut quad_n = [0usize; 4];
        let mut sum = [0.0; 3];
        for y in 0..h {
            for x in 0..w {
                let q = quadrant(y, x, h, w);
                let p = img.pixel(y, x);
                quad_n[q] += 1;
                for ch in 0..3 {
                    quad_sum[q][ch] += p[ch];
                    sum[ch] += p[ch];
                }
            }
        }
        let n = (h * w) as f64;
        let mean = sum.map(|s| s / n);
        let mut var = [0.0; 3];
        for p in img.rgb_iter() {
            for ch in 0..3 {
                var[ch] += (p[ch] - mean[ch]).powi(2);
            }
        }
        let mut f = [0.0; TOY_FEATURES];
        for q in 0..4 {
            for ch in 0..3 {
                // empty quadrants (1-pixel-wide images) contribute 0
                if quad_n[q] > 0 {
                    f[q * 3 + ch] = quad_sum[q][ch] / quad_n[q] as f64 - 0.5;
                }
            }
        }
        for ch in 0..3 {
            f[12 + ch] = mean[ch] - 0.5;
            f[15 + ch] = var[ch] / n;
        }
        f
    }

    fn project(&self, feat: &[f64; TOY_FEATURES]) -> Vec<f64> {
        self.projection
            .chunks_exact(TOY_FEATURES)
            .zip(&self.offset)
            .map(|(row, o)| dot(row, feat) + o)
            .collect()
    }

    fn prepared<'a>(&self, img: &'a ImageBuffer) -> std::borrow::Cow<'a, ImageBuffer> {
        match &self.augmentation {
            Some(aug) => std::borrow::Cow::Owned(aug.forward(img)),
            None => std::borrow::Cow::Borrowed(img),
        }
    }
}

fn quadrant(y: usize, x: usize, h: usize, w: usize) -> usize {
    (2 * y / h) * 2 + (2 * x / w)
}

impl ScorerBackend for ToyScorer {
    fn name(&self) -> &str {
        "toy"
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn differentiable(&self) -> bool {
        true
    }

    fn embed_text(&self, prompt: &str) -> Result<PromptEmbedding> {
        let norm = normalize_prompt(prompt);
        if norm.is_empty() {
            return Err(invalid("prompt is empty"));
        }
        let digest = Sha256::digest(norm.as_bytes());
        let mut key = [0u8; 8];
        key.copy_from_slice(&digest[..8]);
        let mut rng = seed::rng(seed::mix64(u64::from_le_bytes(key) ^ self.seed));
        let mut z = [0.0; TOY_FEATURES];
        z.iter_mut()
            .for_each(|v| *v = rng.sample::<f64, _>(rand_distr::StandardNormal));
        PromptEmbedding::normalized(self.project(&z))
    }

    fn embed_image(&self, img: &ImageBuffer) -> Result<ImageEmbedding> {
        let img = self.prepared(img);
        ImageEmbedding::normalized(self.project(&Self::features(&img)))
    }

    fn loss_and_pixel_grad(&self, img: &ImageBuffer, pe: &PromptEmbedding) -> Result<(f64, Vec<f64>)> {
        if pe.dim() != self.embed_dim {
            return Err(invalid(format!(
                "prompt embedding has dimension {}, scorer uses {}",
                pe.dim(),
                self.embed_dim
            )));
        }
        let input = img;
        let img = self.prepared(input);
        let feat = Self::features(&img);
        let f = self.project(&feat);
        let norm = l2(&f);
        let ie: Vec<f64> = f.iter().map(|x| x / norm).collect();
        let cos = dot(&ie, pe.as_slice());
        let loss = (1.0 - cos).clamp(0.0, 2.0);

        // d loss / d f = -(pe - cos * ie) / |f|
        let grad_f: Vec<f64> = pe
            .as_slice()
            .iter()
            .zip(&ie)
            .map(|(p, e)| -(p - cos * e) / norm)
            .collect();
        let mut grad_feat = [0.0; TOY_FEATURES];
        for (row, g) in self.projection.chunks_exact(TOY_FEATURES).zip(&grad_f) {
            for (gf, w) in grad_feat.iter_mut().zip(row) {
                *gf += w * g;
            }
        }

        let (h, w) = (img.height(), img.width());
        let n = (h * w) as f64;
        let mut quad_n = [0usize; 4];
        for y in 0..h {
            for x in 0..w {
                quad_n[quadrant(y, x, h, w)] += 1;
            }
        }
        let mean = [feat[12] + 0.5, feat[13] + 0.5, feat[14] + 0.5];
        let mut grad = vec![0.0; img.pixels().len()];
        for y in 0..h {
            for x in 0..w {
                let q = quadrant(y, x, h, w);
                let p = img.pixel(y, x);
                let i = (y * w + x) * 3;
                for ch in 0..3 {
                    grad[i + ch] = grad_feat[q * 3 + ch] / quad_n[q] as f64
                        + grad_feat[12 + ch] / n
                        + grad_feat[15 + ch] * 2.0 * (p[ch] - mean[ch]) / n;
                }
            }
        }
        if let Some(aug) = &self.augmentation {
            grad = aug.backward(input, &grad);
        }
        Ok((loss, grad))
    }
}

/// Which backend to use, as read from configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            name: "toy".into(),
            checkpoint: None,
        }
    }
}

pub type BackendFactory = fn(&BackendConfig) -> Result<Arc<dyn ScorerBackend>>;

/// Name → constructor table for scorer backends. `toy` is always present.
pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut factories: BTreeMap<String, BackendFactory> = BTreeMap::new();
        factories.insert("toy".into(), |_| Ok(Arc::new(ToyScorer::default())));
        Self { factories }
    }
}

impl BackendRegistry {
    pub fn register(&mut self, name: impl Into<String>, factory: BackendFactory) {
        self.factories.insert(name.into(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn load(&self, cfg: &BackendConfig) -> Result<Arc<dyn ScorerBackend>> {
        let factory = self.factories.get(&cfg.name).ok_or_else(|| {
            Error::Unsupported(format!(
                "no scorer backend named `{}` (available: {})",
                cfg.name,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(cfg)
    }
}
