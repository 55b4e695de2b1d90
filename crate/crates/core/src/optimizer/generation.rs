//! The codebook sampling loop.
//!
//! init logits → softmax → decode → embed → loss → gradient → AdamW step,
//! repeated for `steps` iterations, then the argmax codes are decoded to give
//! the output image.

use serde::{Deserialize, Serialize};

use super::adamw::{adamw_step, AdamWConfig, AdamWState};
use crate::codebook::{
    argmax_codes, decode_hard, decode_hard_with_tape, decode_soft_with_tape, init_logit_grid, sample_codes,
    softmax_backward, softmax_grid, CodeGrid, Codebook, LogitGrid,
};
use crate::error::{invalid, Error, Result};
use crate::image_buffer::ImageBuffer;
use crate::scorer::{similarity_loss, PromptEmbedding, ScorerBackend};
use crate::seed;

/// How the discrete code choice is relaxed for the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RelaxationMode {
    /// Decode the probability-weighted mean code of each cell.
    #[default]
    #[serde(rename = "soft")]
    Soft,
    /// Decode a hard sample, back-propagate as if it were the soft mixture.
    /// A fresh sample is drawn at every step.
    #[serde(rename = "st")]
    StraightThrough,
}

impl std::str::FromStr for RelaxationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Self::Soft),
            "st" | "straight_through" => Ok(Self::StraightThrough),
            other => Err(invalid(format!("unknown mode `{other}` (expected soft or st)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub optimizer: AdamWConfig,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Std of the Gaussian logit initialization.
    pub init_std: f64,
    pub mode: RelaxationMode,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            optimizer: AdamWConfig::default(),
            grid_rows: 16,
            grid_cols: 16,
            init_std: 1.0,
            mode: RelaxationMode::Soft,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    pub prompt: String,
    pub seed: u64,
    pub backend: String,
    pub config: GenerationConfig,
    pub final_image: ImageBuffer,
    pub final_codes: CodeGrid,
    pub final_logits: LogitGrid,
    /// Loss at the initial logits and after every step (`steps + 1` entries),
    /// measured on the relaxed image the optimizer sees.
    pub loss_trajectory: Vec<f64>,
    /// Loss of the argmax image.
    pub final_hard_loss: f64,
}

/// JSON sidecar written next to a generated PNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub prompt: String,
    pub seed: u64,
    pub backend: String,
    pub config: GenerationConfig,
    pub loss_trajectory: Vec<f64>,
    pub final_hard_loss: f64,
    pub codes: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// Caller-supplied run configuration (e.g. CLI flags), embedded verbatim.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub run: serde_json::Value,
}

impl GenerationResult {
    pub fn sidecar(&self, image: Option<String>, run: serde_json::Value) -> Sidecar {
        Sidecar {
            prompt: self.prompt.clone(),
            seed: self.seed,
            backend: self.backend.clone(),
            config: self.config,
            loss_trajectory: self.loss_trajectory.clone(),
            final_hard_loss: self.final_hard_loss,
            codes: self.final_codes.to_rows(),
            image,
            run,
        }
    }

    pub fn initial_loss(&self) -> f64 {
        self.loss_trajectory[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_trajectory.last().expect("trajectory is never empty")
    }
}

/// Loss at `logits` and its gradient with respect to every logit.
///
/// In straight-through mode the forward image is decoded from a hard sample
/// drawn with `sample_seed`; the soft mode ignores the seed.
pub fn relaxed_loss_and_grad(
    logits: &LogitGrid,
    cb: &Codebook,
    backend: &dyn ScorerBackend,
    pe: &PromptEmbedding,
    mode: RelaxationMode,
    sample_seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let pg = softmax_grid(logits)?;
    let (img, tape) = match mode {
        RelaxationMode::Soft => decode_soft_with_tape(&pg, cb)?,
        RelaxationMode::StraightThrough => decode_hard_with_tape(&sample_codes(&pg, sample_seed), cb)?,
    };
    let (loss, pixel_grad) = backend.loss_and_pixel_grad(&img, pe)?;
    let grad_probs = tape.backward(cb, &pixel_grad);
    Ok((loss, softmax_backward(&pg, &grad_probs)))
}

/// Optimizes a logit grid so the decoded image matches `prompt`.
pub fn run_generation(
    prompt: &str,
    cb: &Codebook,
    backend: &dyn ScorerBackend,
    cfg: &GenerationConfig,
    seed: u64,
) -> Result<GenerationResult> {
    if !backend.differentiable() {
        return Err(Error::Unsupported(format!(
            "backend `{}` is not differentiable and cannot drive optimization",
            backend.name()
        )));
    }
    cfg.optimizer.validate()?;
    let pe = backend.embed_text(prompt)?;
    let mut logits = init_logit_grid(
        cfg.grid_rows,
        cfg.grid_cols,
        cb.num_codes(),
        cfg.init_std,
        seed::stream_seed(seed, "init"),
    )?;
    let sample_base = seed::stream_seed(seed, "sample");
    let mut state = AdamWState::new("logits", logits.as_slice().len());
    let steps = cfg.optimizer.steps;
    let mut trajectory = Vec::with_capacity(steps + 1);

    for step in 0..=steps {
        let sample_seed = seed::derive_seed(sample_base, step as u64);
        let (loss, grad) = relaxed_loss_and_grad(&logits, cb, backend, &pe, cfg.mode, sample_seed)?;
        if !loss.is_finite() {
            return Err(Error::NanLoss { step });
        }
        trajectory.push(loss);
        if step == steps {
            break;
        }
        adamw_step(logits.as_mut_slice(), &grad, &mut state, &cfg.optimizer)?;
    }

    let final_codes = argmax_codes(&logits);
    let final_image = decode_hard(&final_codes, cb)?;
    let final_hard_loss = similarity_loss(&backend.embed_image(&final_image)?, &pe);
    Ok(GenerationResult {
        prompt: prompt.to_owned(),
        seed,
        backend: backend.name().to_owned(),
        config: *cfg,
        final_image,
        final_codes,
        final_logits: logits,
        loss_trajectory: trajectory,
        final_hard_loss,
    })
}
