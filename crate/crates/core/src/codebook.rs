//! Patch codebook and the grid of categorical distributions over it.
//!
//! A [`LogitGrid`] holds one categorical distribution per grid cell. Each cell
//! selects (or mixes) code vectors from a [`Codebook`], and the codebook's
//! linear patch decoder renders each selection to a `patch_size x patch_size`
//! RGB block. Decoding is clamped to `[0, 1]`.
//!
//! The soft decode renders the probability-weighted mean code of each cell, so
//! the image is differentiable in the probabilities; [`DecodeTape`] carries the
//! intermediates needed to pull a pixel gradient back to the logits.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::image_buffer::ImageBuffer;
use crate::seed;

/// Linear map from a code vector to a clamped RGB patch.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDecoder {
    patch_size: usize,
    code_dim: usize,
    /// `patch_len x code_dim`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl LinearDecoder {
    pub fn new(patch_size: usize, code_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if patch_size == 0 || code_dim == 0 {
            return Err(invalid("patch_size and code_dim must be positive"));
        }
        let patch_len = patch_size * patch_size * 3;
        if weights.len() != patch_len * code_dim || bias.len() != patch_len {
            return Err(invalid(format!(
                "decoder expects {} weights and {patch_len} biases, got {} and {}",
                patch_len * code_dim,
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                tensor: "decoder".into(),
            });
        }
        Ok(Self {
            patch_size,
            code_dim,
            weights,
            bias,
        })
    }

    /// Gaussian weights with per-pixel std `scale / sqrt(code_dim)` around a
    /// mid-gray bias.
    pub fn seeded(patch_size: usize, code_dim: usize, scale: f64, seed: u64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("decoder scale must be positive"));
        }
        let patch_len = patch_size * patch_size * 3;
        let normal = Normal::new(0.0, scale / (code_dim as f64).sqrt()).map_err(|e| invalid(e.to_string()))?;
        let mut rng = seed::rng(seed);
        let weights = (0..patch_len * code_dim).map(|_| normal.sample(&mut rng)).collect();
        Self::new(patch_size, code_dim, weights, vec![0.5; patch_len])
    }

    pub fn patch_len(&self) -> usize {
        self.patch_size * self.patch_size * 3
    }

    /// Unclamped `W v + b`.
    fn pre_activation(&self, v: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.code_dim).zip(&self.bias))
        {
            *o = b + row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>();
        }
    }

    /// `W^T (g * mask)` where the mask zeroes pixels clamped in the forward pass.
    fn backward(&self, pre: &[f64], grad_out: &[f64], grad_v: &mut [f64]) {
        grad_v.fill(0.0);
        for ((row, &p), &g) in self.weights.chunks_exact(self.code_dim).zip(pre).zip(grad_out) {
            if p > 0.0 && p < 1.0 {
                for (gv, w) in grad_v.iter_mut().zip(row) {
                    *gv += w * g;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DecoderHeader {
    Seeded { seed: u64, scale: f64 },
    Explicit,
}

#[derive(Debug, Serialize, Deserialize)]
struct CodebookHeader {
    num_codes: usize,
    code_dim: usize,
    patch_size: usize,
    decoder: DecoderHeader,
}

/// `num_codes` code vectors plus the decoder that renders them.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    num_codes: usize,
    code_dim: usize,
    codes: Vec<f64>,
    decoder: LinearDecoder,
    decoder_origin: DecoderHeader,
}

impl Codebook {
    pub fn new(codes: Vec<Vec<f64>>, decoder: LinearDecoder) -> Result<Self> {
        let num_codes = codes.len();
        if num_codes < 2 {
            return Err(invalid("a codebook needs at least two codes"));
        }
        let code_dim = decoder.code_dim;
        if let Some(c) = codes.iter().find(|c| c.len() != code_dim) {
            return Err(invalid(format!(
                "code has dimension {}, decoder expects {code_dim}",
                c.len()
            )));
        }
        let codes: Vec<f64> = codes.into_iter().flatten().collect();
        if codes.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                tensor: "codebook".into(),
            });
        }
        Ok(Self {
            num_codes,
            code_dim,
            codes,
            decoder,
            decoder_origin: DecoderHeader::Explicit,
        })
    }

    /// Synthetic codebook: standard-normal codes (rounded to `f32` so the
    /// binary format round-trips exactly) and a seeded linear decoder.
    pub fn toy(num_codes: usize, code_dim: usize, patch_size: usize, decoder_scale: f64, seed: u64) -> Result<Self> {
        if code_dim == 0 {
            return Err(invalid("code_dim must be positive"));
        }
        let decoder_seed = seed::stream_seed(seed, "decoder");
        let decoder = LinearDecoder::seeded(patch_size, code_dim, decoder_scale, decoder_seed)?;
        let mut rng = seed::rng(seed::stream_seed(seed, "codes"));
        let codes = (0..num_codes)
            .map(|_| {
                (0..code_dim)
                    .map(|_| f64::from(rng.sample::<f64, _>(rand_distr::StandardNormal) as f32))
                    .collect()
            })
            .collect();
        let mut cb = Self::new(codes, decoder)?;
        cb.decoder_origin = DecoderHeader::Seeded {
            seed: decoder_seed,
            scale: decoder_scale,
        };
        Ok(cb)
    }

    pub fn num_codes(&self) -> usize {
        self.num_codes
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    pub fn patch_size(&self) -> usize {
        self.decoder.patch_size
    }

    pub fn code(&self, k: usize) -> &[f64] {
        &self.codes[k * self.code_dim..(k + 1) * self.code_dim]
    }

    pub fn decoder(&self) -> &LinearDecoder {
        &self.decoder
    }

    /// Decoded, clamped patch for a single code.
    pub fn decode_code(&self, k: usize) -> Result<Vec<f64>> {
        if k >= self.num_codes {
            return Err(invalid(format!("code index {k} out of range 0..{}", self.num_codes)));
        }
        let mut out = vec![0.0; self.decoder.patch_len()];
        self.decoder.pre_activation(self.code(k), &mut out);
        out.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(out)
    }

    /// Writes a one-line JSON header followed by a little-endian `f32` blob of
    /// the codes (row-major). Explicit decoders append their weights and
    /// biases to the blob; seeded decoders are regenerated from the header.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = CodebookHeader {
            num_codes: self.num_codes,
            code_dim: self.code_dim,
            patch_size: self.patch_size(),
            decoder: self.decoder_origin,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        let mut blob = Vec::with_capacity(self.codes.len() * 4);
        let mut put = |vals: &[f64]| {
            for v in vals {
                blob.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        };
        put(&self.codes);
        if self.decoder_origin == DecoderHeader::Explicit {
            put(&self.decoder.weights);
            put(&self.decoder.bias);
        }
        w.write_all(&blob)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| invalid("codebook file has no header line"))?;
        let header: CodebookHeader = serde_json::from_slice(&bytes[..nl])?;
        let blob = &bytes[nl + 1..];
        if blob.len() % 4 != 0 {
            return Err(invalid("codebook blob length is not a multiple of 4"));
        }
        let mut floats = blob
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])));
        let mut take = |n: usize, what: &str| -> Result<Vec<f64>> {
            let v: Vec<f64> = floats.by_ref().take(n).collect();
            if v.len() != n {
                return Err(invalid(format!("codebook blob truncated in {what}")));
            }
            Ok(v)
        };
        let codes = take(header.num_codes * header.code_dim, "codes")?;
        let decoder = match header.decoder {
            DecoderHeader::Seeded { seed, scale } => {
                LinearDecoder::seeded(header.patch_size, header.code_dim, scale, seed)?
            }
            DecoderHeader::Explicit => {
                let patch_len = header.patch_size * header.patch_size * 3;
                let weights = take(patch_len * header.code_dim, "decoder weights")?;
                let bias = take(patch_len, "decoder bias")?;
                LinearDecoder::new(header.patch_size, header.code_dim, weights, bias)?
            }
        };
        if floats.next().is_some() {
            return Err(invalid("trailing bytes after codebook blob"));
        }
        let mut cb = Self::new(codes.chunks(header.code_dim).map(<[f64]>::to_vec).collect(), decoder)?;
        cb.decoder_origin = header.decoder;
        Ok(cb)
    }
}

fn check_dims(rows: usize, cols: usize, num_codes: usize) -> Result<()> {
    if rows == 0 || cols == 0 || num_codes == 0 {
        return Err(invalid(format!(
            "grid dimensions must be positive, got {rows}x{cols}x{num_codes}"
        )));
    }
    Ok(())
}

/// Per-cell categorical logits; the optimization variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitGrid {
    rows: usize,
    cols: usize,
    num_codes: usize,
    logits: Vec<f64>,
}

impl LogitGrid {
    pub fn new(rows: usize, cols: usize, num_codes: usize, logits: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, num_codes)?;
        if logits.len() != rows * cols * num_codes {
            return Err(invalid("logit tensor length does not match grid shape"));
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                tensor: "logits".into(),
            });
        }
        Ok(Self {
            rows,
            cols,
            num_codes,
            logits,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_codes(&self) -> usize {
        self.num_codes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.logits
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    pub fn cell(&self, r: usize, c: usize) -> &[f64] {
        let k = self.num_codes;
        let start = (r * self.cols + c) * k;
        &self.logits[start..start + k]
    }

    fn cells(&self) -> std::slice::ChunksExact<'_, f64> {
        self.logits.chunks_exact(self.num_codes)
    }
}

/// Per-cell probabilities; each cell sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGrid {
    rows: usize,
    cols: usize,
    num_codes: usize,
    probs: Vec<f64>,
}

impl ProbGrid {
    /// Validates range and per-cell normalization (tolerance `1e-6`).
    pub fn new(rows: usize, cols: usize, num_codes: usize, probs: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, num_codes)?;
        if probs.len() != rows * cols * num_codes {
            return Err(invalid("probability tensor length does not match grid shape"));
        }
        for (i, cell) in probs.chunks_exact(num_codes).enumerate() {
            if cell.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(invalid(format!("cell {i} has a probability outside [0, 1]")));
            }
            let s: f64 = cell.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(invalid(format!("cell {i} sums to {s}")));
            }
        }
        Ok(Self {
            rows,
            cols,
            num_codes,
            probs,
        })
    }

    /// Degenerate distribution putting all mass on each cell's code.
    pub fn one_hot(codes: &CodeGrid, num_codes: usize) -> Result<Self> {
        check_dims(codes.rows, codes.cols, num_codes)?;
        let mut probs = vec![0.0; codes.codes.len() * num_codes];
        for (i, &k) in codes.codes.iter().enumerate() {
            if k >= num_codes {
                return Err(invalid(format!("code index {k} out of range 0..{num_codes}")));
            }
            probs[i * num_codes + k] = 1.0;
        }
        Ok(Self {
            rows: codes.rows,
            cols: codes.cols,
            num_codes,
            probs,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_codes(&self) -> usize {
        self.num_codes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn cell(&self, r: usize, c: usize) -> &[f64] {
        let k = self.num_codes;
        let start = (r * self.cols + c) * k;
        &self.probs[start..start + k]
    }
}

/// One selected code index per cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeGrid {
    rows: usize,
    cols: usize,
    codes: Vec<usize>,
}

impl CodeGrid {
    pub fn new(rows: usize, cols: usize, codes: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 || codes.len() != rows * cols {
            return Err(invalid("code grid shape mismatch"));
        }
        Ok(Self { rows, cols, codes })
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged code grid"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> usize {
        self.codes[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.codes
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.codes.chunks(self.cols).map(<[usize]>::to_vec).collect()
    }
}

/// I.i.d. `Normal(0, std^2)` logits from a seeded generator.
pub fn init_logit_grid(rows: usize, cols: usize, num_codes: usize, std: f64, seed: u64) -> Result<LogitGrid> {
    check_dims(rows, cols, num_codes)?;
    if !(std > 0.0 && std.is_finite()) {
        return Err(invalid(format!("std must be positive, got {std}")));
    }
    let normal = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
    let mut rng = seed::rng(seed);
    let logits = (0..rows * cols * num_codes).map(|_| normal.sample(&mut rng)).collect();
    LogitGrid::new(rows, cols, num_codes, logits)
}

/// Max-subtracted softmax over each cell.
pub fn softmax_grid(lg: &LogitGrid) -> Result<ProbGrid> {
    if lg.logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            tensor: "logits".into(),
        });
    }
    let mut probs = Vec::with_capacity(lg.logits.len());
    for cell in lg.cells() {
        let max = cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = probs.len();
        probs.extend(cell.iter().map(|z| (z - max).exp()));
        let sum: f64 = probs[start..].iter().sum();
        probs[start..].iter_mut().for_each(|p| *p /= sum);
    }
    Ok(ProbGrid {
        rows: lg.rows,
        cols: lg.cols,
        num_codes: lg.num_codes,
        probs,
    })
}

/// Vector-Jacobian product of the per-cell softmax: maps a gradient with
/// respect to probabilities to one with respect to logits.
pub fn softmax_backward(pg: &ProbGrid, grad_probs: &[f64]) -> Vec<f64> {
    let k = pg.num_codes;
    let mut out = vec![0.0; grad_probs.len()];
    for ((o, p), g) in out
        .chunks_exact_mut(k)
        .zip(pg.probs.chunks_exact(k))
        .zip(grad_probs.chunks_exact(k))
    {
        let dot: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
        for ((oi, pi), gi) in o.iter_mut().zip(p).zip(g) {
            *oi = pi * (gi - dot);
        }
    }
    out
}

/// Independent draw from each cell's distribution by inverse CDF.
pub fn sample_codes(pg: &ProbGrid, seed: u64) -> CodeGrid {
    let mut rng = seed::rng(seed);
    let codes = pg
        .probs
        .chunks_exact(pg.num_codes)
        .map(|cell| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, &p) in cell.iter().enumerate() {
                acc += p;
                if u < acc {
                    return k;
                }
            }
            // u landed in the rounding gap above the final cumulative sum
            cell.iter().rposition(|&p| p > 0.0).unwrap_or(0)
        })
        .collect();
    CodeGrid {
        rows: pg.rows,
        cols: pg.cols,
        codes,
    }
}

/// Index of each cell's largest logit; ties go to the lowest index.
pub fn argmax_codes(lg: &LogitGrid) -> CodeGrid {
    let codes = lg
        .cells()
        .map(|cell| {
            let mut best = 0;
            for (k, &z) in cell.iter().enumerate().skip(1) {
                if z > cell[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    CodeGrid {
        rows: lg.rows,
        cols: lg.cols,
        codes,
    }
}

/// Intermediates of a decode, for the backward pass.
#[derive(Debug, Clone)]
pub struct DecodeTape {
    rows: usize,
    cols: usize,
    /// Unclamped patch values, one `patch_len` block per cell.
    pre: Vec<f64>,
}

impl DecodeTape {
    /// Pulls `d/d pixel` back to `d/d prob` for every (cell, code).
    ///
    /// The mixture is linear in the probabilities, so the result is
    /// `code_k . W^T (g * mask)` per cell, regardless of which distribution
    /// produced the forward image. Feeding a hard (one-hot) tape therefore
    /// yields the straight-through estimate.
    pub fn backward(&self, cb: &Codebook, pixel_grad: &[f64]) -> Vec<f64> {
        let ps = cb.patch_size();
        let width = self.cols * ps;
        let patch_len = cb.decoder.patch_len();
        let mut grad_patch = vec![0.0; patch_len];
        let mut grad_v = vec![0.0; cb.code_dim];
        let mut out = vec![0.0; self.rows * self.cols * cb.num_codes];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cell = r * self.cols + c;
                for py in 0..ps {
                    let src = ((r * ps + py) * width + c * ps) * 3;
                    grad_patch[py * ps * 3..(py + 1) * ps * 3].copy_from_slice(&pixel_grad[src..src + ps * 3]);
                }
                let pre = &self.pre[cell * patch_len..(cell + 1) * patch_len];
                cb.decoder.backward(pre, &grad_patch, &mut grad_v);
                let out_cell = &mut out[cell * cb.num_codes..(cell + 1) * cb.num_codes];
                for (k, o) in out_cell.iter_mut().enumerate() {
                    *o = cb.code(k).iter().zip(&grad_v).map(|(a, b)| a * b).sum();
                }
            }
        }
        out
    }
}

/// Renders each cell from the probability-weighted mean of the code vectors.
pub fn decode_soft(pg: &ProbGrid, cb: &Codebook) -> Result<ImageBuffer> {
    decode_soft_with_tape(pg, cb).map(|(img, _)| img)
}

pub fn decode_soft_with_tape(pg: &ProbGrid, cb: &Codebook) -> Result<(ImageBuffer, DecodeTape)> {
    if pg.num_codes != cb.num_codes {
        return Err(invalid(format!(
            "grid has {} codes per cell, codebook has {}",
            pg.num_codes, cb.num_codes
        )));
    }
    let ps = cb.patch_size();
    let patch_len = cb.decoder.patch_len();
    let (height, width) = (pg.rows * ps, pg.cols * ps);
    let mut pixels = vec![0.0; height * width * 3];
    let mut pre = vec![0.0; pg.rows * pg.cols * patch_len];
    let mut mix = vec![0.0; cb.code_dim];
    for r in 0..pg.rows {
        for c in 0..pg.cols {
            let cell = r * pg.cols + c;
            mix.fill(0.0);
            for (k, &p) in pg.cell(r, c).iter().enumerate() {
                for (m, x) in mix.iter_mut().zip(cb.code(k)) {
                    *m += p * x;
                }
            }
            let block = &mut pre[cell * patch_len..(cell + 1) * patch_len];
            cb.decoder.pre_activation(&mix, block);
            for py in 0..ps {
                let dst = ((r * ps + py) * width + c * ps) * 3;
                for (d, s) in pixels[dst..dst + ps * 3]
                    .iter_mut()
                    .zip(&block[py * ps * 3..(py + 1) * ps * 3])
                {
                    *d = s.clamp(0.0, 1.0);
                }
            }
        }
    }
    Ok((
        ImageBuffer::from_raw_unchecked(height, width, pixels),
        DecodeTape {
            rows: pg.rows,
            cols: pg.cols,
            pre,
        },
    ))
}

/// Renders each cell as the decoded patch of its selected code.
///
/// Goes through the same arithmetic as [`decode_soft`] on a one-hot grid, so
/// the two agree bit for bit.
pub fn decode_hard(cg: &CodeGrid, cb: &Codebook) -> Result<ImageBuffer> {
    decode_soft(&ProbGrid::one_hot(cg, cb.num_codes)?, cb)
}

pub fn decode_hard_with_tape(cg: &CodeGrid, cb: &Codebook) -> Result<(ImageBuffer, DecodeTape)> {
    decode_soft_with_tape(&ProbGrid::one_hot(cg, cb.num_codes)?, cb)
}
