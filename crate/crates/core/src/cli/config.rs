use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::GenArgs;
use crate::codebook::Codebook;
use crate::error::{invalid, Error, Result};
use crate::optimizer::{AdamWConfig, GenerationConfig, RelaxationMode};
use crate::scorer::{BackendConfig, BackendRegistry, ScorerBackend};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "AFFECTSYNTH_OUT";

/// Everything needed to reproduce a generation run.
///
/// Also the schema of the `--config` TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub init_std: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub mode: RelaxationMode,
    /// Synthetic codebook parameters, used when `codebook` is unset.
    pub codes: usize,
    pub code_dim: usize,
    pub patch_size: usize,
    pub decoder_scale: f64,
    pub codebook_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebook: Option<PathBuf>,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// Not part of the reproducibility record.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = AdamWConfig::default();
        let gen = GenerationConfig::default();
        Self {
            seed: 0,
            steps: opt.steps,
            learning_rate: opt.learning_rate,
            beta1: opt.beta1,
            beta2: opt.beta2,
            epsilon: opt.epsilon,
            weight_decay: opt.weight_decay,
            init_std: gen.init_std,
            grid_rows: gen.grid_rows,
            grid_cols: gen.grid_cols,
            mode: gen.mode,
            codes: 1024,
            code_dim: 16,
            patch_size: 16,
            decoder_scale: 0.2,
            codebook_seed: 0,
            codebook: None,
            backend: "toy".into(),
            checkpoint: None,
            out: None,
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || invalid(format!("--grid expects N or ROWSxCOLS, got {s:?}"));
    let (r, c) = match s.split_once(['x', 'X']) {
        Some((r, c)) => (r, c),
        None => (s, s),
    };
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) overridden by flags, then validated.
    pub fn resolve(args: &GenArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(p) => Self::from_toml_file(p)?,
            None => Self::default(),
        };
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.steps {
            cfg.steps = v;
        }
        if let Some(v) = args.lr {
            cfg.learning_rate = v;
        }
        if let Some(g) = &args.grid {
            (cfg.grid_rows, cfg.grid_cols) = parse_grid(g)?;
        }
        if let Some(v) = args.codes {
            cfg.codes = v;
        }
        if let Some(v) = &args.codebook {
            cfg.codebook = Some(v.clone());
        }
        if let Some(m) = &args.mode {
            cfg.mode = m.parse()?;
        }
        if let Some(b) = &args.backend {
            cfg.backend = b.clone();
        }
        if args.toy {
            cfg.backend = "toy".into();
        }
        if let Some(c) = &args.checkpoint {
            cfg.checkpoint = Some(c.clone());
        }
        if let Some(o) = &args.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.generation_config().optimizer.validate()?;
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(invalid("grid dimensions must be positive"));
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return Err(invalid("init_std must be positive"));
        }
        if self.codebook.is_none() && (self.codes < 2 || self.code_dim == 0 || self.patch_size == 0) {
            return Err(invalid(
                "synthetic codebook needs codes >= 2, code_dim >= 1, patch_size >= 1",
            ));
        }
        Ok(())
    }

    pub fn generation_config(&self) -> GenerationConfig {
        GenerationConfig {
            optimizer: AdamWConfig {
                learning_rate: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
                weight_decay: self.weight_decay,
                steps: self.steps,
            },
            grid_rows: self.grid_rows,
            grid_cols: self.grid_cols,
            init_std: self.init_std,
            mode: self.mode,
        }
    }

    pub fn load_codebook(&self) -> Result<Codebook> {
        match &self.codebook {
            Some(path) => {
                let f = std::fs::File::open(path).map_err(|e| Error::File {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                Codebook::read_from(std::io::BufReader::new(f))
            }
            None => Codebook::toy(
                self.codes,
                self.code_dim,
                self.patch_size,
                self.decoder_scale,
                self.codebook_seed,
            ),
        }
    }

    pub fn load_backend(&self) -> Result<Arc<dyn ScorerBackend>> {
        BackendRegistry::default().load(&BackendConfig {
            name: self.backend.clone(),
            checkpoint: self.checkpoint.clone(),
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}
