use rayon::prelude::*;

use super::generation::{run_generation, GenerationConfig, GenerationResult};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::prompts::PromptSpec;
use crate::scorer::ScorerBackend;
use crate::seed;

/// Seed used for the spec with the given dataset index.
pub fn spec_seed(base_seed: u64, index: usize) -> u64 {
    seed::derive_seed(base_seed, index as u64)
}

/// Runs every spec, in parallel when `workers` allows it.
///
/// Each run's seed depends only on `base_seed` and the spec's own index, so
/// results do not depend on the order of `specs` or on scheduling. The output
/// is in input order; a failed run yields an [`Error::Run`] in its slot.
pub fn batch_generate(
    specs: &[PromptSpec],
    cb: &Codebook,
    backend: &dyn ScorerBackend,
    cfg: &GenerationConfig,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Result<GenerationResult>>> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("batch has no prompt specs".into()));
    }
    let run = |spec: &PromptSpec| {
        run_generation(&spec.text, cb, backend, cfg, spec_seed(base_seed, spec.index)).map_err(|e| Error::Run {
            index: spec.index,
            prompt: spec.text.clone(),
            source: Box::new(e),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| specs.par_iter().map(run).collect()))
}
