//! AdamW and the generation loop built on it.

mod adamw;
mod batch;
mod generation;

pub use adamw::{adamw_step, AdamWConfig, AdamWState};
pub use batch::{batch_generate, spec_seed};
pub use generation::{
    relaxed_loss_and_grad, run_generation, GenerationConfig, GenerationResult, RelaxationMode, Sidecar,
};
