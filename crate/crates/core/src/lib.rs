//! Affect-conditioned image synthesis over a patch codebook.
//!
//! A grid of categorical distributions over codebook entries is optimized so
//! that the decoded image scores close to a text prompt under a text–image
//! embedding model; the final image decodes the argmax code of each cell.
//! Around that loop the crate provides the emotion × genre prompt grid, a
//! fifteen-colour palette analysis and the rater-survey statistics.
//!
//! | module | contents |
//! |---|---|
//! | [`codebook`] | codebook, logit/probability/code grids, sampling, decoding |
//! | [`scorer`] | embedding backends and the `1 − cos` loss |
//! | [`optimizer`] | AdamW, the generation loop, batch runs |
//! | [`prompts`] | emotions, genres, prompt rendering |
//! | [`palette`] | pixel quantization, palette profiles, correlations |
//! | [`survey`] | survey loading, confusion matrix, summary tables |
//! | [`cli`] | the `affectsynth` command line |

pub mod cli;
pub mod codebook;
pub mod error;
pub mod image_buffer;
pub mod manifest;
pub mod optimizer;
pub mod palette;
pub mod prompts;
pub mod scorer;
pub mod seed;
pub mod stats;
pub mod survey;

pub use codebook::{
    argmax_codes, decode_hard, decode_soft, init_logit_grid, sample_codes, softmax_grid, CodeGrid, Codebook, LogitGrid,
    ProbGrid,
};
pub use error::{Error, Result};
pub use image_buffer::ImageBuffer;
pub use optimizer::{
    adamw_step, batch_generate, relaxed_loss_and_grad, run_generation, AdamWConfig, AdamWState, GenerationConfig,
    GenerationResult, RelaxationMode,
};
pub use prompts::{build_prompt, enumerate_dataset, Affect, Genre, Grouping, PromptSpec};
pub use scorer::{similarity_loss, ScorerBackend, ToyScorer};
