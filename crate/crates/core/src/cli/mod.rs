//! The `affectsynth` command line.
//!
//! ```text
//! affectsynth generate --prompt "A happy cityscape" --seed 7 --toy
//! affectsynth dataset  --seed 0 --out runs/ds
//! affectsynth palette  --manifest runs/ds/manifest.json --survey answers.csv
//! affectsynth survey   --csv answers.csv
//! ```
//!
//! Generation options can also come from a TOML file (`--config`), whose keys
//! are the fields of [`RunConfig`]; flags override the file. The default
//! output directory is `$AFFECTSYNTH_OUT`, else `out`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::survey::OtherRule;

pub use config::{RunConfig, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "affectsynth",
    version,
    about = "Affect-conditioned codebook image synthesis and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one image for a prompt.
    Generate {
        #[arg(long)]
        prompt: String,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Generate the 32-image emotion x genre dataset and its manifest.
    Dataset {
        #[command(flatten)]
        gen: GenArgs,
        /// Parallel runs (default: one per CPU).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Palette profiles, group means and rating correlations.
    Palette {
        /// Images to profile (ignored when --manifest is given).
        images: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Survey CSV providing per-image ratings for correlations.
        #[arg(long)]
        survey: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confusion matrix and per-group tables from a survey CSV.
    Survey {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OtherArg::Count)]
        other_rule: OtherArg,
        /// Also write the tables as CSV files into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OtherArg {
    /// Freeform answers count as misses.
    Count,
    /// Freeform answers are left out.
    Exclude,
}

impl From<OtherArg> for OtherRule {
    fn from(a: OtherArg) -> Self {
        match a {
            OtherArg::Count => OtherRule::CountAsIncorrect,
            OtherArg::Exclude => OtherRule::Exclude,
        }
    }
}

/// Flags shared by `generate` and `dataset`. Unset flags fall back to the
/// config file, then to [`RunConfig::default`].
#[derive(Debug, Clone, Default, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Grid cells, `N` or `ROWSxCOLS`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Size of the synthetic codebook.
    #[arg(long)]
    pub codes: Option<usize>,
    /// Codebook file instead of the synthetic one.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// `soft` or `st` (straight-through).
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Use the built-in toy scorer (the default).
    #[arg(long, conflicts_with = "backend")]
    pub toy: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Classifies an error into the exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_)
        | Error::Unsupported(_)
        | Error::SurveyHeader { .. }
        | Error::SurveyRow { .. }
        | Error::EmptyGroup(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match commands::dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::SurveyHeader { expected, .. } = &e {
                let _ = writeln!(err, "expected schema: {expected}");
            }
            exit_code(&e)
        }
    }
}
