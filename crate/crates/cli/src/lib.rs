//! Command-line front end: argument surface, commands and exit codes.

pub mod commands;
pub mod manifest;
pub mod vectors;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use vidsource::classifier::{ClassifierError, Representation};
use vidsource::features::FeatureError;
use vidsource::metaclass::Abstraction;

pub const MODEL_ENV: &str = "VIDSOURCE_MODEL";

#[derive(Debug, Parser)]
#[command(name = "vidsource", version, about = "Camera-model attribution from MP4 file metadata")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for corpus generation and fold assignment.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `content`, `user-adjustable`, `none`, or a pattern file. Defaults to
    /// `content`, or to the model's own list when a model is loaded.
    #[arg(long, global = true)]
    pub exclusion_profile: Option<String>,
    #[arg(long, global = true, default_value = "hierarchical")]
    pub representation: Representation,
    /// Level-1 abstraction of the hierarchical model.
    #[arg(long, global = true, default_value = "hash")]
    pub level1: Abstraction,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the boxes, parameter sets, tree or signature of one file.
    Inspect(InspectArgs),
    /// Write a synthetic labeled corpus and its manifest.
    Synth(SynthArgs),
    /// Train a model on a manifest.
    Train(TrainArgs),
    /// Classify files with a trained model.
    Predict(PredictArgs),
    /// Repeated stratified k-fold cross-validation on a manifest.
    Evaluate(EvaluateArgs),
    /// Partial-file classification from the 11 core parameters.
    #[command(subcommand)]
    CoreParams(CoreParamsCommand),
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub boxes: bool,
    #[arg(long)]
    pub params: bool,
    #[arg(long)]
    pub tree: bool,
    #[arg(long)]
    pub signature: bool,
    /// Model whose metaclass index `--signature` looks the file up in.
    #[arg(long, env = MODEL_ENV)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub classes: usize,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Number of class pairs that share one recipe.
    #[arg(long, default_value_t = 0)]
    pub clone_pairs: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub manifest: PathBuf,
    /// Output model path.
    #[arg(long, env = MODEL_ENV)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, env = MODEL_ENV)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Write the confusion matrix as CSV.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Args)]
pub struct VectorOpts {
    /// Merge every model of a brand into one class.
    #[arg(long)]
    pub brand: bool,
    /// Drop the four user-adjustable coordinates.
    #[arg(long)]
    pub drop_user_adjustable: bool,
}

#[derive(Debug, Subcommand)]
pub enum CoreParamsCommand {
    /// Print the core vector of hex-encoded SPS/PPS NAL units.
    Vector {
        #[arg(long)]
        sps: String,
        #[arg(long, required = true)]
        pps: Vec<String>,
        /// Picture height; defaults to the one the SPS signals.
        #[arg(long)]
        height: Option<u32>,
    },
    /// Write a vector manifest from the files of a manifest.
    Extract {
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cross-validate a decision tree on a vector manifest.
    Evaluate {
        vectors: PathBuf,
        #[command(flatten)]
        opts: VectorOpts,
        #[command(flatten)]
        cv: CvArgs,
    },
    /// Train on a vector manifest.
    Train {
        vectors: PathBuf,
        #[command(flatten)]
        opts: VectorOpts,
        #[arg(long, env = MODEL_ENV)]
        model: PathBuf,
    },
    /// Classify the rows of a vector manifest.
    Predict {
        vectors: PathBuf,
        #[arg(long, env = MODEL_ENV)]
        model: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<manifest::ManifestError> for CliError {
    fn from(e: manifest::ManifestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::ExclusionMismatch { .. }
            | ClassifierError::BadModelFile(_)
            | ClassifierError::DimensionMismatch { .. }
            | ClassifierError::Feature(FeatureError::VocabularyKindMismatch { .. }) => CliError::Mismatch(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.global.verbose);
    if let Some(n) = cli.global.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 1;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}
