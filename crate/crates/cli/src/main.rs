//! `cdwe`: demographic word embedding pipeline.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cdwe", version, about = "Compositional demographic word embeddings")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract self-reported demographics from posts into a profile table.
    Extract(ExtractArgs),
    /// List users with at least N known attributes.
    Subset(SubsetArgs),
    /// Sample train/val/test post splits.
    Split(SplitArgs),
    /// Train a generic, vector or matrix skip-gram model.
    Train(TrainArgs),
    /// Print the nearest neighbours of a word.
    Neighbors(NeighborsArgs),
    /// Fraction of shared top-N neighbours of a word in two spaces.
    Overlap(OverlapArgs),
    /// Concatenate generic and demographic spaces for one user.
    Compose(ComposeArgs),
    /// Write a model's space (optionally at one demographic value) as text.
    Export(ExportArgs),
    /// Score spaces against word-association datasets.
    EvalAssoc(EvalAssocArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub bots: Option<PathBuf>,
    /// Gazetteer file replacing the built-in one.
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long)]
    pub min_known: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub val: Option<usize>,
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub bots: Option<PathBuf>,
    /// Profile table; users without a profile train as all-unknown.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Split manifest; only posts in the train part are used.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// generic, dvec or dmat.
    #[arg(long)]
    pub arch: Option<String>,
    /// Attribute of a dmat model: age, gender, location or religion.
    #[arg(long)]
    pub attribute: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Progress line on stderr every this many examples (0 = off).
    #[arg(long)]
    pub report_every: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    /// Binary model or text space file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Demographic value for dmat models, e.g. gender=female.
    #[arg(long)]
    pub value: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub a_value: Option<String>,
    #[arg(long)]
    pub b_value: Option<String>,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Generic model providing the first slice.
    #[arg(long)]
    pub generic: Option<PathBuf>,
    /// Matrices models, one per attribute.
    #[arg(long)]
    pub dmat: Vec<PathBuf>,
    /// Vector model; composes word vector with the speaker's value sum.
    #[arg(long, conflicts_with_all = ["generic", "dmat"])]
    pub dvec: Option<PathBuf>,
    /// Look the user up in this profile table.
    #[arg(long, requires = "user")]
    pub profiles: Option<PathBuf>,
    #[arg(long, requires = "profiles")]
    pub user: Option<String>,
    /// Explicit demographics, e.g. age=young,gender=female.
    #[arg(long, conflicts_with = "user")]
    pub demographics: Option<String>,
    /// Attributes to include, comma separated (default: every given dmat model).
    #[arg(long, value_delimiter = ',')]
    pub attributes: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub value: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalAssocArgs {
    /// Association dataset; its group comes from a "# group:" line or the file name.
    #[arg(long, required = true)]
    pub dataset: Vec<PathBuf>,
    /// Space used for every group.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Per-group space, GROUP=PATH.
    #[arg(long)]
    pub group_space: Vec<String>,
    /// Label for this space configuration in the results table.
    #[arg(long, default_value = "space")]
    pub name: String,
    #[arg(long, value_delimiter = ',', default_value = "best,oo3,oo10")]
    pub metrics: Vec<String>,
    /// Results table; the JSON summary is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let err = CliError::config(e.kind().to_string());
            eprintln!("{}", err.report_line());
            return ExitCode::from(err.class.exit_code() as u8);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.report_line());
            ExitCode::from(err.class.exit_code() as u8)
        }
    }
}
