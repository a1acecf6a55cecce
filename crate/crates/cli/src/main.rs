//! `convshape`: batch analysis of two-party dialogue corpora.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "convshape",
    version,
    about = "Initiative and collaboration metrics for dialogue corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Map source records onto the canonical corpus format.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute one shape vector per dialogue.
    Shape {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Aggregate shapes into per-dataset profiles and quadrant labels.
    Profile {
        /// Shape tables (CSV or JSONL) or corpora; grouped by dataset label.
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Balance band around zero for the quadrant labels.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also write a Vega-Lite scatter plot of the profiles.
        #[arg(long)]
        emit_plot: bool,
        #[arg(long, default_value = "delta_q")]
        plot_x: String,
        #[arg(long, default_value = "delta_i")]
        plot_y: String,
    },
    /// Score model corpora against a reference by histogram cross-entropy.
    Diagnose {
        /// Model corpora or shape tables, as `label=path` or a bare path.
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Reference corpus or shape table.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Number of equal-width bins per metric.
        #[arg(long)]
        bins: Option<usize>,
        /// Additive smoothing constant.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write a Vega-Lite bar chart of the total scores.
        #[arg(long)]
        emit_plot: bool,
    },
    /// Generate a seeded synthetic corpus.
    Synth {
        /// One of reference, interviewer, talker, parrot.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Input file; repeat for several. Overrides the config's inputs.
    #[arg(long = "input", short = 'i')]
    inputs: Vec<PathBuf>,
    /// Field mapping for non-canonical source records (JSON).
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Utterance tags to apply, one `{dialogue_id, turn, tag}` record per line.
    #[arg(long)]
    tags: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long, env = "CONVSHAPE_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o')]
    out: PathBuf,
    /// Seed for synthetic generators.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<convshape::Error>() {
        return e.kind();
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return "json";
    }
    "usage"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match commands::run(cli.command) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let line = json!({
                "status": "error",
                "command": name,
                "kind": error_kind(&err),
                "message": format!("{err:#}"),
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Shape { .. } => "shape",
            Command::Profile { .. } => "profile",
            Command::Diagnose { .. } => "diagnose",
            Command::Synth { .. } => "synth",
        }
    }
}
