//! Command line front end: one subcommand per stage, the full pipeline,
//! the review server and a mock model endpoint.

pub mod commands;
pub mod error;
pub mod mock_llm;
pub mod serve;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "eduverba", version, about = "Build and curate educational crossword clue datasets")]
pub struct Cli {
    /// Pipeline config (TOML). Defaults apply when absent.
    #[arg(long, global = true, env = "EDUVERBA_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Selects the synthetic model instead of the configured endpoint.
#[derive(Debug, Clone, Args)]
pub struct MockArgs {
    /// Use the built-in synthetic model with this seed.
    #[arg(long)]
    pub mock_seed: Option<u64>,
    #[arg(long, default_value_t = 0.0, requires = "mock_seed")]
    pub malformed_rate: f64,
    #[arg(long, default_value_t = 0.0, requires = "mock_seed")]
    pub leak_rate: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub min_views: Option<u64>,
    #[arg(long)]
    pub min_context_words: Option<usize>,
    #[arg(long)]
    pub max_context_words: Option<usize>,
    #[arg(long)]
    pub max_keyword_words: Option<usize>,
    #[arg(long)]
    pub min_keyword_chars: Option<usize>,
    #[arg(long)]
    pub max_keyword_chars: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List and fetch category pages into a page file.
    Ingest {
        /// Category to list; repeatable. Defaults to the configured list.
        #[arg(long = "category")]
        categories: Vec<String>,
        #[arg(long)]
        limit: Option<usize>,
        /// Read pages from a fixture directory instead of the live source.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply popularity, context and keyword rules to fetched pages.
    Screen {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write rejected pages with their reasons.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        rules: ScreenArgs,
    },
    /// Ask the model for clues for every screened page.
    Generate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        mock: MockArgs,
    },
    /// Turn generations into corpus rows.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus counts and length histograms.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Category-stratified train/test split.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        test_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Receives train.jsonl and test.jsonl.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Keep a seeded fraction of a training set.
    Truncate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Instruction-tuning export: rendered prompt and JSON target per row.
    Export {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated clues against reference clues with ROUGE.
    Evaluate {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best-sentence ROUGE-L of every clue against its own context.
    Adherence {
        #[arg(long)]
        data: PathBuf,
        /// Histogram spec, `buckets=N`.
        #[arg(long, default_value = "buckets=20")]
        histogram: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lay out keyword and clue pairs as a crossword.
    Assemble {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 15)]
        rows: usize,
        #[arg(long, default_value_t = 15)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// text, html or printable.
        #[arg(long, default_value = "text")]
        format: String,
        /// Hide the letters.
        #[arg(long)]
        blank: bool,
        /// Allow letter runs that are not words.
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        time_budget_ms: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the layout as JSON.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Rating ledger tools.
    Ratings {
        #[command(subcommand)]
        action: RatingsCommand,
    },
    /// Serve the review API and UI assets.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        ledger: PathBuf,
        /// Directory with the built review UI.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Run every stage, resuming earlier progress, then split.
    Pipeline {
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[command(flatten)]
        mock: MockArgs,
    },
    /// Import an externally published corpus.
    Import {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        id_column: Option<String>,
        #[arg(long)]
        context_column: Option<String>,
        #[arg(long)]
        keyword_column: Option<String>,
        #[arg(long)]
        category_column: Option<String>,
        #[arg(long)]
        clues_column: Option<String>,
        #[arg(long)]
        url_column: Option<String>,
    },
    /// Print the effective config as TOML.
    ShowConfig,
    /// Run a local chat-completions endpoint with synthetic replies.
    MockLlm {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8089)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        malformed_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        leak_rate: f64,
        /// Require this bearer token.
        #[arg(long)]
        api_key: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RatingsCommand {
    /// Every judgment as CSV, superseded ones flagged.
    Export {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rating distribution and acceptable share.
    Summary {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        annotator: Option<String>,
        #[arg(long)]
        model: Option<String>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    commands::dispatch(cli)
}
