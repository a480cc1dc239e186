use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Localize Python code through bijective term lexicons, and build those lexicons.
#[derive(Debug, Parser)]
#[command(name = "pyloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct BackendArgs {
    /// Pipeline config (key=value lines or JSON) with endpoint settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Answer every backend request from this fixture file; no network access.
    #[arg(long, conflicts_with = "record")]
    fixtures: Option<PathBuf>,
    /// Record live responses into this fixture file.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Maximum backend requests in flight.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand abbreviated terms into full English phrases.
    Expand {
        /// One term per line.
        #[arg(long)]
        terms: PathBuf,
        #[arg(long, default_value = "five_shot")]
        strategy: String,
        /// Only split identifiers on underscores, case and digits; no backend.
        #[arg(long)]
        split_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Translate expanded terms into a target language.
    TranslateTerms {
        /// `term<TAB>expansion` lines, `-` for none.
        #[arg(long)]
        expansions: PathBuf,
        #[arg(long)]
        lang: String,
        #[arg(long, default_value = "mt_no_cntxt")]
        method: String,
        /// `term<TAB>gloss` lines for the def and expl methods.
        #[arg(long)]
        glosses: Option<PathBuf>,
        /// Lexicon of the reference language for llm_all_other.
        #[arg(long)]
        reference_lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Add collision-free abbreviations to a lexicon.
    Abbreviate {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run expansion, translation, post-processing and abbreviation end to end.
    BuildLexicon {
        #[arg(long)]
        terms: PathBuf,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        abbreviate: bool,
        #[arg(long)]
        glosses: Option<PathBuf>,
        #[arg(long)]
        reference_lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Union of lexicons for the same language.
    MergeLexicons {
        #[arg(long = "lexicon", required = true, num_args = 1..)]
        lexicons: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite English Python terms into the lexicon's language.
    TranslateCode {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Rewrite a translated program back into English Python.
    RestoreCode {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Translate, restore and run a program, comparing stdout and exit codes.
    ExecCheck {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        interpreter: PathBuf,
        /// Directory for temporary program files.
        #[arg(long)]
        scratch: Option<PathBuf>,
        /// Keyword list, one per line, instead of the built-in Python set.
        #[arg(long)]
        keywords: Option<PathBuf>,
    },
    /// Score hypotheses against references with exact match and chrF.
    Evaluate {
        /// `term<TAB>hypothesis<TAB>reference` lines.
        #[arg(long)]
        pairs: PathBuf,
        /// Write the per-term TSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CodeArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    keywords: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
