//! `figlit`: build idiom dictionaries, detect and literalize figurative
//! utterances, and compute corpus statistics and evaluation reports.
//!
//! Exit codes: 0 success, 1 validation failure, 2 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use figlit::literalizer::ContextMode;
use figlit::metrics::Smoothing;

#[derive(Parser, Debug)]
#[command(name = "figlit", version, about = "Detect and literalize figurative language in dialog corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean, expand and compile a lexicon into a replacement dictionary.
    BuildLexicon(BuildLexiconArgs),
    /// Find idiom spans and metaphor-scored utterances in a corpus.
    Detect(DetectArgs),
    /// Replace detected spans with their glosses.
    Literalize(LiteralizeArgs),
    /// Figurative prevalence statistics.
    Stats(StatsArgs),
    /// Score responses, compare conditions, or compute detection recall.
    Evaluate(EvaluateArgs),
    /// Write seeded synthetic fixtures.
    #[command(hide = true)]
    GenFixtures(GenFixturesArgs),
}

#[derive(Args, Debug)]
struct DictionarySource {
    /// Raw lexicon file (expanded on the fly).
    #[arg(long, conflicts_with = "dictionary", required_unless_present = "dictionary")]
    lexicon: Option<PathBuf>,
    /// Compiled dictionary written by build-lexicon.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Irregular verb table overriding the bundled one (with --lexicon).
    #[arg(long, requires = "lexicon")]
    verbs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildLexiconArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Irregular verb table overriding the bundled one.
    #[arg(long)]
    verbs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    dict: DictionarySource,
    /// Metaphor probabilities (utterance_id<TAB>p).
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = figlit::detector::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Detection records.
    #[arg(long)]
    out: PathBuf,
    /// Also write the run summary here (it always goes to stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    LastUtterance,
    Anywhere,
}

impl From<ModeArg> for ContextMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::LastUtterance => ContextMode::LastUtterance,
            ModeArg::Anywhere => ContextMode::Anywhere,
        }
    }
}

#[derive(Args, Debug)]
struct LiteralizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    dict: DictionarySource,
    /// Detection records from `detect`; detection runs inline when absent.
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Only rewrite utterances listed in this gold annotation file.
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Anywhere)]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
    /// Replacement audit; defaults to `<out>.audit`.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Gold annotations; their ids form the figurative set.
    #[arg(long, conflicts_with = "detections", required_unless_present = "detections")]
    gold: Option<PathBuf>,
    /// Detection records; the union of detected ids forms the figurative set.
    #[arg(long)]
    detections: Option<PathBuf>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(subcommand)]
    command: EvaluateCommand,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SmoothingArg {
    None,
    AddOne,
}

impl From<SmoothingArg> for Smoothing {
    fn from(s: SmoothingArg) -> Self {
        match s {
            SmoothingArg::None => Smoothing::None,
            SmoothingArg::AddOne => Smoothing::AddOne,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SourceArg {
    Idiom,
    Metaphor,
    All,
}

#[derive(Subcommand, Debug)]
enum EvaluateCommand {
    /// Compare systems before and after literalization (or any two conditions).
    Compare {
        #[arg(long)]
        references: PathBuf,
        /// NAME=PATH, repeatable.
        #[arg(long, required = true, value_parser = parse_system)]
        before: Vec<(String, PathBuf)>,
        /// NAME=PATH, repeatable.
        #[arg(long, required = true, value_parser = parse_system)]
        after: Vec<(String, PathBuf)>,
        #[arg(long, value_enum, default_value_t = SmoothingArg::None)]
        smoothing: SmoothingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BLEU-1..4 and ROUGE-L for each system against the references.
    Score {
        #[arg(long)]
        references: PathBuf,
        /// NAME=PATH, repeatable.
        #[arg(long, required = true, value_parser = parse_system)]
        responses: Vec<(String, PathBuf)>,
        #[arg(long, value_enum, default_value_t = SmoothingArg::None)]
        smoothing: SmoothingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detection recall (and precision) against gold annotations.
    Recall {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Which detected set to score.
        #[arg(long, value_enum, default_value_t = SourceArg::All)]
        source: SourceArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GenFixturesArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    dialogs: usize,
    #[arg(long, default_value_t = 40)]
    patterns: usize,
    /// Output directory (must exist).
    #[arg(long)]
    out: PathBuf,
}

fn parse_system(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIGLIT_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
