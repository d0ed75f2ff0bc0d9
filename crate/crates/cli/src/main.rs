//! `newsgrid` command-line entry point.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use newsgrid::aggregate::AggregationStrategy;
use newsgrid::evaluate::Design;
use newsgrid::featurize::LabelingScheme;
use newsgrid::pipeline::Scheme;

use config::{FileConfig, Overrides, RunConfig};

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input layout: exit 2.
    Usage(String),
    /// Some units of work failed: exit 1.
    Partial(String),
    /// Nothing could be done: exit 1.
    Failed(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "newsgrid", version, about = "Attribute extraction for multilingual news pages")]
struct Cli {
    /// Output format of reports written to stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct DatasetArgs {
    /// Dataset root: one directory per site with page_<k>.html/.json pairs.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Restrict to these languages (repeatable).
    #[arg(long = "lang")]
    languages: Vec<String>,
}

#[derive(Args, Debug, Default, Clone)]
struct ModelArgs {
    /// Token sequence layout.
    #[arg(long, value_parser = parse_from_str::<Scheme>)]
    scheme: Option<Scheme>,
    #[arg(long)]
    max_seq_length: Option<usize>,
    #[arg(long)]
    doc_stride: Option<usize>,
    /// BOS_ONLY or ALL_TOKENS.
    #[arg(long, value_parser = parse_from_str::<LabelingScheme>)]
    labeling: Option<LabelingScheme>,
    /// BOS, FIRST, AVG, MAX or ANY.
    #[arg(long, value_parser = parse_from_str::<AggregationStrategy>)]
    strategy: Option<AggregationStrategy>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Seed of the training shuffle.
    #[arg(long)]
    train_seed: Option<u64>,
}

#[derive(Args, Debug, Default, Clone)]
struct TranslateArgs {
    /// identity, glossary:<file> or remote:<url>.
    #[arg(long)]
    translator: Option<String>,
    /// Texts per remote request.
    #[arg(long)]
    translate_batch: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Re-run wrapper selectors and sanity-check annotated values.
    Validate {
        #[command(flatten)]
        data: DatasetArgs,
        /// Minimum length of the text attribute in characters.
        #[arg(long)]
        min_text_chars: Option<usize>,
    },
    /// Sites, pages and annotated nodes per language and attribute.
    Stats {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Write labeled chunks as JSON lines.
    Featurize {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Output .jsonl file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the softmax classifier on every selected page.
    Train {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Checkpoint path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract articles from HTML files.
    Extract {
        /// An .html file or a directory searched recursively.
        #[arg(long)]
        input: PathBuf,
        /// Directory receiving one article JSON per page.
        #[arg(long)]
        out: Option<PathBuf>,
        /// heuristic, softmax:<checkpoint> or external:<dir>.
        #[arg(long)]
        method: Option<String>,
        /// Language of pages without a sibling page JSON.
        #[arg(long, default_value = "en")]
        lang: String,
        /// Translate pages into English first.
        #[arg(long)]
        translate: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        translation: TranslateArgs,
    },
    /// Score a method on every page without folds.
    Evaluate {
        #[command(flatten)]
        data: DatasetArgs,
        /// heuristic, softmax:<checkpoint>, external:<dir> or articles:<dir>.
        #[arg(long)]
        method: Option<String>,
        /// Directory for report.json and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        translate: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        translation: TranslateArgs,
    },
    /// Site-level k-fold cross-validation.
    Crossval {
        #[command(flatten)]
        data: DatasetArgs,
        /// mixed, one-language:<lang> or lolo:<lang>.
        #[arg(long, value_parser = parse_from_str::<Design>)]
        design: Option<Design>,
        /// heuristic, softmax, softmax:<checkpoint>, external:<dir> or articles:<dir>.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// Seed of the site split.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for report.json and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the method on English translations of every page.
        #[arg(long)]
        translate: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        translation: TranslateArgs,
    },
    /// Translate cleaned pages into English.
    Translate {
        #[command(flatten)]
        data: DatasetArgs,
        /// Directory receiving translated page_<k>.html/.json pairs.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        translation: TranslateArgs,
    },
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn apply_model(o: &mut Overrides, m: ModelArgs) {
    o.scheme = m.scheme;
    o.max_seq_length = m.max_seq_length;
    o.doc_stride = m.doc_stride;
    o.labeling = m.labeling;
    o.strategy = m.strategy;
    o.epochs = m.epochs;
    o.learning_rate = m.learning_rate;
    o.batch_size = m.batch_size;
    o.train_seed = m.train_seed;
}

fn apply_data(o: &mut Overrides, d: DatasetArgs) {
    o.dataset = d.dataset;
    o.languages = d.languages;
}

fn apply_translation(o: &mut Overrides, t: TranslateArgs) {
    o.translator = t.translator;
    o.translate_batch = t.translate_batch;
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut o = Overrides {
        threads: cli.threads,
        ..Overrides::default()
    };
    let format = cli.format;
    let command = cli.command;
    match &command {
        Command::Validate { data, min_text_chars } => {
            apply_data(&mut o, data.clone());
            o.min_text_chars = *min_text_chars;
        }
        Command::Stats { data } => apply_data(&mut o, data.clone()),
        Command::Featurize { data, model, out } | Command::Train { data, model, out } => {
            apply_data(&mut o, data.clone());
            apply_model(&mut o, model.clone());
            o.output = out.clone();
        }
        Command::Extract {
            out,
            method,
            translate,
            model,
            translation,
            ..
        } => {
            o.output = out.clone();
            o.method = method.clone();
            o.translate = *translate;
            apply_model(&mut o, model.clone());
            apply_translation(&mut o, translation.clone());
        }
        Command::Evaluate {
            data,
            method,
            out,
            translate,
            model,
            translation,
        } => {
            apply_data(&mut o, data.clone());
            o.method = method.clone();
            o.output = out.clone();
            o.translate = *translate;
            apply_model(&mut o, model.clone());
            apply_translation(&mut o, translation.clone());
        }
        Command::Crossval {
            data,
            design,
            method,
            k,
            seed,
            out,
            translate,
            model,
            translation,
        } => {
            apply_data(&mut o, data.clone());
            o.design = design.clone();
            o.method = method.clone();
            o.k = *k;
            o.seed = *seed;
            o.output = out.clone();
            o.translate = *translate;
            apply_model(&mut o, model.clone());
            apply_translation(&mut o, translation.clone());
        }
        Command::Translate { data, out, translation } => {
            apply_data(&mut o, data.clone());
            o.output = out.clone();
            apply_translation(&mut o, translation.clone());
        }
    }
    let cfg = RunConfig::resolve(file, o)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match command {
        Command::Validate { .. } => commands::validate(&cfg, format),
        Command::Stats { .. } => commands::stats(&cfg, format),
        Command::Featurize { .. } => commands::featurize(&cfg, format),
        Command::Train { .. } => commands::train(&cfg, format),
        Command::Extract { input, lang, .. } => commands::extract(&cfg, &input, &lang, format),
        Command::Evaluate { .. } => commands::evaluate(&cfg, format),
        Command::Crossval { .. } => commands::crossval(&cfg, format),
        Command::Translate { .. } => commands::translate(&cfg, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Partial(m)) => {
            eprintln!("warning: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Failed(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
