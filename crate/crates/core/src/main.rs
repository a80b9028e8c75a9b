use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use selpref::config::PipelineConfig;
use selpref::pairs::PredicateKey;
use selpref::pipeline::{self, PipelineError};
use selpref::trainer::Mode;

#[derive(Parser)]
#[command(
    name = "selpref",
    version,
    about = "Selectional-preference embeddings toolkit"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    negatives: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    subsample: Option<f64>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    min_count_term: Option<u64>,
    #[arg(long, global = true)]
    min_count_context: Option<u64>,
    #[arg(long, global = true, value_parser = parse_predicate_key)]
    predicate_key: Option<PredicateKey>,
    #[arg(long, global = true)]
    include_pronouns: bool,
    /// Comma-separated ascending bin boundaries.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    boundaries: Option<Vec<f64>>,
    #[arg(long, global = true)]
    channels: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    eval_channel: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract term-context pairs from CoNLL-U corpora.
    Extract {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Count vocabularies and write PREFIX.terms.tsv / PREFIX.contexts.tsv.
    BuildVocab {
        #[arg(required = true)]
        pairs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train embeddings from pair files.
    Train {
        #[arg(required = true)]
        pairs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Nearest slots, entity types and phrases of a key.
    Query {
        model: PathBuf,
        query: String,
        #[arg(short, default_value_t = 10)]
        k: usize,
    },
    /// Cosine plausibility of a term filling a predicate slot.
    Plausibility {
        model: PathBuf,
        term: String,
        slot: String,
    },
    /// Binned similarity features for mention pairs.
    Features {
        model: PathBuf,
        mention_pairs: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dense: bool,
    },
    /// Correlate one similarity channel with coreference labels.
    Eval {
        model: PathBuf,
        mention_pairs: PathBuf,
    },
    /// Write the model in word2vec-style text.
    Export { model: PathBuf, output: PathBuf },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "deterministic" => Ok(Mode::Deterministic),
        "parallel" => Ok(Mode::Parallel),
        _ => Err(format!("unknown mode '{}'", s)),
    }
}

fn parse_predicate_key(s: &str) -> Result<PredicateKey, String> {
    match s {
        "form" => Ok(PredicateKey::Form),
        "lemma" => Ok(PredicateKey::Lemma),
        _ => Err(format!("unknown predicate key '{}'", s)),
    }
}

fn apply(o: &Overrides, c: &mut PipelineConfig) {
    macro_rules! set {
        ($flag:expr, $field:expr) => {
            if let Some(v) = $flag.clone() {
                $field = v;
            }
        };
    }
    set!(o.seed, c.training.seed);
    set!(o.dim, c.training.dim);
    set!(o.negatives, c.training.negatives);
    set!(o.epochs, c.training.epochs);
    set!(o.subsample, c.training.subsample);
    set!(o.mode, c.training.mode);
    set!(o.threads, c.training.threads);
    set!(o.min_count_term, c.vocab.min_count_term);
    set!(o.min_count_context, c.vocab.min_count_context);
    set!(o.predicate_key, c.extraction.predicate_key);
    set!(o.boundaries, c.features.boundaries);
    set!(o.channels, c.features.channels);
    set!(o.threshold, c.features.threshold);
    set!(o.eval_channel, c.features.eval_channel);
    if let Some(lr) = o.lr {
        c.training.initial_lr = lr;
        c.training.min_lr = lr * 1e-4;
    }
    if o.include_pronouns {
        c.extraction.include_pronouns = true;
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    apply(&cli.overrides, &mut config);
    log::info!("configuration:\n{}", config.to_toml());

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let print_err = |source| PipelineError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };

    match cli.command {
        Command::Extract {
            corpora,
            gazetteer,
            output,
        } => {
            let stats = pipeline::cmd_extract(&corpora, gazetteer.as_deref(), &config, &output)?;
            writeln!(
                out,
                "sentences={} skipped={} edges={} filtered_pairs={} augmented_pairs={} lines={}",
                stats.sentences,
                stats.skipped_sentences,
                stats.raw_edges,
                stats.filtered_pairs,
                stats.augmented_pairs,
                stats.written_lines
            )
            .map_err(print_err)?;
        }
        Command::BuildVocab { pairs, output } => {
            let vocab = pipeline::cmd_build_vocab(&pairs, &config, &output)?;
            writeln!(
                out,
                "terms={} contexts={}",
                vocab.terms.len(),
                vocab.contexts.len()
            )
            .map_err(print_err)?;
        }
        Command::Train { pairs, output } => {
            let report = pipeline::cmd_train(&pairs, &config, &output)?;
            let digest = pipeline::file_digest(&output).map_err(print_err)?;
            writeln!(
                out,
                "updates={} subsampled={} final_loss={:.6} sha256={}",
                report.updates,
                report.subsampled,
                report.epoch_losses.last().copied().unwrap_or(0.0),
                digest
            )
            .map_err(print_err)?;
        }
        Command::Query { model, query, k } => {
            let result = pipeline::cmd_query(&model, &query, k)?;
            write!(out, "{}", result).map_err(print_err)?;
        }
        Command::Plausibility { model, term, slot } => {
            let score = pipeline::cmd_plausibility(&model, &term, &slot)?;
            writeln!(out, "{:.6}", score).map_err(print_err)?;
        }
        Command::Features {
            model,
            mention_pairs,
            output,
            dense,
        } => {
            config.features.dense |= dense;
            match output {
                Some(path) => {
                    let writer = selpref::io::create_text(&path).map_err(print_err)?;
                    pipeline::cmd_features(&model, &mention_pairs, &config, writer)?;
                }
                None => {
                    pipeline::cmd_features(&model, &mention_pairs, &config, &mut out)?;
                }
            }
        }
        Command::Eval {
            model,
            mention_pairs,
        } => {
            let report = pipeline::cmd_eval(&model, &mention_pairs, &config)?;
            write!(out, "{}", report).map_err(print_err)?;
            pipeline::write_key_values(&report, &mut out).map_err(print_err)?;
        }
        Command::Export { model, output } => pipeline::cmd_export_text(&model, Path::new(&output))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            let code = err.exit_code();
            ExitCode::from(code as u8)
        }
    }
}
