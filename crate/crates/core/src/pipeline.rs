//! End-to-end pipeline steps behind the command-line subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigFileError, GraphLayer, PipelineConfig, SourceOrder};
use crate::conllu::{basic_graph, enhanced_graph, ConlluError, ConlluReader, GraphError};
use crate::features::{self, EvalReport, FeatureError, FeatureFormat, LabeledPair};
use crate::io::{create_text, open_text};
use crate::pairs::{
    aggregate_pairs, augment_with_types, extract_pairs, write_pairs, Gazetteer, GazetteerError,
    PairFileError, PairReader, TermContextPair,
};
use crate::store::{self, NeighborResult, StoreError};
use crate::trainer::{self, TrainError, TrainReport};
use crate::vocab::{build_negative_table, build_vocab, VocabError, Vocabulary};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Corpus { path: PathBuf, source: ConlluError },

    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },

    #[error("{path}: {source}")]
    PairFile {
        path: PathBuf,
        source: PairFileError,
    },

    #[error("{path}: {source}")]
    Gazetteer {
        path: PathBuf,
        source: GazetteerError,
    },

    #[error("{path}: {source}")]
    Model { path: PathBuf, source: StoreError },

    #[error("{path}: {source}")]
    MentionFile { path: PathBuf, source: FeatureError },

    #[error(transparent)]
    Config(#[from] ConfigFileError),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error(transparent)]
    Vocab(#[from] VocabError),

    #[error(transparent)]
    Train(#[from] TrainError),

    #[error(transparent)]
    Query(StoreError),

    #[error(transparent)]
    Features(FeatureError),
}

/// Process exit codes for the three error classes.
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_DATA: i32 = 5;

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. }
            | PipelineError::Corpus { .. }
            | PipelineError::Graph { .. }
            | PipelineError::PairFile { .. }
            | PipelineError::Gazetteer { .. }
            | PipelineError::Model { .. }
            | PipelineError::MentionFile { .. } => EXIT_INPUT,
            PipelineError::Config(_) => EXIT_CONFIG,
            PipelineError::Train(TrainError::InvalidHyperparams(_)) => EXIT_CONFIG,
            PipelineError::Features(
                FeatureError::InvalidBoundaries(_) | FeatureError::InvalidChannel(_),
            ) => EXIT_CONFIG,
            PipelineError::Query(StoreError::MalformedSlot(_)) => EXIT_CONFIG,
            PipelineError::Vocab(VocabError::Io(_) | VocabError::Malformed { .. }) => EXIT_INPUT,
            PipelineError::Train(TrainError::Checkpoint(_)) => EXIT_INPUT,
            _ => EXIT_DATA,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

fn validated(config: &PipelineConfig) -> Result<(), PipelineError> {
    config.validate()?;
    log::debug!("resolved configuration:\n{}", config.to_toml());
    Ok(())
}

/// Counts reported by [`cmd_extract`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractStats {
    pub sentences: u64,
    pub skipped_sentences: u64,
    /// Dependency edges considered.
    pub raw_edges: u64,
    /// Pairs surviving the argument and relation filters.
    pub filtered_pairs: u64,
    /// Pairs after entity-type augmentation.
    pub augmented_pairs: u64,
    /// Lines written to the pair file.
    pub written_lines: u64,
}

fn extract_file(
    path: &Path,
    gazetteer: &Gazetteer,
    config: &PipelineConfig,
) -> Result<(Vec<TermContextPair>, ExtractStats), PipelineError> {
    let reader = open_text(path).map_err(io_err(path))?;
    let mut conllu = ConlluReader::new(reader, config.corpus.malformed.into());
    let mut stats = ExtractStats::default();
    let mut pairs = Vec::new();

    for sentence in conllu.by_ref() {
        let sentence = sentence.map_err(|source| PipelineError::Corpus {
            path: path.to_owned(),
            source,
        })?;
        let graph = match config.corpus.layer {
            GraphLayer::Basic => basic_graph(&sentence),
            GraphLayer::Enhanced => enhanced_graph(&sentence),
        }
        .map_err(|source| PipelineError::Graph {
            path: path.to_owned(),
            source,
        })?;
        stats.sentences += 1;
        stats.raw_edges += graph.edges().len() as u64;
        let extracted = extract_pairs(&graph, &sentence, &config.extraction);
        stats.filtered_pairs += extracted.len() as u64;
        let augmented = augment_with_types(extracted, &sentence, gazetteer);
        stats.augmented_pairs += augmented.len() as u64;
        pairs.extend(augmented);
    }
    stats.skipped_sentences = conllu.skipped() as u64;
    Ok((pairs, stats))
}

pub fn load_gazetteer(path: &Path) -> Result<Gazetteer, PipelineError> {
    let reader = open_text(path).map_err(io_err(path))?;
    Gazetteer::read(reader).map_err(|source| PipelineError::Gazetteer {
        path: path.to_owned(),
        source,
    })
}

/// Reads CoNLL-U corpora and writes their term-context pairs.
///
/// Files are processed concurrently, one thread per file, and their pairs
/// concatenated in argument order.
pub fn cmd_extract(
    corpora: &[PathBuf],
    gazetteer: Option<&Path>,
    config: &PipelineConfig,
    out: &Path,
) -> Result<ExtractStats, PipelineError> {
    validated(config)?;
    let gazetteer_path = gazetteer.or(config.paths.gazetteer.as_deref());
    let gazetteer = match gazetteer_path {
        Some(path) => load_gazetteer(path)?,
        None => Gazetteer::new(),
    };

    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = corpora
            .iter()
            .map(|path| {
                let gazetteer = &gazetteer;
                scope.spawn(move || extract_file(path, gazetteer, config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction thread panicked"))
            .collect()
    });

    let mut stats = ExtractStats::default();
    let mut pairs = Vec::new();
    for result in results {
        let (file_pairs, file_stats) = result?;
        stats.sentences += file_stats.sentences;
        stats.skipped_sentences += file_stats.skipped_sentences;
        stats.raw_edges += file_stats.raw_edges;
        stats.filtered_pairs += file_stats.filtered_pairs;
        stats.augmented_pairs += file_stats.augmented_pairs;
        pairs.extend(file_pairs);
    }
    if stats.sentences == 0 {
        return Err(PipelineError::EmptyCorpus(
            "no sentences in input".to_owned(),
        ));
    }

    let pairs = if config.corpus.aggregate {
        aggregate_pairs(pairs)
    } else {
        pairs
    };
    stats.written_lines = pairs.len() as u64;
    let writer = create_text(out).map_err(io_err(out))?;
    write_pairs(writer, &pairs).map_err(io_err(out))?;

    log::info!(
        "{} sentences ({} skipped), {} edges, {} pairs after filtering, {} after type augmentation",
        stats.sentences,
        stats.skipped_sentences,
        stats.raw_edges,
        stats.filtered_pairs,
        stats.augmented_pairs
    );
    Ok(stats)
}

pub fn read_pair_file(path: &Path) -> Result<Vec<TermContextPair>, PipelineError> {
    let reader = open_text(path).map_err(io_err(path))?;
    PairReader::new(reader)
        .collect::<Result<_, _>>()
        .map_err(|source| PipelineError::PairFile {
            path: path.to_owned(),
            source,
        })
}

/// Merges sources so that each advances in proportion to its length.
pub fn interleave_sources<T>(sources: Vec<Vec<T>>) -> Vec<T> {
    let lens: Vec<usize> = sources.iter().map(Vec::len).collect();
    let total = lens.iter().sum();
    let mut taken = vec![0usize; sources.len()];
    let mut iters: Vec<_> = sources.into_iter().map(Vec::into_iter).collect();
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        // Source whose next item sits earliest in its own relative order.
        let next = (0..iters.len())
            .filter(|&i| taken[i] < lens[i])
            .min_by(|&a, &b| {
                let fa = (2 * taken[a] + 1) as f64 / lens[a] as f64;
                let fb = (2 * taken[b] + 1) as f64 / lens[b] as f64;
                fa.total_cmp(&fb).then(a.cmp(&b))
            })
            .expect("items remain");
        out.push(iters[next].next().expect("length tracked"));
        taken[next] += 1;
    }
    out
}

pub fn load_training_pairs(
    pair_files: &[PathBuf],
    order: SourceOrder,
) -> Result<Vec<TermContextPair>, PipelineError> {
    let sources = pair_files
        .iter()
        .map(|p| read_pair_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match order {
        SourceOrder::Concatenate => sources.into_iter().flatten().collect(),
        SourceOrder::Interleave => interleave_sources(sources),
    })
}

/// Builds the vocabulary and writes `<prefix>.terms.tsv` and
/// `<prefix>.contexts.tsv`.
pub fn cmd_build_vocab(
    pair_files: &[PathBuf],
    config: &PipelineConfig,
    prefix: &Path,
) -> Result<Vocabulary, PipelineError> {
    validated(config)?;
    let pairs = load_training_pairs(pair_files, SourceOrder::Concatenate)?;
    let vocab = build_vocab(
        &pairs,
        config.vocab.min_count_term,
        config.vocab.min_count_context,
    )?;
    for (suffix, inventory) in [
        ("terms.tsv", &vocab.terms),
        ("contexts.tsv", &vocab.contexts),
    ] {
        let mut name = prefix.as_os_str().to_owned();
        name.push(".");
        name.push(suffix);
        let path = PathBuf::from(name);
        let writer = create_text(&path).map_err(io_err(&path))?;
        inventory.write(writer).map_err(io_err(&path))?;
    }
    log::info!(
        "{} terms ({} dropped), {} contexts ({} dropped)",
        vocab.terms.len(),
        vocab.terms.dropped_entries(),
        vocab.contexts.len(),
        vocab.contexts.dropped_entries()
    );
    Ok(vocab)
}

/// Builds vocabulary and negative table, trains and writes the model.
pub fn cmd_train(
    pair_files: &[PathBuf],
    config: &PipelineConfig,
    out: &Path,
) -> Result<TrainReport, PipelineError> {
    validated(config)?;
    let pairs = load_training_pairs(pair_files, config.sources.order)?;
    if pairs.is_empty() {
        return Err(PipelineError::EmptyCorpus("no pairs in input".to_owned()));
    }
    let vocab = build_vocab(
        &pairs,
        config.vocab.min_count_term,
        config.vocab.min_count_context,
    )?;
    let table = build_negative_table(&vocab, config.vocab.smoothing);
    log::info!(
        "training on {} pairs: {} terms, {} contexts",
        pairs.len(),
        vocab.terms.len(),
        vocab.contexts.len()
    );
    let trained = trainer::train(
        &pairs,
        &vocab,
        &table,
        &config.training,
        config.paths.checkpoint_dir.as_deref(),
    )?;
    store::save(&trained.model, out).map_err(|source| PipelineError::Model {
        path: out.to_owned(),
        source,
    })?;
    Ok(trained.report)
}

pub fn load_model(path: &Path) -> Result<trainer::EmbeddingModel, PipelineError> {
    store::load(path).map_err(|source| PipelineError::Model {
        path: path.to_owned(),
        source,
    })
}

pub fn cmd_query(model: &Path, query: &str, k: usize) -> Result<NeighborResult, PipelineError> {
    let model = load_model(model)?;
    store::neighbors(&model, query, k).map_err(PipelineError::Query)
}

/// Plausibility of `term` in `slot`; unknown keys are a data error naming the
/// catalog they were looked up in.
pub fn cmd_plausibility(model: &Path, term: &str, slot: &str) -> Result<f64, PipelineError> {
    let model = load_model(model)?;
    let score = store::plausibility(&model, term, slot).map_err(PipelineError::Query)?;
    score.ok_or_else(|| {
        let vocab = model.vocab();
        let key = if vocab.term(term).is_none() {
            term
        } else {
            slot
        };
        PipelineError::Query(StoreError::UnknownKey {
            key: key.to_owned(),
        })
    })
}

pub fn cmd_export_text(model: &Path, out: &Path) -> Result<(), PipelineError> {
    let model = load_model(model)?;
    let writer = create_text(out).map_err(io_err(out))?;
    store::export_text(&model, writer).map_err(io_err(out))
}

fn read_mention_file(
    path: &Path,
    require_label: bool,
) -> Result<Vec<features::MentionPairRow>, PipelineError> {
    let reader = open_text(path).map_err(io_err(path))?;
    let rows = features::read_mention_pairs(reader, require_label).map_err(|source| {
        PipelineError::MentionFile {
            path: path.to_owned(),
            source,
        }
    })?;
    if rows.is_empty() {
        return Err(PipelineError::EmptyCorpus(format!(
            "no mention pairs in {}",
            path.display()
        )));
    }
    Ok(rows)
}

/// Writes one binned-feature line per mention pair.
pub fn cmd_features<W: Write>(
    model: &Path,
    mention_pairs: &Path,
    config: &PipelineConfig,
    out: W,
) -> Result<usize, PipelineError> {
    validated(config)?;
    let boundaries = config
        .features
        .boundaries()
        .map_err(PipelineError::Features)?;
    let channels = config
        .features
        .channels()
        .map_err(PipelineError::Features)?;
    let format = if config.features.dense {
        FeatureFormat::Dense
    } else {
        FeatureFormat::Sparse
    };
    let model = load_model(model)?;
    let rows = read_mention_file(mention_pairs, false)?;
    features::write_features(out, &rows, &model, &boundaries, &channels, format).map_err(
        |source| PipelineError::Io {
            path: PathBuf::from("<output>"),
            source,
        },
    )?;
    Ok(rows.len())
}

pub fn cmd_eval(
    model: &Path,
    mention_pairs: &Path,
    config: &PipelineConfig,
) -> Result<EvalReport, PipelineError> {
    validated(config)?;
    let channel = config
        .features
        .eval_channel()
        .map_err(PipelineError::Features)?;
    let model = load_model(model)?;
    let pairs: Vec<LabeledPair> = read_mention_file(mention_pairs, true)?
        .into_iter()
        .map(|row| LabeledPair {
            antecedent: row.antecedent,
            anaphor: row.anaphor,
            coreferent: row.label.expect("label required"),
        })
        .collect();
    features::eval_pairs(&model, &pairs, channel, config.features.threshold)
        .map_err(PipelineError::Features)
}

/// Writes the report's `key=value` lines.
pub fn write_key_values<W: Write>(report: &EvalReport, mut out: W) -> io::Result<()> {
    for (k, v) in report.key_values() {
        writeln!(out, "{}={}", k, v)?;
    }
    out.flush()
}

/// SHA-256 of a file, hex encoded.
pub fn file_digest(path: &Path) -> io::Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path)?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect())
}
