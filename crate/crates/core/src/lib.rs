//! Dependency-based selectional-preference embeddings.
//!
//! The crate turns dependency-parsed corpora into `(term, predicate@slot)`
//! pairs, trains skip-gram negative-sampling embeddings on them and serves
//! the resulting space:
//!
//! - [`conllu`] reads CoNLL-U with basic and enhanced dependencies,
//! - [`pairs`] extracts term-context pairs and adds entity-type copies,
//! - [`vocab`] counts vocabularies and builds the negative-sampling table,
//! - [`trainer`] runs SGNS in a reproducible or a lock-free parallel mode,
//! - [`store`] saves and loads models and answers plausibility and
//!   nearest-neighbor queries,
//! - [`features`] derives binned similarity features for coreference
//!   mention pairs and correlates them with gold labels,
//! - [`pipeline`] and [`config`] wire the steps together for the `selpref`
//!   command-line tool.
//!
//! See the `examples/` directory for one runnable program per step.

pub mod config;
pub mod conllu;
pub mod features;
pub mod io;
pub mod pairs;
pub mod pipeline;
pub mod store;
pub mod trainer;
pub mod vocab;

pub use conllu::{enhanced_graph, parse_conllu, DepGraph, Sentence, Token};
pub use features::{binarize, mcc, mention_properties, pair_similarities, MentionRecord};
pub use pairs::{augment_with_types, extract_pairs, ExtractionConfig, Gazetteer, TermContextPair};
pub use store::{cosine, neighbors, plausibility, NeighborResult};
pub use trainer::{sgns_loss_and_grad, train, EmbeddingModel, Hyperparams, Mode};
pub use vocab::{build_negative_table, build_vocab, NegativeTable, Vocabulary};
