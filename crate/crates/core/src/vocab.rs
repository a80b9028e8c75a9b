//! Term and context vocabularies, subsampling and the negative-sampling
//! distribution.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use thiserror::Error;

use crate::pairs::TermContextPair;

pub const DEFAULT_SMOOTHING: f64 = 0.75;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no {0} reaches the minimum count")]
    NothingKept(&'static str),

    #[error("vocabulary file line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// One side of the vocabulary: keys with counts, indexed densely by
/// descending count with lexicographic tie-break.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Inventory {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    total: u64,
    dropped_entries: u64,
    dropped_tokens: u64,
    min_count: u64,
}

impl Inventory {
    fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Self {
        let total = counts.values().sum();
        let mut dropped_entries = 0;
        let mut dropped_tokens = 0;
        let mut entries = Vec::with_capacity(counts.len());
        for (key, count) in counts {
            if count >= min_count {
                entries.push((key, count));
            } else {
                dropped_entries += 1;
                dropped_tokens += count;
            }
        }
        entries.sort_by(|(ka, ca), (kb, cb)| cb.cmp(ca).then_with(|| ka.cmp(kb)));
        Self::from_parts(entries, total, dropped_entries, dropped_tokens, min_count)
    }

    pub(crate) fn from_parts(
        entries: Vec<(String, u64)>,
        total: u64,
        dropped_entries: u64,
        dropped_tokens: u64,
        min_count: u64,
    ) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (k, _))| (k.clone(), i))
            .collect();
        Inventory {
            entries,
            index,
            total,
            dropped_entries,
            dropped_tokens,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, idx: usize) -> &str {
        &self.entries[idx].0
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.entries[idx].1
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Total token count, kept plus dropped.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn kept_tokens(&self) -> u64 {
        self.total - self.dropped_tokens
    }

    pub fn dropped_entries(&self) -> u64 {
        self.dropped_entries
    }

    pub fn dropped_tokens(&self) -> u64 {
        self.dropped_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Writes the `key \t count` layout with a header of totals.
    pub fn write<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(
            writer,
            "# total={} dropped_entries={} dropped_tokens={} min_count={}",
            self.total, self.dropped_entries, self.dropped_tokens, self.min_count
        )?;
        for (key, count) in &self.entries {
            writeln!(writer, "{}\t{}", key, count)?;
        }
        writer.flush()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let malformed = |line, message: String| VocabError::Malformed { line, message };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| malformed(1, "missing header".to_owned()))??;
        let mut fields: HashMap<&str, u64> = HashMap::new();
        for kv in header
            .strip_prefix('#')
            .ok_or_else(|| malformed(1, "header must start with '#'".to_owned()))?
            .split_whitespace()
        {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| malformed(1, format!("bad header field '{}'", kv)))?;
            let v = v
                .parse()
                .map_err(|_| malformed(1, format!("bad header value '{}'", kv)))?;
            fields.insert(k, v);
        }
        let field = |name: &str| {
            fields
                .get(name)
                .copied()
                .ok_or_else(|| malformed(1, format!("header lacks '{}'", name)))
        };
        let (total, dropped_entries, dropped_tokens, min_count) = (
            field("total")?,
            field("dropped_entries")?,
            field("dropped_tokens")?,
            field("min_count")?,
        );

        let mut entries = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let line_no = idx + 2;
            let (key, count) = line
                .split_once('\t')
                .ok_or_else(|| malformed(line_no, "expected 'key<TAB>count'".to_owned()))?;
            let count = count
                .parse()
                .map_err(|_| malformed(line_no, format!("invalid count '{}'", count)))?;
            entries.push((key.to_owned(), count));
        }
        Ok(Self::from_parts(
            entries,
            total,
            dropped_entries,
            dropped_tokens,
            min_count,
        ))
    }
}

/// Term and context inventories of a pair corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub terms: Inventory,
    pub contexts: Inventory,
}

impl Vocabulary {
    pub fn term(&self, key: &str) -> Option<usize> {
        self.terms.lookup(key)
    }

    pub fn context(&self, key: &str) -> Option<usize> {
        self.contexts.lookup(key)
    }
}

/// Hash-count accumulator; shards can be counted separately and merged.
#[derive(Clone, Debug, Default)]
pub struct VocabBuilder {
    terms: HashMap<String, u64>,
    contexts: HashMap<String, u64>,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, pair: &TermContextPair) {
        *self.terms.entry(pair.term.clone()).or_default() += pair.weight;
        *self.contexts.entry(pair.context.clone()).or_default() += pair.weight;
    }

    pub fn merge(&mut self, other: VocabBuilder) {
        for (k, v) in other.terms {
            *self.terms.entry(k).or_default() += v;
        }
        for (k, v) in other.contexts {
            *self.contexts.entry(k).or_default() += v;
        }
    }

    pub fn build(
        self,
        min_count_term: u64,
        min_count_context: u64,
    ) -> Result<Vocabulary, VocabError> {
        if self.terms.is_empty() {
            return Err(VocabError::EmptyCorpus);
        }
        let vocab = Vocabulary {
            terms: Inventory::from_counts(self.terms, min_count_term),
            contexts: Inventory::from_counts(self.contexts, min_count_context),
        };
        if vocab.terms.is_empty() {
            return Err(VocabError::NothingKept("term"));
        }
        if vocab.contexts.is_empty() {
            return Err(VocabError::NothingKept("context"));
        }
        Ok(vocab)
    }
}

/// Counts terms and contexts and drops those below the thresholds.
pub fn build_vocab<'a>(
    pairs: impl IntoIterator<Item = &'a TermContextPair>,
    min_count_term: u64,
    min_count_context: u64,
) -> Result<Vocabulary, VocabError> {
    let mut builder = VocabBuilder::new();
    for pair in pairs {
        builder.add(pair);
    }
    builder.build(min_count_term, min_count_context)
}

/// Probability of keeping one occurrence of a key with relative frequency
/// `count / total`: `min(1, sqrt(t/f) + t/f)`.
pub fn subsample_keep_prob(count: u64, total: u64, threshold: f64) -> f64 {
    let f = count as f64 / total as f64;
    let ratio = threshold / f;
    (ratio.sqrt() + ratio).min(1.0)
}

/// Negative-sampling distribution over contexts, proportional to
/// `count^alpha`.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    probs: Vec<f64>,
    alpha: f64,
    sampler: WeightedIndex<f64>,
}

impl NegativeTable {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// Builds the smoothed unigram distribution over `vocab.contexts`.
///
/// Panics if the context inventory is empty, which `build_vocab` rules out.
pub fn build_negative_table(vocab: &Vocabulary, alpha: f64) -> NegativeTable {
    let weights: Vec<f64> = vocab
        .contexts
        .entries()
        .iter()
        .map(|(_, c)| (*c as f64).powf(alpha))
        .collect();
    let sum: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / sum).collect();
    let sampler = WeightedIndex::new(&weights).expect("non-empty context inventory");
    NegativeTable {
        probs,
        alpha,
        sampler,
    }
}
