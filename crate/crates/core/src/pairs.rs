//! Term-context pair extraction.
//!
//! Every nominal dependent of a content predicate yields pairs such as
//! `(Titanic, sink@nsubj)`: the argument (its head lemma and/or its noun
//! phrase) is the term, the governor key plus relation label is the context.
//! Named entities additionally yield pairs with the entity replaced by its
//! fine-grained type path.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{DepGraph, Sentence};

/// Relations that stay inside a noun phrase when building phrase terms.
const NP_INTERNAL_RELATIONS: &[&str] = &["amod", "compound", "nummod", "flat"];

#[derive(Debug, Error)]
pub enum PairFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("at least one of emit_head_terms and emit_phrase_terms must be enabled")]
    NoTermKind,

    #[error("max_phrase_tokens must be at least 1")]
    ZeroPhraseLength,
}

/// A training instance: an argument term observed in a predicate slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermContextPair {
    pub term: String,
    pub context: String,
    pub weight: u64,
}

impl TermContextPair {
    pub fn new(term: impl Into<String>, context: impl Into<String>) -> Self {
        Self::weighted(term, context, 1)
    }

    pub fn weighted(term: impl Into<String>, context: impl Into<String>, weight: u64) -> Self {
        TermContextPair {
            term: term.into(),
            context: context.into(),
            weight,
        }
    }

    /// Splits the context into predicate key and relation.
    pub fn slot(&self) -> Option<(&str, &str)> {
        split_slot(&self.context)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.term.is_empty() {
            return Err("empty term".to_owned());
        }
        if self.term.chars().any(char::is_whitespace) {
            return Err(format!("term '{}' contains whitespace", self.term));
        }
        if self.weight == 0 {
            return Err("weight must be positive".to_owned());
        }
        if self.slot().is_none() {
            return Err(format!(
                "context '{}' is not of the form predicate@relation",
                self.context
            ));
        }
        Ok(())
    }
}

impl fmt::Display for TermContextPair {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "({}, {})", self.term, self.context)
    }
}

/// Splits `predicate@relation` when it contains exactly one `@` and both
/// sides are non-empty.
pub fn split_slot(context: &str) -> Option<(&str, &str)> {
    let (predicate, relation) = context.split_once('@')?;
    if predicate.is_empty() || relation.is_empty() || relation.contains('@') {
        return None;
    }
    Some((predicate, relation))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKey {
    Form,
    #[default]
    Lemma,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Universal POS tags of argument tokens.
    pub argument_pos: BTreeSet<String>,
    /// Adds `PRON` to the argument tags.
    pub include_pronouns: bool,
    /// Relation labels that never form a slot. A label also matches its
    /// subtypes, so `det` excludes `det:qmod`.
    pub relation_blacklist: BTreeSet<String>,
    pub predicate_key: PredicateKey,
    pub emit_head_terms: bool,
    pub emit_phrase_terms: bool,
    pub max_phrase_tokens: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            argument_pos: ["NOUN", "PROPN"].iter().map(|s| s.to_string()).collect(),
            include_pronouns: false,
            relation_blacklist: ["punct", "det", "case", "cc", "mark"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            predicate_key: PredicateKey::Lemma,
            emit_head_terms: true,
            emit_phrase_terms: true,
            max_phrase_tokens: 4,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.emit_head_terms && !self.emit_phrase_terms {
            return Err(ConfigError::NoTermKind);
        }
        if self.max_phrase_tokens == 0 {
            return Err(ConfigError::ZeroPhraseLength);
        }
        Ok(())
    }

    fn is_argument_pos(&self, upos: &str) -> bool {
        self.argument_pos.contains(upos) || (self.include_pronouns && upos == "PRON")
    }

    pub fn is_blacklisted(&self, relation: &str) -> bool {
        self.relation_blacklist
            .iter()
            .any(|b| label_matches(relation, b))
    }
}

/// `relation` equals `base` or is a subtype `base:...`.
fn label_matches(relation: &str, base: &str) -> bool {
    relation == base
        || relation
            .strip_prefix(base)
            .is_some_and(|rest| rest.starts_with(':'))
}

fn underscore_join(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Extracts pairs for every admissible argument edge of `graph`.
///
/// Pairs come out in edge order (by dependent, then governor listing), the
/// head-lemma term before the phrase term. A phrase term equal to the head
/// term is not emitted twice.
pub fn extract_pairs(
    graph: &DepGraph,
    sentence: &Sentence,
    config: &ExtractionConfig,
) -> Vec<TermContextPair> {
    let mut pairs = Vec::new();

    for edge in graph.edges() {
        if edge.governor == 0 || config.is_blacklisted(&edge.relation) {
            continue;
        }
        let (Some(governor), Some(argument)) = (
            sentence.token(edge.governor),
            sentence.token(edge.dependent),
        ) else {
            continue;
        };
        if !config.is_argument_pos(&argument.upos) {
            continue;
        }

        let predicate = match config.predicate_key {
            PredicateKey::Form => underscore_join(&governor.form),
            PredicateKey::Lemma => underscore_join(&governor.lemma),
        };
        let context = format!("{}@{}", predicate, edge.relation);
        if split_slot(&context).is_none() {
            continue;
        }

        let head_term = underscore_join(&argument.lemma);
        if config.emit_head_terms && !head_term.is_empty() {
            pairs.push(TermContextPair::new(head_term.clone(), context.clone()));
        }
        if config.emit_phrase_terms {
            let phrase =
                noun_phrase_yield(graph, sentence, argument.index, config.max_phrase_tokens);
            if !phrase.is_empty() && !(config.emit_head_terms && phrase == head_term) {
                pairs.push(TermContextPair::new(phrase, context));
            }
        }
    }

    pairs
}

/// Underscore-joined surface string of the noun phrase headed by `head`.
///
/// The phrase is the head plus its descendants via noun-phrase-internal
/// relations (amod, compound, nummod, flat and their subtypes; determiners
/// are never part of it), restricted to the contiguous span around the head.
/// If the span is longer than `max_tokens` only the head form is returned.
pub fn noun_phrase_yield(
    graph: &DepGraph,
    sentence: &Sentence,
    head: usize,
    max_tokens: usize,
) -> String {
    let Some(head_token) = sentence.token(head) else {
        return String::new();
    };

    let mut members = BTreeSet::from([head]);
    let mut stack = vec![head];
    while let Some(node) = stack.pop() {
        for edge in graph.children(node) {
            let internal = NP_INTERNAL_RELATIONS
                .iter()
                .any(|r| label_matches(&edge.relation, r));
            if internal && members.insert(edge.dependent) {
                stack.push(edge.dependent);
            }
        }
    }

    let mut start = head;
    while start > 1 && members.contains(&(start - 1)) {
        start -= 1;
    }
    let mut end = head;
    while members.contains(&(end + 1)) {
        end += 1;
    }

    if end - start + 1 > max_tokens {
        return underscore_join(&head_token.form);
    }

    (start..=end)
        .filter_map(|i| sentence.token(i))
        .map(|t| underscore_join(&t.form))
        .collect::<Vec<_>>()
        .join("_")
}

#[derive(Debug, Error)]
#[error("gazetteer line {line}: {message}")]
pub struct GazetteerError {
    pub line: usize,
    pub message: String,
}

/// Static mapping from entity surface strings to fine-grained type paths.
///
/// Lookups are exact on the underscore-joined surface first and
/// case-insensitive second.
#[derive(Clone, Debug, Default)]
pub struct Gazetteer {
    exact: HashMap<String, Vec<String>>,
    folded: HashMap<String, Vec<String>>,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, surface: &str, types: Vec<String>) -> Result<(), String> {
        if let Some(bad) = types.iter().find(|t| !t.starts_with('/')) {
            return Err(format!("type path '{}' does not start with '/'", bad));
        }
        let surface = underscore_join(surface);
        if surface.is_empty() {
            return Err("empty surface string".to_owned());
        }
        let merge = |entry: &mut Vec<String>| {
            for ty in &types {
                if !entry.contains(ty) {
                    entry.push(ty.clone());
                }
            }
        };
        merge(self.folded.entry(surface.to_lowercase()).or_default());
        merge(self.exact.entry(surface).or_default());
        Ok(())
    }

    pub fn lookup(&self, surface: &str) -> &[String] {
        if let Some(types) = self.exact.get(surface) {
            return types;
        }
        self.folded
            .get(&surface.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    /// Reads `surface \t /type[,/type...]` lines; blank lines and `#`
    /// comments are ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, GazetteerError> {
        let mut gazetteer = Gazetteer::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| GazetteerError {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, types) = line.split_once('\t').ok_or_else(|| GazetteerError {
                line: line_no,
                message: "expected 'surface<TAB>types'".to_owned(),
            })?;
            let types = types
                .split(',')
                .map(|t| t.trim().to_owned())
                .filter(|t| !t.is_empty())
                .collect::<Vec<_>>();
            if types.is_empty() {
                return Err(GazetteerError {
                    line: line_no,
                    message: "no types listed".to_owned(),
                });
            }
            gazetteer
                .insert(surface, types)
                .map_err(|message| GazetteerError {
                    line: line_no,
                    message,
                })?;
        }
        Ok(gazetteer)
    }
}

/// Type paths annotated on the sentence's tokens, keyed by form, lemma and
/// full noun phrase of the annotated token.
fn annotated_types(sentence: &Sentence) -> HashMap<String, Vec<String>> {
    let mut types: HashMap<String, Vec<String>> = HashMap::new();
    if sentence.tokens().iter().all(|t| t.entity_type.is_none()) {
        return types;
    }

    let graph = crate::conllu::enhanced_graph(sentence).ok();
    for token in sentence.tokens() {
        let Some(ty) = &token.entity_type else {
            continue;
        };
        let mut keys = vec![underscore_join(&token.form), underscore_join(&token.lemma)];
        if let Some(graph) = &graph {
            keys.push(noun_phrase_yield(graph, sentence, token.index, usize::MAX));
        }
        for key in keys {
            let entry = types.entry(key).or_default();
            if !entry.contains(ty) {
                entry.push(ty.clone());
            }
        }
    }
    types
}

/// Adds one pair per fine-grained type of each entity term.
///
/// Types come from the sentence's token annotations when present and from
/// the gazetteer otherwise. The original pairs are kept in place; each is
/// followed by its typed copies.
pub fn augment_with_types(
    pairs: Vec<TermContextPair>,
    sentence: &Sentence,
    gazetteer: &Gazetteer,
) -> Vec<TermContextPair> {
    let annotations = annotated_types(sentence);
    if annotations.is_empty() && gazetteer.is_empty() {
        return pairs;
    }

    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let types: Vec<String> = if pair.term.starts_with('/') {
            Vec::new()
        } else if let Some(types) = annotations.get(&pair.term) {
            types.clone()
        } else {
            gazetteer.lookup(&pair.term).to_vec()
        };
        let typed = types
            .into_iter()
            .map(|ty| TermContextPair::weighted(ty, pair.context.clone(), pair.weight))
            .collect::<Vec<_>>();
        out.push(pair);
        out.extend(typed);
    }
    out
}

/// Merges duplicate pairs by summing weights, keeping first-seen order.
pub fn aggregate_pairs(pairs: impl IntoIterator<Item = TermContextPair>) -> Vec<TermContextPair> {
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    let mut out: Vec<TermContextPair> = Vec::new();
    for pair in pairs {
        match index.get(&(pair.term.clone(), pair.context.clone())) {
            Some(&i) => out[i].weight += pair.weight,
            None => {
                index.insert((pair.term.clone(), pair.context.clone()), out.len());
                out.push(pair);
            }
        }
    }
    out
}

/// Writes pairs as `term \t context \t count` lines.
pub fn write_pairs<'a, W: Write>(
    mut writer: W,
    pairs: impl IntoIterator<Item = &'a TermContextPair>,
) -> io::Result<()> {
    for pair in pairs {
        writeln!(writer, "{}\t{}\t{}", pair.term, pair.context, pair.weight)?;
    }
    writer.flush()
}

/// Streaming reader for pair files.
pub struct PairReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> PairReader<R> {
    pub fn new(reader: R) -> Self {
        PairReader {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for PairReader<R> {
    type Item = Result<TermContextPair, PairFileError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(err) => return Some(Err(err.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                parse_pair_line(&line).map_err(|message| PairFileError::Malformed {
                    line: self.line_no,
                    message,
                }),
            );
        }
    }
}

fn parse_pair_line(line: &str) -> Result<TermContextPair, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let pair = match fields.as_slice() {
        [term, context] => TermContextPair::new(*term, *context),
        [term, context, count] => {
            let weight = count
                .trim()
                .parse()
                .map_err(|_| format!("invalid count '{}'", count))?;
            TermContextPair::weighted(*term, *context, weight)
        }
        _ => return Err(format!("expected 2 or 3 columns, found {}", fields.len())),
    };
    pair.validate()?;
    Ok(pair)
}

pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<TermContextPair>, PairFileError> {
    PairReader::new(reader).collect()
}
