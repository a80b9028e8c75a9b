//! Selectional-preference features for coreference mention pairs.
//!
//! Each mention contributes up to five embedding keys: the full mention
//! string, the string without leading articles, the head, the governing slot
//! `governor@deprel` and the entity type. An (antecedent, anaphor) pair
//! yields the 5×5 cosine similarities between these keys, which are then
//! binned into one-hot indicators with a dedicated bin for unknown values.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::store::cosine;
use crate::trainer::EmbeddingModel;

pub const ARTICLES: [&str; 3] = ["a", "an", "the"];
pub const DEFAULT_BOUNDARIES: [f64; 5] = [-0.1, 0.0, 0.1, 0.25, 0.5];
pub const NUM_PROPERTIES: usize = 5;
pub const NUM_CHANNELS: usize = NUM_PROPERTIES * NUM_PROPERTIES;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("bin boundaries must be strictly ascending and inside (-1, 1): {0:?}")]
    InvalidBoundaries(Vec<f64>),

    #[error("invalid channel selector '{0}'")]
    InvalidChannel(String),

    #[error("no mention pairs to evaluate")]
    EmptyInput,

    #[error("line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: &'static str,
        message: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// The five mention properties, in channel order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    FullString,
    NoArticles,
    Head,
    ContextSlot,
    EntityType,
}

impl Property {
    pub const ALL: [Property; NUM_PROPERTIES] = [
        Property::FullString,
        Property::NoArticles,
        Property::Head,
        Property::ContextSlot,
        Property::EntityType,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::FullString => "string",
            Property::NoArticles => "string_no_articles",
            Property::Head => "head",
            Property::ContextSlot => "context",
            Property::EntityType => "type",
        }
    }
}

impl FromStr for Property {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| FeatureError::InvalidChannel(s.to_owned()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MentionRecord {
    pub doc_id: String,
    pub span: String,
    pub mention_string: String,
    pub head: String,
    pub governor: Option<String>,
    pub deprel: Option<String>,
    pub entity_type: Option<String>,
}

impl MentionRecord {
    pub fn new(mention_string: &str, head: &str) -> Self {
        MentionRecord {
            mention_string: mention_string.to_owned(),
            head: head.to_owned(),
            ..MentionRecord::default()
        }
    }

    pub fn with_context(mut self, governor: &str, deprel: &str) -> Self {
        self.governor = Some(governor.to_owned());
        self.deprel = Some(deprel.to_owned());
        self
    }

    pub fn with_entity_type(mut self, entity_type: &str) -> Self {
        self.entity_type = Some(entity_type.to_owned());
        self
    }
}

/// An embedding key and, if the model knows it, its vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyKey {
    pub key: String,
    pub vector: Option<Vec<f32>>,
}

impl PropertyKey {
    pub fn is_known(&self) -> bool {
        self.vector.is_some()
    }
}

/// Resolved properties of one mention; `None` when the mention lacks the
/// property altogether.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropertySet {
    pub keys: [Option<PropertyKey>; NUM_PROPERTIES],
}

impl PropertySet {
    pub fn get(&self, property: Property) -> Option<&PropertyKey> {
        self.keys[property.index()].as_ref()
    }

    fn vector(&self, idx: usize) -> Option<&[f32]> {
        self.keys[idx].as_ref()?.vector.as_deref()
    }
}

fn join_tokens<'a>(tokens: impl Iterator<Item = &'a str>) -> Option<String> {
    let joined = tokens.collect::<Vec<_>>().join("_");
    (!joined.is_empty()).then_some(joined)
}

/// Builds the five keys of `mention` and looks them up in `model`. The slot
/// key is resolved against the context matrix, all others against the term
/// matrix.
pub fn mention_properties(mention: &MentionRecord, model: &EmbeddingModel) -> PropertySet {
    let words: Vec<&str> = mention.mention_string.split_whitespace().collect();
    let first_content = words
        .iter()
        .position(|w| !ARTICLES.contains(&w.to_lowercase().as_str()))
        .unwrap_or(words.len());

    let slot = match (&mention.governor, &mention.deprel) {
        (Some(g), Some(r)) if !g.is_empty() && !r.is_empty() => {
            join_tokens(g.split_whitespace()).map(|g| format!("{}@{}", g, r))
        }
        _ => None,
    };

    let raw = [
        join_tokens(words.iter().copied()),
        join_tokens(words[first_content..].iter().copied()),
        join_tokens(mention.head.split_whitespace()),
        slot,
        mention.entity_type.clone().filter(|t| !t.is_empty()),
    ];

    let vocab = model.vocab();
    let mut set = PropertySet::default();
    for (property, key) in Property::ALL.into_iter().zip(raw) {
        set.keys[property.index()] = key.map(|key| {
            let vector = if property == Property::ContextSlot {
                vocab
                    .context(&key)
                    .map(|i| model.context_vector(i).to_vec())
            } else {
                vocab.term(&key).map(|i| model.term_vector(i).to_vec())
            };
            PropertyKey { key, vector }
        });
    }
    set
}

/// Cosine similarities of every (antecedent property, anaphor property)
/// combination; `None` marks unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix(pub [[Option<f64>; NUM_PROPERTIES]; NUM_PROPERTIES]);

impl SimilarityMatrix {
    pub fn get(&self, channel: Channel) -> Option<f64> {
        self.0[channel.antecedent.index()][channel.anaphor.index()]
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[None; NUM_PROPERTIES]; NUM_PROPERTIES];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        SimilarityMatrix(t)
    }
}

pub fn pair_similarities(antecedent: &PropertySet, anaphor: &PropertySet) -> SimilarityMatrix {
    let mut sims = [[None; NUM_PROPERTIES]; NUM_PROPERTIES];
    for (i, row) in sims.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if let (Some(u), Some(v)) = (antecedent.vector(i), anaphor.vector(j)) {
                *cell = cosine(u, v);
            }
        }
    }
    SimilarityMatrix(sims)
}

/// An (antecedent property, anaphor property) combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Channel {
    pub antecedent: Property,
    pub anaphor: Property,
}

impl Channel {
    pub fn new(antecedent: Property, anaphor: Property) -> Self {
        Channel {
            antecedent,
            anaphor,
        }
    }

    /// Channels in row-major order, index `5 * antecedent + anaphor`.
    pub fn all() -> Vec<Channel> {
        Property::ALL
            .into_iter()
            .flat_map(|a| Property::ALL.into_iter().map(move |b| Channel::new(a, b)))
            .collect()
    }

    pub fn index(self) -> usize {
        self.antecedent.index() * NUM_PROPERTIES + self.anaphor.index()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}:{}", self.antecedent.name(), self.anaphor.name())
    }
}

impl FromStr for Channel {
    type Err = FeatureError;

    /// Parses `antecedent_property:anaphor_property`, e.g. `context:context`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| FeatureError::InvalidChannel(s.to_owned()))?;
        Ok(Channel::new(a.parse()?, b.parse()?))
    }
}

/// Parses `all` or a comma-separated list of channels.
pub fn parse_channels(s: &str) -> Result<Vec<Channel>, FeatureError> {
    if s.trim() == "all" {
        return Ok(Channel::all());
    }
    s.split(',').map(|c| c.trim().parse()).collect()
}

/// Ascending interior boundaries of the similarity bins.
#[derive(Clone, Debug, PartialEq)]
pub struct BinBoundaries(Vec<f64>);

impl BinBoundaries {
    pub fn new(boundaries: Vec<f64>) -> Result<Self, FeatureError> {
        let inside = boundaries.iter().all(|b| *b > -1.0 && *b < 1.0);
        let ascending = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !inside || !ascending {
            return Err(FeatureError::InvalidBoundaries(boundaries));
        }
        Ok(BinBoundaries(boundaries))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of score bins (excluding the unknown bin).
    pub fn score_bins(&self) -> usize {
        self.0.len() + 1
    }

    /// Bin of `score`: intervals are `[lo, hi)`, the last one closed.
    pub fn bin(&self, score: f64) -> usize {
        self.0.partition_point(|b| *b <= score)
    }
}

impl Default for BinBoundaries {
    fn default() -> Self {
        BinBoundaries(DEFAULT_BOUNDARIES.to_vec())
    }
}

/// One active bin per channel; bin `score_bins` is the unknown bin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinnedFeatureVector {
    score_bins: usize,
    active: [usize; NUM_CHANNELS],
}

impl BinnedFeatureVector {
    pub fn unknown_bin(&self) -> usize {
        self.score_bins
    }

    /// Bins per channel including the unknown bin.
    pub fn bins_per_channel(&self) -> usize {
        self.score_bins + 1
    }

    pub fn active_bin(&self, channel: Channel) -> usize {
        self.active[channel.index()]
    }

    /// Full one-hot vector of length `25 * (B + 1)`.
    pub fn dense(&self) -> Vec<u8> {
        self.dense_for(&Channel::all())
    }

    pub fn dense_for(&self, channels: &[Channel]) -> Vec<u8> {
        let width = self.bins_per_channel();
        let mut out = vec![0; channels.len() * width];
        for (slot, channel) in channels.iter().enumerate() {
            out[slot * width + self.active_bin(*channel)] = 1;
        }
        out
    }

    /// `channel:bin` tokens, channel numbered `5 * antecedent + anaphor`.
    pub fn sparse_for(&self, channels: &[Channel]) -> Vec<String> {
        channels
            .iter()
            .map(|c| format!("{}:{}", c.index(), self.active_bin(*c)))
            .collect()
    }
}

pub fn binarize(sims: &SimilarityMatrix, boundaries: &BinBoundaries) -> BinnedFeatureVector {
    let unknown = boundaries.score_bins();
    let mut active = [unknown; NUM_CHANNELS];
    for channel in Channel::all() {
        if let Some(score) = sims.get(channel) {
            active[channel.index()] = boundaries.bin(score);
        }
    }
    BinnedFeatureVector {
        score_bins: unknown,
        active,
    }
}

/// Matthews correlation coefficient; `defined` is false when a margin of the
/// confusion matrix is empty, in which case `value` is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mcc {
    pub value: f64,
    pub defined: bool,
}

pub fn mcc(tp: u64, fp: u64, fn_: u64, tn: u64) -> Mcc {
    let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
    let denom = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if denom == 0.0 {
        return Mcc {
            value: 0.0,
            defined: false,
        };
    }
    Mcc {
        value: ((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0),
        defined: true,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPair {
    pub antecedent: MentionRecord,
    pub anaphor: MentionRecord,
    pub coreferent: bool,
}

/// Five-number summary, quartiles by linear interpolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Some(Quartiles {
            min: sorted[0],
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub channel: Option<Channel>,
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub mcc: Mcc,
    pub coreferent: u64,
    pub non_coreferent: u64,
    pub unknown_coreferent: u64,
    pub unknown_non_coreferent: u64,
    pub quartiles_coreferent: Option<Quartiles>,
    pub quartiles_non_coreferent: Option<Quartiles>,
}

impl EvalReport {
    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            (
                "channel".to_owned(),
                self.channel
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| "-".into()),
            ),
            ("threshold".into(), self.threshold.to_string()),
            (
                "pairs".into(),
                (self.coreferent + self.non_coreferent).to_string(),
            ),
            ("coreferent".into(), self.coreferent.to_string()),
            ("non_coreferent".into(), self.non_coreferent.to_string()),
            (
                "unknown_coreferent".into(),
                self.unknown_coreferent.to_string(),
            ),
            (
                "unknown_non_coreferent".into(),
                self.unknown_non_coreferent.to_string(),
            ),
            ("tp".into(), self.tp.to_string()),
            ("fp".into(), self.fp.to_string()),
            ("fn".into(), self.fn_.to_string()),
            ("tn".into(), self.tn.to_string()),
            ("mcc".into(), format!("{:.6}", self.mcc.value)),
            ("mcc_defined".into(), self.mcc.defined.to_string()),
        ];
        for (name, q) in [
            ("coreferent", &self.quartiles_coreferent),
            ("non_coreferent", &self.quartiles_non_coreferent),
        ] {
            if let Some(q) = q {
                for (stat, v) in [
                    ("min", q.min),
                    ("q1", q.q1),
                    ("median", q.median),
                    ("q3", q.q3),
                    ("max", q.max),
                ] {
                    kv.push((format!("{}_{}", name, stat), format!("{:.6}", v)));
                }
            }
        }
        kv
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if let Some(channel) = self.channel {
            writeln!(f, "channel {} at threshold {}", channel, self.threshold)?;
        }
        writeln!(
            f,
            "{} coreferent ({} unknown), {} non-coreferent ({} unknown)",
            self.coreferent,
            self.unknown_coreferent,
            self.non_coreferent,
            self.unknown_non_coreferent
        )?;
        writeln!(
            f,
            "tp={} fp={} fn={} tn={}",
            self.tp, self.fp, self.fn_, self.tn
        )?;
        if self.mcc.defined {
            writeln!(f, "MCC {:.4}", self.mcc.value)?;
        } else {
            writeln!(f, "MCC undefined (empty margin), reported as 0")?;
        }
        for (label, q) in [
            ("coreferent", &self.quartiles_coreferent),
            ("non-coreferent", &self.quartiles_non_coreferent),
        ] {
            match q {
                Some(q) => writeln!(
                    f,
                    "{}: min {:.4} q1 {:.4} median {:.4} q3 {:.4} max {:.4}",
                    label, q.min, q.q1, q.median, q.q3, q.max
                )?,
                None => writeln!(f, "{}: no known scores", label)?,
            }
        }
        Ok(())
    }
}

/// Thresholded classification of precomputed scores: a pair is predicted
/// coreferent iff its score is known and at least `threshold`.
pub fn evaluate_scores(
    scores: &[(Option<f64>, bool)],
    threshold: f64,
) -> Result<EvalReport, FeatureError> {
    if scores.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut report = EvalReport {
        channel: None,
        threshold,
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
        mcc: mcc(0, 0, 0, 0),
        coreferent: 0,
        non_coreferent: 0,
        unknown_coreferent: 0,
        unknown_non_coreferent: 0,
        quartiles_coreferent: None,
        quartiles_non_coreferent: None,
    };
    let mut pos_scores = Vec::new();
    let mut neg_scores = Vec::new();
    for &(score, gold) in scores {
        let predicted = score.is_some_and(|s| s >= threshold);
        match (gold, predicted) {
            (true, true) => report.tp += 1,
            (true, false) => report.fn_ += 1,
            (false, true) => report.fp += 1,
            (false, false) => report.tn += 1,
        }
        if gold {
            report.coreferent += 1;
            match score {
                Some(s) => pos_scores.push(s),
                None => report.unknown_coreferent += 1,
            }
        } else {
            report.non_coreferent += 1;
            match score {
                Some(s) => neg_scores.push(s),
                None => report.unknown_non_coreferent += 1,
            }
        }
    }
    report.mcc = mcc(report.tp, report.fp, report.fn_, report.tn);
    report.quartiles_coreferent = Quartiles::of(&pos_scores);
    report.quartiles_non_coreferent = Quartiles::of(&neg_scores);
    Ok(report)
}

/// Correlation between one similarity channel and gold coreference labels.
pub fn eval_pairs(
    model: &EmbeddingModel,
    pairs: &[LabeledPair],
    channel: Channel,
    threshold: f64,
) -> Result<EvalReport, FeatureError> {
    let scores: Vec<(Option<f64>, bool)> = pairs
        .iter()
        .map(|p| {
            let a = mention_properties(&p.antecedent, model);
            let b = mention_properties(&p.anaphor, model);
            (pair_similarities(&a, &b).get(channel), p.coreferent)
        })
        .collect();
    let mut report = evaluate_scores(&scores, threshold)?;
    report.channel = Some(channel);
    Ok(report)
}

/// One row of a mention-pair file.
#[derive(Clone, Debug, PartialEq)]
pub struct MentionPairRow {
    pub antecedent: MentionRecord,
    pub anaphor: MentionRecord,
    pub label: Option<bool>,
}

const MENTION_COLUMNS: [&str; 14] = [
    "doc_id",
    "span_a",
    "mention_a",
    "head_a",
    "governor_a",
    "deprel_a",
    "type_a",
    "span_b",
    "mention_b",
    "head_b",
    "governor_b",
    "deprel_b",
    "type_b",
    "label",
];

fn optional(field: &str) -> Option<String> {
    let field = field.trim();
    (!field.is_empty() && field != "_").then(|| field.to_owned())
}

fn parse_mention_row(
    fields: &[&str],
    line: usize,
    require_label: bool,
) -> Result<MentionPairRow, FeatureError> {
    let schema = |column: usize, message: String| FeatureError::Schema {
        line,
        column: MENTION_COLUMNS[column.min(MENTION_COLUMNS.len() - 1)],
        message,
    };
    if fields.len() != 13 && fields.len() != 14 {
        return Err(schema(
            fields.len().min(13),
            format!("expected 13 or 14 columns, found {}", fields.len()),
        ));
    }
    let required = |col: usize| {
        optional(fields[col]).ok_or_else(|| schema(col, "required value missing".into()))
    };
    let doc_id = required(0)?;

    let mention = |base: usize| -> Result<MentionRecord, FeatureError> {
        let governor = optional(fields[base + 3]);
        let deprel = optional(fields[base + 4]);
        if governor.is_some() && deprel.is_none() {
            return Err(schema(
                base + 4,
                "relation required when a governor is given".into(),
            ));
        }
        let entity_type = optional(fields[base + 5]);
        if let Some(ty) = &entity_type {
            if !ty.starts_with('/') {
                return Err(schema(
                    base + 5,
                    format!("type path '{}' must start with '/'", ty),
                ));
            }
        }
        Ok(MentionRecord {
            doc_id: doc_id.clone(),
            span: required(base)?,
            mention_string: required(base + 1)?,
            head: required(base + 2)?,
            governor,
            deprel,
            entity_type,
        })
    };
    let antecedent = mention(1)?;
    let anaphor = mention(7)?;

    let label = match fields.get(13).map(|f| f.trim()) {
        None | Some("") | Some("_") => None,
        Some("1") | Some("true") => Some(true),
        Some("0") | Some("false") => Some(false),
        Some(other) => return Err(schema(13, format!("invalid label '{}'", other))),
    };
    if require_label && label.is_none() {
        return Err(schema(13, "label required".into()));
    }

    Ok(MentionPairRow {
        antecedent,
        anaphor,
        label,
    })
}

/// Reads the tab-separated mention-pair format. Blank lines and `#`
/// comments are skipped; `_` marks an absent optional value.
pub fn read_mention_pairs<R: BufRead>(
    reader: R,
    require_label: bool,
) -> Result<Vec<MentionPairRow>, FeatureError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        rows.push(parse_mention_row(&fields, idx + 1, require_label)?);
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FeatureFormat {
    #[default]
    Sparse,
    Dense,
}

/// Binned features of one row, formatted as one output line.
pub fn feature_line(
    row: &MentionPairRow,
    model: &EmbeddingModel,
    boundaries: &BinBoundaries,
    channels: &[Channel],
    format: FeatureFormat,
) -> String {
    let a = mention_properties(&row.antecedent, model);
    let b = mention_properties(&row.anaphor, model);
    let binned = binarize(&pair_similarities(&a, &b), boundaries);
    match format {
        FeatureFormat::Sparse => binned.sparse_for(channels).join(" "),
        FeatureFormat::Dense => binned
            .dense_for(channels)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    }
}

pub fn write_features<W: Write>(
    mut writer: W,
    rows: &[MentionPairRow],
    model: &EmbeddingModel,
    boundaries: &BinBoundaries,
    channels: &[Channel],
    format: FeatureFormat,
) -> io::Result<()> {
    for row in rows {
        writeln!(
            writer,
            "{}",
            feature_line(row, model, boundaries, channels, format)
        )?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sims_with(value: Option<f64>) -> SimilarityMatrix {
        SimilarityMatrix([[value; NUM_PROPERTIES]; NUM_PROPERTIES])
    }

    #[test]
    fn boundary_membership() {
        let b = BinBoundaries::new(vec![0.0]).unwrap();
        assert_eq!(b.bin(-0.3), 0);
        assert_eq!(b.bin(0.0), 1);
        assert_eq!(b.bin(1.0), 1);
        assert_eq!(BinBoundaries::default().bin(0.11), 3);
        assert_eq!(BinBoundaries::default().bin(-1.0), 0);
        assert_eq!(BinBoundaries::default().bin(1.0), 5);
    }

    #[test]
    fn invalid_boundaries() {
        assert!(BinBoundaries::new(vec![0.5, 0.1]).is_err());
        assert!(BinBoundaries::new(vec![0.1, 0.1]).is_err());
        assert!(BinBoundaries::new(vec![-1.0]).is_err());
        assert!(BinBoundaries::new(vec![]).is_ok());
    }

    #[test]
    fn unknown_goes_to_unknown_bin() {
        let v = binarize(&sims_with(None), &BinBoundaries::default());
        assert_eq!(v.unknown_bin(), 6);
        assert!(Channel::all().iter().all(|c| v.active_bin(*c) == 6));
        assert_eq!(v.dense().len(), 25 * 7);
        assert_eq!(v.dense().iter().map(|&x| x as usize).sum::<usize>(), 25);
    }

    #[test]
    fn mcc_closed_forms() {
        assert_eq!(mcc(10, 0, 0, 10).value, 1.0);
        assert_eq!(mcc(5, 5, 5, 5).value, 0.0);
        let m = mcc(6, 2, 4, 8);
        let expected = 40.0 / (8.0f64 * 10.0 * 10.0 * 12.0).sqrt();
        assert!((m.value - expected).abs() < 1e-12);
        assert!((m.value - 0.40825).abs() < 1e-5);
        let undefined = mcc(0, 0, 3, 4);
        assert!(!undefined.defined);
        assert_eq!(undefined.value, 0.0);
    }

    #[test]
    fn separable_scores() {
        let scores: Vec<_> = (0..10)
            .map(|i| (Some(if i % 2 == 0 { 1.0 } else { -1.0 }), i % 2 == 0))
            .collect();
        let r = evaluate_scores(&scores, 0.0).unwrap();
        assert_eq!(r.mcc.value, 1.0);
        assert!(r.mcc.defined);
    }

    #[test]
    fn all_unknown_is_undefined() {
        let scores = vec![(None, true), (None, false)];
        let r = evaluate_scores(&scores, 0.0).unwrap();
        assert_eq!((r.tp, r.fp), (0, 0));
        assert!(!r.mcc.defined);
        assert!(r.quartiles_coreferent.is_none());
        assert!(matches!(
            evaluate_scores(&[], 0.0),
            Err(FeatureError::EmptyInput)
        ));
    }

    #[test]
    fn eight_pair_fixture() {
        // threshold 0.2: gold/prediction enumerated by hand
        let scores = vec![
            (Some(0.9), true),   // tp
            (Some(0.3), true),   // tp
            (Some(0.2), true),   // tp (boundary is inclusive)
            (Some(0.1), true),   // fn
            (None, true),        // fn
            (Some(0.5), false),  // fp
            (Some(-0.2), false), // tn
            (Some(0.0), false),  // tn
        ];
        let r = evaluate_scores(&scores, 0.2).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (3, 1, 2, 2));
        let expected = (3.0 * 2.0 - 1.0 * 2.0) / (4.0f64 * 5.0 * 3.0 * 4.0).sqrt();
        assert!((r.mcc.value - expected).abs() < 1e-12);
        let q = r.quartiles_coreferent.unwrap();
        assert_eq!((q.min, q.median, q.max), (0.1, 0.25, 0.9));
    }

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(
            (q.min, q.q1, q.median, q.q3, q.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        let q = Quartiles::of(&[1.0, 2.0]).unwrap();
        assert_eq!(q.median, 1.5);
    }

    #[test]
    fn channel_parsing() {
        let c: Channel = "context:context".parse().unwrap();
        assert_eq!(c.index(), 3 * 5 + 3);
        assert_eq!(c.to_string(), "context:context");
        assert_eq!(parse_channels("all").unwrap().len(), 25);
        assert_eq!(parse_channels("head:type, string:head").unwrap().len(), 2);
        assert!(parse_channels("head").is_err());
        assert!(parse_channels("head:verb").is_err());
    }

    #[test]
    fn mention_file_schema_errors() {
        let good = "d1\t1-2\tthe ship\tship\tsank\tnsubj\t_\t5-5\tit\tit\t_\t_\t_\t1\n";
        let rows = read_mention_pairs(good.as_bytes(), true).unwrap();
        assert_eq!(rows[0].antecedent.governor.as_deref(), Some("sank"));
        assert_eq!(rows[0].anaphor.governor, None);
        assert_eq!(rows[0].label, Some(true));

        let no_deprel = "d1\t1-2\tthe ship\tship\tsank\t_\t_\t5-5\tit\tit\t_\t_\t_\t1\n";
        match read_mention_pairs(no_deprel.as_bytes(), false) {
            Err(FeatureError::Schema {
                line: 1, column, ..
            }) => assert_eq!(column, "deprel_a"),
            other => panic!("{:?}", other),
        }
        let bad_label = good.replace("\t1\n", "\tyes\n");
        match read_mention_pairs(bad_label.as_bytes(), true) {
            Err(FeatureError::Schema { column, .. }) => assert_eq!(column, "label"),
            other => panic!("{:?}", other),
        }
        let no_label = good.replace("\t1\n", "\n");
        assert!(read_mention_pairs(no_label.as_bytes(), false).is_ok());
        match read_mention_pairs(no_label.as_bytes(), true) {
            Err(FeatureError::Schema { column, .. }) => assert_eq!(column, "label"),
            other => panic!("{:?}", other),
        }
        let missing_head = good.replace("\tship\tsank", "\t_\tsank");
        match read_mention_pairs(missing_head.as_bytes(), true) {
            Err(FeatureError::Schema { column, .. }) => assert_eq!(column, "head_a"),
            other => panic!("{:?}", other),
        }
    }

    proptest! {
        #[test]
        fn binarize_is_total(score in -1.0f64..=1.0, unknown in any::<bool>()) {
            let value = if unknown { None } else { Some(score) };
            let v = binarize(&sims_with(value), &BinBoundaries::default());
            let dense = v.dense();
            for ch in 0..NUM_CHANNELS {
                let hot = dense[ch * 7..(ch + 1) * 7].iter().filter(|&&x| x == 1).count();
                prop_assert_eq!(hot, 1);
            }
        }

        #[test]
        fn mcc_symmetries(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
            let m = mcc(tp, fp, fn_, tn);
            prop_assert!((-1.0..=1.0).contains(&m.value));
            let swapped = mcc(tn, fn_, fp, tp);
            prop_assert!((m.value - swapped.value).abs() < 1e-12);
            // inverting predictions: tp<->fn, fp<->tn
            let inverted = mcc(fn_, tn, tp, fp);
            prop_assert!((m.value + inverted.value).abs() < 1e-12);
        }

        #[test]
        fn threshold_monotone(
            scores in prop::collection::vec((prop::option::of(-1.0f64..1.0), any::<bool>()), 1..40),
            t1 in -1.0f64..1.0, t2 in -1.0f64..1.0,
        ) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = evaluate_scores(&scores, lo).unwrap();
            let b = evaluate_scores(&scores, hi).unwrap();
            prop_assert!(b.tp <= a.tp);
            prop_assert!(b.fp <= a.fp);
        }
    }
}
