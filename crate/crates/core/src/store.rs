//! Model persistence and queries over the trained space.
//!
//! The binary layout is
//!
//! ```text
//! magic "SPREFEMB" | version u32 | payload length u64 | payload | SHA-256
//! ```
//!
//! with all integers and floats little-endian. The payload holds the JSON
//! metadata, the dimension, both vocabulary inventories and the W and C
//! matrices as 32-bit floats. The digest covers every preceding byte.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pairs::split_slot;
use crate::trainer::{EmbeddingModel, Metadata};
use crate::vocab::{Inventory, Vocabulary};

pub const MAGIC: &[u8; 8] = b"SPREFEMB";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("not a model file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("model file checksum mismatch")]
    ChecksumMismatch,

    #[error("corrupt model file: {0}")]
    Corrupt(String),

    #[error("'{key}' not found among {}", CatalogKind::ALL.map(|c| c.name()).join(", "))]
    UnknownKey { key: String },

    #[error("malformed slot '{0}': expected predicate@relation")]
    MalformedSlot(String),
}

/// Cosine similarity clamped to [-1, 1]; `None` if either vector has zero
/// norm.
pub fn cosine(u: &[f32], v: &[f32]) -> Option<f64> {
    let (mut uv, mut uu, mut vv) = (0f64, 0f64, 0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return None;
    }
    Some((uv / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine between the term vector of `term` and the context vector of
/// `slot`. `Ok(None)` when either key is unknown or a vector is zero.
pub fn plausibility(
    model: &EmbeddingModel,
    term: &str,
    slot: &str,
) -> Result<Option<f64>, StoreError> {
    if split_slot(slot).is_none() {
        return Err(StoreError::MalformedSlot(slot.to_owned()));
    }
    let vocab = model.vocab();
    Ok(match (vocab.term(term), vocab.context(slot)) {
        (Some(t), Some(c)) => cosine(model.term_vector(t), model.context_vector(c)),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogKind {
    Slots,
    EntityTypes,
    Phrases,
}

impl CatalogKind {
    pub const ALL: [CatalogKind; 3] = [
        CatalogKind::Slots,
        CatalogKind::EntityTypes,
        CatalogKind::Phrases,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogKind::Slots => "predicate slots",
            CatalogKind::EntityTypes => "entity types",
            CatalogKind::Phrases => "phrases",
        }
    }

    /// Catalog of a term key: type paths start with '/'.
    pub fn of_term(key: &str) -> CatalogKind {
        if key.starts_with('/') {
            CatalogKind::EntityTypes
        } else {
            CatalogKind::Phrases
        }
    }
}

/// Partition of the model's keys into slots (context rows), entity types
/// and phrases (term rows).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    pub slots: Vec<usize>,
    pub entity_types: Vec<usize>,
    pub phrases: Vec<usize>,
}

impl Catalog {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut catalog = Catalog {
            slots: (0..vocab.contexts.len()).collect(),
            ..Catalog::default()
        };
        for (idx, (key, _)) in vocab.terms.entries().iter().enumerate() {
            match CatalogKind::of_term(key) {
                CatalogKind::EntityTypes => catalog.entity_types.push(idx),
                _ => catalog.phrases.push(idx),
            }
        }
        catalog
    }
}

/// Nearest neighbors of a query, per catalog.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborResult {
    pub query: String,
    pub slots: Vec<(String, f64)>,
    pub entity_types: Vec<(String, f64)>,
    pub phrases: Vec<(String, f64)>,
}

impl NeighborResult {
    pub fn catalog(&self, kind: CatalogKind) -> &[(String, f64)] {
        match kind {
            CatalogKind::Slots => &self.slots,
            CatalogKind::EntityTypes => &self.entity_types,
            CatalogKind::Phrases => &self.phrases,
        }
    }
}

impl fmt::Display for NeighborResult {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        writeln!(f, "query: {}", self.query)?;
        for kind in CatalogKind::ALL {
            writeln!(f, "most similar {}:", kind.name())?;
            for (key, score) in self.catalog(kind) {
                writeln!(f, "  {}\t{:.4}", key, score)?;
            }
        }
        Ok(())
    }
}

fn top_k<'a>(
    candidates: impl Iterator<Item = (&'a str, Option<f64>)>,
    exclude: &str,
    k: usize,
) -> Vec<(String, f64)> {
    if k == 0 {
        return Vec::new();
    }
    let mut scored: Vec<(&str, f64)> = candidates
        .filter(|(key, _)| *key != exclude)
        .filter_map(|(key, score)| score.map(|s| (key, s)))
        .collect();
    let order = |a: &(&str, f64), b: &(&str, f64)| -> Ordering {
        b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
    };
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_by(order);
    scored
        .into_iter()
        .map(|(key, score)| (key.to_owned(), score))
        .collect()
}

/// Exhaustive nearest-neighbor search in all three catalogs.
///
/// A slot query (a context key containing '@') ranks other slots by cosine
/// in the context space and terms by cosine against the slot's context
/// vector, i.e. by how plausibly they fill it. A term query ranks slots the
/// same cross-matrix way and other terms in the term space. Ties break by
/// key; the query itself is never returned.
pub fn neighbors(
    model: &EmbeddingModel,
    query: &str,
    k: usize,
) -> Result<NeighborResult, StoreError> {
    let vocab = model.vocab();
    let query_vec = match (query.contains('@'), vocab.context(query), vocab.term(query)) {
        (true, Some(c), _) | (false, Some(c), None) => model.context_vector(c),
        (_, _, Some(t)) => model.term_vector(t),
        _ => {
            return Err(StoreError::UnknownKey {
                key: query.to_owned(),
            })
        }
    };

    let catalog = Catalog::new(vocab);
    let slot_scores = catalog.slots.iter().map(|&i| {
        (
            vocab.contexts.key(i),
            cosine(model.context_vector(i), query_vec),
        )
    });
    let term_scores = |rows: &[usize]| {
        rows.iter()
            .map(|&i| (vocab.terms.key(i), cosine(model.term_vector(i), query_vec)))
            .collect::<Vec<_>>()
    };

    Ok(NeighborResult {
        query: query.to_owned(),
        slots: top_k(slot_scores, query, k),
        entity_types: top_k(term_scores(&catalog.entity_types).into_iter(), query, k),
        phrases: top_k(term_scores(&catalog.phrases).into_iter(), query, k),
    })
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

fn put_inventory(buf: &mut Vec<u8>, inv: &Inventory) {
    put_u64(buf, inv.total());
    put_u64(buf, inv.dropped_entries());
    put_u64(buf, inv.dropped_tokens());
    put_u64(buf, inv.min_count());
    put_u64(buf, inv.len() as u64);
    for (key, count) in inv.entries() {
        put_str(buf, key);
        put_u64(buf, *count);
    }
}

/// Serializes `model` to the binary format.
pub fn to_bytes(model: &EmbeddingModel) -> Vec<u8> {
    let mut payload = Vec::new();
    let metadata = serde_json::to_string(model.metadata()).expect("metadata serializes");
    put_str(&mut payload, &metadata);
    put_u32(&mut payload, model.dim() as u32);
    put_inventory(&mut payload, &model.vocab().terms);
    put_inventory(&mut payload, &model.vocab().contexts);
    for v in model.term_matrix().iter().chain(model.context_matrix()) {
        payload.extend_from_slice(&v.to_le_bytes());
    }

    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_u64(&mut out, payload.len() as u64);
    out.extend_from_slice(&payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| {
                StoreError::Corrupt(format!("field overruns payload at byte {}", self.pos))
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn str(&mut self) -> Result<String, StoreError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| StoreError::Corrupt("invalid UTF-8 key".to_owned()))
    }

    fn inventory(&mut self) -> Result<Inventory, StoreError> {
        let total = self.u64()?;
        let dropped_entries = self.u64()?;
        let dropped_tokens = self.u64()?;
        let min_count = self.u64()?;
        let len = self.u64()? as usize;
        let mut entries = Vec::with_capacity(len.min(self.bytes.len()));
        for _ in 0..len {
            let key = self.str()?;
            entries.push((key, self.u64()?));
        }
        Ok(Inventory::from_parts(
            entries,
            total,
            dropped_entries,
            dropped_tokens,
            min_count,
        ))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f32>, StoreError> {
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| StoreError::Corrupt("matrix too large".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}

/// Parses the binary format, validating header, length and checksum first.
pub fn from_bytes(bytes: &[u8]) -> Result<EmbeddingModel, StoreError> {
    if bytes.len() < MAGIC.len() {
        return Err(StoreError::Truncated {
            expected: HEADER_LEN + DIGEST_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(StoreError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(StoreError::Truncated {
            expected: HEADER_LEN + DIGEST_LEN,
            found: bytes.len(),
        });
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(StoreError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let payload_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let expected = HEADER_LEN
        .checked_add(payload_len)
        .and_then(|n| n.checked_add(DIGEST_LEN))
        .ok_or_else(|| StoreError::Corrupt("payload length overflows".to_owned()))?;
    if bytes.len() < expected {
        return Err(StoreError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(StoreError::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - expected
        )));
    }
    let body_end = HEADER_LEN + payload_len;
    if Sha256::digest(&bytes[..body_end]).as_slice() != &bytes[body_end..] {
        return Err(StoreError::ChecksumMismatch);
    }

    let mut cur = Cursor {
        bytes: &bytes[HEADER_LEN..body_end],
        pos: 0,
    };
    let metadata: Metadata = serde_json::from_str(&cur.str()?)
        .map_err(|e| StoreError::Corrupt(format!("metadata: {}", e)))?;
    let dim = cur.u32()? as usize;
    let vocab = Vocabulary {
        terms: cur.inventory()?,
        contexts: cur.inventory()?,
    };
    let term_matrix = cur.floats(vocab.terms.len() * dim)?;
    let context_matrix = cur.floats(vocab.contexts.len() * dim)?;
    if cur.pos != cur.bytes.len() {
        return Err(StoreError::Corrupt("unread payload bytes".to_owned()));
    }
    EmbeddingModel::new(dim, term_matrix, context_matrix, vocab, metadata)
        .map_err(StoreError::Corrupt)
}

/// Writes the binary model file (via a temporary file and rename).
pub fn save(model: &EmbeddingModel, path: &Path) -> Result<(), StoreError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, to_bytes(model))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<EmbeddingModel, StoreError> {
    from_bytes(&fs::read(path)?)
}

/// Writes word2vec-style text: a `#terms <n> <d>` header followed by one
/// `key v1 ... vd` line per term, then the same for contexts.
pub fn export_text<W: Write>(model: &EmbeddingModel, mut writer: W) -> io::Result<()> {
    let sections = [
        ("terms", &model.vocab().terms, model.term_matrix()),
        ("contexts", &model.vocab().contexts, model.context_matrix()),
    ];
    for (name, inventory, matrix) in sections {
        writeln!(writer, "#{} {} {}", name, inventory.len(), model.dim())?;
        for (idx, (key, _)) in inventory.entries().iter().enumerate() {
            write!(writer, "{}", key)?;
            for v in &matrix[idx * model.dim()..(idx + 1) * model.dim()] {
                write!(writer, " {}", v)?;
            }
            writeln!(writer)?;
        }
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::Hyperparams;

    pub(crate) fn toy_model() -> EmbeddingModel {
        let terms = Inventory::from_parts(
            vec![
                ("ship".into(), 5),
                ("/product/ship".into(), 3),
                ("vessel".into(), 2),
            ],
            10,
            0,
            0,
            1,
        );
        let contexts = Inventory::from_parts(
            vec![("sink@nsubj".into(), 6), ("sink@nsubjpass".into(), 4)],
            10,
            0,
            0,
            1,
        );
        let metadata = Metadata {
            hyperparams: Hyperparams {
                dim: 2,
                ..Hyperparams::default()
            },
            corpus_fingerprint: "00".into(),
            negative_alpha: 0.75,
            training_pairs: 10,
        };
        EmbeddingModel::new(
            2,
            vec![1.0, 0.0, 0.8, 0.6, 0.6, 0.8],
            vec![1.0, 0.1, 0.9, 0.2],
            Vocabulary { terms, contexts },
            metadata,
        )
        .unwrap()
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), Some(0.0));
        assert_eq!(cosine(&[2.0, 0.0], &[1.0, 0.0]), Some(1.0));
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), None);
    }

    #[test]
    fn plausibility_cases() {
        let m = toy_model();
        let p = plausibility(&m, "ship", "sink@nsubj").unwrap().unwrap();
        assert!((p - cosine(&[1.0, 0.0], &[1.0, 0.1]).unwrap()).abs() < 1e-12);
        assert_eq!(plausibility(&m, "iceberg", "sink@nsubj").unwrap(), None);
        assert!(matches!(
            plausibility(&m, "ship", "sink"),
            Err(StoreError::MalformedSlot(_))
        ));
    }

    #[test]
    fn neighbors_layout_and_exclusion() {
        let m = toy_model();
        let r = neighbors(&m, "ship", 5).unwrap();
        assert_eq!(r.phrases.len(), 1);
        assert_eq!(r.phrases[0].0, "vessel");
        assert_eq!(r.entity_types[0].0, "/product/ship");
        assert_eq!(r.slots.len(), 2);

        let r = neighbors(&m, "sink@nsubj", 5).unwrap();
        assert_eq!(r.slots, vec![("sink@nsubjpass".to_owned(), r.slots[0].1)]);
        assert_eq!(r.phrases.len(), 2);
        assert_eq!(r.phrases[0].0, "ship");

        let r = neighbors(&m, "ship", 0).unwrap();
        assert!(r.slots.is_empty() && r.entity_types.is_empty() && r.phrases.is_empty());

        let err = neighbors(&m, "iceberg", 3).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("predicate slots")
                && msg.contains("entity types")
                && msg.contains("phrases")
        );
    }

    #[test]
    fn display_has_three_sections() {
        let text = neighbors(&toy_model(), "ship", 1).unwrap().to_string();
        assert_eq!(text.lines().count(), 1 + 3 * 2);
        assert!(text.contains("most similar predicate slots:"));
    }

    #[test]
    fn binary_round_trip() {
        let m = toy_model();
        let bytes = to_bytes(&m);
        assert_eq!(&bytes[..8], MAGIC);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn damaged_files_give_distinct_errors() {
        let bytes = to_bytes(&toy_model());
        assert!(matches!(
            from_bytes(&bytes[..bytes.len() - 5]),
            Err(StoreError::Truncated { .. })
        ));
        assert!(matches!(
            from_bytes(&bytes[..10]),
            Err(StoreError::Truncated { .. })
        ));

        let mut flipped = bytes.clone();
        flipped[HEADER_LEN + 3] ^= 0xff;
        assert!(matches!(
            from_bytes(&flipped),
            Err(StoreError::ChecksumMismatch)
        ));

        let mut version = bytes.clone();
        version[8] = 9;
        assert!(matches!(
            from_bytes(&version),
            Err(StoreError::VersionMismatch {
                found: 9,
                expected: 1
            })
        ));

        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(from_bytes(&magic), Err(StoreError::BadMagic)));
    }

    #[test]
    fn text_export_layout() {
        let terms = Inventory::from_parts(vec![("ship".into(), 1)], 1, 0, 0, 1);
        let contexts = Inventory::from_parts(vec![("sink@nsubj".into(), 1)], 1, 0, 0, 1);
        let m = EmbeddingModel::new(
            2,
            vec![0.5, -0.25],
            vec![0.0, 1.0],
            Vocabulary { terms, contexts },
            toy_model().metadata().clone(),
        )
        .unwrap();
        let mut out = Vec::new();
        export_text(&m, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "#terms 1 2\nship 0.5 -0.25\n#contexts 1 2\nsink@nsubj 0 1\n"
        );
        let w_line = text.lines().nth(1).unwrap();
        assert_eq!(w_line.split(' ').count(), 1 + 2);
    }
}
