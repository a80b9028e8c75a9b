//! Skip-gram negative-sampling training over term-context pairs.
//!
//! Term vectors (W) hold arguments, phrases and entity types; context
//! vectors (C) hold predicate slots. Each observed pair takes one SGD step
//! on `-log σ(w·c) - Σ log σ(-w·c_neg)`.
//!
//! Both training modes run the same worker loop over matrices stored as
//! relaxed atomics. With one worker the pass is strictly ordered and
//! bit-reproducible; with several workers the updates race without locks.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::time::Instant;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pairs::TermContextPair;
use crate::vocab::{subsample_keep_prob, NegativeTable, Vocabulary};

/// Attempts at drawing a negative different from the positive context.
const NEGATIVE_ATTEMPTS: usize = 3;

const PROGRESS_EVERY: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no trainable pairs: {skipped} pairs could not be resolved in the vocabulary")]
    EmptyTrainingStream { skipped: u64 },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("checkpoint failed: {0}")]
    Checkpoint(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Deterministic,
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    /// Term subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Worker count in parallel mode.
    pub threads: usize,
    /// Write a checkpoint every this many updates; 0 disables.
    pub checkpoint_every: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        let initial_lr = 0.025;
        Hyperparams {
            dim: 300,
            negatives: 15,
            epochs: 5,
            initial_lr,
            min_lr: initial_lr * 1e-4,
            subsample: crate::vocab::DEFAULT_SUBSAMPLE,
            seed: 42,
            mode: Mode::Deterministic,
            threads: 4,
            checkpoint_every: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::InvalidHyperparams(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.initial_lr.is_nan() || self.initial_lr <= 0.0 {
            return fail("initial_lr must be positive");
        }
        if !(self.min_lr >= 0.0 && self.min_lr <= self.initial_lr) {
            return fail("min_lr must lie in [0, initial_lr]");
        }
        if self.subsample.is_nan() || self.subsample < 0.0 {
            return fail("subsample must be non-negative");
        }
        if self.mode == Mode::Parallel && self.threads == 0 {
            return fail("threads must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub hyperparams: Hyperparams,
    /// SHA-256 over the resolved training stream.
    pub corpus_fingerprint: String,
    pub negative_alpha: f64,
    pub training_pairs: u64,
}

/// The trained selectional-preference space.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) dim: usize,
    pub(crate) term_matrix: Vec<f32>,
    pub(crate) context_matrix: Vec<f32>,
    pub(crate) vocab: Vocabulary,
    pub(crate) metadata: Metadata,
}

impl EmbeddingModel {
    pub fn new(
        dim: usize,
        term_matrix: Vec<f32>,
        context_matrix: Vec<f32>,
        vocab: Vocabulary,
        metadata: Metadata,
    ) -> Result<Self, String> {
        let model = EmbeddingModel {
            dim,
            term_matrix,
            context_matrix,
            vocab,
            metadata,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.term_matrix.len() != self.vocab.terms.len() * self.dim {
            return Err("term matrix does not match the term vocabulary".to_owned());
        }
        if self.context_matrix.len() != self.vocab.contexts.len() * self.dim {
            return Err("context matrix does not match the context vocabulary".to_owned());
        }
        if !self
            .term_matrix
            .iter()
            .chain(&self.context_matrix)
            .all(|v| v.is_finite())
        {
            return Err("model contains non-finite entries".to_owned());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn term_matrix(&self) -> &[f32] {
        &self.term_matrix
    }

    pub fn context_matrix(&self) -> &[f32] {
        &self.context_matrix
    }

    pub fn term_vector(&self, idx: usize) -> &[f32] {
        &self.term_matrix[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn context_vector(&self, idx: usize) -> &[f32] {
        &self.context_matrix[idx * self.dim..(idx + 1) * self.dim]
    }
}

/// Numerically stable logistic function.
pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `log σ(x)` without overflow: `-(max(-x, 0) + ln(1 + e^{-|x|}))`.
pub fn log_sigmoid<F: Float>(x: F) -> F {
    -((-x).max(F::zero()) + (-x.abs()).exp().ln_1p())
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Loss and gradients of one SGNS instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGrads<F> {
    pub loss: F,
    pub grad_w: Vec<F>,
    pub grad_c: Vec<F>,
    pub grad_negs: Vec<Vec<F>>,
}

impl<F: Float> SgnsGrads<F> {
    fn zeros(dim: usize, negatives: usize) -> Self {
        SgnsGrads {
            loss: F::zero(),
            grad_w: vec![F::zero(); dim],
            grad_c: vec![F::zero(); dim],
            grad_negs: vec![vec![F::zero(); dim]; negatives],
        }
    }

    /// Recomputes into the existing buffers.
    fn compute(&mut self, w: &[F], c: &[F], negs: &[&[F]]) {
        let pos_dot = dot(w, c);
        let pos_coef = sigmoid(pos_dot) - F::one();
        let mut loss = -log_sigmoid(pos_dot);

        for ((gw, gc), (&wi, &ci)) in self
            .grad_w
            .iter_mut()
            .zip(self.grad_c.iter_mut())
            .zip(w.iter().zip(c))
        {
            *gw = pos_coef * ci;
            *gc = pos_coef * wi;
        }

        for (neg, grad_neg) in negs.iter().zip(self.grad_negs.iter_mut()) {
            let neg_dot = dot(w, neg);
            let coef = sigmoid(neg_dot);
            loss = loss - log_sigmoid(-neg_dot);
            for ((gw, gn), (&wi, &ni)) in self
                .grad_w
                .iter_mut()
                .zip(grad_neg.iter_mut())
                .zip(w.iter().zip(neg.iter()))
            {
                *gw = *gw + coef * ni;
                *gn = coef * wi;
            }
        }

        self.loss = loss;
    }
}

/// SGNS loss `-log σ(w·c) - Σ_i log σ(-w·c_i)` with its exact gradients.
pub fn sgns_loss_and_grad<F: Float>(w: &[F], c: &[F], negs: &[&[F]]) -> SgnsGrads<F> {
    assert_eq!(w.len(), c.len(), "dimension mismatch");
    assert!(
        negs.iter().all(|n| n.len() == w.len()),
        "dimension mismatch"
    );
    let mut grads = SgnsGrads::zeros(w.len(), negs.len());
    grads.compute(w, c, negs);
    grads
}

/// Row-major f32 matrix with relaxed atomic cells.
struct SharedMatrix {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn from_values(dim: usize, values: &[f32]) -> Self {
        SharedMatrix {
            dim,
            cells: values.iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    fn read_row(&self, row: usize, out: &mut [f32]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, cell) in out.iter_mut().zip(cells) {
            *o = f32::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`, racing with other writers.
    fn add_row(&self, row: usize, delta: &[f32], scale: f32) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (cell, d) in cells.iter().zip(delta) {
            let v = f32::from_bits(cell.load(Ordering::Relaxed));
            cell.store((v + scale * d).to_bits(), Ordering::Relaxed);
        }
    }

    fn to_vec(&self) -> Vec<f32> {
        self.cells
            .iter()
            .map(|c| f32::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    }
}

/// Statistics of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean SGNS loss per update for each epoch.
    pub epoch_losses: Vec<f64>,
    pub updates: u64,
    pub subsampled: u64,
    pub unresolved_pairs: u64,
    pub skipped_negatives: u64,
    pub checkpoints: Vec<PathBuf>,
}

/// A trained model and its run statistics.
pub struct Trained {
    pub model: EmbeddingModel,
    pub report: TrainReport,
}

/// Training stream resolved to vocabulary indices.
struct Occurrence {
    term: u32,
    context: u32,
    weight: u64,
}

struct Shared<'a> {
    hp: &'a Hyperparams,
    table: &'a NegativeTable,
    keep: Vec<f64>,
    terms: SharedMatrix,
    contexts: SharedMatrix,
    processed: AtomicU64,
    scheduled: u64,
    next_checkpoint: AtomicU64,
    started: Instant,
}

#[derive(Default)]
struct WorkerStats {
    loss: f64,
    updates: u64,
    subsampled: u64,
    skipped_negatives: u64,
    checkpoints: Vec<PathBuf>,
    error: Option<String>,
}

impl Shared<'_> {
    fn learning_rate(&self, processed: u64) -> f32 {
        let progress = processed as f64 / self.scheduled.max(1) as f64;
        let lr = self.hp.initial_lr - (self.hp.initial_lr - self.hp.min_lr) * progress;
        lr.max(self.hp.min_lr) as f32
    }
}

fn worker_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_worker(
    shared: &Shared,
    chunk: &[Occurrence],
    mut rng: ChaCha8Rng,
    is_lead: bool,
    snapshot: &dyn Fn(&Shared, u64) -> Result<PathBuf, String>,
) -> WorkerStats {
    let dim = shared.hp.dim;
    let k = shared.hp.negatives;
    let mut stats = WorkerStats::default();
    let mut w = vec![0f32; dim];
    let mut c = vec![0f32; dim];
    let mut negs = vec![vec![0f32; dim]; k];
    let mut neg_ids = Vec::with_capacity(k);
    let mut grads = SgnsGrads::<f32>::zeros(dim, k);

    for occ in chunk {
        let term = occ.term as usize;
        let context = occ.context as usize;
        for _ in 0..occ.weight {
            let processed = shared.processed.fetch_add(1, Ordering::Relaxed);
            if is_lead && processed > 0 && processed.is_multiple_of(PROGRESS_EVERY) {
                let secs = shared.started.elapsed().as_secs_f64().max(1e-9);
                log::info!(
                    "{} updates, {:.0} pairs/s, lr {:.6}",
                    processed,
                    processed as f64 / secs,
                    shared.learning_rate(processed)
                );
            }
            if is_lead && shared.hp.checkpoint_every > 0 {
                let due = shared.next_checkpoint.load(Ordering::Relaxed);
                if processed >= due {
                    shared
                        .next_checkpoint
                        .store(due + shared.hp.checkpoint_every, Ordering::Relaxed);
                    match snapshot(shared, processed) {
                        Ok(path) => stats.checkpoints.push(path),
                        Err(err) => {
                            stats.error = Some(err);
                            return stats;
                        }
                    }
                }
            }

            let keep = shared.keep[term];
            if keep < 1.0 && rng.gen::<f64>() >= keep {
                stats.subsampled += 1;
                continue;
            }

            neg_ids.clear();
            for _ in 0..k {
                let drawn = (0..NEGATIVE_ATTEMPTS)
                    .map(|_| shared.table.sample(&mut rng))
                    .find(|&n| n != context);
                match drawn {
                    Some(n) => neg_ids.push(n),
                    None => stats.skipped_negatives += 1,
                }
            }

            shared.terms.read_row(term, &mut w);
            shared.contexts.read_row(context, &mut c);
            for (buf, &n) in negs.iter_mut().zip(&neg_ids) {
                shared.contexts.read_row(n, buf);
            }
            let neg_refs: Vec<&[f32]> = negs[..neg_ids.len()].iter().map(Vec::as_slice).collect();
            grads.compute(&w, &c, &neg_refs);

            let lr = shared.learning_rate(processed);
            shared.terms.add_row(term, &grads.grad_w, -lr);
            shared.contexts.add_row(context, &grads.grad_c, -lr);
            for (grad, &n) in grads.grad_negs.iter().zip(&neg_ids) {
                shared.contexts.add_row(n, grad, -lr);
            }

            stats.loss += grads.loss as f64;
            stats.updates += 1;
        }
    }
    stats
}

fn fingerprint(occurrences: &[Occurrence], vocab: &Vocabulary) -> String {
    let mut hasher = Sha256::new();
    for occ in occurrences {
        hasher.update(vocab.terms.key(occ.term as usize).as_bytes());
        hasher.update(b"\t");
        hasher.update(vocab.contexts.key(occ.context as usize).as_bytes());
        hasher.update(b"\t");
        hasher.update(occ.weight.to_le_bytes());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

/// Trains SGNS embeddings on `pairs`.
///
/// Pairs whose term or context is not in `vocab` are skipped and counted. A
/// pair of weight n is n consecutive occurrences. The learning rate decays
/// linearly over all scheduled occurrences. When `checkpoint_every` is set,
/// snapshots are written as `<checkpoint_dir>/checkpoint-<updates>.spm`.
pub fn train(
    pairs: &[TermContextPair],
    vocab: &Vocabulary,
    table: &NegativeTable,
    hp: &Hyperparams,
    checkpoint_dir: Option<&Path>,
) -> Result<Trained, TrainError> {
    hp.validate()?;

    let mut unresolved = 0;
    let occurrences: Vec<Occurrence> = pairs
        .iter()
        .filter_map(|p| match (vocab.term(&p.term), vocab.context(&p.context)) {
            (Some(t), Some(c)) => Some(Occurrence {
                term: t as u32,
                context: c as u32,
                weight: p.weight,
            }),
            _ => {
                unresolved += 1;
                None
            }
        })
        .collect();
    if occurrences.is_empty() {
        return Err(TrainError::EmptyTrainingStream {
            skipped: unresolved,
        });
    }
    if unresolved > 0 {
        log::info!("skipped {} pairs outside the vocabulary", unresolved);
    }

    let dim = hp.dim;
    let mut init_rng = worker_rng(hp.seed, 0);
    let bound = 0.5 / dim as f32;
    let term_init: Vec<f32> = (0..vocab.terms.len() * dim)
        .map(|_| init_rng.gen_range(-bound..=bound))
        .collect();
    let context_init = vec![0f32; vocab.contexts.len() * dim];

    let keep = (0..vocab.terms.len())
        .map(|i| {
            if hp.subsample > 0.0 {
                subsample_keep_prob(
                    vocab.terms.count(i),
                    vocab.terms.kept_tokens(),
                    hp.subsample,
                )
            } else {
                1.0
            }
        })
        .collect();

    let per_epoch: u64 = occurrences.iter().map(|o| o.weight).sum();
    let metadata = Metadata {
        hyperparams: hp.clone(),
        corpus_fingerprint: fingerprint(&occurrences, vocab),
        negative_alpha: table.alpha(),
        training_pairs: per_epoch,
    };

    let shared = Shared {
        hp,
        table,
        keep,
        terms: SharedMatrix::from_values(dim, &term_init),
        contexts: SharedMatrix::from_values(dim, &context_init),
        processed: AtomicU64::new(0),
        scheduled: per_epoch * hp.epochs as u64,
        next_checkpoint: AtomicU64::new(hp.checkpoint_every),
        started: Instant::now(),
    };

    let snapshot_model = |shared: &Shared| EmbeddingModel {
        dim,
        term_matrix: shared.terms.to_vec(),
        context_matrix: shared.contexts.to_vec(),
        vocab: vocab.clone(),
        metadata: metadata.clone(),
    };
    let snapshot = |shared: &Shared, processed: u64| -> Result<PathBuf, String> {
        let dir = checkpoint_dir.ok_or("checkpointing requires a checkpoint directory")?;
        let path = dir.join(format!("checkpoint-{}.spm", processed));
        crate::store::save(&snapshot_model(shared), &path).map_err(|e| e.to_string())?;
        log::info!("wrote checkpoint {}", path.display());
        Ok(path)
    };

    let workers = match hp.mode {
        Mode::Deterministic => 1,
        Mode::Parallel => hp.threads.min(occurrences.len()).max(1),
    };
    let mut report = TrainReport {
        unresolved_pairs: unresolved,
        ..TrainReport::default()
    };

    for epoch in 0..hp.epochs {
        let chunk_len = occurrences.len().div_ceil(workers);
        let results: Vec<WorkerStats> = if workers == 1 {
            let rng = worker_rng(hp.seed, 1 + epoch as u64);
            vec![run_worker(&shared, &occurrences, rng, true, &snapshot)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = occurrences
                    .chunks(chunk_len)
                    .enumerate()
                    .map(|(i, chunk)| {
                        let rng = worker_rng(hp.seed, 1 + (epoch * workers + i) as u64);
                        let shared = &shared;
                        let snapshot = &snapshot;
                        scope.spawn(move || run_worker(shared, chunk, rng, i == 0, snapshot))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };

        let mut loss = 0.0;
        let mut updates = 0;
        for stats in results {
            if let Some(err) = stats.error {
                return Err(TrainError::Checkpoint(err));
            }
            loss += stats.loss;
            updates += stats.updates;
            report.subsampled += stats.subsampled;
            report.skipped_negatives += stats.skipped_negatives;
            report.checkpoints.extend(stats.checkpoints);
        }
        report.updates += updates;
        let mean = if updates > 0 {
            loss / updates as f64
        } else {
            0.0
        };
        report.epoch_losses.push(mean);
        log::info!(
            "epoch {}/{}: {} updates, mean loss {:.5}, lr {:.6}",
            epoch + 1,
            hp.epochs,
            updates,
            mean,
            shared.learning_rate(shared.processed.load(Ordering::Relaxed))
        );
    }

    let model = snapshot_model(&shared);
    model
        .validate()
        .map_err(|e| TrainError::InvalidHyperparams(format!("training diverged: {}", e)))?;
    Ok(Trained { model, report })
}
