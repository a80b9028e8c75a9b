// Counts term and context vocabularies, then shows subsampling keep
// probabilities and the smoothed negative-sampling distribution.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use selpref::pairs::TermContextPair;
use selpref::vocab::{build_negative_table, build_vocab, subsample_keep_prob, DEFAULT_SMOOTHING};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let pairs = vec![
        TermContextPair::weighted("ship", "sink@nsubj", 8),
        TermContextPair::weighted("ship", "board@obj", 1),
        TermContextPair::weighted("Titanic", "sink@nsubj", 3),
        TermContextPair::weighted("girl", "laugh@nsubj", 1),
    ];
    let vocab = build_vocab(&pairs, 2, 1)?;
    println!(
        "terms kept: {} (dropped {} entries / {} tokens)",
        vocab.terms.len(),
        vocab.terms.dropped_entries(),
        vocab.terms.dropped_tokens()
    );
    for (key, count) in vocab.terms.entries() {
        let keep = subsample_keep_prob(*count, vocab.terms.total(), 0.1);
        println!(
            "  term {:<10} count {:>2}  keep p (t=0.1) {:.3}",
            key, count, keep
        );
    }

    let table = build_negative_table(&vocab, DEFAULT_SMOOTHING);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 100_000;
    let mut hits = vec![0u64; table.len()];
    for _ in 0..draws {
        hits[table.sample(&mut rng)] += 1;
    }
    for (idx, p) in table.probabilities().iter().enumerate() {
        println!(
            "  context {:<12} count {:>2}  P {:.4}  empirical {:.4}",
            vocab.contexts.key(idx),
            vocab.contexts.count(idx),
            p,
            hits[idx] as f64 / draws as f64
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
