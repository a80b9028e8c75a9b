// Trains on a synthetic two-cluster corpus and checks that true pairs score
// higher than cross-cluster pairs, in both training modes.

use std::error::Error;

use selpref::pairs::TermContextPair;
use selpref::store::plausibility;
use selpref::trainer::{train, Hyperparams, Mode};
use selpref::vocab::{build_negative_table, build_vocab, DEFAULT_SMOOTHING};

fn planted_pairs() -> Vec<TermContextPair> {
    let mut pairs = Vec::new();
    for _ in 0..100 {
        for (term, context) in [("a1", "p@r"), ("a2", "p@r"), ("b1", "q@r"), ("b2", "q@r")] {
            pairs.push(TermContextPair::new(term, context));
        }
    }
    pairs
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let pairs = planted_pairs();
    let vocab = build_vocab(&pairs, 1, 1)?;
    let table = build_negative_table(&vocab, DEFAULT_SMOOTHING);

    for mode in [Mode::Deterministic, Mode::Parallel] {
        let hp = Hyperparams {
            dim: 16,
            negatives: 5,
            epochs: 5,
            subsample: 0.0,
            mode,
            threads: 2,
            ..Hyperparams::default()
        };
        let trained = train(&pairs, &vocab, &table, &hp, None)?;
        let model = &trained.model;
        let score = |t: &str, s: &str| plausibility(model, t, s).unwrap().unwrap_or(f64::NAN);
        let true_mean =
            (score("a1", "p@r") + score("a2", "p@r") + score("b1", "q@r") + score("b2", "q@r"))
                / 4.0;
        let cross_mean =
            (score("a1", "q@r") + score("a2", "q@r") + score("b1", "p@r") + score("b2", "p@r"))
                / 4.0;
        println!(
            "{:?}: {} updates, epoch losses {:?}",
            mode,
            trained.report.updates,
            trained
                .report
                .epoch_losses
                .iter()
                .map(|l| format!("{:.4}", l))
                .collect::<Vec<_>>()
        );
        println!("  mean true {:.3}  mean cross {:.3}", true_mean, cross_mean);
        assert!(true_mean - cross_mean >= 0.2);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
