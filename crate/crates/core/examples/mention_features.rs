// Derives binned similarity features for coreference mention pairs and
// correlates one channel with gold labels.

use std::error::Error;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use selpref::features::{
    binarize, eval_pairs, mention_properties, pair_similarities, read_mention_pairs, BinBoundaries,
    Channel, LabeledPair, Property, DEFAULT_BOUNDARIES,
};
use selpref::pairs::TermContextPair;
use selpref::trainer::{train, Hyperparams};
use selpref::vocab::{build_negative_table, build_vocab, DEFAULT_SMOOTHING};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut pairs = Vec::new();
    for _ in 0..40 {
        for (term, slot) in [
            ("ship", "sink@nsubj"),
            ("Titanic", "sink@nsubj"),
            ("the_Titanic", "sink@nsubj"),
            ("/product/ship", "sink@nsubj"),
            ("ship", "board@obj"),
            ("Titanic", "board@obj"),
            ("captain", "steer@nsubj"),
            ("he", "steer@nsubj"),
            ("captain", "say@nsubj"),
            ("he", "say@nsubj"),
            ("/person", "say@nsubj"),
        ] {
            pairs.push(TermContextPair::new(term, slot));
        }
    }
    let vocab = build_vocab(&pairs, 1, 1)?;
    let table = build_negative_table(&vocab, DEFAULT_SMOOTHING);
    let hp = Hyperparams {
        dim: 16,
        negatives: 3,
        epochs: 10,
        subsample: 0.0,
        ..Hyperparams::default()
    };
    let model = train(&pairs, &vocab, &table, &hp, None)?.model;

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/mention_pairs.tsv");
    let rows = read_mention_pairs(BufReader::new(File::open(path)?), true)?;
    let boundaries = BinBoundaries::new(DEFAULT_BOUNDARIES.to_vec())?;
    let shown = [
        Channel::new(Property::FullString, Property::FullString),
        Channel::new(Property::Head, Property::Head),
        Channel::new(Property::ContextSlot, Property::ContextSlot),
        Channel::new(Property::EntityType, Property::EntityType),
    ];
    for row in &rows {
        let a = mention_properties(&row.antecedent, &model);
        let b = mention_properties(&row.anaphor, &model);
        let sims = pair_similarities(&a, &b);
        let binned = binarize(&sims, &boundaries);
        println!(
            "{:>14} ~ {:<14} label={:<5} features: {}",
            row.antecedent.mention_string,
            row.anaphor.mention_string,
            row.label.unwrap_or(false),
            binned.sparse_for(&shown).join(" ")
        );
    }

    let labeled: Vec<LabeledPair> = rows
        .into_iter()
        .map(|row| LabeledPair {
            antecedent: row.antecedent,
            anaphor: row.anaphor,
            coreferent: row.label.unwrap_or(false),
        })
        .collect();
    let report = eval_pairs(
        &model,
        &labeled,
        Channel::new(Property::ContextSlot, Property::ContextSlot),
        0.0,
    )?;
    print!("{}", report);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
