// Saves a trained model, loads it back and prints nearest neighbors in the
// slot, entity-type and phrase catalogs.

use std::error::Error;

use selpref::pairs::TermContextPair;
use selpref::store::{export_text, load, neighbors, save};
use selpref::trainer::{train, Hyperparams};
use selpref::vocab::{build_negative_table, build_vocab, DEFAULT_SMOOTHING};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut pairs = Vec::new();
    for _ in 0..50 {
        for (term, slot) in [
            ("ship", "sink@nsubj"),
            ("vessel", "sink@nsubj"),
            ("/product/ship", "sink@nsubj"),
            ("ship", "board@obj"),
            ("vessel", "board@obj"),
            ("girl", "laugh@nsubj"),
            ("boy", "laugh@nsubj"),
            ("/person", "laugh@nsubj"),
            ("girl", "say@nsubj"),
            ("boy", "say@nsubj"),
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

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("toy.spm");
    save(&model, &path)?;
    let model = load(&path)?;
    println!(
        "saved and reloaded {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path)?.len()
    );

    for query in ["ship", "sink@nsubj", "/person"] {
        print!("{}", neighbors(&model, query, 3)?);
        println!();
    }

    let mut text = Vec::new();
    export_text(&model, &mut text)?;
    let text = String::from_utf8(text)?;
    println!("text export header: {}", text.lines().next().unwrap_or(""));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
