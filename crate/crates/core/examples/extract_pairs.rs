// Extracts `(term, predicate@relation)` pairs, with entity-type copies from a
// gazetteer and from `EntityType=` token annotations.

use std::collections::BTreeMap;
use std::error::Error;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use selpref::conllu::{enhanced_graph, parse_conllu, ErrorMode};
use selpref::io::open_text;
use selpref::pairs::{
    augment_with_types, extract_pairs, ExtractionConfig, Gazetteer, PredicateKey,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let corpus = parse_conllu(open_text(&data.join("ships.conllu"))?, ErrorMode::Skip)?;
    let gazetteer = Gazetteer::read(BufReader::new(File::open(
        data.join("ships.gazetteer.tsv"),
    )?))?;

    for key in [PredicateKey::Lemma, PredicateKey::Form] {
        let config = ExtractionConfig {
            predicate_key: key,
            ..ExtractionConfig::default()
        };
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for sentence in &corpus.sentences {
            let graph = enhanced_graph(sentence)?;
            let pairs = augment_with_types(
                extract_pairs(&graph, sentence, &config),
                sentence,
                &gazetteer,
            );
            for pair in pairs {
                *counts.entry((pair.term, pair.context)).or_default() += pair.weight;
            }
        }
        println!("predicate key {:?}: {} distinct pairs", key, counts.len());
        for ((term, context), n) in &counts {
            println!("  {:<22} {:<16} {}", term, context, n);
        }
        if key == PredicateKey::Lemma {
            assert!(counts.contains_key(&("/product/ship".to_owned(), "sink@nsubj".to_owned())));
            assert!(counts.contains_key(&("girl".to_owned(), "laugh@nsubj".to_owned())));
            assert!(counts.contains_key(&("cargo_ship".to_owned(), "steer@obj".to_owned())));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
