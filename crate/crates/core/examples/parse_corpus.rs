// Reads a CoNLL-U file and compares the basic and enhanced dependency layers.

use std::error::Error;
use std::path::Path;

use selpref::conllu::{basic_graph, enhanced_graph, parse_conllu, ErrorMode};
use selpref::io::open_text;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/ships.conllu");
    let corpus = parse_conllu(open_text(&path)?, ErrorMode::Skip)?;
    println!(
        "{} sentences, {} skipped",
        corpus.sentences.len(),
        corpus.skipped
    );

    for sentence in &corpus.sentences {
        let basic = basic_graph(sentence)?;
        let enhanced = enhanced_graph(sentence)?;
        let words: Vec<&str> = sentence.tokens().iter().map(|t| t.form.as_str()).collect();
        println!(
            "[{} / {}] {}",
            sentence.doc_id().unwrap_or("-"),
            sentence.sentence_id().unwrap_or("-"),
            words.join(" ")
        );
        for edge in enhanced.edges() {
            let marker = if basic.contains(edge.governor, edge.dependent, &edge.relation) {
                " "
            } else {
                "+"
            };
            let governor = sentence
                .token(edge.governor)
                .map_or("ROOT", |t| t.form.as_str());
            let dependent = &sentence
                .token(edge.dependent)
                .expect("dependent exists")
                .form;
            println!(
                "  {} {} -{}-> {}",
                marker, governor, edge.relation, dependent
            );
        }
    }
    assert_eq!(corpus.sentences.len(), 6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
