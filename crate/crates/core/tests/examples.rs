mod parse_corpus_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/parse_corpus.rs"
    ));
}

#[test]
fn parse_corpus_example_runs() {
    parse_corpus_example::run_example().expect("parse_corpus example should run");
}

mod extract_pairs_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/extract_pairs.rs"
    ));
}

#[test]
fn extract_pairs_example_runs() {
    extract_pairs_example::run_example().expect("extract_pairs example should run");
}

mod build_vocab_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/build_vocab.rs"
    ));
}

#[test]
fn build_vocab_example_runs() {
    build_vocab_example::run_example().expect("build_vocab example should run");
}

mod train_planted_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/train_planted.rs"
    ));
}

#[test]
fn train_planted_example_runs() {
    train_planted_example::run_example().expect("train_planted example should run");
}

mod query_neighbors_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/query_neighbors.rs"
    ));
}

#[test]
fn query_neighbors_example_runs() {
    query_neighbors_example::run_example().expect("query_neighbors example should run");
}

mod mention_features_example {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/mention_features.rs"
    ));
}

#[test]
fn mention_features_example_runs() {
    mention_features_example::run_example().expect("mention_features example should run");
}
