use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn selpref(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selpref"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        stdout(&out),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small two-cluster pair file and trains a model on it.
fn trained_model(dir: &Path) -> PathBuf {
    let pairs = dir.join("toy.pairs");
    let mut text = String::new();
    for (t, c) in [
        ("ship", "sink@nsubj"),
        ("boat", "sink@nsubj"),
        ("/product/ship", "sink@nsubj"),
        ("girl", "laugh@nsubj"),
        ("boy", "laugh@nsubj"),
        ("/person", "laugh@nsubj"),
    ] {
        text.push_str(&format!("{}\t{}\t20\n", t, c));
    }
    fs::write(&pairs, text).unwrap();
    let model = dir.join("toy.spm");
    ok(selpref(&[
        "train",
        s(&pairs),
        "-o",
        s(&model),
        "--dim",
        "8",
        "--negatives",
        "2",
        "--subsample",
        "0",
        "--min-count-term",
        "1",
        "--min-count-context",
        "1",
    ]));
    model
}

#[test]
fn extract_reports_counts_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pairs");
    let b = dir.path().join("b.pairs");
    let gaz = data("golden.gazetteer.tsv");
    let corpus = data("golden.conllu");
    let first = ok(selpref(&[
        "extract",
        s(&corpus),
        "--gazetteer",
        s(&gaz),
        "-o",
        s(&a),
    ]));
    ok(selpref(&[
        "extract",
        s(&corpus),
        "--gazetteer",
        s(&gaz),
        "-o",
        s(&b),
    ]));
    assert!(stdout(&first).contains("sentences=10"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn build_vocab_writes_both_inventories() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("g.pairs");
    ok(selpref(&[
        "extract",
        s(&data("golden.conllu")),
        "-o",
        s(&pairs),
    ]));
    let prefix = dir.path().join("vocab");
    let out = ok(selpref(&[
        "build-vocab",
        s(&pairs),
        "-o",
        s(&prefix),
        "--min-count-term",
        "1",
        "--min-count-context",
        "1",
    ]));
    assert!(stdout(&out).starts_with("terms="));
    assert!(dir.path().join("vocab.terms.tsv").exists());
    assert!(dir.path().join("vocab.contexts.tsv").exists());
}

#[test]
fn train_is_reproducible_and_queries_work() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained_model(dir.path());
    let first = fs::read(&model).unwrap();
    let again = trained_model(dir.path());
    assert_eq!(first, fs::read(again).unwrap());

    let out = stdout(&ok(selpref(&["query", s(&model), "sink@nsubj", "-k", "1"])));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "query: sink@nsubj");
    for header in [
        "most similar predicate slots:",
        "most similar entity types:",
        "most similar phrases:",
    ] {
        let at = lines.iter().position(|l| *l == header).expect(header);
        let rows = lines[at + 1..]
            .iter()
            .take_while(|l| l.starts_with("  "))
            .count();
        assert_eq!(rows, 1, "{} should list one row", header);
    }

    let score = stdout(&ok(selpref(&[
        "plausibility",
        s(&model),
        "ship",
        "sink@nsubj",
    ])));
    let score: f64 = score.trim().parse().unwrap();
    assert!((-1.0..=1.0).contains(&score));

    let text = dir.path().join("toy.txt");
    ok(selpref(&["export", s(&model), s(&text)]));
    let exported = fs::read_to_string(text).unwrap();
    assert!(exported.starts_with("#terms 6 8\n"));
}

#[test]
fn zero_epochs_gives_an_init_only_model() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("p.pairs");
    fs::write(&pairs, "x\tp@r\t3\ny\tq@r\t3\n").unwrap();
    let model = dir.path().join("m.spm");
    ok(selpref(&[
        "train",
        s(&pairs),
        "-o",
        s(&model),
        "--epochs",
        "0",
        "--dim",
        "4",
        "--min-count-term",
        "1",
        "--min-count-context",
        "1",
    ]));
    let loaded = selpref::store::load(&model).unwrap();
    assert!(loaded.context_matrix().iter().all(|v| *v == 0.0));
    assert!(loaded.term_matrix().iter().any(|v| *v != 0.0));
}

#[test]
fn features_and_eval_on_mention_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained_model(dir.path());
    let mentions = dir.path().join("m.tsv");
    fs::write(
        &mentions,
        "d\t0-1\tthe ship\tship\tsink\tnsubj\t/product/ship\t3-4\tboat\tboat\tsink\tnsubj\t_\t1\n\
         d\t0-1\tthe ship\tship\tsink\tnsubj\t/product/ship\t6-7\tgirl\tgirl\tlaugh\tnsubj\t_\t0\n",
    )
    .unwrap();
    let out = stdout(&ok(selpref(&[
        "features",
        s(&model),
        s(&mentions),
        "--channels",
        "head:head,type:type",
    ])));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines
        .iter()
        .all(|l| l.split(' ').count() == 2 && l.starts_with("12:")));

    let dense = stdout(&ok(selpref(&[
        "features",
        s(&model),
        s(&mentions),
        "--dense",
    ])));
    assert_eq!(dense.lines().next().unwrap().split(' ').count(), 25 * 7);

    let eval = stdout(&ok(selpref(&[
        "eval",
        s(&model),
        s(&mentions),
        "--eval-channel",
        "head:head",
    ])));
    assert!(eval.contains("mcc="), "{}", eval);
}

#[test]
fn exit_codes_distinguish_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.conllu");
    let out = selpref(&["extract", s(&missing), "-o", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));

    let bad_config = dir.path().join("bad.toml");
    fs::write(&bad_config, "[training]\ndimension = 3\n").unwrap();
    let out = selpref(&[
        "--config",
        s(&bad_config),
        "extract",
        s(&data("golden.conllu")),
        "-o",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(4));

    let out = selpref(&[
        "extract",
        s(&data("golden.conllu")),
        "-o",
        s(&dir.path().join("x")),
        "--boundaries",
        "0.5,0.1",
    ]);
    assert_eq!(out.status.code(), Some(4));

    let empty = dir.path().join("empty.conllu");
    fs::write(&empty, "").unwrap();
    let out = selpref(&["extract", s(&empty), "-o", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(5));

    let model = trained_model(dir.path());
    let out = selpref(&["query", s(&model), "iceberg"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iceberg"));
    let out = selpref(&["plausibility", s(&model), "iceberg", "sink@nsubj"]);
    assert_eq!(out.status.code(), Some(5));

    let empty_pairs = dir.path().join("empty.tsv");
    fs::write(&empty_pairs, "").unwrap();
    let out = selpref(&["features", s(&model), s(&empty_pairs)]);
    assert_eq!(out.status.code(), Some(5));

    let corrupt = dir.path().join("corrupt.spm");
    fs::write(&corrupt, b"SPREFEMB garbage").unwrap();
    let out = selpref(&["query", s(&corrupt), "ship"]);
    assert_eq!(out.status.code(), Some(3));
}
