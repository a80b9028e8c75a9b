use std::collections::BTreeSet;

use proptest::prelude::*;

use selpref::conllu::{
    basic_graph, enhanced_graph, parse_conllu, write_conllu, ErrorMode, Sentence, Token,
};
use selpref::features::{mention_properties, MentionRecord, Property};
use selpref::pairs::{
    augment_with_types, extract_pairs, ExtractionConfig, Gazetteer, TermContextPair,
};
use selpref::store::{neighbors, Catalog, CatalogKind};
use selpref::trainer::{sgns_loss_and_grad, train, Hyperparams, Mode, TrainError};
use selpref::vocab::{build_negative_table, build_vocab};

const FORMS: [&str; 8] = [
    "ship", "Titanic", "captain", "New York", "old", "the", "sank", "girls",
];
const UPOS: [&str; 8] = [
    "NOUN", "PROPN", "PRON", "VERB", "DET", "ADJ", "NUM", "PUNCT",
];
const RELS: [&str; 10] = [
    "nsubj", "obj", "amod", "compound", "det", "punct", "case", "nmod:of", "flat", "nummod",
];

/// A governor index in `0..=n` that is not `own`.
fn governor(n: usize, own: usize) -> impl Strategy<Value = usize> {
    (0..n).prop_map(move |g| if g >= own { g + 1 } else { g })
}

fn arb_token(n: usize, index: usize) -> impl Strategy<Value = Token> {
    (
        0..FORMS.len(),
        0..UPOS.len(),
        governor(n, index),
        0..RELS.len(),
        prop::collection::vec((governor(n, index), 0..RELS.len()), 0..3),
        prop::option::weighted(0.2, Just("/product/ship")),
    )
        .prop_map(move |(f, u, head, rel, enhanced, ty)| {
            let enhanced: Vec<(usize, &str)> =
                enhanced.into_iter().map(|(g, r)| (g, RELS[r])).collect();
            let mut token = Token::new(
                index,
                FORMS[f],
                FORMS[f].to_lowercase(),
                UPOS[u],
                head,
                RELS[rel],
            )
            .with_enhanced(&enhanced);
            if let Some(ty) = ty {
                token = token.with_entity_type(ty);
            }
            token
        })
}

fn arb_sentence() -> impl Strategy<Value = Sentence> {
    (1usize..8).prop_flat_map(|n| {
        let tokens: Vec<_> = (1..=n).map(|i| arb_token(n, i)).collect();
        tokens.prop_map(|tokens| {
            Sentence::new(tokens, Some("s".into()), None).expect("valid by construction")
        })
    })
}

fn arb_pairs() -> impl Strategy<Value = Vec<TermContextPair>> {
    let terms = ["a", "b", "c", "/t/x", "d_e"];
    let slots = ["p@r", "q@r", "s@nsubj"];
    prop::collection::vec((0..terms.len(), 0..slots.len(), 1u64..4), 1..20).prop_map(move |rows| {
        rows.into_iter()
            .map(|(t, s, w)| TermContextPair::weighted(terms[t], slots[s], w))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conllu_round_trip_preserves_tokens(sentences in prop::collection::vec(arb_sentence(), 1..4)) {
        let mut buf = Vec::new();
        write_conllu(&mut buf, &sentences).unwrap();
        let parsed = parse_conllu(&buf[..], ErrorMode::Abort).unwrap();
        prop_assert_eq!(parsed.skipped, 0);
        prop_assert_eq!(&parsed.sentences, &sentences);
        for s in &parsed.sentences {
            for (pos, t) in s.tokens().iter().enumerate() {
                prop_assert_eq!(t.index, pos + 1);
                prop_assert!(t.head != t.index && t.head <= s.len());
                prop_assert!(!t.deprel.is_empty());
                prop_assert!(t.enhanced_heads.iter().all(|(g, r)| *g <= s.len() && !r.is_empty()));
            }
        }
    }

    #[test]
    fn enhanced_graph_follows_per_token_rule(s in arb_sentence()) {
        let basic = basic_graph(&s).unwrap();
        let enhanced = enhanced_graph(&s).unwrap();
        prop_assert!(enhanced.edges().iter().all(|e| e.governor != e.dependent));
        let any_enhanced = s.tokens().iter().any(|t| !t.enhanced_heads.is_empty());
        for t in s.tokens() {
            let got: BTreeSet<(usize, String)> = enhanced
                .edges()
                .iter()
                .filter(|e| e.dependent == t.index)
                .map(|e| (e.governor, e.relation.clone()))
                .collect();
            let expected: BTreeSet<(usize, String)> = if t.enhanced_heads.is_empty() || !any_enhanced {
                [(t.head, t.deprel.clone())].into_iter().collect()
            } else {
                t.enhanced_heads.iter().cloned().collect()
            };
            prop_assert_eq!(got, expected);
        }
        if !any_enhanced {
            prop_assert_eq!(basic.edges(), enhanced.edges());
        }
    }

    #[test]
    fn extracted_pairs_are_well_formed(s in arb_sentence(), pronouns in any::<bool>(), max in 1usize..5) {
        let config = ExtractionConfig {
            include_pronouns: pronouns,
            max_phrase_tokens: max,
            ..ExtractionConfig::default()
        };
        let graph = enhanced_graph(&s).unwrap();
        let pairs = extract_pairs(&graph, &s, &config);
        for p in &pairs {
            prop_assert!(p.validate().is_ok(), "{:?}", p);
            prop_assert_eq!(p.context.matches('@').count(), 1);
            let relation = p.context.split('@').nth(1).unwrap();
            prop_assert!(!config.is_blacklisted(relation));
        }

        let mut gazetteer = Gazetteer::new();
        gazetteer.insert("ship", vec!["/product/ship".into(), "/object".into()]).unwrap();
        let augmented = augment_with_types(pairs.clone(), &s, &gazetteer);
        prop_assert!(augmented.len() >= pairs.len());
        let originals: Vec<&TermContextPair> = augmented.iter().filter(|p| !p.term.starts_with('/')).collect();
        prop_assert_eq!(originals, pairs.iter().collect::<Vec<_>>());
        prop_assert!(augmented.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn gradients_match_finite_differences(
        d in 1usize..12,
        k in 1usize..6,
        seed in prop::collection::vec(-1.0f64..1.0, 12 * 8),
    ) {
        let w = &seed[..d];
        let c = &seed[12..12 + d];
        let negs: Vec<&[f64]> = (0..k).map(|i| &seed[24 + 12 * i..24 + 12 * i + d]).collect();
        let grads = sgns_loss_and_grad(w, c, &negs);
        let h = 1e-5;
        for i in 0..d {
            let mut up = w.to_vec();
            let mut down = w.to_vec();
            up[i] += h;
            down[i] -= h;
            let fd = (sgns_loss_and_grad(&up, c, &negs).loss - sgns_loss_and_grad(&down, c, &negs).loss) / (2.0 * h);
            prop_assert!((fd - grads.grad_w[i]).abs() <= 1e-6 * fd.abs().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trained_models_respect_their_shape(pairs in arb_pairs(), dim in 1usize..6, parallel in any::<bool>(), seed in any::<u64>()) {
        let vocab = build_vocab(&pairs, 1, 1).unwrap();
        let table = build_negative_table(&vocab, 0.75);
        let hp = Hyperparams {
            dim,
            negatives: 2,
            epochs: 2,
            subsample: 0.0,
            seed,
            mode: if parallel { Mode::Parallel } else { Mode::Deterministic },
            threads: 2,
            ..Hyperparams::default()
        };
        let model = train(&pairs, &vocab, &table, &hp, None).unwrap().model;
        prop_assert_eq!(model.term_matrix().len(), vocab.terms.len() * dim);
        prop_assert_eq!(model.context_matrix().len(), vocab.contexts.len() * dim);
        prop_assert!(model.term_matrix().iter().chain(model.context_matrix()).all(|v| v.is_finite()));
        prop_assert_eq!(model.metadata().hyperparams.seed, seed);
        prop_assert_eq!(model.metadata().hyperparams.mode, hp.mode);

        let catalog = Catalog::new(model.vocab());
        let mut terms: Vec<usize> = catalog.entity_types.iter().chain(&catalog.phrases).copied().collect();
        terms.sort_unstable();
        prop_assert_eq!(terms, (0..vocab.terms.len()).collect::<Vec<_>>());
        prop_assert!(catalog.entity_types.iter().all(|i| !catalog.phrases.contains(i)));

        for query in vocab.terms.entries().iter().chain(vocab.contexts.entries()).map(|(k, _)| k.as_str()) {
            let result = neighbors(&model, query, 4).unwrap();
            for kind in CatalogKind::ALL {
                let list = result.catalog(kind);
                prop_assert!(list.len() <= 4);
                prop_assert!(list.iter().all(|(key, s)| key != query && (-1.0..=1.0).contains(s)));
                prop_assert!(list.windows(2).all(|w| w[0].1 >= w[1].1));
            }
        }

        let mention = MentionRecord::new("a", "b").with_context("p", "r");
        let props = mention_properties(&mention, &model);
        let slot = props.get(Property::ContextSlot).unwrap();
        let expected = vocab.context("p@r").map(|i| model.context_vector(i).to_vec());
        prop_assert_eq!(&slot.vector, &expected);
        let head = props.get(Property::Head).unwrap();
        prop_assert_eq!(&head.vector, &vocab.term("b").map(|i| model.term_vector(i).to_vec()));
    }
}

#[test]
fn hyperparameter_invariants_are_enforced() {
    let bad = [
        Hyperparams {
            dim: 0,
            ..Hyperparams::default()
        },
        Hyperparams {
            negatives: 0,
            ..Hyperparams::default()
        },
        Hyperparams {
            min_lr: 0.5,
            ..Hyperparams::default()
        },
    ];
    for hp in bad {
        assert!(matches!(
            hp.validate(),
            Err(TrainError::InvalidHyperparams(_))
        ));
    }
}
