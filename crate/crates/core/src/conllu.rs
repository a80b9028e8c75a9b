//! CoNLL-U ingestion and dependency graphs.
//!
//! Sentences are read block by block from a buffered reader. Multiword-token
//! ranges (`1-2`) and empty nodes (`5.1`) are accepted in the input but never
//! become tokens. The DEPS column provides the enhanced dependency layer and
//! an `EntityType=/type/path` entry in MISC attaches a fine-grained type.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Key in the MISC column that carries a fine-grained entity type.
pub const ENTITY_TYPE_KEY: &str = "EntityType";

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("sentence ending at line {line}: {message}")]
    InvalidSentence { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("token {dependent} ({form}) refers to missing governor {governor}")]
    DanglingGovernor {
        dependent: usize,
        form: String,
        governor: usize,
    },

    #[error("token {index} ({form}) is its own governor")]
    SelfLoop { index: usize, form: String },
}

/// A syntactic word of a sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// Basic governor, 0 is the artificial root.
    pub head: usize,
    pub deprel: String,
    /// `(governor, relation)` pairs from the DEPS column.
    pub enhanced_heads: Vec<(usize, String)>,
    pub entity_type: Option<String>,
}

impl Token {
    pub fn new(
        index: usize,
        form: impl Into<String>,
        lemma: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
            enhanced_heads: Vec::new(),
            entity_type: None,
        }
    }

    pub fn with_enhanced(mut self, heads: &[(usize, &str)]) -> Self {
        self.enhanced_heads = heads.iter().map(|&(g, r)| (g, r.to_owned())).collect();
        self
    }

    pub fn with_entity_type(mut self, entity_type: impl Into<String>) -> Self {
        self.entity_type = Some(entity_type.into());
        self
    }
}

/// A validated, immutable sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
    sentence_id: Option<String>,
    doc_id: Option<String>,
}

impl Sentence {
    /// Validates token numbering and governor references.
    pub fn new(
        tokens: Vec<Token>,
        sentence_id: Option<String>,
        doc_id: Option<String>,
    ) -> Result<Self, String> {
        let n = tokens.len();
        for (pos, token) in tokens.iter().enumerate() {
            if token.index != pos + 1 {
                return Err(format!(
                    "token ids are not consecutive: expected {}, found {}",
                    pos + 1,
                    token.index
                ));
            }
            if token.head == token.index {
                return Err(format!("token {} is its own head", token.index));
            }
            if token.head > n {
                return Err(format!(
                    "token {} has head {} beyond sentence length {}",
                    token.index, token.head, n
                ));
            }
            if token.deprel.is_empty() {
                return Err(format!("token {} has an empty relation", token.index));
            }
            for (governor, relation) in &token.enhanced_heads {
                if *governor > n {
                    return Err(format!(
                        "token {} has enhanced governor {} beyond sentence length {}",
                        token.index, governor, n
                    ));
                }
                if relation.is_empty() {
                    return Err(format!(
                        "token {} has an empty enhanced relation",
                        token.index
                    ));
                }
            }
        }

        Ok(Sentence {
            tokens,
            sentence_id,
            doc_id,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_id(&self) -> Option<&str> {
        self.sentence_id.as_deref()
    }

    pub fn doc_id(&self) -> Option<&str> {
        self.doc_id.as_deref()
    }

    fn has_enhanced(&self) -> bool {
        self.tokens.iter().any(|t| !t.enhanced_heads.is_empty())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Basic,
    Enhanced,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub governor: usize,
    pub dependent: usize,
    pub relation: String,
}

impl Edge {
    pub fn new(governor: usize, dependent: usize, relation: impl Into<String>) -> Self {
        Edge {
            governor,
            dependent,
            relation: relation.into(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "{} -{}-> {}",
            self.governor, self.relation, self.dependent
        )
    }
}

/// Dependency graph over the tokens of one sentence.
///
/// Edges are ordered by dependent index and, for a single dependent, by the
/// order in which the input listed its governors. Duplicates are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    layer: Layer,
    len: usize,
    edges: Vec<Edge>,
}

impl DepGraph {
    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// Number of token nodes (the root is not counted).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn children(&self, governor: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.governor == governor)
    }

    pub fn contains(&self, governor: usize, dependent: usize, relation: &str) -> bool {
        self.edges
            .iter()
            .any(|e| e.governor == governor && e.dependent == dependent && e.relation == relation)
    }

    fn from_edges(
        sentence: &Sentence,
        layer: Layer,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let n = sentence.len();
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for edge in edges {
            let form = || {
                sentence
                    .token(edge.dependent)
                    .map(|t| t.form.clone())
                    .unwrap_or_default()
            };
            if edge.governor > n || edge.dependent == 0 || edge.dependent > n {
                return Err(GraphError::DanglingGovernor {
                    dependent: edge.dependent,
                    form: form(),
                    governor: edge.governor,
                });
            }
            if edge.governor == edge.dependent {
                return Err(GraphError::SelfLoop {
                    index: edge.dependent,
                    form: form(),
                });
            }
            if seen.insert(edge.clone()) {
                kept.push(edge);
            }
        }

        Ok(DepGraph {
            layer,
            len: n,
            edges: kept,
        })
    }
}

/// Graph of the basic (HEAD/DEPREL) dependencies.
pub fn basic_graph(sentence: &Sentence) -> Result<DepGraph, GraphError> {
    DepGraph::from_edges(
        sentence,
        Layer::Basic,
        sentence
            .tokens()
            .iter()
            .map(|t| Edge::new(t.head, t.index, t.deprel.clone())),
    )
}

/// Graph of the enhanced dependencies.
///
/// A token that lists enhanced governors contributes exactly those edges; a
/// token with an empty DEPS column keeps its basic edge. Without any enhanced
/// annotation in the sentence the result equals the basic graph.
pub fn enhanced_graph(sentence: &Sentence) -> Result<DepGraph, GraphError> {
    if !sentence.has_enhanced() {
        let mut graph = basic_graph(sentence)?;
        graph.layer = Layer::Enhanced;
        return Ok(graph);
    }

    let edges = sentence.tokens().iter().flat_map(|t| {
        let edges: Vec<Edge> = if t.enhanced_heads.is_empty() {
            vec![Edge::new(t.head, t.index, t.deprel.clone())]
        } else {
            t.enhanced_heads
                .iter()
                .map(|(g, r)| Edge::new(*g, t.index, r.clone()))
                .collect()
        };
        edges
    });

    DepGraph::from_edges(sentence, Layer::Enhanced, edges)
}

/// How the reader treats malformed sentence blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorMode {
    /// Stop at the first malformed block.
    #[default]
    Abort,
    /// Drop malformed blocks and count them.
    Skip,
}

/// Streaming CoNLL-U reader yielding one sentence per block.
pub struct ConlluReader<R> {
    reader: R,
    mode: ErrorMode,
    line_no: usize,
    doc_id: Option<String>,
    skipped: usize,
    done: bool,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(reader: R, mode: ErrorMode) -> Self {
        ConlluReader {
            reader,
            mode,
            line_no: 0,
            doc_id: None,
            skipped: 0,
            done: false,
        }
    }

    /// Number of malformed blocks dropped in skip mode.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Reads the next block, returning `None` at end of input.
    fn read_block(&mut self) -> Option<Result<Sentence, ConlluError>> {
        let mut tokens = Vec::new();
        let mut sentence_id = None;
        let mut error: Option<ConlluError> = None;
        let mut in_block = false;
        let mut buf = String::new();

        loop {
            buf.clear();
            let read = match self.reader.read_line(&mut buf) {
                Ok(read) => read,
                Err(err) => return Some(Err(err.into())),
            };
            if read == 0 {
                break;
            }
            self.line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);

            if line.trim().is_empty() {
                if in_block {
                    break;
                }
                continue;
            }
            in_block = true;

            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(id) = comment.strip_prefix("sent_id") {
                    sentence_id = Some(id.trim_start_matches([' ', '=']).trim().to_owned());
                } else if let Some(id) = comment.strip_prefix("newdoc id") {
                    self.doc_id = Some(id.trim_start_matches([' ', '=']).trim().to_owned());
                }
                continue;
            }

            if error.is_some() {
                continue;
            }

            match parse_token_line(line) {
                Ok(Some(token)) => tokens.push(token),
                Ok(None) => {}
                Err(message) => {
                    error = Some(ConlluError::Malformed {
                        line: self.line_no,
                        message,
                    })
                }
            }
        }

        if !in_block {
            return None;
        }
        if let Some(err) = error {
            return Some(Err(err));
        }

        Some(
            Sentence::new(tokens, sentence_id, self.doc_id.clone()).map_err(|message| {
                ConlluError::InvalidSentence {
                    line: self.line_no,
                    message,
                }
            }),
        )
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<Sentence, ConlluError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.read_block() {
                None => {
                    self.done = true;
                    return None;
                }
                // Comment-only blocks such as a bare `# newdoc` header.
                Some(Ok(sentence)) if sentence.is_empty() => {}
                Some(Ok(sentence)) => return Some(Ok(sentence)),
                Some(Err(ConlluError::Io(err))) => {
                    self.done = true;
                    return Some(Err(ConlluError::Io(err)));
                }
                Some(Err(err)) => match self.mode {
                    ErrorMode::Skip => {
                        log::warn!("skipping sentence: {}", err);
                        self.skipped += 1;
                    }
                    ErrorMode::Abort => {
                        self.done = true;
                        return Some(Err(err));
                    }
                },
            }
        }
    }
}

/// Result of reading a whole CoNLL-U stream.
#[derive(Debug, Default)]
pub struct ParsedCorpus {
    pub sentences: Vec<Sentence>,
    pub skipped: usize,
}

/// Reads every sentence from `reader`.
pub fn parse_conllu<R: BufRead>(reader: R, mode: ErrorMode) -> Result<ParsedCorpus, ConlluError> {
    let mut conllu = ConlluReader::new(reader, mode);
    let sentences = conllu.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok(ParsedCorpus {
        sentences,
        skipped: conllu.skipped(),
    })
}

fn parse_index(field: &str, what: &str) -> Result<usize, String> {
    field
        .parse()
        .map_err(|_| format!("non-numeric {} '{}'", what, field))
}

fn field_or_empty(field: &str) -> &str {
    if field == "_" {
        ""
    } else {
        field
    }
}

/// Parses one token line; `Ok(None)` for multiword ranges and empty nodes.
fn parse_token_line(line: &str) -> Result<Option<Token>, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 10 {
        return Err(format!("expected 10 columns, found {}", fields.len()));
    }

    let id = fields[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let index = parse_index(id, "id")?;
    if index == 0 {
        return Err("token id 0 is reserved for the root".to_owned());
    }

    let form = fields[1].to_owned();
    if form.is_empty() {
        return Err(format!("token {} has an empty form", index));
    }
    let lemma = match fields[2] {
        "_" | "" => form.to_lowercase(),
        lemma => lemma.to_owned(),
    };
    let upos = field_or_empty(fields[3]).to_owned();
    let head = parse_index(fields[6], "head")?;
    let deprel = field_or_empty(fields[7]).to_owned();
    if deprel.is_empty() {
        return Err(format!("token {} has no relation", index));
    }

    let mut enhanced_heads = Vec::new();
    let deps = field_or_empty(fields[8]);
    if !deps.is_empty() {
        for dep in deps.split('|') {
            let (governor, relation) = dep
                .split_once(':')
                .ok_or_else(|| format!("malformed DEPS entry '{}'", dep))?;
            if relation.is_empty() {
                return Err(format!("empty relation in DEPS entry '{}'", dep));
            }
            // Edges attached to empty nodes are not part of the word graph.
            if governor.contains('.') {
                continue;
            }
            enhanced_heads.push((parse_index(governor, "DEPS governor")?, relation.to_owned()));
        }
    }

    let entity_type = field_or_empty(fields[9])
        .split('|')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == ENTITY_TYPE_KEY)
        .map(|(_, v)| v.to_owned());

    Ok(Some(Token {
        index,
        form,
        lemma,
        upos,
        head,
        deprel,
        enhanced_heads,
        entity_type,
    }))
}

fn or_underscore(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

/// Writes sentences back as CoNLL-U. XPOS and FEATS are not retained and are
/// written as `_`.
pub fn write_conllu<W: Write>(mut writer: W, sentences: &[Sentence]) -> io::Result<()> {
    let mut doc_id: Option<&str> = None;
    for sentence in sentences {
        if sentence.doc_id() != doc_id {
            if let Some(id) = sentence.doc_id() {
                writeln!(writer, "# newdoc id = {}", id)?;
            }
            doc_id = sentence.doc_id();
        }
        if let Some(id) = sentence.sentence_id() {
            writeln!(writer, "# sent_id = {}", id)?;
        }
        for t in sentence.tokens() {
            let deps = if t.enhanced_heads.is_empty() {
                "_".to_owned()
            } else {
                t.enhanced_heads
                    .iter()
                    .map(|(g, r)| format!("{}:{}", g, r))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            let misc = match &t.entity_type {
                Some(ty) => format!("{}={}", ENTITY_TYPE_KEY, ty),
                None => "_".to_owned(),
            };
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t{}\t{}",
                t.index,
                t.form,
                t.lemma,
                or_underscore(&t.upos),
                t.head,
                t.deprel,
                deps,
                misc
            )?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TITANIC: &str = "1\tTitanic\tTitanic\tPROPN\t_\t_\t2\tnsubj\t2:nsubj\t_\n\
                           2\tsank\tsink\tVERB\t_\t_\t0\troot\t0:root\t_\n";

    fn parse(text: &str, mode: ErrorMode) -> Result<ParsedCorpus, ConlluError> {
        parse_conllu(text.as_bytes(), mode)
    }

    #[test]
    fn parses_two_token_sentence() {
        let corpus = parse(TITANIC, ErrorMode::Abort).unwrap();
        assert_eq!(corpus.sentences.len(), 1);
        let s = &corpus.sentences[0];
        assert_eq!(s.len(), 2);
        let t = s.token(1).unwrap();
        assert_eq!(t.form, "Titanic");
        assert_eq!(t.head, 2);
        assert_eq!(t.deprel, "nsubj");
        assert_eq!(t.enhanced_heads, vec![(2, "nsubj".to_owned())]);
        assert_eq!(s.token(2).unwrap().lemma, "sink");
    }

    #[test]
    fn empty_input_gives_no_sentences() {
        let corpus = parse("", ErrorMode::Abort).unwrap();
        assert!(corpus.sentences.is_empty());
        let corpus = parse("\n\n# just a comment\n", ErrorMode::Abort).unwrap();
        assert!(corpus.sentences.is_empty());
    }

    #[test]
    fn skips_multiword_and_empty_nodes() {
        let text = "# sent_id = s1\n\
                    1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    1\tde\tde\tADP\t_\t_\t2\tcase\t2:case\t_\n\
                    2\tel\tel\tDET\t_\t_\t0\troot\t0:root|2.1:dep\t_\n\
                    2.1\tx\tx\tX\t_\t_\t_\t_\t2:dep\t_\n";
        let corpus = parse(text, ErrorMode::Abort).unwrap();
        let s = &corpus.sentences[0];
        assert_eq!(s.len(), 2);
        assert_eq!(s.sentence_id(), Some("s1"));
        assert_eq!(
            s.token(2).unwrap().enhanced_heads,
            vec![(0, "root".to_owned())]
        );
    }

    #[test]
    fn underscore_lemma_falls_back_to_lowercased_form() {
        let text = "1\tShips\t_\tNOUN\t_\t_\t0\troot\t_\tEntityType=/product/ship\n";
        let corpus = parse(text, ErrorMode::Abort).unwrap();
        let t = corpus.sentences[0].token(1).unwrap();
        assert_eq!(t.lemma, "ships");
        assert!(t.enhanced_heads.is_empty());
        assert_eq!(t.entity_type.as_deref(), Some("/product/ship"));
    }

    #[test]
    fn malformed_middle_sentence_skip_mode() {
        let text = format!(
            "{}\n1\tbad\tbad\tNOUN\t_\t_\tx\tnsubj\t_\t_\n\n{}",
            TITANIC, TITANIC
        );
        let corpus = parse(&text, ErrorMode::Skip).unwrap();
        assert_eq!(corpus.sentences.len(), 2);
        assert_eq!(corpus.skipped, 1);
    }

    #[test]
    fn malformed_line_abort_mode_names_line() {
        let text = format!("{}\n1\tbad\tbad\n", TITANIC);
        match parse(&text, ErrorMode::Abort) {
            Err(ConlluError::Malformed { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn rejects_self_head_and_out_of_range_heads() {
        let self_head = "1\ta\ta\tNOUN\t_\t_\t1\tdep\t_\t_\n";
        assert!(matches!(
            parse(self_head, ErrorMode::Abort),
            Err(ConlluError::InvalidSentence { .. })
        ));
        let beyond = "1\ta\ta\tNOUN\t_\t_\t3\tdep\t_\t_\n";
        assert!(parse(beyond, ErrorMode::Abort).is_err());
        let deps_beyond = "1\ta\ta\tNOUN\t_\t_\t0\troot\t4:dep\t_\n";
        assert!(parse(deps_beyond, ErrorMode::Abort).is_err());
    }

    #[test]
    fn doc_id_carries_over() {
        let text = format!("# newdoc id = d1\n{}\n{}", TITANIC, TITANIC);
        let corpus = parse(&text, ErrorMode::Abort).unwrap();
        assert!(corpus.sentences.iter().all(|s| s.doc_id() == Some("d1")));
    }

    fn girls_sentence() -> Sentence {
        // Both of the girls laughed
        Sentence::new(
            vec![
                Token::new(1, "Both", "both", "PRON", 5, "nsubj").with_enhanced(&[(5, "nsubj")]),
                Token::new(2, "of", "of", "ADP", 4, "case").with_enhanced(&[(4, "case")]),
                Token::new(3, "the", "the", "DET", 4, "det").with_enhanced(&[(4, "det")]),
                Token::new(4, "girls", "girl", "NOUN", 1, "nmod")
                    .with_enhanced(&[(1, "nmod:of"), (5, "nsubj")]),
                Token::new(5, "laughed", "laugh", "VERB", 0, "root").with_enhanced(&[(0, "root")]),
            ],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn enhanced_graph_adds_true_subject() {
        let s = girls_sentence();
        let g = enhanced_graph(&s).unwrap();
        assert_eq!(g.layer(), Layer::Enhanced);
        assert!(g.contains(5, 4, "nsubj"));
        assert!(g.contains(5, 1, "nsubj"));
        let basic = basic_graph(&s).unwrap();
        assert!(!basic.contains(5, 4, "nsubj"));
    }

    #[test]
    fn enhanced_graph_falls_back_to_basic() {
        let s = Sentence::new(
            vec![
                Token::new(1, "Titanic", "Titanic", "PROPN", 2, "nsubj"),
                Token::new(2, "sank", "sink", "VERB", 0, "root"),
            ],
            None,
            None,
        )
        .unwrap();
        let g = enhanced_graph(&s).unwrap();
        assert_eq!(g.edges(), basic_graph(&s).unwrap().edges());
    }

    #[test]
    fn chain_with_two_extra_enhanced_edges() {
        // 1 <- 2 <- 3 <- 4 <- 5 (root), plus two extra enhanced governors.
        let s = Sentence::new(
            vec![
                Token::new(1, "a", "a", "NOUN", 2, "dep")
                    .with_enhanced(&[(2, "dep"), (3, "nsubj")]),
                Token::new(2, "b", "b", "NOUN", 3, "dep").with_enhanced(&[(3, "dep")]),
                Token::new(3, "c", "c", "NOUN", 4, "dep").with_enhanced(&[(4, "dep"), (5, "obj")]),
                Token::new(4, "d", "d", "NOUN", 5, "dep").with_enhanced(&[(5, "dep")]),
                Token::new(5, "e", "e", "VERB", 0, "root").with_enhanced(&[(0, "root")]),
            ],
            None,
            None,
        )
        .unwrap();
        assert_eq!(enhanced_graph(&s).unwrap().edges().len(), 5 + 2);
    }

    #[test]
    fn graph_rejects_dangling_governor() {
        // Bypass sentence validation to construct an inconsistent token list.
        let s = Sentence {
            tokens: vec![Token::new(1, "x", "x", "NOUN", 7, "dep")],
            sentence_id: None,
            doc_id: None,
        };
        assert_eq!(
            basic_graph(&s),
            Err(GraphError::DanglingGovernor {
                dependent: 1,
                form: "x".to_owned(),
                governor: 7
            })
        );
    }

    #[test]
    fn writer_round_trips() {
        let text = "# newdoc id = d\n# sent_id = 1\n\
                    1\tBoth\tboth\tPRON\t_\t_\t5\tnsubj\t5:nsubj\t_\n\
                    2\tof\tof\tADP\t_\t_\t4\tcase\t4:case\t_\n\
                    3\tthe\tthe\tDET\t_\t_\t4\tdet\t4:det\t_\n\
                    4\tgirls\tgirl\tNOUN\t_\t_\t1\tnmod\t1:nmod:of|5:nsubj\tEntityType=/person\n\
                    5\tlaughed\tlaugh\tVERB\t_\t_\t0\troot\t0:root\t_\n\n";
        let corpus = parse(text, ErrorMode::Abort).unwrap();
        let mut out = Vec::new();
        write_conllu(&mut out, &corpus.sentences).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
