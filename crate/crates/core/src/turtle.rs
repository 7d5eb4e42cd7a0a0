//! Parser and serializer for the N3/Turtle subset used by the ontology
//! documents: `@prefix` directives, subject–predicate–object statements,
//! `;` predicate lists, `,` object lists, the `a` keyword, `[ ... ]` blank
//! nodes, `#` comments and `.` terminators.
//!
//! Parsing is a pure function of the input text. Blank node ids are
//! assigned `_:b1`, `_:b2`, ... in the order their brackets open, so the
//! same bytes always produce the same [`TripleSet`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::term::{vocab, Iri, Literal, Node, Triple, TripleSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown prefix '{name}:' at {line}:{col}")]
    UnknownPrefix { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    PrefixDirective,
    /// `<...>` with the raw IRI text.
    IriRef(String),
    /// `p:local`; prefix may be empty for the default namespace.
    QName(String, String),
    /// Bare prefix part of a `@prefix` directive (`p:`).
    PrefixName(String),
    BlankLabel(String),
    StringLit(String),
    IntegerLit(i64),
    KeywordA,
    LBracket,
    RBracket,
    Semicolon,
    Comma,
    Dot,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, message: message.into() }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '#' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '.' => {
                    self.bump();
                    out.push(Spanned { token: Token::Dot, line, col });
                }
                ';' => {
                    self.bump();
                    out.push(Spanned { token: Token::Semicolon, line, col });
                }
                ',' => {
                    self.bump();
                    out.push(Spanned { token: Token::Comma, line, col });
                }
                '[' => {
                    self.bump();
                    out.push(Spanned { token: Token::LBracket, line, col });
                }
                ']' => {
                    self.bump();
                    out.push(Spanned { token: Token::RBracket, line, col });
                }
                '(' | ')' => {
                    return Err(self.error("collections '( ... )' are not supported"));
                }
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) => iri.push(c),
                            None => return Err(self.error("unterminated IRI reference")),
                        }
                    }
                    out.push(Spanned { token: Token::IriRef(iri), line, col });
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(other) => {
                                    return Err(self
                                        .error(format!("unsupported escape '\\{other}'")))
                                }
                                None => return Err(self.error("unterminated string")),
                            },
                            Some(c) => s.push(c),
                            None => return Err(self.error("unterminated string")),
                        }
                    }
                    if matches!(self.chars.peek(), Some('@')) {
                        return Err(self.error("language tags are not supported"));
                    }
                    if matches!(self.chars.peek(), Some('^')) {
                        return Err(self.error("datatype annotations are not supported"));
                    }
                    out.push(Spanned { token: Token::StringLit(s), line, col });
                }
                '@' => {
                    self.bump();
                    let word = self.take_while(is_name_char);
                    if word == "prefix" {
                        out.push(Spanned { token: Token::PrefixDirective, line, col });
                    } else {
                        return Err(self.error(format!("unsupported directive '@{word}'")));
                    }
                }
                '_' => {
                    self.bump();
                    if self.bump() != Some(':') {
                        return Err(self.error("expected ':' after '_' in blank node label"));
                    }
                    let label = self.take_while(is_name_char);
                    if label.is_empty() {
                        return Err(self.error("empty blank node label"));
                    }
                    out.push(Spanned { token: Token::BlankLabel(format!("_:{label}")), line, col });
                }
                c if c == '+' || c == '-' || c.is_ascii_digit() => {
                    let mut text = String::new();
                    if c == '+' || c == '-' {
                        text.push(c);
                        self.bump();
                    }
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    if digits.is_empty() {
                        return Err(self.error("expected digits in integer literal"));
                    }
                    text.push_str(&digits);
                    // "12abc" would otherwise lex as integer then name
                    if self.chars.peek().is_some_and(|&c| is_name_char(c) || c == ':') {
                        return Err(self.error("malformed numeric literal"));
                    }
                    let n = text
                        .parse::<i64>()
                        .map_err(|_| self.error("integer literal out of range"))?;
                    out.push(Spanned { token: Token::IntegerLit(n), line, col });
                }
                ':' => {
                    self.bump();
                    let local = self.take_while(is_name_char);
                    if local.is_empty() {
                        out.push(Spanned { token: Token::PrefixName(String::new()), line, col });
                    } else {
                        out.push(Spanned { token: Token::QName(String::new(), local), line, col });
                    }
                }
                c if is_name_char(c) => {
                    let word = self.take_while(is_name_char);
                    if self.chars.peek() == Some(&':') {
                        self.bump();
                        let local = self.take_while(is_name_char);
                        if local.is_empty() {
                            out.push(Spanned { token: Token::PrefixName(word), line, col });
                        } else {
                            out.push(Spanned { token: Token::QName(word, local), line, col });
                        }
                    } else if word == "a" {
                        out.push(Spanned { token: Token::KeywordA, line, col });
                    } else {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            message: format!("unexpected bare word '{word}'"),
                        });
                    }
                }
                other => return Err(self.error(format!("unexpected character '{other}'"))),
            }
        }
        Ok(out)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if pred(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
    triples: Vec<Triple>,
    blank_counter: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(s) if &s.token == want => Ok(()),
            Some(s) => Err(ParseError::Syntax {
                line: s.line,
                col: s.col,
                message: format!("expected {what}"),
            }),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }

    fn resolve(&self, prefix: &str, local: &str, line: usize, col: usize) -> Result<Iri, ParseError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| ParseError::UnknownPrefix {
            name: prefix.to_string(),
            line,
            col,
        })?;
        Ok(Iri::new(prefix, local, format!("{ns}{local}")))
    }

    fn fresh_blank(&mut self) -> String {
        self.blank_counter += 1;
        format!("_:b{}", self.blank_counter)
    }

    fn document(&mut self) -> Result<(), ParseError> {
        while self.peek().is_some() {
            if matches!(self.peek().map(|s| &s.token), Some(Token::PrefixDirective)) {
                self.prefix_directive()?;
            } else {
                self.statement()?;
            }
        }
        Ok(())
    }

    fn prefix_directive(&mut self) -> Result<(), ParseError> {
        self.next(); // @prefix
        let name = match self.next() {
            Some(Spanned { token: Token::PrefixName(p), .. }) => p,
            // ":" followed by a name lexes as a QName; that is not a prefix decl
            _ => return Err(self.error("expected prefix name in @prefix directive")),
        };
        let ns = match self.next() {
            Some(Spanned { token: Token::IriRef(iri), .. }) => iri,
            _ => return Err(self.error("expected <namespace> in @prefix directive")),
        };
        self.expect(&Token::Dot, "'.' after @prefix directive")?;
        self.prefixes.insert(name, ns);
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let subject = self.subject()?;
        // a bracketed subject may stand alone: "[ p o ] ."
        let bare_blank_subject = matches!(subject, Node::Blank(_));
        if bare_blank_subject && matches!(self.peek().map(|s| &s.token), Some(Token::Dot)) {
            self.next();
            return Ok(());
        }
        self.predicate_object_list(&subject)?;
        self.expect(&Token::Dot, "'.' at end of statement")?;
        Ok(())
    }

    fn subject(&mut self) -> Result<Node, ParseError> {
        match self.next() {
            Some(Spanned { token: Token::QName(p, l), line, col }) => {
                Ok(Node::Iri(self.resolve(&p, &l, line, col)?))
            }
            Some(Spanned { token: Token::IriRef(iri), .. }) => Ok(Node::Iri(Iri::from_full(iri))),
            Some(Spanned { token: Token::BlankLabel(id), .. }) => Ok(Node::Blank(id)),
            Some(Spanned { token: Token::LBracket, .. }) => self.blank_node_body(),
            _ => Err(self.error("expected subject")),
        }
    }

    fn predicate(&mut self) -> Result<Iri, ParseError> {
        match self.next() {
            Some(Spanned { token: Token::KeywordA, .. }) => Ok(vocab::rdf_type()),
            Some(Spanned { token: Token::QName(p, l), line, col }) => self.resolve(&p, &l, line, col),
            Some(Spanned { token: Token::IriRef(iri), .. }) => Ok(Iri::from_full(iri)),
            _ => Err(self.error("expected predicate")),
        }
    }

    fn object(&mut self) -> Result<Node, ParseError> {
        match self.next() {
            Some(Spanned { token: Token::QName(p, l), line, col }) => {
                Ok(Node::Iri(self.resolve(&p, &l, line, col)?))
            }
            Some(Spanned { token: Token::IriRef(iri), .. }) => Ok(Node::Iri(Iri::from_full(iri))),
            Some(Spanned { token: Token::BlankLabel(id), .. }) => Ok(Node::Blank(id)),
            Some(Spanned { token: Token::StringLit(s), .. }) => {
                Ok(Node::Literal(Literal::String(s)))
            }
            Some(Spanned { token: Token::IntegerLit(n), .. }) => {
                Ok(Node::Literal(Literal::Integer(n)))
            }
            Some(Spanned { token: Token::LBracket, .. }) => self.blank_node_body(),
            _ => Err(self.error("expected object")),
        }
    }

    /// Parse the inside of `[ ... ]`, the opening bracket already consumed.
    /// Emits the bracketed node's own triples and returns the node.
    fn blank_node_body(&mut self) -> Result<Node, ParseError> {
        let node = Node::Blank(self.fresh_blank());
        if matches!(self.peek().map(|s| &s.token), Some(Token::RBracket)) {
            self.next();
            return Ok(node);
        }
        self.predicate_object_list(&node)?;
        self.expect(&Token::RBracket, "']' closing blank node")?;
        Ok(node)
    }

    fn predicate_object_list(&mut self, subject: &Node) -> Result<(), ParseError> {
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.object()?;
                self.triples.push(Triple::new(subject.clone(), predicate.clone(), object));
                if matches!(self.peek().map(|s| &s.token), Some(Token::Comma)) {
                    self.next();
                } else {
                    break;
                }
            }
            if matches!(self.peek().map(|s| &s.token), Some(Token::Semicolon)) {
                self.next();
                // allow a trailing ';' before '.' or ']'
                if matches!(
                    self.peek().map(|s| &s.token),
                    Some(Token::Dot) | Some(Token::RBracket) | None
                ) {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }
}

/// Parse a Turtle-subset document into a normalized triple set.
pub fn parse_document(text: &str) -> Result<TripleSet, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let defaults = TripleSet::with_default_prefixes();
    let mut parser = Parser {
        tokens,
        pos: 0,
        prefixes: defaults.prefixes,
        triples: Vec::new(),
        blank_counter: 0,
    };
    parser.document()?;
    Ok(TripleSet { prefixes: parser.prefixes, triples: parser.triples })
}

/// Deterministic canonical rendering: sorted prefix directives, then one
/// statement per triple in stored order, blank nodes as `_:` labels.
pub fn serialize(ts: &TripleSet) -> String {
    let mut out = String::new();
    for (p, ns) in &ts.prefixes {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }
    if !ts.triples.is_empty() {
        out.push('\n');
    }
    for t in &ts.triples {
        let subject = render_node(ts, &t.subject);
        let predicate = if t.predicate.full() == vocab::RDF_TYPE {
            "a".to_string()
        } else {
            ts.qname(&t.predicate).into_owned()
        };
        let object = render_node(ts, &t.object);
        let _ = writeln!(out, "{subject} {predicate} {object} .");
    }
    out
}

fn render_node(ts: &TripleSet, node: &Node) -> String {
    match node {
        Node::Iri(iri) => ts.qname(iri).into_owned(),
        Node::Blank(id) => id.clone(),
        Node::Literal(Literal::Integer(n)) => n.to_string(),
        Node::Literal(Literal::String(s)) => {
            let escaped = s
                .replace('\\', "\\\\")
                .replace('"', "\\\"")
                .replace('\n', "\\n")
                .replace('\t', "\\t");
            format!("\"{escaped}\"")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::DEFAULT_NS;

    #[test]
    fn single_subclass_statement() {
        let ts = parse_document(":Manager rdfs:subClassOf :Person .").unwrap();
        assert_eq!(ts.len(), 1);
        let t = &ts.triples[0];
        assert_eq!(t.subject.as_iri().unwrap().local_name(), "Manager");
        assert_eq!(t.predicate.full(), vocab::RDFS_SUBCLASSOF);
        assert_eq!(t.object.as_iri().unwrap().local_name(), "Person");
    }

    #[test]
    fn empty_document() {
        let ts = parse_document("").unwrap();
        assert_eq!(ts.len(), 0);
        assert_eq!(ts.prefixes.len(), 5);
    }

    #[test]
    fn bracketed_restriction_yields_three_triples_one_blank() {
        let ts = parse_document(
            "[ a owl:Restriction; owl:onProperty :studyAmong ; owl:someValuesFrom :Computer].",
        )
        .unwrap();
        assert_eq!(ts.len(), 3);
        let subject = ts.triples[0].subject.as_blank().unwrap();
        assert_eq!(subject, "_:b1");
        assert!(ts.triples.iter().all(|t| t.subject.as_blank() == Some(subject)));
    }

    #[test]
    fn object_lists_and_predicate_lists() {
        let ts = parse_document(":x :p :a, :b ; :q :c .").unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.triples[1].object.as_iri().unwrap().local_name(), "b");
    }

    #[test]
    fn a_keyword_rewrites_to_rdf_type() {
        let ts = parse_document(":r1 a :Person .").unwrap();
        assert_eq!(ts.triples[0].predicate.full(), vocab::RDF_TYPE);
    }

    #[test]
    fn comments_are_skipped() {
        let ts = parse_document("# intro\n:x a :C . # trailing\n").unwrap();
        assert_eq!(ts.len(), 1);
    }

    #[test]
    fn prefix_directive_overrides_default() {
        let ts = parse_document("@prefix : <http://elsewhere.org/> .\n:x a :C .").unwrap();
        let iri = ts.triples[0].subject.as_iri().unwrap().full().to_string();
        assert_eq!(iri, "http://elsewhere.org/x");
    }

    #[test]
    fn unknown_prefix_is_reported() {
        let err = parse_document(":x foo:bar :y .").unwrap_err();
        assert_eq!(err, ParseError::UnknownPrefix { name: "foo".into(), line: 1, col: 4 });
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_document(":x :p\n:y :q :z .").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn determinism_including_blank_ids() {
        let doc = ":C rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :p ; owl:someValuesFrom :D ] .";
        assert_eq!(parse_document(doc).unwrap(), parse_document(doc).unwrap());
    }

    #[test]
    fn serialize_empty_set_is_prefixes_only() {
        let text = serialize(&TripleSet::with_default_prefixes());
        assert!(text.lines().all(|l| l.starts_with("@prefix")));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn serialize_type_assertion_uses_a() {
        let mut ts = TripleSet::with_default_prefixes();
        ts.triples.push(Triple::new(
            Node::Iri(Iri::new("", "r1", format!("{DEFAULT_NS}r1"))),
            vocab::rdf_type(),
            Node::Iri(Iri::new("", "Person", format!("{DEFAULT_NS}Person"))),
        ));
        assert!(serialize(&ts).contains(":r1 a :Person ."));
    }

    #[test]
    fn round_trip_modulo_blank_renaming() {
        let doc = "\
:Manager rdfs:subClassOf :Person .
:ComputerTrainee rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :studyAmong ; owl:someValuesFrom :Computer ] .
:r1 a :Person .
:r1 :age 42 .
:r1 :label \"chief \\\"x\\\"\" .
";
        let once = parse_document(doc).unwrap();
        let again = parse_document(&serialize(&once)).unwrap();
        assert!(once.eq_modulo_blank_renaming(&again));
    }
}
