//! Turtle-subset parser and deterministic serializer.
//!
//! Supported syntax: `@prefix` directives, prefixed names, absolute IRIs in
//! angle brackets, plain/typed literals (xsd string/integer/decimal/boolean),
//! bare numeric and boolean tokens, `a` for rdf:type, `;` and `,`
//! continuation, `[ ... ]` anonymous blank nodes with nested predicate lists,
//! `( ... )` collections (encoded as rdf:first/rest/nil), `#` comments.
//! Anything else is rejected with a position-carrying error. Local names may
//! contain `/` and inner `.` characters.
//!
//! A document may end after a complete statement without the final `.`
//! (trailing `;` included); this keeps shape listings that stop mid-statement
//! parseable.

use std::fmt;

use thiserror::Error;

use crate::rdf::{BlankNode, Datatype, Graph, Iri, Literal, Subject, Term, Triple};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("turtle parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    IriRef(String),
    Pname(String, String),
    BlankLabel(String),
    StringLit(String),
    IntegerTok(String),
    DecimalTok(String),
    BoolTok(bool),
    CaretCaret,
    A,
    Dot,
    Semicolon,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    PrefixDirective,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::IriRef(i) => write!(f, "<{i}>"),
            Token::Pname(p, l) => write!(f, "{p}:{l}"),
            Token::BlankLabel(l) => write!(f, "_:{l}"),
            Token::StringLit(_) => write!(f, "string literal"),
            Token::IntegerTok(s) | Token::DecimalTok(s) => write!(f, "{s}"),
            Token::BoolTok(b) => write!(f, "{b}"),
            Token::CaretCaret => write!(f, "^^"),
            Token::A => write!(f, "a"),
            Token::Dot => write!(f, "."),
            Token::Semicolon => write!(f, ";"),
            Token::Comma => write!(f, ","),
            Token::LBracket => write!(f, "["),
            Token::RBracket => write!(f, "]"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::PrefixDirective => write!(f, "@prefix"),
            Token::Eof => write!(f, "end of input"),
        }
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_local_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '/')
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            _text: text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// Next token plus its start position.
    fn next_token(&mut self) -> Result<(Token, usize, usize), ParseError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let tok = self.lex()?;
        Ok((tok, line, column))
    }

    fn lex(&mut self) -> Result<Token, ParseError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(Token::Eof),
        };
        match c {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(ch) if ch.is_whitespace() => {
                            return Err(self.error("whitespace inside IRI reference"))
                        }
                        Some(ch) => iri.push(ch),
                        None => return Err(self.error("unterminated IRI reference")),
                    }
                }
                Ok(Token::IriRef(iri))
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
                            Some('r') => s.push('\r'),
                            Some('t') => s.push('\t'),
                            Some(other) => {
                                return Err(
                                    self.error(format!("unsupported escape \\{other}"))
                                )
                            }
                            None => return Err(self.error("unterminated string literal")),
                        },
                        Some(ch) => s.push(ch),
                        None => return Err(self.error("unterminated string literal")),
                    }
                }
                if self.peek() == Some('@') {
                    return Err(self.error("language tags are unsupported"));
                }
                Ok(Token::StringLit(s))
            }
            '^' => {
                self.bump();
                if self.peek() == Some('^') {
                    self.bump();
                    Ok(Token::CaretCaret)
                } else {
                    Err(self.error("expected ^^"))
                }
            }
            '.' => {
                // A dot may start a decimal like .5? Not in this subset.
                self.bump();
                Ok(Token::Dot)
            }
            ';' => {
                self.bump();
                Ok(Token::Semicolon)
            }
            ',' => {
                self.bump();
                Ok(Token::Comma)
            }
            '[' => {
                self.bump();
                Ok(Token::LBracket)
            }
            ']' => {
                self.bump();
                Ok(Token::RBracket)
            }
            '(' => {
                self.bump();
                Ok(Token::LParen)
            }
            ')' => {
                self.bump();
                Ok(Token::RParen)
            }
            '@' => {
                self.bump();
                let word = self.lex_bare_word();
                match word.as_str() {
                    "prefix" => Ok(Token::PrefixDirective),
                    other => Err(self.error(format!("unsupported directive @{other}"))),
                }
            }
            '+' | '-' | '0'..='9' => self.lex_number(),
            '_' if self.peek2() == Some(':') => {
                self.bump();
                self.bump();
                let label = self.lex_bare_word();
                if label.is_empty() {
                    return Err(self.error("empty blank node label"));
                }
                Ok(Token::BlankLabel(label))
            }
            c if is_name_start(c) => {
                let word = self.lex_bare_word();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.lex_local_name();
                    Ok(Token::Pname(word, local))
                } else {
                    match word.as_str() {
                        "a" => Ok(Token::A),
                        "true" => Ok(Token::BoolTok(true)),
                        "false" => Ok(Token::BoolTok(false)),
                        other => Err(self.error(format!("unexpected token {other:?}"))),
                    }
                }
            }
            other => Err(self.error(format!("unexpected character {other:?}"))),
        }
    }

    fn lex_bare_word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    fn lex_local_name(&mut self) -> String {
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_local_char(c) {
                local.push(c);
                self.bump();
            } else if c == '.' {
                // inner dots only: a trailing dot terminates the statement
                match self.peek2() {
                    Some(n) if is_local_char(n) => {
                        local.push(c);
                        self.bump();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        local
    }

    fn lex_number(&mut self) -> Result<Token, ParseError> {
        let mut s = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            s.push(self.bump().unwrap());
        }
        let mut saw_digit = false;
        let mut saw_dot = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                saw_digit = true;
                s.push(c);
                self.bump();
            } else if c == '.' && !saw_dot {
                // only consume the dot if digits follow (else statement dot)
                match self.peek2() {
                    Some(n) if n.is_ascii_digit() => {
                        saw_dot = true;
                        s.push(c);
                        self.bump();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        if !saw_digit {
            return Err(self.error("expected digits in numeric literal"));
        }
        if saw_dot {
            Ok(Token::DecimalTok(s))
        } else {
            Ok(Token::IntegerTok(s))
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
    graph: Graph,
    blank_labels: std::collections::HashMap<String, BlankNode>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(text);
        let mut tokens = Vec::new();
        loop {
            let tok = lexer.next_token()?;
            let done = tok.0 == Token::Eof;
            tokens.push(tok);
            if done {
                break;
            }
        }
        Ok(Parser {
            tokens,
            pos: 0,
            graph: Graph::new(),
            blank_labels: std::collections::HashMap::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (_, line, column) = &self.tokens[self.pos];
        ParseError {
            line: *line,
            column: *column,
            message: message.into(),
        }
    }

    fn expect(&mut self, expected: &Token) -> Result<(), ParseError> {
        if self.peek() == expected {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {expected}, found {}", self.peek())))
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<Iri, ParseError> {
        self.graph
            .expand_prefixed(prefix, local)
            .ok_or_else(|| self.error_here(format!("unknown prefix {prefix:?}")))
    }

    fn parse_document(mut self) -> Result<Graph, ParseError> {
        loop {
            match self.peek() {
                Token::Eof => break,
                Token::PrefixDirective => {
                    self.bump();
                    let (prefix, local) = match self.bump() {
                        Token::Pname(p, l) => (p, l),
                        other => {
                            return Err(
                                self.error_here(format!("expected prefix name, found {other}"))
                            )
                        }
                    };
                    if !local.is_empty() {
                        return Err(self.error_here("prefix declaration must end with ':'"));
                    }
                    let ns = match self.bump() {
                        Token::IriRef(iri) => iri,
                        other => {
                            return Err(
                                self.error_here(format!("expected namespace IRI, found {other}"))
                            )
                        }
                    };
                    self.expect(&Token::Dot)?;
                    self.graph.bind_prefix(prefix, ns);
                }
                _ => {
                    self.parse_statement()?;
                }
            }
        }
        Ok(self.graph)
    }

    fn parse_statement(&mut self) -> Result<(), ParseError> {
        let subject = self.parse_subject()?;
        self.parse_predicate_object_list(&subject, &Token::Dot)?;
        match self.peek() {
            Token::Dot => {
                self.bump();
            }
            // tolerate a missing final '.' at end of input
            Token::Eof => {}
            other => {
                return Err(self.error_here(format!("expected '.', found {other}")));
            }
        }
        Ok(())
    }

    fn parse_subject(&mut self) -> Result<Subject, ParseError> {
        match self.peek().clone() {
            Token::IriRef(iri) => {
                self.bump();
                let iri = Iri::new(iri).map_err(|e| self.error_here(e))?;
                Ok(Subject::Iri(iri))
            }
            Token::Pname(p, l) => {
                let iri = self.expand(&p, &l)?;
                self.bump();
                Ok(Subject::Iri(iri))
            }
            Token::BlankLabel(label) => {
                self.bump();
                Ok(Subject::Blank(self.labeled_blank(&label)))
            }
            Token::LBracket => {
                let b = self.parse_bracketed_blank()?;
                Ok(Subject::Blank(b))
            }
            other => Err(self.error_here(format!("expected subject, found {other}"))),
        }
    }

    fn labeled_blank(&mut self, label: &str) -> BlankNode {
        if let Some(b) = self.blank_labels.get(label) {
            *b
        } else {
            let b = self.graph.fresh_blank();
            self.blank_labels.insert(label.to_string(), b);
            b
        }
    }

    /// `[ pred obj ; ... ]`, returning the fresh blank node.
    fn parse_bracketed_blank(&mut self) -> Result<BlankNode, ParseError> {
        self.expect(&Token::LBracket)?;
        let b = self.graph.fresh_blank();
        if self.peek() != &Token::RBracket {
            self.parse_predicate_object_list(&Subject::Blank(b), &Token::RBracket)?;
        }
        self.expect(&Token::RBracket)?;
        Ok(b)
    }

    fn parse_predicate_object_list(
        &mut self,
        subject: &Subject,
        terminator: &Token,
    ) -> Result<(), ParseError> {
        loop {
            let predicate = match self.peek().clone() {
                Token::A => {
                    self.bump();
                    vocab::rdf_type()
                }
                Token::IriRef(iri) => {
                    self.bump();
                    Iri::new(iri).map_err(|e| self.error_here(e))?
                }
                Token::Pname(p, l) => {
                    let iri = self.expand(&p, &l)?;
                    self.bump();
                    iri
                }
                other => {
                    return Err(self.error_here(format!("expected predicate, found {other}")))
                }
            };
            loop {
                let object = self.parse_object()?;
                self.graph
                    .insert(Triple::new(subject.clone(), predicate.clone(), object));
                if self.peek() == &Token::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek() == &Token::Semicolon {
                self.bump();
                // trailing ';' before the terminator (or end of input) is fine
                if self.peek() == terminator || self.peek() == &Token::Eof {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn parse_object(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Token::IriRef(iri) => {
                self.bump();
                let iri = Iri::new(iri).map_err(|e| self.error_here(e))?;
                Ok(Term::Iri(iri))
            }
            Token::Pname(p, l) => {
                let iri = self.expand(&p, &l)?;
                self.bump();
                Ok(Term::Iri(iri))
            }
            Token::BlankLabel(label) => {
                self.bump();
                Ok(Term::Blank(self.labeled_blank(&label)))
            }
            Token::LBracket => Ok(Term::Blank(self.parse_bracketed_blank()?)),
            Token::LParen => self.parse_collection(),
            Token::StringLit(s) => {
                self.bump();
                if self.peek() == &Token::CaretCaret {
                    self.bump();
                    let dt_iri = match self.bump() {
                        Token::IriRef(iri) => Iri::new(iri).map_err(|e| self.error_here(e))?,
                        Token::Pname(p, l) => self.expand(&p, &l)?,
                        other => {
                            return Err(
                                self.error_here(format!("expected datatype IRI, found {other}"))
                            )
                        }
                    };
                    let datatype = Datatype::from_iri(&dt_iri).ok_or_else(|| {
                        self.error_here(format!("unsupported datatype {}", dt_iri.as_str()))
                    })?;
                    let lit =
                        Literal::parse(&s, datatype).map_err(|e| self.error_here(e))?;
                    Ok(Term::Literal(lit))
                } else {
                    Ok(Term::Literal(Literal::Str(s)))
                }
            }
            Token::IntegerTok(s) => {
                self.bump();
                let lit = Literal::parse(&s, Datatype::Integer)
                    .map_err(|e| self.error_here(e))?;
                Ok(Term::Literal(lit))
            }
            Token::DecimalTok(s) => {
                self.bump();
                let lit = Literal::parse(&s, Datatype::Decimal)
                    .map_err(|e| self.error_here(e))?;
                Ok(Term::Literal(lit))
            }
            Token::BoolTok(b) => {
                self.bump();
                Ok(Term::Literal(Literal::Bool(b)))
            }
            other => Err(self.error_here(format!("expected object, found {other}"))),
        }
    }

    /// `( o1 o2 ... )` as an rdf:first/rest/nil chain.
    fn parse_collection(&mut self) -> Result<Term, ParseError> {
        self.expect(&Token::LParen)?;
        let mut items = Vec::new();
        while self.peek() != &Token::RParen {
            if self.peek() == &Token::Eof {
                return Err(self.error_here("unterminated collection"));
            }
            items.push(self.parse_object()?);
        }
        self.expect(&Token::RParen)?;
        if items.is_empty() {
            return Ok(Term::Iri(vocab::rdf_nil()));
        }
        let cells: Vec<BlankNode> = items.iter().map(|_| self.graph.fresh_blank()).collect();
        for (i, item) in items.into_iter().enumerate() {
            let cell = Subject::Blank(cells[i]);
            self.graph
                .insert(Triple::new(cell.clone(), vocab::rdf_first(), item));
            let rest: Term = if i + 1 < cells.len() {
                Term::Blank(cells[i + 1])
            } else {
                Term::Iri(vocab::rdf_nil())
            };
            self.graph
                .insert(Triple::new(cell, vocab::rdf_rest(), rest));
        }
        Ok(Term::Blank(cells[0]))
    }
}

/// Parses a Turtle document into a graph. Standard prefixes (rdf, rdfs, xsd,
/// sh, errol, errolr) are pre-bound.
pub fn parse_turtle(text: &str) -> Result<Graph, ParseError> {
    Parser::new(text)?.parse_document()
}

fn compact_iri(graph: &Graph, iri: &Iri) -> String {
    let mut best: Option<(&str, &str)> = None;
    for (prefix, ns) in graph.prefixes() {
        if let Some(local) = iri.as_str().strip_prefix(ns.as_str()) {
            let valid = !local.is_empty()
                && !local.starts_with('.')
                && !local.ends_with('.')
                && local
                    .chars()
                    .all(|c| is_local_char(c) || c == '.');
            if valid && best.map_or(true, |(_, bns)| ns.len() > bns.len()) {
                best = Some((prefix, ns));
            }
        }
    }
    match best {
        Some((prefix, ns)) => {
            let local = iri.as_str().strip_prefix(ns).unwrap();
            format!("{prefix}:{local}")
        }
        None => format!("<{}>", iri.as_str()),
    }
}

fn write_term(graph: &Graph, term: &Term) -> String {
    match term {
        Term::Iri(iri) => compact_iri(graph, iri),
        Term::Blank(b) => format!("_:b{}", b.0),
        Term::Literal(lit) => match lit {
            Literal::Str(s) => {
                let escaped = s
                    .replace('\\', "\\\\")
                    .replace('"', "\\\"")
                    .replace('\n', "\\n")
                    .replace('\r', "\\r")
                    .replace('\t', "\\t");
                format!("\"{escaped}\"")
            }
            Literal::Int(i) => i.to_string(),
            Literal::Bool(b) => b.to_string(),
            Literal::Dec(d) => format!("\"{}\"^^xsd:decimal", d.normalize()),
        },
    }
}

fn write_subject(graph: &Graph, subject: &Subject) -> String {
    match subject {
        Subject::Iri(iri) => compact_iri(graph, iri),
        Subject::Blank(b) => format!("_:b{}", b.0),
    }
}

/// Serializes a graph to Turtle. Triples are emitted grouped by subject in
/// lexicographic (subject, predicate, object) order, so equal graphs produce
/// byte-identical documents.
pub fn serialize_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    for (prefix, ns) in graph.prefixes() {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }
    let triples: Vec<&Triple> = graph.iter().collect();
    let mut i = 0;
    while i < triples.len() {
        let subject = &triples[i].subject;
        out.push('\n');
        out.push_str(&write_subject(graph, subject));
        let mut first_pred = true;
        while i < triples.len() && &triples[i].subject == subject {
            let predicate = &triples[i].predicate;
            if !first_pred {
                out.push_str(" ;");
            }
            first_pred = false;
            let pred_str = if predicate == &vocab::rdf_type() {
                "a".to_string()
            } else {
                compact_iri(graph, predicate)
            };
            out.push_str(&format!("\n  {pred_str} "));
            let mut first_obj = true;
            while i < triples.len()
                && &triples[i].subject == subject
                && &triples[i].predicate == predicate
            {
                if !first_obj {
                    out.push_str(", ");
                }
                first_obj = false;
                out.push_str(&write_term(graph, &triples[i].object));
                i += 1;
            }
        }
        out.push_str(" .\n");
    }
    out
}
