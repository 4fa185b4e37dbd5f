//! Parser for the SELECT subset.
//!
//! Grammar: `PREFIX`* `SELECT` vars `WHERE {` triple patterns (`.`-separated,
//! `;`/`,` continuation) with interleaved `FILTER(...)` clauses `}`. Anything
//! outside the subset is rejected with a message naming the unsupported
//! keyword.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::query::{
    CompareOp, Filter, FilterOperand, PatternTerm, SelectQuery, TriplePattern, Variable,
};
use crate::rdf::{Datatype, Iri, Literal};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("query parse error: {0}")]
pub struct QueryParseError(pub String);

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "UNION", "GRAPH", "MINUS", "BIND", "VALUES", "SERVICE", "EXISTS", "CONSTRUCT",
    "ASK", "DESCRIBE", "INSERT", "DELETE", "ORDER", "GROUP", "LIMIT", "OFFSET", "DISTINCT",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    IriRef(String),
    Pname(String, String),
    Str(String),
    Int(String),
    Dec(String),
    Bool(bool),
    CaretCaret,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Semicolon,
    Comma,
    Op(CompareOp),
    Eof,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, QueryParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |m: String| QueryParseError(m);
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => {
                toks.push(Tok::LBrace);
                i += 1;
            }
            '}' => {
                toks.push(Tok::RBrace);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1;
            }
            ';' => {
                toks.push(Tok::Semicolon);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '=' => {
                toks.push(Tok::Op(CompareOp::Eq));
                i += 1;
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    toks.push(Tok::Op(CompareOp::Ne));
                    i += 2;
                } else {
                    return Err(err("expected != in filter".into()));
                }
            }
            '<' => {
                // disambiguate IRI reference vs less-than
                let rest: String = chars[i + 1..]
                    .iter()
                    .take_while(|&&ch| ch != '>' && !ch.is_whitespace())
                    .collect();
                if chars.get(i + 1 + rest.chars().count()) == Some(&'>') && !rest.is_empty() {
                    toks.push(Tok::IriRef(rest.clone()));
                    i += rest.chars().count() + 2;
                } else if chars.get(i + 1) == Some(&'=') {
                    toks.push(Tok::Op(CompareOp::Le));
                    i += 2;
                } else {
                    toks.push(Tok::Op(CompareOp::Lt));
                    i += 1;
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    toks.push(Tok::Op(CompareOp::Ge));
                    i += 2;
                } else {
                    toks.push(Tok::Op(CompareOp::Gt));
                    i += 1;
                }
            }
            '^' => {
                if chars.get(i + 1) == Some(&'^') {
                    toks.push(Tok::CaretCaret);
                    i += 2;
                } else {
                    return Err(err("expected ^^".into()));
                }
            }
            '?' => {
                i += 1;
                let mut name = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    name.push(chars[i]);
                    i += 1;
                }
                if name.is_empty() {
                    return Err(err("empty variable name".into()));
                }
                toks.push(Tok::Var(name));
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(err("unterminated string literal".into()));
                    }
                    match chars[i] {
                        '"' => {
                            i += 1;
                            break;
                        }
                        '\\' => {
                            i += 1;
                            match chars.get(i) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                _ => return Err(err("unsupported escape".into())),
                            }
                            i += 1;
                        }
                        ch => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                toks.push(Tok::Str(s));
            }
            '+' | '-' | '0'..='9' => {
                let mut s = String::new();
                if c == '+' || c == '-' {
                    s.push(c);
                    i += 1;
                }
                let mut saw_dot = false;
                while i < chars.len()
                    && (chars[i].is_ascii_digit() || (chars[i] == '.' && !saw_dot))
                {
                    if chars[i] == '.' {
                        match chars.get(i + 1) {
                            Some(n) if n.is_ascii_digit() => saw_dot = true,
                            _ => break,
                        }
                    }
                    s.push(chars[i]);
                    i += 1;
                }
                if saw_dot {
                    toks.push(Tok::Dec(s));
                } else {
                    toks.push(Tok::Int(s));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    word.push(chars[i]);
                    i += 1;
                }
                if i < chars.len() && chars[i] == ':' {
                    i += 1;
                    let mut local = String::new();
                    while i < chars.len()
                        && (chars[i].is_alphanumeric()
                            || matches!(chars[i], '_' | '-' | '/')
                            || (chars[i] == '.'
                                && chars.get(i + 1).is_some_and(|n| {
                                    n.is_alphanumeric() || matches!(n, '_' | '-' | '/')
                                })))
                    {
                        local.push(chars[i]);
                        i += 1;
                    }
                    toks.push(Tok::Pname(word, local));
                } else {
                    match word.as_str() {
                        "true" => toks.push(Tok::Bool(true)),
                        "false" => toks.push(Tok::Bool(false)),
                        _ => toks.push(Tok::Word(word)),
                    }
                }
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    toks.push(Tok::Eof);
    Ok(toks)
}

struct QueryParser {
    toks: Vec<Tok>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

impl QueryParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, m: impl Into<String>) -> QueryParseError {
        QueryParseError(m.into())
    }

    fn check_supported(&self, word: &str) -> Result<(), QueryParseError> {
        let upper = word.to_ascii_uppercase();
        if UNSUPPORTED.contains(&upper.as_str()) {
            Err(self.err(format!("{upper} unsupported")))
        } else {
            Ok(())
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<Iri, QueryParseError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.err(format!("unknown prefix {prefix:?}")))?;
        Iri::new(format!("{ns}{local}")).map_err(QueryParseError)
    }

    fn parse(mut self) -> Result<SelectQuery, QueryParseError> {
        loop {
            match self.peek().clone() {
                Tok::Word(w) if w.eq_ignore_ascii_case("PREFIX") => {
                    self.bump();
                    let (prefix, local) = match self.bump() {
                        Tok::Pname(p, l) => (p, l),
                        other => return Err(self.err(format!("expected prefix name, found {other:?}"))),
                    };
                    if !local.is_empty() {
                        return Err(self.err("prefix declaration must end with ':'"));
                    }
                    let ns = match self.bump() {
                        Tok::IriRef(iri) => iri,
                        other => return Err(self.err(format!("expected namespace IRI, found {other:?}"))),
                    };
                    self.prefixes.insert(prefix, ns);
                }
                _ => break,
            }
        }
        match self.bump() {
            Tok::Word(w) if w.eq_ignore_ascii_case("SELECT") => {}
            Tok::Word(w) => {
                self.check_supported(&w)?;
                return Err(self.err(format!("expected SELECT, found {w:?}")));
            }
            other => return Err(self.err(format!("expected SELECT, found {other:?}"))),
        }
        let mut projected = Vec::new();
        while let Tok::Var(name) = self.peek().clone() {
            self.bump();
            projected.push(Variable::new(name).map_err(QueryParseError)?);
        }
        if projected.is_empty() {
            if let Tok::Word(w) = self.peek().clone() {
                self.check_supported(&w)?;
            }
            return Err(self.err("SELECT requires at least one projected variable"));
        }
        match self.bump() {
            Tok::Word(w) if w.eq_ignore_ascii_case("WHERE") => {}
            other => return Err(self.err(format!("expected WHERE, found {other:?}"))),
        }
        if self.bump() != Tok::LBrace {
            return Err(self.err("expected '{' after WHERE"));
        }
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => return Err(self.err("unterminated group pattern")),
                Tok::Dot => {
                    self.bump();
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("FILTER") => {
                    self.bump();
                    filters.push(self.parse_filter()?);
                }
                Tok::LBrace => {
                    // a nested group means UNION/OPTIONAL-style syntax; name
                    // the keyword when it appears later in the input
                    for tok in &self.toks[self.pos..] {
                        if let Tok::Word(w) = tok {
                            let upper = w.to_ascii_uppercase();
                            if UNSUPPORTED.contains(&upper.as_str()) {
                                return Err(self.err(format!("{upper} unsupported")));
                            }
                        }
                    }
                    return Err(self.err("nested group patterns unsupported"));
                }
                Tok::Word(w) => {
                    self.check_supported(&w)?;
                    return Err(self.err(format!("unexpected token {w:?} in group pattern")));
                }
                _ => {
                    self.parse_triple_block(&mut patterns)?;
                }
            }
        }
        if self.peek() != &Tok::Eof {
            if let Tok::Word(w) = self.peek().clone() {
                self.check_supported(&w)?;
            }
            return Err(self.err("trailing tokens after '}'"));
        }
        let query = SelectQuery {
            projected,
            patterns,
            filters,
        };
        validate(&query).map_err(QueryParseError)?;
        Ok(query)
    }

    fn parse_triple_block(
        &mut self,
        patterns: &mut Vec<TriplePattern>,
    ) -> Result<(), QueryParseError> {
        let subject = self.parse_pattern_term()?;
        if matches!(subject, PatternTerm::Literal(_)) {
            return Err(self.err("literal subjects are not allowed"));
        }
        loop {
            let predicate = self.parse_predicate_term()?;
            loop {
                let object = self.parse_pattern_term()?;
                patterns.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek() == &Tok::Semicolon {
                self.bump();
                if matches!(self.peek(), Tok::RBrace | Tok::Dot) {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn parse_predicate_term(&mut self) -> Result<PatternTerm, QueryParseError> {
        match self.peek().clone() {
            Tok::Word(w) if w == "a" => {
                self.bump();
                Ok(PatternTerm::Iri(vocab::rdf_type()))
            }
            _ => {
                let term = self.parse_pattern_term()?;
                match &term {
                    PatternTerm::Iri(_) | PatternTerm::Var(_) => Ok(term),
                    PatternTerm::Literal(_) => Err(self.err("literal predicates are not allowed")),
                }
            }
        }
    }

    fn parse_pattern_term(&mut self) -> Result<PatternTerm, QueryParseError> {
        match self.bump() {
            Tok::Var(name) => Ok(PatternTerm::Var(
                Variable::new(name).map_err(QueryParseError)?,
            )),
            Tok::IriRef(iri) => Ok(PatternTerm::Iri(Iri::new(iri).map_err(QueryParseError)?)),
            Tok::Pname(p, l) => Ok(PatternTerm::Iri(self.expand(&p, &l)?)),
            Tok::Str(s) => {
                if self.peek() == &Tok::CaretCaret {
                    self.bump();
                    let dt_iri = match self.bump() {
                        Tok::IriRef(iri) => Iri::new(iri).map_err(QueryParseError)?,
                        Tok::Pname(p, l) => self.expand(&p, &l)?,
                        other => {
                            return Err(self.err(format!("expected datatype IRI, found {other:?}")))
                        }
                    };
                    let dt = Datatype::from_iri(&dt_iri).ok_or_else(|| {
                        self.err(format!("unsupported datatype {}", dt_iri.as_str()))
                    })?;
                    Ok(PatternTerm::Literal(
                        Literal::parse(&s, dt).map_err(QueryParseError)?,
                    ))
                } else {
                    Ok(PatternTerm::Literal(Literal::Str(s)))
                }
            }
            Tok::Int(s) => Ok(PatternTerm::Literal(
                Literal::parse(&s, Datatype::Integer).map_err(QueryParseError)?,
            )),
            Tok::Dec(s) => Ok(PatternTerm::Literal(
                Literal::parse(&s, Datatype::Decimal).map_err(QueryParseError)?,
            )),
            Tok::Bool(b) => Ok(PatternTerm::Literal(Literal::Bool(b))),
            Tok::Word(w) => {
                self.check_supported(&w)?;
                Err(self.err(format!("unexpected token {w:?}")))
            }
            other => Err(self.err(format!("expected term, found {other:?}"))),
        }
    }

    fn parse_filter(&mut self) -> Result<Filter, QueryParseError> {
        if self.bump() != Tok::LParen {
            return Err(self.err("expected '(' after FILTER"));
        }
        let left = match self.bump() {
            Tok::Var(name) => Variable::new(name).map_err(QueryParseError)?,
            other => {
                return Err(self.err(format!(
                    "filter left operand must be a variable, found {other:?}"
                )))
            }
        };
        let op = match self.bump() {
            Tok::Op(op) => op,
            other => return Err(self.err(format!("expected comparison operator, found {other:?}"))),
        };
        let right = match self.parse_pattern_term()? {
            PatternTerm::Var(v) => FilterOperand::Var(v),
            PatternTerm::Iri(iri) => FilterOperand::Iri(iri),
            PatternTerm::Literal(lit) => FilterOperand::Literal(lit),
        };
        if self.bump() != Tok::RParen {
            return Err(self.err("expected ')' after filter expression"));
        }
        Ok(Filter { left, op, right })
    }
}

fn validate(query: &SelectQuery) -> Result<(), String> {
    let pattern_vars: std::collections::BTreeSet<&Variable> =
        query.pattern_variables().collect();
    for v in &query.projected {
        if !pattern_vars.contains(v) {
            return Err(format!("projected variable {v} does not occur in any pattern"));
        }
    }
    for f in &query.filters {
        if !pattern_vars.contains(&f.left) {
            return Err(format!(
                "filter variable {} does not occur in any pattern",
                f.left
            ));
        }
        if let FilterOperand::Var(v) = &f.right {
            if !pattern_vars.contains(v) {
                return Err(format!("filter variable {v} does not occur in any pattern"));
            }
        }
    }
    Ok(())
}

/// Parses a SELECT query. Standard prefixes (rdf, rdfs, xsd, sh, errol,
/// errolr) are pre-bound.
pub fn parse_select(text: &str) -> Result<SelectQuery, QueryParseError> {
    let toks = tokenize(text)?;
    let mut prefixes = BTreeMap::new();
    prefixes.insert("rdf".to_string(), vocab::RDF_NS.to_string());
    prefixes.insert("rdfs".to_string(), vocab::RDFS_NS.to_string());
    prefixes.insert("xsd".to_string(), vocab::XSD_NS.to_string());
    prefixes.insert("sh".to_string(), vocab::SH_NS.to_string());
    prefixes.insert("errol".to_string(), vocab::ERROL_NS.to_string());
    prefixes.insert("errolr".to_string(), vocab::ERROLR_NS.to_string());
    QueryParser {
        toks,
        pos: 0,
        prefixes,
    }
    .parse()
}
