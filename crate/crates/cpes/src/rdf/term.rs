//! RDF terms: IRIs, blank nodes, typed literals and triples.
//!
//! Literals carry parsed values, not lexical forms, so equality and ordering
//! of decimals is numeric (`"0.50"` and `"0.5"` denote the same literal).

use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;

use crate::vocab;

/// An absolute IRI after prefix expansion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, String> {
        let value = value.into();
        if value.is_empty() {
            return Err("IRI must not be empty".into());
        }
        if value.chars().any(|c| c.is_whitespace()) {
            return Err(format!("IRI contains whitespace: {value:?}"));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A blank node with a document-scoped numeric id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(pub u64);

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:b{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
}

impl Datatype {
    pub fn iri(self) -> Iri {
        match self {
            Datatype::String => vocab::xsd("string"),
            Datatype::Integer => vocab::xsd("integer"),
            Datatype::Decimal => vocab::xsd("decimal"),
            Datatype::Boolean => vocab::xsd("boolean"),
        }
    }

    pub fn from_iri(iri: &Iri) -> Option<Self> {
        let local = iri.as_str().strip_prefix(vocab::XSD_NS)?;
        match local {
            "string" => Some(Datatype::String),
            "integer" => Some(Datatype::Integer),
            "decimal" => Some(Datatype::Decimal),
            "boolean" => Some(Datatype::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
        };
        f.write_str(name)
    }
}

/// A typed literal value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Str(String),
    Int(i64),
    Dec(Decimal),
    Bool(bool),
}

impl Literal {
    pub fn string(s: impl Into<String>) -> Self {
        Literal::Str(s.into())
    }

    pub fn decimal(d: Decimal) -> Self {
        Literal::Dec(d.normalize())
    }

    /// Parses a lexical form under the given datatype.
    pub fn parse(lexical: &str, datatype: Datatype) -> Result<Self, String> {
        match datatype {
            Datatype::String => Ok(Literal::Str(lexical.to_string())),
            Datatype::Integer => lexical
                .parse::<i64>()
                .map(Literal::Int)
                .map_err(|_| format!("invalid xsd:integer lexical form {lexical:?}")),
            Datatype::Decimal => Decimal::from_str(lexical)
                .map(Literal::decimal)
                .map_err(|_| format!("invalid xsd:decimal lexical form {lexical:?}")),
            Datatype::Boolean => match lexical {
                "true" => Ok(Literal::Bool(true)),
                "false" => Ok(Literal::Bool(false)),
                _ => Err(format!("invalid xsd:boolean lexical form {lexical:?}")),
            },
        }
    }

    pub fn datatype(&self) -> Datatype {
        match self {
            Literal::Str(_) => Datatype::String,
            Literal::Int(_) => Datatype::Integer,
            Literal::Dec(_) => Datatype::Decimal,
            Literal::Bool(_) => Datatype::Boolean,
        }
    }

    /// Canonical lexical form.
    pub fn lexical(&self) -> String {
        match self {
            Literal::Str(s) => s.clone(),
            Literal::Int(i) => i.to_string(),
            Literal::Dec(d) => d.normalize().to_string(),
            Literal::Bool(b) => b.to_string(),
        }
    }

    /// Numeric value with integer promoted to decimal; `None` for non-numerics.
    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            Literal::Int(i) => Some(Decimal::from(*i)),
            Literal::Dec(d) => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write!(f, "{:?}", s),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Dec(d) => write!(f, "\"{}\"^^xsd:decimal", d.normalize()),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Subject position: IRI or blank node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Iri(Iri),
    Blank(BlankNode),
}

impl Subject {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Subject::Iri(iri) => Some(iri),
            Subject::Blank(_) => None,
        }
    }
}

impl From<Iri> for Subject {
    fn from(iri: Iri) -> Self {
        Subject::Iri(iri)
    }
}

impl From<BlankNode> for Subject {
    fn from(b: BlankNode) -> Self {
        Subject::Blank(b)
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(iri) => iri.fmt(f),
            Subject::Blank(b) => b.fmt(f),
        }
    }
}

/// Object position: IRI, blank node or literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn as_subject(&self) -> Option<Subject> {
        match self {
            Term::Iri(iri) => Some(Subject::Iri(iri.clone())),
            Term::Blank(b) => Some(Subject::Blank(*b)),
            Term::Literal(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        match s {
            Subject::Iri(iri) => Term::Iri(iri),
            Subject::Blank(b) => Term::Blank(b),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Blank(b) => b.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}

/// One RDF statement. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: subject.into(),
            predicate,
            object: object.into(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
