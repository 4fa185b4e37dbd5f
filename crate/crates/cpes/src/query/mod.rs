//! SPARQL-subset query engine: SELECT over basic graph patterns with FILTER.

mod eval;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::rdf::{Iri, Literal, Term};

pub use eval::evaluate;
pub use parse::{parse_select, QueryParseError};

/// A query variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, String> {
        let name = name.into();
        if name.is_empty() {
            return Err("variable name must not be empty".into());
        }
        if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format!("invalid variable name {name:?}"));
        }
        Ok(Variable(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// One position of a triple pattern: a variable or a concrete term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternTerm {
    Var(Variable),
    Iri(Iri),
    Literal(Literal),
}

impl PatternTerm {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    fn variables(&self) -> impl Iterator<Item = &Variable> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(|t| t.as_var())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterOperand {
    Var(Variable),
    Iri(Iri),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub left: Variable,
    pub op: CompareOp,
    pub right: FilterOperand,
}

/// A parsed SELECT query over a basic graph pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectQuery {
    pub projected: Vec<Variable>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl SelectQuery {
    /// All variables occurring in the patterns.
    pub fn pattern_variables(&self) -> impl Iterator<Item = &Variable> {
        self.patterns.iter().flat_map(|p| p.variables())
    }
}

/// One solution mapping, binding exactly the projected variables.
pub type BindingSet = BTreeMap<Variable, Term>;
