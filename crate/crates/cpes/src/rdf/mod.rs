//! Triple store, terms and Turtle I/O.

mod graph;
mod term;
mod turtle;

pub use graph::Graph;
pub use term::{BlankNode, Datatype, Iri, Literal, Subject, Term, Triple};
pub use turtle::{parse_turtle, serialize_turtle, ParseError};
