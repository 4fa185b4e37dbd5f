//! Knowledge-graph modelling and cyber-attack impact analysis for
//! behind-the-meter control infrastructure.
//!
//! The crate models a distribution grid and its control topology as an RDF
//! graph, validates it with SHACL-style shapes, augments it with HEMS/backend
//! infrastructure through probabilistic graph-rewrite rules, injects attack
//! scenarios as change rules, and quantifies the grid impact with an AC power
//! flow solver.

pub mod attack;
pub mod augment;
pub mod grid;
pub mod ontology;
pub mod pipeline;
pub mod powerflow;
pub mod query;
pub mod rdf;
pub mod report;
pub mod shacl;
pub mod vocab;
