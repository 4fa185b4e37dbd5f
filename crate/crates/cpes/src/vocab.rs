//! Namespace IRIs and well-known vocabulary terms.
//!
//! The `errol:` namespace holds the cyber-physical energy system ontology,
//! `errolr:` the augmentation-rule vocabulary. Both namespace IRIs are fixed
//! here; all other modules refer to terms through these constants.

use crate::rdf::Iri;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const SH_NS: &str = "http://www.w3.org/ns/shacl#";
pub const ERROL_NS: &str = "https://w3id.org/errol#";
pub const ERROLR_NS: &str = "https://w3id.org/errol/rules#";

pub fn rdf(local: &str) -> Iri {
    Iri::new(format!("{RDF_NS}{local}")).unwrap()
}

pub fn rdfs(local: &str) -> Iri {
    Iri::new(format!("{RDFS_NS}{local}")).unwrap()
}

pub fn xsd(local: &str) -> Iri {
    Iri::new(format!("{XSD_NS}{local}")).unwrap()
}

pub fn sh(local: &str) -> Iri {
    Iri::new(format!("{SH_NS}{local}")).unwrap()
}

pub fn errol(local: &str) -> Iri {
    Iri::new(format!("{ERROL_NS}{local}")).unwrap()
}

pub fn errolr(local: &str) -> Iri {
    Iri::new(format!("{ERROLR_NS}{local}")).unwrap()
}

pub fn rdf_type() -> Iri {
    rdf("type")
}

pub fn rdf_first() -> Iri {
    rdf("first")
}

pub fn rdf_rest() -> Iri {
    rdf("rest")
}

pub fn rdf_nil() -> Iri {
    rdf("nil")
}

pub fn rdfs_subclass_of() -> Iri {
    rdfs("subClassOf")
}
