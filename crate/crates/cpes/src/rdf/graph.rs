//! In-memory triple store with subject/predicate/object indexes.
//!
//! Set semantics throughout: inserting a duplicate triple is a no-op. All
//! read operations return triples in lexicographic (subject, predicate,
//! object) order so downstream output is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::rdf::{BlankNode, Iri, Subject, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    by_subject: HashMap<Subject, BTreeSet<Triple>>,
    by_predicate: HashMap<Iri, BTreeSet<Triple>>,
    by_object: HashMap<Term, BTreeSet<Triple>>,
    prefixes: BTreeMap<String, String>,
    next_blank: u64,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl Graph {
    /// Empty graph with the standard prefixes pre-bound.
    pub fn new() -> Self {
        let mut g = Graph::default();
        g.bind_prefix("rdf", vocab::RDF_NS);
        g.bind_prefix("rdfs", vocab::RDFS_NS);
        g.bind_prefix("xsd", vocab::XSD_NS);
        g.bind_prefix("sh", vocab::SH_NS);
        g.bind_prefix("errol", vocab::ERROL_NS);
        g.bind_prefix("errolr", vocab::ERROLR_NS);
        g
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn bind_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    pub fn expand_prefixed(&self, prefix: &str, local: &str) -> Option<Iri> {
        let ns = self.prefixes.get(prefix)?;
        Iri::new(format!("{ns}{local}")).ok()
    }

    /// Fresh document-scoped blank node.
    pub fn fresh_blank(&mut self) -> BlankNode {
        let b = BlankNode(self.next_blank);
        self.next_blank += 1;
        b
    }

    /// Inserts a triple; returns whether the graph changed.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if !self.triples.insert(triple.clone()) {
            return false;
        }
        if let Subject::Blank(b) = &triple.subject {
            self.next_blank = self.next_blank.max(b.0 + 1);
        }
        if let Term::Blank(b) = &triple.object {
            self.next_blank = self.next_blank.max(b.0 + 1);
        }
        self.by_subject
            .entry(triple.subject.clone())
            .or_default()
            .insert(triple.clone());
        self.by_predicate
            .entry(triple.predicate.clone())
            .or_default()
            .insert(triple.clone());
        self.by_object
            .entry(triple.object.clone())
            .or_default()
            .insert(triple);
        true
    }

    /// All triples agreeing with every bound position, in (s, p, o) order.
    pub fn matching(
        &self,
        s: Option<&Subject>,
        p: Option<&Iri>,
        o: Option<&Term>,
    ) -> Vec<Triple> {
        let candidates: Box<dyn Iterator<Item = &Triple>> = if let Some(s) = s {
            match self.by_subject.get(s) {
                Some(set) => Box::new(set.iter()),
                None => return Vec::new(),
            }
        } else if let Some(o) = o {
            match self.by_object.get(o) {
                Some(set) => Box::new(set.iter()),
                None => return Vec::new(),
            }
        } else if let Some(p) = p {
            match self.by_predicate.get(p) {
                Some(set) => Box::new(set.iter()),
                None => return Vec::new(),
            }
        } else {
            Box::new(self.triples.iter())
        };
        candidates
            .filter(|t| {
                s.map_or(true, |s| &t.subject == s)
                    && p.map_or(true, |p| &t.predicate == p)
                    && o.map_or(true, |o| &t.object == o)
            })
            .cloned()
            .collect()
    }

    /// Deletes all matching triples; returns how many were removed.
    pub fn remove_matching(
        &mut self,
        s: Option<&Subject>,
        p: Option<&Iri>,
        o: Option<&Term>,
    ) -> usize {
        let doomed = self.matching(s, p, o);
        for t in &doomed {
            self.triples.remove(t);
            if let Some(set) = self.by_subject.get_mut(&t.subject) {
                set.remove(t);
            }
            if let Some(set) = self.by_predicate.get_mut(&t.predicate) {
                set.remove(t);
            }
            if let Some(set) = self.by_object.get_mut(&t.object) {
                set.remove(t);
            }
        }
        doomed.len()
    }

    /// Objects of (subject, predicate, ?), in order.
    pub fn objects(&self, s: &Subject, p: &Iri) -> Vec<Term> {
        self.matching(Some(s), Some(p), None)
            .into_iter()
            .map(|t| t.object)
            .collect()
    }

    /// The single object of (subject, predicate, ?), if exactly one exists.
    pub fn object(&self, s: &Subject, p: &Iri) -> Option<Term> {
        let mut objects = self.objects(s, p);
        if objects.len() == 1 {
            Some(objects.remove(0))
        } else {
            None
        }
    }

    /// Subjects of (?, predicate, object), deduplicated and in order.
    pub fn subjects_with(&self, p: &Iri, o: &Term) -> Vec<Subject> {
        let mut subjects: Vec<Subject> = self
            .matching(None, Some(p), Some(o))
            .into_iter()
            .map(|t| t.subject)
            .collect();
        subjects.dedup();
        subjects
    }

    /// Subjects carrying rdf:type `class`.
    pub fn instances_of(&self, class: &Iri) -> Vec<Subject> {
        self.subjects_with(&vocab::rdf_type(), &Term::Iri(class.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Literal;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), iri(o))
    }

    #[test]
    fn insert_is_idempotent() {
        let mut g = Graph::new();
        let triple = t("http://x/a", "http://x/b", "http://x/c");
        assert!(g.insert(triple.clone()));
        assert!(!g.insert(triple));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn match_all_wildcards_returns_everything() {
        let mut g = Graph::new();
        g.insert(t("http://x/a", "http://x/p", "http://x/c"));
        g.insert(t("http://x/b", "http://x/p", "http://x/c"));
        assert_eq!(g.matching(None, None, None).len(), g.len());
    }

    #[test]
    fn match_equals_linear_scan() {
        let mut g = Graph::new();
        for i in 0..20 {
            g.insert(Triple::new(
                iri(&format!("http://x/s{}", i % 5)),
                iri(&format!("http://x/p{}", i % 3)),
                Literal::Int(i),
            ));
        }
        let p = iri("http://x/p1");
        let expected: Vec<Triple> = g
            .iter()
            .filter(|t| t.predicate == p)
            .cloned()
            .collect();
        assert_eq!(g.matching(None, Some(&p), None), expected);
    }

    #[test]
    fn match_on_absent_predicate_is_empty() {
        let mut g = Graph::new();
        g.insert(t("http://x/a", "http://x/p", "http://x/c"));
        assert!(g
            .matching(None, Some(&iri("http://x/q")), None)
            .is_empty());
    }

    #[test]
    fn remove_reports_count_and_clears() {
        let mut g = Graph::new();
        g.insert(t("http://x/a", "http://x/p", "http://x/c"));
        g.insert(t("http://x/a", "http://x/p", "http://x/d"));
        g.insert(t("http://x/b", "http://x/p", "http://x/c"));
        let s = Subject::Iri(iri("http://x/a"));
        let p = iri("http://x/p");
        assert_eq!(g.remove_matching(Some(&s), Some(&p), None), 2);
        assert!(g.matching(Some(&s), Some(&p), None).is_empty());
        let before = g.len();
        assert_eq!(g.remove_matching(None, None, None), before);
        assert!(g.is_empty());
    }
}
