//! Basic-graph-pattern evaluation with set semantics.
//!
//! Patterns are joined left to right with binding substitution and index
//! lookups. Filters follow SPARQL error semantics: a comparison between
//! incompatible term kinds drops that candidate solution instead of aborting.

use std::collections::{BTreeMap, BTreeSet};

use crate::query::{
    BindingSet, CompareOp, Filter, FilterOperand, PatternTerm, SelectQuery, TriplePattern,
    Variable,
};
use crate::rdf::{Graph, Literal, Subject, Term};

type WorkingBinding = BTreeMap<Variable, Term>;

fn resolve(term: &PatternTerm, binding: &WorkingBinding) -> Option<Term> {
    match term {
        PatternTerm::Var(v) => binding.get(v).cloned(),
        PatternTerm::Iri(iri) => Some(Term::Iri(iri.clone())),
        PatternTerm::Literal(lit) => Some(Term::Literal(lit.clone())),
    }
}

fn extend_matches(
    graph: &Graph,
    pattern: &TriplePattern,
    binding: &WorkingBinding,
    out: &mut Vec<WorkingBinding>,
) {
    let s_bound = resolve(&pattern.subject, binding);
    let p_bound = resolve(&pattern.predicate, binding);
    let o_bound = resolve(&pattern.object, binding);

    let s_subj: Option<Subject> = match &s_bound {
        Some(t) => match t.as_subject() {
            Some(s) => Some(s),
            // a variable bound to a literal can never match the subject slot
            None => return,
        },
        None => None,
    };
    let p_iri = match &p_bound {
        Some(Term::Iri(iri)) => Some(iri.clone()),
        Some(_) => return,
        None => None,
    };

    for triple in graph.matching(s_subj.as_ref(), p_iri.as_ref(), o_bound.as_ref()) {
        let mut next = binding.clone();
        let mut ok = true;
        for (pat, actual) in [
            (&pattern.subject, Term::from(triple.subject.clone())),
            (&pattern.predicate, Term::Iri(triple.predicate.clone())),
            (&pattern.object, triple.object.clone()),
        ] {
            if let PatternTerm::Var(v) = pat {
                match next.get(v) {
                    Some(existing) if existing != &actual => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        next.insert(v.clone(), actual);
                    }
                }
            }
        }
        if ok {
            out.push(next);
        }
    }
}

/// Filter comparison. `None` means a type error (candidate is dropped).
fn compare(left: &Term, op: CompareOp, right: &Term) -> Option<bool> {
    use std::cmp::Ordering;
    let ord: Ordering = match (left, right) {
        (Term::Literal(a), Term::Literal(b)) => match (a, b) {
            (Literal::Str(x), Literal::Str(y)) => x.cmp(y),
            (Literal::Bool(x), Literal::Bool(y)) => x.cmp(y),
            _ => {
                // numeric comparison with integer→decimal promotion
                let x = a.as_decimal()?;
                let y = b.as_decimal()?;
                x.cmp(&y)
            }
        },
        (Term::Iri(a), Term::Iri(b)) => match op {
            CompareOp::Eq | CompareOp::Ne => a.cmp(b),
            _ => return None,
        },
        _ => return None,
    };
    Some(match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
    })
}

fn passes_filter(filter: &Filter, binding: &WorkingBinding) -> bool {
    let Some(left) = binding.get(&filter.left) else {
        return false;
    };
    let right = match &filter.right {
        FilterOperand::Var(v) => match binding.get(v) {
            Some(t) => t.clone(),
            None => return false,
        },
        FilterOperand::Iri(iri) => Term::Iri(iri.clone()),
        FilterOperand::Literal(lit) => Term::Literal(lit.clone()),
    };
    compare(left, filter.op, &right).unwrap_or(false)
}

/// Evaluates a query, returning all solution mappings over the projected
/// variables with set semantics and deterministic (lexicographic) order.
pub fn evaluate(graph: &Graph, query: &SelectQuery) -> Vec<BindingSet> {
    let mut bindings: Vec<WorkingBinding> = vec![BTreeMap::new()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for binding in &bindings {
            extend_matches(graph, pattern, binding, &mut next);
        }
        bindings = next;
        if bindings.is_empty() {
            return Vec::new();
        }
    }
    let solutions: BTreeSet<BindingSet> = bindings
        .into_iter()
        .filter(|b| query.filters.iter().all(|f| passes_filter(f, b)))
        .map(|b| {
            query
                .projected
                .iter()
                .map(|v| (v.clone(), b[v].clone()))
                .collect()
        })
        .collect();
    solutions.into_iter().collect()
}
