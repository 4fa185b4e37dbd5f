//! Probabilistic graph-rewrite engine with rules stored as RDF.
//!
//! Rules live in the `errolr:` namespace. A rule node is typed
//! `errolr:AddRule`, `errolr:ChangeRule` or `errolr:DeleteRule` and carries:
//!
//! * `errolr:selector` — a SELECT query as a string literal; its solutions
//!   are the rule's matches.
//! * `errolr:anchor` — the name of the projected variable that identifies
//!   "the thing this rule is about"; matches iterate in anchor order.
//! * `errolr:pApply` — fire probability in [0, 1].
//! * Add rules: one or more `errolr:template` nodes, each with `errolr:name`,
//!   `errolr:weight` (> 0) and `errolr:triple` nodes. A triple node picks its
//!   subject from exactly one of `errolr:s` (constant IRI), `errolr:sVar`
//!   (selector variable) or `errolr:sFresh` (fresh-node slot); its predicate
//!   from `errolr:p`; its object from `errolr:o` / `errolr:oVar` /
//!   `errolr:oFresh`. Constant IRIs double as singletons: set semantics make
//!   repeated instantiation a no-op, which is how one backend per
//!   manufacturer emerges from per-household firings.
//! * Change rules: `errolr:targetPath` plus `errolr:value` (constant literal)
//!   or `errolr:valueVar`; all (anchor, path, *) triples are replaced, or the
//!   new one appended if none existed.
//! * Delete rules: `errolr:triple` pattern nodes over selector variables; an
//!   absent object means "any object".
//!
//! Randomness is two-stage: per match, draw u₁ to decide firing, then (Add
//! only) u₂ to pick a template by normalized weight. Each rule gets its own
//! ChaCha8 stream sub-seeded from sha256(master seed ‖ rule IRI), so adding a
//! rule never perturbs the draws of the others.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::query::{parse_select, BindingSet, SelectQuery, Variable};
use crate::rdf::{Graph, Iri, Literal, Subject, Term, Triple};
use crate::shacl::{NodeShape, ShaclError, ValidationReport};
use crate::vocab::{self, errolr};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid rule {rule}: {detail}")]
    Rule { rule: String, detail: String },
    #[error("rule {rule}: template references unbound variable ?{variable}")]
    Bind { rule: String, variable: String },
    #[error("augmented graph violates the shape set ({} violation(s))", report.violations.len())]
    PostValidation { report: ValidationReport },
    #[error("shape set error: {0}")]
    Shapes(#[from] ShaclError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubjectSlot {
    Const(Iri),
    Var(Variable),
    Fresh(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSlot {
    Const(Term),
    Var(Variable),
    Fresh(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTriple {
    pub subject: SubjectSlot,
    pub predicate: Iri,
    /// `None` only in delete patterns, where it matches any object.
    pub object: Option<ObjectSlot>,
}

#[derive(Debug, Clone)]
pub struct Template {
    pub name: String,
    pub weight: Decimal,
    pub triples: Vec<TemplateTriple>,
}

#[derive(Debug, Clone)]
pub enum ValueSource {
    Const(Literal),
    Var(Variable),
}

#[derive(Debug, Clone)]
pub enum RuleKind {
    Add { templates: Vec<Template> },
    Change { target_path: Iri, value: ValueSource },
    Delete { patterns: Vec<TemplateTriple> },
}

#[derive(Debug, Clone)]
pub struct AugmentationRule {
    pub iri: Iri,
    pub selector: SelectQuery,
    pub anchor: Variable,
    pub p_apply: Decimal,
    pub kind: RuleKind,
}

/// One firing of one rule: enough to audit the run and to replay it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedEntry {
    pub rule: Iri,
    pub anchor: Term,
    pub template: Option<String>,
    pub added: Vec<Triple>,
    pub removed: Vec<Triple>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AppliedLog {
    pub entries: Vec<AppliedEntry>,
}

impl AppliedLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "rule": e.rule.as_str(),
                        "anchor": e.anchor.to_string(),
                        "template": e.template,
                        "added": e.added.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                        "removed": e.removed.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

/// Re-applies logged removals and additions to a pre-state graph.
pub fn replay(pre_graph: &Graph, logs: &[AppliedLog]) -> Graph {
    let mut g = pre_graph.clone();
    for log in logs {
        for entry in &log.entries {
            for t in &entry.removed {
                g.remove_matching(Some(&t.subject), Some(&t.predicate), Some(&t.object));
            }
            for t in &entry.added {
                g.insert(t.clone());
            }
        }
    }
    g
}

fn rule_err(rule: &Iri, detail: impl Into<String>) -> AugmentError {
    AugmentError::Rule {
        rule: rule.as_str().to_string(),
        detail: detail.into(),
    }
}

fn string_prop(graph: &Graph, node: &Subject, prop: &Iri) -> Option<String> {
    match graph.object(node, prop)? {
        Term::Literal(Literal::Str(s)) => Some(s),
        _ => None,
    }
}

fn decimal_prop(graph: &Graph, node: &Subject, prop: &Iri) -> Option<Decimal> {
    graph
        .object(node, prop)?
        .as_literal()
        .and_then(Literal::as_decimal)
}

fn parse_triple_node(
    graph: &Graph,
    rule: &Iri,
    node: &Subject,
    allow_wildcard_object: bool,
) -> Result<TemplateTriple, AugmentError> {
    let s_const = graph.object(node, &errolr("s"));
    let s_var = string_prop(graph, node, &errolr("sVar"));
    let s_fresh = string_prop(graph, node, &errolr("sFresh"));
    let subject = match (s_const, s_var, s_fresh) {
        (Some(Term::Iri(iri)), None, None) => SubjectSlot::Const(iri),
        (None, Some(v), None) => SubjectSlot::Var(
            Variable::new(&v).map_err(|e| rule_err(rule, format!("bad sVar: {e}")))?,
        ),
        (None, None, Some(slot)) => SubjectSlot::Fresh(slot),
        _ => {
            return Err(rule_err(
                rule,
                "triple node needs exactly one of errolr:s / errolr:sVar / errolr:sFresh",
            ))
        }
    };
    let predicate = match graph.object(node, &errolr("p")) {
        Some(Term::Iri(iri)) => iri,
        _ => return Err(rule_err(rule, "triple node needs an IRI-valued errolr:p")),
    };
    let o_const = graph.object(node, &errolr("o"));
    let o_var = string_prop(graph, node, &errolr("oVar"));
    let o_fresh = string_prop(graph, node, &errolr("oFresh"));
    let object = match (o_const, o_var, o_fresh) {
        (Some(term), None, None) => Some(ObjectSlot::Const(term)),
        (None, Some(v), None) => Some(ObjectSlot::Var(
            Variable::new(&v).map_err(|e| rule_err(rule, format!("bad oVar: {e}")))?,
        )),
        (None, None, Some(slot)) => Some(ObjectSlot::Fresh(slot)),
        (None, None, None) if allow_wildcard_object => None,
        _ => {
            return Err(rule_err(
                rule,
                "triple node needs exactly one of errolr:o / errolr:oVar / errolr:oFresh",
            ))
        }
    };
    Ok(TemplateTriple {
        subject,
        predicate,
        object,
    })
}

fn parse_one_rule(
    graph: &Graph,
    subject: &Subject,
    kind_class: &str,
) -> Result<AugmentationRule, AugmentError> {
    let iri = match subject {
        Subject::Iri(iri) => iri.clone(),
        Subject::Blank(_) => {
            return Err(AugmentError::Rule {
                rule: subject.to_string(),
                detail: "rules must be named by IRIs (application order is IRI order)".into(),
            })
        }
    };
    let selector_text = string_prop(graph, subject, &errolr("selector"))
        .ok_or_else(|| rule_err(&iri, "missing errolr:selector string"))?;
    let selector = parse_select(&selector_text)
        .map_err(|e| rule_err(&iri, format!("selector does not parse: {e}")))?;
    let anchor_name = string_prop(graph, subject, &errolr("anchor"))
        .ok_or_else(|| rule_err(&iri, "missing errolr:anchor"))?;
    let anchor = Variable::new(&anchor_name)
        .map_err(|e| rule_err(&iri, format!("bad anchor: {e}")))?;
    if !selector.projected.contains(&anchor) {
        return Err(rule_err(
            &iri,
            format!("anchor ?{anchor_name} is not projected by the selector"),
        ));
    }
    let p_apply = decimal_prop(graph, subject, &errolr("pApply"))
        .ok_or_else(|| rule_err(&iri, "missing numeric errolr:pApply"))?;
    if p_apply < Decimal::ZERO || p_apply > Decimal::ONE {
        return Err(rule_err(&iri, format!("pApply {p_apply} outside [0, 1]")));
    }

    let kind = match kind_class {
        "AddRule" => {
            let mut templates = Vec::new();
            for tmpl_term in graph.objects(subject, &errolr("template")) {
                let tmpl_node = tmpl_term
                    .as_subject()
                    .ok_or_else(|| rule_err(&iri, "errolr:template must be a node"))?;
                let name = string_prop(graph, &tmpl_node, &errolr("name"))
                    .ok_or_else(|| rule_err(&iri, "template missing errolr:name"))?;
                let weight = decimal_prop(graph, &tmpl_node, &errolr("weight"))
                    .ok_or_else(|| rule_err(&iri, format!("template {name} missing weight")))?;
                if weight <= Decimal::ZERO {
                    return Err(rule_err(
                        &iri,
                        format!("template {name} has non-positive weight {weight}"),
                    ));
                }
                let mut triples = Vec::new();
                for t in graph.objects(&tmpl_node, &errolr("triple")) {
                    let t_node = t
                        .as_subject()
                        .ok_or_else(|| rule_err(&iri, "errolr:triple must be a node"))?;
                    triples.push(parse_triple_node(graph, &iri, &t_node, false)?);
                }
                if triples.is_empty() {
                    return Err(rule_err(&iri, format!("template {name} has no triples")));
                }
                templates.push(Template {
                    name,
                    weight,
                    triples,
                });
            }
            if templates.is_empty() {
                return Err(rule_err(&iri, "add rule has no templates"));
            }
            templates.sort_by(|a, b| a.name.cmp(&b.name));
            RuleKind::Add { templates }
        }
        "ChangeRule" => {
            let target_path = match graph.object(subject, &errolr("targetPath")) {
                Some(Term::Iri(iri)) => iri,
                _ => return Err(rule_err(&iri, "change rule needs errolr:targetPath IRI")),
            };
            let value = match (
                graph.object(subject, &errolr("value")),
                string_prop(graph, subject, &errolr("valueVar")),
            ) {
                (Some(Term::Literal(lit)), None) => ValueSource::Const(lit),
                (None, Some(v)) => ValueSource::Var(
                    Variable::new(&v).map_err(|e| rule_err(&iri, format!("bad valueVar: {e}")))?,
                ),
                _ => {
                    return Err(rule_err(
                        &iri,
                        "change rule needs exactly one of errolr:value (literal) or errolr:valueVar",
                    ))
                }
            };
            RuleKind::Change { target_path, value }
        }
        "DeleteRule" => {
            let mut patterns = Vec::new();
            for t in graph.objects(subject, &errolr("triple")) {
                let t_node = t
                    .as_subject()
                    .ok_or_else(|| rule_err(&iri, "errolr:triple must be a node"))?;
                let pattern = parse_triple_node(graph, &iri, &t_node, true)?;
                if matches!(pattern.subject, SubjectSlot::Fresh(_))
                    || matches!(pattern.object, Some(ObjectSlot::Fresh(_)))
                {
                    return Err(rule_err(&iri, "delete patterns cannot use fresh slots"));
                }
                patterns.push(pattern);
            }
            if patterns.is_empty() {
                return Err(rule_err(&iri, "delete rule has no patterns"));
            }
            RuleKind::Delete { patterns }
        }
        other => unreachable!("unknown rule class {other}"),
    };

    Ok(AugmentationRule {
        iri,
        selector,
        anchor,
        p_apply,
        kind,
    })
}

/// Extracts all rules from a rules graph, ordered by rule IRI.
pub fn parse_rules(rules_graph: &Graph) -> Result<Vec<AugmentationRule>, AugmentError> {
    let mut rules = Vec::new();
    for kind_class in ["AddRule", "ChangeRule", "DeleteRule"] {
        for subject in rules_graph.instances_of(&errolr(kind_class)) {
            rules.push(parse_one_rule(rules_graph, &subject, kind_class)?);
        }
    }
    rules.sort_by(|a, b| a.iri.cmp(&b.iri));
    Ok(rules)
}

struct Instantiator<'a> {
    rule: &'a AugmentationRule,
    fresh_counters: BTreeMap<String, u64>,
}

impl<'a> Instantiator<'a> {
    fn new(rule: &'a AugmentationRule) -> Self {
        Instantiator {
            rule,
            fresh_counters: BTreeMap::new(),
        }
    }

    fn bound(&self, binding: &BindingSet, var: &Variable) -> Result<Term, AugmentError> {
        binding.get(var).cloned().ok_or_else(|| AugmentError::Bind {
            rule: self.rule.iri.as_str().to_string(),
            variable: var.name().to_string(),
        })
    }

    /// Instantiates one template for one binding. Fresh slots sharing a name
    /// within the instantiation share one new IRI.
    fn instantiate(
        &mut self,
        template: &Template,
        binding: &BindingSet,
    ) -> Result<Vec<Triple>, AugmentError> {
        let mut fresh_here: BTreeMap<String, Iri> = BTreeMap::new();
        let mut fresh = |slot: &str, counters: &mut BTreeMap<String, u64>| -> Iri {
            fresh_here
                .entry(slot.to_string())
                .or_insert_with(|| {
                    let n = counters.entry(template.name.clone()).or_insert(0);
                    let iri = vocab::errol(&format!("inst/{}/{}", template.name, *n));
                    *n += 1;
                    iri
                })
                .clone()
        };
        let mut out = Vec::new();
        for tt in &template.triples {
            let subject: Subject = match &tt.subject {
                SubjectSlot::Const(iri) => Subject::Iri(iri.clone()),
                SubjectSlot::Var(v) => self
                    .bound(binding, v)?
                    .as_subject()
                    .ok_or_else(|| AugmentError::Bind {
                        rule: self.rule.iri.as_str().to_string(),
                        variable: v.name().to_string(),
                    })?,
                SubjectSlot::Fresh(slot) => Subject::Iri(fresh(slot, &mut self.fresh_counters)),
            };
            let object: Term = match tt.object.as_ref().expect("add templates have objects") {
                ObjectSlot::Const(term) => term.clone(),
                ObjectSlot::Var(v) => self.bound(binding, v)?,
                ObjectSlot::Fresh(slot) => Term::Iri(fresh(slot, &mut self.fresh_counters)),
            };
            out.push(Triple::new(subject, tt.predicate.clone(), object));
        }
        Ok(out)
    }
}

fn pick_template<'t>(templates: &'t [Template], u: f64) -> &'t Template {
    let total: f64 = templates
        .iter()
        .map(|t| t.weight.to_f64().unwrap_or(0.0))
        .sum();
    let mut acc = 0.0;
    for t in templates {
        acc += t.weight.to_f64().unwrap_or(0.0) / total;
        if u < acc {
            return t;
        }
    }
    templates.last().expect("templates non-empty")
}

fn resolve_pattern_term(
    slot: &SubjectSlot,
    binding: &BindingSet,
) -> Option<Subject> {
    match slot {
        SubjectSlot::Const(iri) => Some(Subject::Iri(iri.clone())),
        SubjectSlot::Var(v) => binding.get(v)?.as_subject(),
        SubjectSlot::Fresh(_) => None,
    }
}

/// Applies one rule over the whole graph with a dedicated RNG stream.
pub fn apply_rule(
    graph: &Graph,
    rule: &AugmentationRule,
    rng_seed: u64,
) -> Result<(Graph, AppliedLog), AugmentError> {
    let mut g = graph.clone();
    let mut log = AppliedLog::default();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut inst = Instantiator::new(rule);

    let mut matches = crate::query::evaluate(graph, &rule.selector);
    matches.sort_by(|a, b| {
        a[&rule.anchor]
            .cmp(&b[&rule.anchor])
            .then_with(|| a.cmp(b))
    });
    let p_apply = rule.p_apply.to_f64().unwrap_or(0.0);

    for binding in &matches {
        let u1: f64 = rng.gen();
        if u1 >= p_apply {
            continue;
        }
        let anchor_term = binding[&rule.anchor].clone();
        match &rule.kind {
            RuleKind::Add { templates } => {
                let template = if templates.len() == 1 {
                    &templates[0]
                } else {
                    let u2: f64 = rng.gen();
                    pick_template(templates, u2)
                };
                let triples = inst.instantiate(template, binding)?;
                for t in &triples {
                    g.insert(t.clone());
                }
                log.entries.push(AppliedEntry {
                    rule: rule.iri.clone(),
                    anchor: anchor_term,
                    template: Some(template.name.clone()),
                    added: triples,
                    removed: Vec::new(),
                });
            }
            RuleKind::Change { target_path, value } => {
                let anchor_subject =
                    anchor_term
                        .as_subject()
                        .ok_or_else(|| AugmentError::Bind {
                            rule: rule.iri.as_str().to_string(),
                            variable: rule.anchor.name().to_string(),
                        })?;
                let new_value: Term = match value {
                    ValueSource::Const(lit) => Term::Literal(lit.clone()),
                    ValueSource::Var(v) => inst.bound(binding, v)?,
                };
                let removed = g.matching(Some(&anchor_subject), Some(target_path), None);
                g.remove_matching(Some(&anchor_subject), Some(target_path), None);
                let added = Triple::new(anchor_subject, target_path.clone(), new_value);
                g.insert(added.clone());
                log.entries.push(AppliedEntry {
                    rule: rule.iri.clone(),
                    anchor: anchor_term,
                    template: None,
                    added: vec![added],
                    removed,
                });
            }
            RuleKind::Delete { patterns } => {
                let mut removed = Vec::new();
                for pattern in patterns {
                    let Some(s) = resolve_pattern_term(&pattern.subject, binding) else {
                        continue;
                    };
                    let o: Option<Term> = match &pattern.object {
                        None => None,
                        Some(ObjectSlot::Const(t)) => Some(t.clone()),
                        Some(ObjectSlot::Var(v)) => Some(inst.bound(binding, v)?),
                        Some(ObjectSlot::Fresh(_)) => unreachable!("rejected at parse"),
                    };
                    removed.extend(g.matching(Some(&s), Some(&pattern.predicate), o.as_ref()));
                    g.remove_matching(Some(&s), Some(&pattern.predicate), o.as_ref());
                }
                log.entries.push(AppliedEntry {
                    rule: rule.iri.clone(),
                    anchor: anchor_term,
                    template: None,
                    added: Vec::new(),
                    removed,
                });
            }
        }
    }
    Ok((g, log))
}

/// Sub-seed for one rule: first eight bytes of sha256(master seed ‖ rule IRI).
pub fn rule_seed(master_seed: u64, rule_iri: &Iri) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(rule_iri.as_str().as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Applies all rules in IRI order, each under its own sub-seed.
pub fn apply_all(
    graph: &Graph,
    rules: &[AugmentationRule],
    master_seed: u64,
) -> Result<(Graph, Vec<AppliedLog>), AugmentError> {
    let mut g = graph.clone();
    let mut logs = Vec::new();
    for rule in rules {
        let (next, log) = apply_rule(&g, rule, rule_seed(master_seed, &rule.iri))?;
        g = next;
        logs.push(log);
    }
    Ok((g, logs))
}

/// [`apply_all`] followed by shape validation of the result.
pub fn apply_all_validated(
    graph: &Graph,
    rules: &[AugmentationRule],
    master_seed: u64,
    shapes: &[NodeShape],
    class_hierarchy: &Graph,
) -> Result<(Graph, Vec<AppliedLog>), AugmentError> {
    let (g, logs) = apply_all(graph, rules, master_seed)?;
    let report = crate::shacl::validate(&g, shapes, class_hierarchy)?;
    if !report.conforms {
        return Err(AugmentError::PostValidation { report });
    }
    Ok((g, logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    fn household_graph(n: usize) -> Graph {
        let mut g = Graph::new();
        for i in 0..n {
            g.insert(Triple::new(
                vocab::errol(&format!("household/bus{i}")),
                vocab::rdf_type(),
                vocab::errol("HouseHold"),
            ));
        }
        g
    }

    const ONE_TEMPLATE_RULE: &str = r#"
        errolr:r1 a errolr:AddRule ;
            errolr:selector "SELECT ?h WHERE { ?h rdf:type errol:HouseHold }" ;
            errolr:anchor "h" ;
            errolr:pApply 1.0 ;
            errolr:template [
                errolr:name "hems" ;
                errolr:weight 1.0 ;
                errolr:triple [ errolr:sFresh "host" ; errolr:p rdf:type ; errolr:o errol:Host ] ;
                errolr:triple [ errolr:sFresh "host" ; errolr:p errol:serves ; errolr:oVar "h" ]
            ] .
    "#;

    #[test]
    fn parses_single_add_rule() {
        let g = parse_turtle(ONE_TEMPLATE_RULE).unwrap();
        let rules = parse_rules(&g).unwrap();
        assert_eq!(rules.len(), 1);
        let RuleKind::Add { templates } = &rules[0].kind else {
            panic!("expected add rule");
        };
        assert_eq!(templates.len(), 1);
        assert_eq!(templates[0].triples.len(), 2);
    }

    #[test]
    fn p_apply_above_one_rejected() {
        let text = ONE_TEMPLATE_RULE.replace("errolr:pApply 1.0", "errolr:pApply 1.3");
        let g = parse_turtle(&text).unwrap();
        assert!(matches!(parse_rules(&g), Err(AugmentError::Rule { .. })));
    }

    #[test]
    fn non_positive_weight_rejected() {
        let text = ONE_TEMPLATE_RULE.replace("errolr:weight 1.0", "errolr:weight 0.0");
        let g = parse_turtle(&text).unwrap();
        assert!(matches!(parse_rules(&g), Err(AugmentError::Rule { .. })));
    }

    #[test]
    fn certainty_fires_once_per_household() {
        let rules = parse_rules(&parse_turtle(ONE_TEMPLATE_RULE).unwrap()).unwrap();
        let g = household_graph(10);
        let (out, log) = apply_rule(&g, &rules[0], 7).unwrap();
        assert_eq!(log.len(), 10);
        assert_eq!(out.instances_of(&vocab::errol("Host")).len(), 10);
    }

    #[test]
    fn zero_probability_is_identity() {
        let text = ONE_TEMPLATE_RULE.replace("errolr:pApply 1.0", "errolr:pApply 0.0");
        let rules = parse_rules(&parse_turtle(&text).unwrap()).unwrap();
        let g = household_graph(10);
        let (out, log) = apply_rule(&g, &rules[0], 7).unwrap();
        assert!(log.is_empty());
        assert_eq!(out, g);
    }

    #[test]
    fn change_rule_replaces_value_and_nothing_else() {
        let mut g = Graph::new();
        g.insert(Triple::new(
            vocab::errol("load/1"),
            vocab::errol("p_mw"),
            Literal::parse("0.004", crate::rdf::Datatype::Decimal).unwrap(),
        ));
        g.insert(Triple::new(
            vocab::errol("load/1"),
            vocab::errol("q_mvar"),
            Literal::parse("0.001", crate::rdf::Datatype::Decimal).unwrap(),
        ));
        let rules_text = r#"
            errolr:c1 a errolr:ChangeRule ;
                errolr:selector "SELECT ?u WHERE { ?u errol:p_mw ?p }" ;
                errolr:anchor "u" ;
                errolr:pApply 1.0 ;
                errolr:targetPath errol:p_mw ;
                errolr:value 0.01 .
        "#;
        let rules = parse_rules(&parse_turtle(rules_text).unwrap()).unwrap();
        let (out, log) = apply_rule(&g, &rules[0], 1).unwrap();
        let load = Subject::Iri(vocab::errol("load/1"));
        assert_eq!(
            out.object(&load, &vocab::errol("p_mw")),
            Some(Term::Literal(Literal::parse("0.01", crate::rdf::Datatype::Decimal).unwrap()))
        );
        assert_eq!(
            out.object(&load, &vocab::errol("q_mvar")),
            g.object(&load, &vocab::errol("q_mvar"))
        );
        assert_eq!(log.entries[0].removed.len(), 1);
    }

    #[test]
    fn change_appends_when_no_prior_value() {
        let mut g = Graph::new();
        g.insert(Triple::new(
            vocab::errol("host/1"),
            vocab::rdf_type(),
            vocab::errol("Host"),
        ));
        let rules_text = r#"
            errolr:c2 a errolr:ChangeRule ;
                errolr:selector "SELECT ?x WHERE { ?x rdf:type errol:Host }" ;
                errolr:anchor "x" ;
                errolr:pApply 1.0 ;
                errolr:targetPath errol:firmware ;
                errolr:value "2.0" .
        "#;
        let rules = parse_rules(&parse_turtle(rules_text).unwrap()).unwrap();
        let (out, log) = apply_rule(&g, &rules[0], 1).unwrap();
        assert_eq!(
            out.object(&Subject::Iri(vocab::errol("host/1")), &vocab::errol("firmware")),
            Some(Term::Literal(Literal::string("2.0")))
        );
        assert!(log.entries[0].removed.is_empty());
    }

    #[test]
    fn delete_rule_removes_matched_triples() {
        let mut g = household_graph(1);
        g.insert(Triple::new(
            vocab::errol("household/bus0"),
            vocab::errol("owns"),
            vocab::errol("load/1"),
        ));
        let rules_text = r#"
            errolr:d1 a errolr:DeleteRule ;
                errolr:selector "SELECT ?h WHERE { ?h rdf:type errol:HouseHold }" ;
                errolr:anchor "h" ;
                errolr:pApply 1.0 ;
                errolr:triple [ errolr:sVar "h" ; errolr:p errol:owns ] .
        "#;
        let rules = parse_rules(&parse_turtle(rules_text).unwrap()).unwrap();
        let (out, log) = apply_rule(&g, &rules[0], 1).unwrap();
        assert!(out
            .matching(None, Some(&vocab::errol("owns")), None)
            .is_empty());
        assert_eq!(log.entries[0].removed.len(), 1);
    }

    #[test]
    fn singleton_constant_node_created_once() {
        let rules_text = r#"
            errolr:r1 a errolr:AddRule ;
                errolr:selector "SELECT ?h WHERE { ?h rdf:type errol:HouseHold }" ;
                errolr:anchor "h" ;
                errolr:pApply 1.0 ;
                errolr:template [
                    errolr:name "backend" ;
                    errolr:weight 1.0 ;
                    errolr:triple [ errolr:s errol:backend/1 ; errolr:p rdf:type ; errolr:o errol:FunctionalActor ] ;
                    errolr:triple [ errolr:s errol:backend/1 ; errolr:p errol:serves ; errolr:oVar "h" ]
                ] .
        "#;
        let rules = parse_rules(&parse_turtle(rules_text).unwrap()).unwrap();
        let g = household_graph(5);
        let (out, _) = apply_rule(&g, &rules[0], 3).unwrap();
        assert_eq!(out.instances_of(&vocab::errol("FunctionalActor")).len(), 1);
        let backend = Subject::Iri(vocab::errol("backend/1"));
        assert_eq!(out.objects(&backend, &vocab::errol("serves")).len(), 5);
    }

    #[test]
    fn weighted_pick_roughly_matches_weights() {
        let rules_text = r#"
            errolr:r1 a errolr:AddRule ;
                errolr:selector "SELECT ?h WHERE { ?h rdf:type errol:HouseHold }" ;
                errolr:anchor "h" ;
                errolr:pApply 1.0 ;
                errolr:template [
                    errolr:name "m1" ; errolr:weight 0.5 ;
                    errolr:triple [ errolr:sVar "h" ; errolr:p errol:manufacturer ; errolr:o "m1" ]
                ] ;
                errolr:template [
                    errolr:name "m2" ; errolr:weight 0.3 ;
                    errolr:triple [ errolr:sVar "h" ; errolr:p errol:manufacturer ; errolr:o "m2" ]
                ] ;
                errolr:template [
                    errolr:name "m3" ; errolr:weight 0.2 ;
                    errolr:triple [ errolr:sVar "h" ; errolr:p errol:manufacturer ; errolr:o "m3" ]
                ] .
        "#;
        let rules = parse_rules(&parse_turtle(rules_text).unwrap()).unwrap();
        let g = household_graph(1000);
        let (_, log) = apply_rule(&g, &rules[0], 42).unwrap();
        let count = |name: &str| {
            log.entries
                .iter()
                .filter(|e| e.template.as_deref() == Some(name))
                .count() as f64
        };
        // 4σ binomial bounds around 500 / 300 / 200
        assert!((count("m1") - 500.0).abs() < 4.0 * (1000.0f64 * 0.5 * 0.5).sqrt());
        assert!((count("m2") - 300.0).abs() < 4.0 * (1000.0f64 * 0.3 * 0.7).sqrt());
        assert!((count("m3") - 200.0).abs() < 4.0 * (1000.0f64 * 0.2 * 0.8).sqrt());
    }

    #[test]
    fn replay_reproduces_post_graph() {
        let rules = parse_rules(&parse_turtle(ONE_TEMPLATE_RULE).unwrap()).unwrap();
        let g = household_graph(10);
        let (out, logs) = apply_all(&g, &rules, 42).unwrap();
        assert_eq!(replay(&g, &logs), out);
    }

    #[test]
    fn same_seed_gives_identical_output() {
        let rules = parse_rules(&parse_turtle(ONE_TEMPLATE_RULE).unwrap()).unwrap();
        let g = household_graph(50);
        let (a, _) = apply_all(&g, &rules, 9).unwrap();
        let (b, _) = apply_all(&g, &rules, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbound_template_variable_is_bind_error() {
        let text = ONE_TEMPLATE_RULE.replace("errolr:oVar \"h\"", "errolr:oVar \"nope\"");
        let rules = parse_rules(&parse_turtle(&text).unwrap()).unwrap();
        let g = household_graph(1);
        assert!(matches!(
            apply_rule(&g, &rules[0], 1),
            Err(AugmentError::Bind { .. })
        ));
    }
}
