//! Attack scenarios compiled into change rules.
//!
//! An attacker who controls a functional actor (typically a manufacturer
//! backend) can influence every control value carried by an information
//! object flow reachable from that actor's function blocks, following flow
//! edges in the from → to direction transitively. The attack itself is just a
//! batch of change rules — one per reachable unit — setting active power to
//! the worst-case bound for the chosen objective. Reactive power is never
//! touched.

use rust_decimal::Decimal;
use thiserror::Error;

use crate::augment::{self, AugmentationRule, RuleKind, ValueSource};
use crate::ontology::{class, prop};
use crate::query::{parse_select, Variable};
use crate::rdf::{Graph, Iri, Literal, Subject, Term};
use crate::vocab::{errol, errolr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaximizeLoad,
    MinimizeLoad,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MaximizeLoad => "max",
            Objective::MinimizeLoad => "min",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackScenario {
    pub compromised_actor: Iri,
    pub objective: Objective,
    pub label: String,
    /// Optional scoping: only units whose HEMS host matches.
    pub manufacturer: Option<String>,
    pub firmware: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlTarget {
    pub control_value: Iri,
    pub unit: Iri,
    pub min_p_mw: Decimal,
    pub max_p_mw: Decimal,
    pub current_p_mw: Decimal,
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("{0} is not a FunctionalActor")]
    NotAnActor(Iri),
    #[error("control value {control_value} references missing or incomplete unit {unit}")]
    DanglingRef { control_value: Iri, unit: Iri },
    #[error(transparent)]
    Augment(#[from] augment::AugmentError),
}

fn host_attr(graph: &Graph, block: &Subject, attr: &Iri) -> Option<String> {
    // block → parent actor → host → attribute
    let actor = graph
        .subjects_with(&prop::has_function_block(), &Term::from(block.clone()))
        .into_iter()
        .next()?;
    let host = graph.object(&actor, &prop::realized_on())?.as_subject()?;
    match graph.object(&host, attr)? {
        Term::Literal(Literal::Str(s)) => Some(s),
        _ => None,
    }
}

/// All control targets reachable from `actor`, in unit-IRI order.
pub fn enumerate_controllables(
    graph: &Graph,
    actor: &Iri,
    manufacturer: Option<&str>,
    firmware: Option<&str>,
) -> Result<Vec<ControlTarget>, AttackError> {
    let actor_subject = Subject::Iri(actor.clone());
    let is_actor = graph
        .instances_of(&class::functional_actor())
        .contains(&actor_subject);
    if !is_actor {
        return Err(AttackError::NotAnActor(actor.clone()));
    }

    // transitive closure over flow edges, starting from the actor's blocks
    let mut reachable: std::collections::BTreeSet<Subject> = graph
        .objects(&actor_subject, &prop::has_function_block())
        .into_iter()
        .filter_map(|t| t.as_subject())
        .collect();
    let mut frontier: Vec<Subject> = reachable.iter().cloned().collect();
    let mut traversed_flows: Vec<Subject> = Vec::new();
    while let Some(block) = frontier.pop() {
        for flow in graph.subjects_with(&prop::flow_from(), &Term::from(block.clone())) {
            traversed_flows.push(flow.clone());
            if let Some(to) = graph.object(&flow, &prop::flow_to()).and_then(|t| t.as_subject()) {
                if reachable.insert(to.clone()) {
                    frontier.push(to);
                }
            }
        }
    }

    let mut targets: Vec<ControlTarget> = Vec::new();
    for flow in &traversed_flows {
        if let Some(manu) = manufacturer {
            let to = graph.object(flow, &prop::flow_to()).and_then(|t| t.as_subject());
            let found = to
                .as_ref()
                .and_then(|b| host_attr(graph, b, &prop::manufacturer()));
            if found.as_deref() != Some(manu) {
                continue;
            }
        }
        if let Some(fw) = firmware {
            let to = graph.object(flow, &prop::flow_to()).and_then(|t| t.as_subject());
            let found = to
                .as_ref()
                .and_then(|b| host_attr(graph, b, &prop::firmware()));
            if found.as_deref() != Some(fw) {
                continue;
            }
        }
        for cv_term in graph.objects(flow, &prop::transmits()) {
            let Some(cv_subject) = cv_term.as_subject() else {
                continue;
            };
            let is_cv = graph
                .objects(&cv_subject, &crate::vocab::rdf_type())
                .contains(&Term::Iri(class::control_value()));
            if !is_cv {
                continue;
            }
            let Subject::Iri(cv_iri) = cv_subject.clone() else {
                continue;
            };
            let unit_iri = match graph.object(&cv_subject, &prop::references_unit()) {
                Some(Term::Iri(iri)) => iri,
                _ => {
                    return Err(AttackError::DanglingRef {
                        control_value: cv_iri,
                        unit: errol("missing"),
                    })
                }
            };
            let unit = Subject::Iri(unit_iri.clone());
            let num = |name: &str| {
                graph
                    .object(&unit, &errol(name))
                    .and_then(|t| t.as_literal().and_then(Literal::as_decimal))
            };
            let (Some(min), Some(max), Some(current)) =
                (num("min_p_mw"), num("max_p_mw"), num("p_mw"))
            else {
                return Err(AttackError::DanglingRef {
                    control_value: cv_iri,
                    unit: unit_iri,
                });
            };
            targets.push(ControlTarget {
                control_value: cv_iri,
                unit: unit_iri,
                min_p_mw: min,
                max_p_mw: max,
                current_p_mw: current,
            });
        }
    }
    targets.sort_by(|a, b| a.unit.cmp(&b.unit));
    targets.dedup_by(|a, b| a.unit == b.unit);
    Ok(targets)
}

/// Compiles one target into a p=1 change rule pinning its p_mw to a bound.
fn target_rule(index: usize, target: &ControlTarget, objective: Objective) -> AugmentationRule {
    let value = match objective {
        Objective::MaximizeLoad => target.max_p_mw,
        Objective::MinimizeLoad => target.min_p_mw,
    };
    let selector_text = format!(
        "SELECT ?u WHERE {{ ?u errol:p_mw ?p . FILTER(?u = <{}>) }}",
        target.unit.as_str()
    );
    AugmentationRule {
        iri: errolr(&format!("attack/{index}")),
        selector: parse_select(&selector_text).expect("generated selector parses"),
        anchor: Variable::new("u").unwrap(),
        p_apply: Decimal::ONE,
        kind: RuleKind::Change {
            target_path: errol("p_mw"),
            value: ValueSource::Const(Literal::decimal(value)),
        },
    }
}

/// Applies the scenario's worst-case setpoints and reports what was touched.
pub fn apply_attack(
    graph: &Graph,
    scenario: &AttackScenario,
) -> Result<(Graph, Vec<ControlTarget>), AttackError> {
    let targets = enumerate_controllables(
        graph,
        &scenario.compromised_actor,
        scenario.manufacturer.as_deref(),
        scenario.firmware.as_deref(),
    )?;
    let mut g = graph.clone();
    for (i, target) in targets.iter().enumerate() {
        let rule = target_rule(i, target, scenario.objective);
        let (next, _) = augment::apply_rule(&g, &rule, 0)?;
        g = next;
    }
    Ok((g, targets))
}
