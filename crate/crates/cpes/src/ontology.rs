//! Control-infrastructure vocabulary and the household-derivation step.
//!
//! The function layer (hosts, functional actors, function blocks, information
//! object flows) never touches physical elements directly; the only bridge is
//! a ControlValue's `errol:referencesUnit`. Monitoring/measurement flows are
//! not modelled — every flow here is a control path directed backend → HEMS.

use rust_decimal::Decimal;

use crate::grid::bus_iri;
use crate::rdf::{Graph, Iri, Literal, Subject, Term, Triple};
use crate::vocab::{self, errol};

/// Class IRIs of the control-infrastructure layer.
pub mod class {
    use crate::rdf::Iri;
    use crate::vocab::errol;

    pub fn asset_group() -> Iri {
        errol("AssetGroup")
    }
    pub fn household() -> Iri {
        errol("HouseHold")
    }
    pub fn host() -> Iri {
        errol("Host")
    }
    pub fn functional_actor() -> Iri {
        errol("FunctionalActor")
    }
    pub fn function_block() -> Iri {
        errol("FunctionBlock")
    }
    pub fn information_object() -> Iri {
        errol("InformationObject")
    }
    pub fn information_object_flow() -> Iri {
        errol("InformationObjectFlow")
    }
    pub fn control_value() -> Iri {
        errol("ControlValue")
    }
}

/// Property IRIs of the control-infrastructure layer.
pub mod prop {
    use crate::rdf::Iri;
    use crate::vocab::errol;

    pub fn pcc_bus() -> Iri {
        errol("pccBus")
    }
    pub fn owns() -> Iri {
        errol("owns")
    }
    pub fn manufacturer() -> Iri {
        errol("manufacturer")
    }
    pub fn firmware() -> Iri {
        errol("firmware")
    }
    pub fn realized_on() -> Iri {
        errol("realizedOn")
    }
    pub fn has_function_block() -> Iri {
        errol("hasFunctionBlock")
    }
    pub fn capability() -> Iri {
        errol("capability")
    }
    pub fn flow_from() -> Iri {
        errol("from")
    }
    pub fn flow_to() -> Iri {
        errol("to")
    }
    pub fn transmits() -> Iri {
        errol("transmits")
    }
    pub fn references_unit() -> Iri {
        errol("referencesUnit")
    }
    pub fn references_property() -> Iri {
        errol("referencesProperty")
    }
    pub fn serves() -> Iri {
        errol("serves")
    }
}

/// Deterministic household IRI for a PCC bus.
pub fn household_iri(bus_id: u64) -> Iri {
    errol(&format!("household/bus{bus_id}"))
}

fn bus_id_of(graph: &Graph, bus: &Subject) -> Option<u64> {
    match graph.object(bus, &errol("id"))? {
        Term::Literal(Literal::Int(i)) if i >= 0 => Some(i as u64),
        _ => None,
    }
}

/// Marks every bus with at least one household-type load as a point of common
/// coupling: one HouseHold node per such bus, owning all loads, static
/// generators and storages connected there. Re-running adds nothing (the IRIs
/// are deterministic and insertion is set-semantic).
pub fn derive_households(graph: &mut Graph) {
    let mut pcc_buses: Vec<(u64, Subject)> = Vec::new();
    for load in graph.instances_of(&errol("Load")) {
        let is_household = matches!(
            graph.object(&load, &errol("type")),
            Some(Term::Literal(Literal::Str(s))) if s == "household"
        );
        if !is_household {
            continue;
        }
        if let Some(Term::Iri(bus)) = graph.object(&load, &errol("connectedTo")) {
            let bus_subject = Subject::Iri(bus);
            if let Some(id) = bus_id_of(graph, &bus_subject) {
                if !pcc_buses.iter().any(|(existing, _)| *existing == id) {
                    pcc_buses.push((id, bus_subject));
                }
            }
        }
    }
    pcc_buses.sort_by_key(|(id, _)| *id);

    for (bus_id, bus) in pcc_buses {
        let hh = household_iri(bus_id);
        graph.insert(Triple::new(
            hh.clone(),
            vocab::rdf_type(),
            class::household(),
        ));
        graph.insert(Triple::new(
            hh.clone(),
            prop::pcc_bus(),
            Term::Iri(bus_iri(bus_id)),
        ));
        for unit_class in ["Load", "StaticGenerator", "Storage"] {
            for unit in graph.instances_of(&errol(unit_class)) {
                if graph.object(&unit, &errol("connectedTo")) == Some(Term::from(bus.clone())) {
                    if let Subject::Iri(unit_iri) = unit {
                        graph.insert(Triple::new(hh.clone(), prop::owns(), unit_iri));
                    }
                }
            }
        }
    }
}

/// Owned units with `errol:controllable true` and their active-power bounds.
/// Sorted by unit IRI.
pub fn controllable_units(graph: &Graph, household: &Iri) -> Vec<(Iri, Decimal, Decimal)> {
    let hh = Subject::Iri(household.clone());
    let mut out = Vec::new();
    for unit_term in graph.objects(&hh, &prop::owns()) {
        let Term::Iri(unit_iri) = unit_term else {
            continue;
        };
        let unit = Subject::Iri(unit_iri.clone());
        let controllable = matches!(
            graph.object(&unit, &errol("controllable")),
            Some(Term::Literal(Literal::Bool(true)))
        );
        if !controllable {
            continue;
        }
        let bound = |name: &str| {
            graph
                .object(&unit, &errol(name))
                .and_then(|t| t.as_literal().and_then(Literal::as_decimal))
        };
        if let (Some(min), Some(max)) = (bound("min_p_mw"), bound("max_p_mw")) {
            out.push((unit_iri, min, max));
        }
    }
    out.sort();
    out
}
