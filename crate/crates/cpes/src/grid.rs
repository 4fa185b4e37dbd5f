//! Tabular power-system model and its lossless conversion to and from the
//! knowledge graph.
//!
//! The sign convention is the load reference frame everywhere: consumption
//! positive, production negative. Static generators therefore carry p_mw <= 0.
//! Sources that declare generator convention can say so in the JSON document
//! (`"sgen_sign_convention": "generator"`) and are negated on ingest.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{Graph, Iri, Literal, Subject, Term, Triple};
use crate::vocab::{self, errol};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("element {element} references missing bus {bus}")]
    Ref { element: String, bus: u64 },
    #[error("invalid grid model: {0}")]
    Invariant(String),
    #[error("graph node {iri} is missing required property {property}")]
    MissingProperty { iri: String, property: String },
    #[error("graph node {iri} has a malformed value for {property}: {detail}")]
    BadProperty {
        iri: String,
        property: String,
        detail: String,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    #[default]
    Load,
    Generator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadType {
    Household,
    Commercial,
    Heatpump,
    Ev,
}

impl LoadType {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadType::Household => "household",
            LoadType::Commercial => "commercial",
            LoadType::Heatpump => "heatpump",
            LoadType::Ev => "ev",
        }
    }

    fn from_str(s: &str) -> Option<Self> {
        match s {
            "household" => Some(LoadType::Household),
            "commercial" => Some(LoadType::Commercial),
            "heatpump" => Some(LoadType::Heatpump),
            "ev" => Some(LoadType::Ev),
            _ => None,
        }
    }
}

mod dec {
    pub use rust_decimal::serde::arbitrary_precision::*;
}

mod dec_opt {
    pub use rust_decimal::serde::arbitrary_precision_option::*;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: u64,
    pub name: String,
    #[serde(with = "dec")]
    pub vn_kv: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRecord {
    pub id: u64,
    pub from_bus: u64,
    pub to_bus: u64,
    #[serde(with = "dec")]
    pub r_ohm_per_km: Decimal,
    #[serde(with = "dec")]
    pub x_ohm_per_km: Decimal,
    #[serde(with = "dec")]
    pub length_km: Decimal,
    #[serde(with = "dec")]
    pub max_i_ka: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafoRecord {
    pub id: u64,
    pub hv_bus: u64,
    pub lv_bus: u64,
    #[serde(with = "dec")]
    pub sn_mva: Decimal,
    #[serde(with = "dec")]
    pub vn_hv_kv: Decimal,
    #[serde(with = "dec")]
    pub vn_lv_kv: Decimal,
    #[serde(with = "dec")]
    pub vk_percent: Decimal,
    #[serde(with = "dec")]
    pub vkr_percent: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadRecord {
    pub id: u64,
    pub bus: u64,
    #[serde(with = "dec")]
    pub p_mw: Decimal,
    #[serde(with = "dec")]
    pub q_mvar: Decimal,
    #[serde(rename = "type")]
    pub load_type: LoadType,
    #[serde(default)]
    pub controllable: bool,
    #[serde(default, with = "dec_opt")]
    pub max_p_mw: Option<Decimal>,
    #[serde(default, with = "dec_opt")]
    pub min_p_mw: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgenRecord {
    pub id: u64,
    pub bus: u64,
    #[serde(with = "dec")]
    pub p_mw: Decimal,
    #[serde(with = "dec")]
    pub q_mvar: Decimal,
    #[serde(rename = "type")]
    pub sgen_type: String,
    #[serde(default)]
    pub controllable: bool,
    #[serde(default, with = "dec_opt")]
    pub max_p_mw: Option<Decimal>,
    #[serde(default, with = "dec_opt")]
    pub min_p_mw: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageRecord {
    pub id: u64,
    pub bus: u64,
    #[serde(with = "dec")]
    pub p_mw: Decimal,
    #[serde(with = "dec")]
    pub q_mvar: Decimal,
    #[serde(default)]
    pub controllable: bool,
    #[serde(with = "dec")]
    pub max_p_mw: Decimal,
    #[serde(with = "dec")]
    pub min_p_mw: Decimal,
    #[serde(with = "dec")]
    pub soc_percent: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtGridRecord {
    pub id: u64,
    pub bus: u64,
    #[serde(with = "dec")]
    pub vm_pu: Decimal,
    #[serde(with = "dec")]
    pub va_deg: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GridTables {
    #[serde(default)]
    pub sgen_sign_convention: SignConvention,
    pub bus: Vec<BusRecord>,
    #[serde(default)]
    pub line: Vec<LineRecord>,
    #[serde(default)]
    pub trafo: Vec<TrafoRecord>,
    #[serde(default)]
    pub load: Vec<LoadRecord>,
    #[serde(default)]
    pub sgen: Vec<SgenRecord>,
    #[serde(default)]
    pub storage: Vec<StorageRecord>,
    pub ext_grid: Vec<ExtGridRecord>,
}

impl GridTables {
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let mut tables: GridTables = serde_json::from_str(text)?;
        tables.normalize();
        tables.validate()?;
        Ok(tables)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grid tables serialize");
        s.push('\n');
        s
    }

    /// Converts to the load reference frame and fills the default power
    /// bounds: loads default to [0, p_mw], sgens to [p_mw, 0].
    pub fn normalize(&mut self) {
        if self.sgen_sign_convention == SignConvention::Generator {
            for s in &mut self.sgen {
                s.p_mw = -s.p_mw;
                let (max, min) = (s.min_p_mw.map(|v| -v), s.max_p_mw.map(|v| -v));
                s.max_p_mw = max;
                s.min_p_mw = min;
            }
            self.sgen_sign_convention = SignConvention::Load;
        }
        for l in &mut self.load {
            l.max_p_mw.get_or_insert(l.p_mw);
            l.min_p_mw.get_or_insert(Decimal::ZERO);
        }
        for s in &mut self.sgen {
            s.min_p_mw.get_or_insert(s.p_mw);
            s.max_p_mw.get_or_insert(Decimal::ZERO);
        }
        self.bus.sort_by_key(|r| r.id);
        self.line.sort_by_key(|r| r.id);
        self.trafo.sort_by_key(|r| r.id);
        self.load.sort_by_key(|r| r.id);
        self.sgen.sort_by_key(|r| r.id);
        self.storage.sort_by_key(|r| r.id);
        self.ext_grid.sort_by_key(|r| r.id);
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let mut bus_ids = std::collections::BTreeSet::new();
        for b in &self.bus {
            if !bus_ids.insert(b.id) {
                return Err(GridError::Invariant(format!("duplicate bus id {}", b.id)));
            }
            if b.vn_kv <= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "bus {} has non-positive vn_kv",
                    b.id
                )));
            }
        }
        let check_bus = |element: String, bus: u64| -> Result<(), GridError> {
            if bus_ids.contains(&bus) {
                Ok(())
            } else {
                Err(GridError::Ref { element, bus })
            }
        };
        check_unique_ids("line", self.line.iter().map(|r| r.id))?;
        check_unique_ids("trafo", self.trafo.iter().map(|r| r.id))?;
        check_unique_ids("load", self.load.iter().map(|r| r.id))?;
        check_unique_ids("sgen", self.sgen.iter().map(|r| r.id))?;
        check_unique_ids("storage", self.storage.iter().map(|r| r.id))?;
        check_unique_ids("ext_grid", self.ext_grid.iter().map(|r| r.id))?;
        for l in &self.line {
            check_bus(format!("line {}", l.id), l.from_bus)?;
            check_bus(format!("line {}", l.id), l.to_bus)?;
            if l.from_bus == l.to_bus {
                return Err(GridError::Invariant(format!(
                    "line {} connects a bus to itself",
                    l.id
                )));
            }
            if l.length_km <= Decimal::ZERO || l.max_i_ka <= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "line {} needs positive length_km and max_i_ka",
                    l.id
                )));
            }
            if l.r_ohm_per_km <= Decimal::ZERO && l.x_ohm_per_km <= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "line {} needs r > 0 or x > 0",
                    l.id
                )));
            }
        }
        for t in &self.trafo {
            check_bus(format!("trafo {}", t.id), t.hv_bus)?;
            check_bus(format!("trafo {}", t.id), t.lv_bus)?;
            if t.sn_mva <= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "trafo {} needs positive sn_mva",
                    t.id
                )));
            }
            if t.vkr_percent < Decimal::ZERO || t.vkr_percent > t.vk_percent {
                return Err(GridError::Invariant(format!(
                    "trafo {} needs 0 <= vkr_percent <= vk_percent",
                    t.id
                )));
            }
            if t.vn_hv_kv <= t.vn_lv_kv {
                return Err(GridError::Invariant(format!(
                    "trafo {} needs vn_hv_kv > vn_lv_kv",
                    t.id
                )));
            }
        }
        for l in &self.load {
            check_bus(format!("load {}", l.id), l.bus)?;
            if l.p_mw < Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "load {} has negative p_mw (consumption is positive)",
                    l.id
                )));
            }
            if l.controllable {
                let (min, max) = (l.min_p_mw.unwrap(), l.max_p_mw.unwrap());
                if !(min <= l.p_mw && l.p_mw <= max) {
                    return Err(GridError::Invariant(format!(
                        "load {} p_mw outside [min_p_mw, max_p_mw]",
                        l.id
                    )));
                }
            }
        }
        for s in &self.sgen {
            check_bus(format!("sgen {}", s.id), s.bus)?;
            if s.p_mw > Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "sgen {} has positive p_mw (production is negative)",
                    s.id
                )));
            }
            let (min, max) = (s.min_p_mw.unwrap(), s.max_p_mw.unwrap());
            if !(min <= s.p_mw && s.p_mw <= max && max <= Decimal::ZERO) {
                return Err(GridError::Invariant(format!(
                    "sgen {} needs min_p_mw <= p_mw <= max_p_mw <= 0",
                    s.id
                )));
            }
        }
        for s in &self.storage {
            check_bus(format!("storage {}", s.id), s.bus)?;
            if s.max_p_mw <= Decimal::ZERO || s.min_p_mw >= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "storage {} needs max_p_mw > 0 and min_p_mw < 0",
                    s.id
                )));
            }
            if !(s.min_p_mw <= s.p_mw && s.p_mw <= s.max_p_mw) {
                return Err(GridError::Invariant(format!(
                    "storage {} p_mw outside [min_p_mw, max_p_mw]",
                    s.id
                )));
            }
        }
        for e in &self.ext_grid {
            check_bus(format!("ext_grid {}", e.id), e.bus)?;
            if e.vm_pu <= Decimal::ZERO {
                return Err(GridError::Invariant(format!(
                    "ext_grid {} needs positive vm_pu",
                    e.id
                )));
            }
        }
        if self.ext_grid.is_empty() {
            return Err(GridError::Invariant("at least one ext_grid is required".into()));
        }
        Ok(())
    }

    pub fn bus_vn_kv(&self, bus: u64) -> Option<Decimal> {
        self.bus.iter().find(|b| b.id == bus).map(|b| b.vn_kv)
    }
}

fn check_unique_ids(table: &str, ids: impl Iterator<Item = u64>) -> Result<(), GridError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(GridError::Invariant(format!("duplicate {table} id {id}")));
        }
    }
    Ok(())
}

/// Deterministic IRI of a grid element.
pub fn element_iri(kind: &str, id: u64) -> Iri {
    errol(&format!("{kind}/{id}"))
}

pub fn bus_iri(id: u64) -> Iri {
    element_iri("bus", id)
}

fn dec_term(d: Decimal) -> Term {
    Term::Literal(Literal::decimal(d))
}

/// Converts validated tables into the knowledge graph. Every record becomes
/// one typed node with literal-valued field triples and object properties for
/// bus references.
pub fn import_grid(tables: &GridTables) -> Result<Graph, GridError> {
    tables.validate()?;
    let mut g = Graph::new();
    let mut add = |s: &Iri, p: Iri, o: Term| {
        g.insert(Triple::new(s.clone(), p, o));
    };
    for b in &tables.bus {
        let iri = bus_iri(b.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("Bus")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(b.id as i64)));
        add(&iri, errol("name"), Term::Literal(Literal::string(&b.name)));
        add(&iri, errol("vn_kv"), dec_term(b.vn_kv));
    }
    for l in &tables.line {
        let iri = element_iri("line", l.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("Line")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(l.id as i64)));
        add(&iri, errol("fromBus"), Term::Iri(bus_iri(l.from_bus)));
        add(&iri, errol("toBus"), Term::Iri(bus_iri(l.to_bus)));
        add(&iri, errol("r_ohm_per_km"), dec_term(l.r_ohm_per_km));
        add(&iri, errol("x_ohm_per_km"), dec_term(l.x_ohm_per_km));
        add(&iri, errol("length_km"), dec_term(l.length_km));
        add(&iri, errol("max_i_ka"), dec_term(l.max_i_ka));
    }
    for t in &tables.trafo {
        let iri = element_iri("trafo", t.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("Transformer")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(t.id as i64)));
        add(&iri, errol("hvBus"), Term::Iri(bus_iri(t.hv_bus)));
        add(&iri, errol("lvBus"), Term::Iri(bus_iri(t.lv_bus)));
        add(&iri, errol("sn_mva"), dec_term(t.sn_mva));
        add(&iri, errol("vn_hv_kv"), dec_term(t.vn_hv_kv));
        add(&iri, errol("vn_lv_kv"), dec_term(t.vn_lv_kv));
        add(&iri, errol("vk_percent"), dec_term(t.vk_percent));
        add(&iri, errol("vkr_percent"), dec_term(t.vkr_percent));
    }
    for l in &tables.load {
        let iri = element_iri("load", l.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("Load")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(l.id as i64)));
        add(&iri, errol("connectedTo"), Term::Iri(bus_iri(l.bus)));
        add(&iri, errol("p_mw"), dec_term(l.p_mw));
        add(&iri, errol("q_mvar"), dec_term(l.q_mvar));
        add(
            &iri,
            errol("type"),
            Term::Literal(Literal::string(l.load_type.as_str())),
        );
        add(
            &iri,
            errol("controllable"),
            Term::Literal(Literal::Bool(l.controllable)),
        );
        add(&iri, errol("max_p_mw"), dec_term(l.max_p_mw.unwrap()));
        add(&iri, errol("min_p_mw"), dec_term(l.min_p_mw.unwrap()));
    }
    for s in &tables.sgen {
        let iri = element_iri("sgen", s.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("StaticGenerator")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(s.id as i64)));
        add(&iri, errol("connectedTo"), Term::Iri(bus_iri(s.bus)));
        add(&iri, errol("p_mw"), dec_term(s.p_mw));
        add(&iri, errol("q_mvar"), dec_term(s.q_mvar));
        add(
            &iri,
            errol("type"),
            Term::Literal(Literal::string(&s.sgen_type)),
        );
        add(
            &iri,
            errol("controllable"),
            Term::Literal(Literal::Bool(s.controllable)),
        );
        add(&iri, errol("max_p_mw"), dec_term(s.max_p_mw.unwrap()));
        add(&iri, errol("min_p_mw"), dec_term(s.min_p_mw.unwrap()));
    }
    for s in &tables.storage {
        let iri = element_iri("storage", s.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("Storage")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(s.id as i64)));
        add(&iri, errol("connectedTo"), Term::Iri(bus_iri(s.bus)));
        add(&iri, errol("p_mw"), dec_term(s.p_mw));
        add(&iri, errol("q_mvar"), dec_term(s.q_mvar));
        add(
            &iri,
            errol("controllable"),
            Term::Literal(Literal::Bool(s.controllable)),
        );
        add(&iri, errol("max_p_mw"), dec_term(s.max_p_mw));
        add(&iri, errol("min_p_mw"), dec_term(s.min_p_mw));
        add(&iri, errol("soc_percent"), dec_term(s.soc_percent));
    }
    for e in &tables.ext_grid {
        let iri = element_iri("ext_grid", e.id);
        add(&iri, vocab::rdf_type(), Term::Iri(errol("ExternalGrid")));
        add(&iri, errol("id"), Term::Literal(Literal::Int(e.id as i64)));
        add(&iri, errol("connectedTo"), Term::Iri(bus_iri(e.bus)));
        add(&iri, errol("vm_pu"), dec_term(e.vm_pu));
        add(&iri, errol("va_deg"), dec_term(e.va_deg));
    }
    Ok(g)
}

struct NodeReader<'a> {
    graph: &'a Graph,
    subject: Subject,
    iri: String,
}

impl<'a> NodeReader<'a> {
    fn new(graph: &'a Graph, subject: Subject) -> Self {
        let iri = match &subject {
            Subject::Iri(iri) => iri.as_str().to_string(),
            Subject::Blank(b) => b.to_string(),
        };
        NodeReader {
            graph,
            subject,
            iri,
        }
    }

    fn require(&self, local: &str) -> Result<Term, GridError> {
        self.graph
            .object(&self.subject, &errol(local))
            .ok_or_else(|| GridError::MissingProperty {
                iri: self.iri.clone(),
                property: format!("errol:{local}"),
            })
    }

    fn bad(&self, local: &str, detail: impl Into<String>) -> GridError {
        GridError::BadProperty {
            iri: self.iri.clone(),
            property: format!("errol:{local}"),
            detail: detail.into(),
        }
    }

    fn dec(&self, local: &str) -> Result<Decimal, GridError> {
        self.require(local)?
            .as_literal()
            .and_then(|l| l.as_decimal())
            .ok_or_else(|| self.bad(local, "expected a numeric literal"))
    }

    fn id(&self) -> Result<u64, GridError> {
        match self.require("id")?.as_literal() {
            Some(Literal::Int(i)) if *i >= 0 => Ok(*i as u64),
            _ => Err(self.bad("id", "expected a non-negative integer")),
        }
    }

    fn string(&self, local: &str) -> Result<String, GridError> {
        match self.require(local)?.as_literal() {
            Some(Literal::Str(s)) => Ok(s.clone()),
            _ => Err(self.bad(local, "expected a string literal")),
        }
    }

    fn boolean(&self, local: &str) -> Result<bool, GridError> {
        match self.require(local)?.as_literal() {
            Some(Literal::Bool(b)) => Ok(*b),
            _ => Err(self.bad(local, "expected a boolean literal")),
        }
    }

    fn bus_ref(&self, local: &str) -> Result<u64, GridError> {
        let term = self.require(local)?;
        let iri = term
            .as_iri()
            .ok_or_else(|| self.bad(local, "expected a bus IRI"))?;
        let bus_reader = NodeReader::new(self.graph, Subject::Iri(iri.clone()));
        bus_reader.id()
    }
}

/// Reads the power-system subgraph back into tables; the exact inverse of
/// [`import_grid`]. Control-infrastructure triples are ignored, so post-attack
/// p_mw values flow straight through to the solver.
pub fn export_grid(graph: &Graph) -> Result<GridTables, GridError> {
    let mut tables = GridTables::default();
    for subject in graph.instances_of(&errol("Bus")) {
        let r = NodeReader::new(graph, subject);
        tables.bus.push(BusRecord {
            id: r.id()?,
            name: r.string("name")?,
            vn_kv: r.dec("vn_kv")?,
        });
    }
    for subject in graph.instances_of(&errol("Line")) {
        let r = NodeReader::new(graph, subject);
        tables.line.push(LineRecord {
            id: r.id()?,
            from_bus: r.bus_ref("fromBus")?,
            to_bus: r.bus_ref("toBus")?,
            r_ohm_per_km: r.dec("r_ohm_per_km")?,
            x_ohm_per_km: r.dec("x_ohm_per_km")?,
            length_km: r.dec("length_km")?,
            max_i_ka: r.dec("max_i_ka")?,
        });
    }
    for subject in graph.instances_of(&errol("Transformer")) {
        let r = NodeReader::new(graph, subject);
        tables.trafo.push(TrafoRecord {
            id: r.id()?,
            hv_bus: r.bus_ref("hvBus")?,
            lv_bus: r.bus_ref("lvBus")?,
            sn_mva: r.dec("sn_mva")?,
            vn_hv_kv: r.dec("vn_hv_kv")?,
            vn_lv_kv: r.dec("vn_lv_kv")?,
            vk_percent: r.dec("vk_percent")?,
            vkr_percent: r.dec("vkr_percent")?,
        });
    }
    for subject in graph.instances_of(&errol("Load")) {
        let r = NodeReader::new(graph, subject);
        let type_str = r.string("type")?;
        let load_type = LoadType::from_str(&type_str)
            .ok_or_else(|| r.bad("type", format!("unknown load type {type_str:?}")))?;
        tables.load.push(LoadRecord {
            id: r.id()?,
            bus: r.bus_ref("connectedTo")?,
            p_mw: r.dec("p_mw")?,
            q_mvar: r.dec("q_mvar")?,
            load_type,
            controllable: r.boolean("controllable")?,
            max_p_mw: Some(r.dec("max_p_mw")?),
            min_p_mw: Some(r.dec("min_p_mw")?),
        });
    }
    for subject in graph.instances_of(&errol("StaticGenerator")) {
        let r = NodeReader::new(graph, subject);
        tables.sgen.push(SgenRecord {
            id: r.id()?,
            bus: r.bus_ref("connectedTo")?,
            p_mw: r.dec("p_mw")?,
            q_mvar: r.dec("q_mvar")?,
            sgen_type: r.string("type")?,
            controllable: r.boolean("controllable")?,
            max_p_mw: Some(r.dec("max_p_mw")?),
            min_p_mw: Some(r.dec("min_p_mw")?),
        });
    }
    for subject in graph.instances_of(&errol("Storage")) {
        let r = NodeReader::new(graph, subject);
        tables.storage.push(StorageRecord {
            id: r.id()?,
            bus: r.bus_ref("connectedTo")?,
            p_mw: r.dec("p_mw")?,
            q_mvar: r.dec("q_mvar")?,
            controllable: r.boolean("controllable")?,
            max_p_mw: r.dec("max_p_mw")?,
            min_p_mw: r.dec("min_p_mw")?,
            soc_percent: r.dec("soc_percent")?,
        });
    }
    for subject in graph.instances_of(&errol("ExternalGrid")) {
        let r = NodeReader::new(graph, subject);
        tables.ext_grid.push(ExtGridRecord {
            id: r.id()?,
            bus: r.bus_ref("connectedTo")?,
            vm_pu: r.dec("vm_pu")?,
            va_deg: r.dec("va_deg")?,
        });
    }
    tables.normalize();
    Ok(tables)
}
