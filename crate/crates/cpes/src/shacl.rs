//! Closed-world shape validation.
//!
//! The supported constraint subset is sh:targetClass, sh:path, sh:datatype,
//! sh:minCount, sh:maxCount, sh:minInclusive, sh:maxInclusive and sh:and over
//! value-range property shapes. Targeting follows rdfs:subClassOf chains in
//! the class hierarchy; rdf:type entailment is not materialized, a node must
//! carry an explicit type in the subclass chain. Absence of a statement
//! counts as count zero, never as "unknown".

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::rdf::{Datatype, Graph, Iri, Literal, Subject, Term};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShaclError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("subclass cycle involving {0}")]
    Cycle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyShape {
    pub path: Iri,
    pub datatype: Option<Datatype>,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub min_inclusive: Option<Decimal>,
    pub max_inclusive: Option<Decimal>,
    pub name: Option<String>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShape {
    pub shape_iri: Iri,
    pub target_class: Iri,
    pub properties: Vec<PropertyShape>,
    pub and_constraints: Vec<PropertyShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConstraintKind {
    Datatype,
    MinCount,
    MaxCount,
    MinInclusive,
    MaxInclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub focus_node: String,
    pub path: String,
    pub constraint: ConstraintKind,
    pub actual: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub conforms: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Human-readable table, one line per violation.
    pub fn to_table(&self) -> String {
        if self.conforms {
            return "conforms: true\n".to_string();
        }
        let mut out = String::from("conforms: false\n");
        for v in &self.violations {
            out.push_str(&format!(
                "{:?}  focus={}  path={}  actual={}  {}\n",
                v.constraint, v.focus_node, v.path, v.actual, v.message
            ));
        }
        out
    }
}

fn literal_u64(term: &Term) -> Result<u64, ShaclError> {
    match term.as_literal() {
        Some(Literal::Int(i)) if *i >= 0 => Ok(*i as u64),
        _ => Err(ShaclError::Shape(format!(
            "expected a non-negative integer, found {term}"
        ))),
    }
}

fn literal_decimal(term: &Term) -> Result<Decimal, ShaclError> {
    term.as_literal()
        .and_then(|l| l.as_decimal())
        .ok_or_else(|| ShaclError::Shape(format!("expected a numeric literal, found {term}")))
}

fn literal_string(term: &Term) -> Option<String> {
    match term.as_literal() {
        Some(Literal::Str(s)) => Some(s.clone()),
        _ => None,
    }
}

fn parse_property_shape(graph: &Graph, node: &Subject) -> Result<PropertyShape, ShaclError> {
    let path = match graph.object(node, &vocab::sh("path")) {
        Some(Term::Iri(iri)) => iri,
        Some(other) => {
            return Err(ShaclError::Shape(format!(
                "sh:path must be an IRI, found {other}"
            )))
        }
        None => {
            return Err(ShaclError::Shape(format!(
                "property shape {node} lacks sh:path"
            )))
        }
    };
    let datatype = match graph.object(node, &vocab::sh("datatype")) {
        Some(Term::Iri(iri)) => Some(Datatype::from_iri(&iri).ok_or_else(|| {
            ShaclError::Shape(format!("unsupported sh:datatype {}", iri.as_str()))
        })?),
        Some(other) => {
            return Err(ShaclError::Shape(format!(
                "sh:datatype must be an IRI, found {other}"
            )))
        }
        None => None,
    };
    let min_count = graph
        .object(node, &vocab::sh("minCount"))
        .map(|t| literal_u64(&t))
        .transpose()?;
    let max_count = graph
        .object(node, &vocab::sh("maxCount"))
        .map(|t| literal_u64(&t))
        .transpose()?;
    let min_inclusive = graph
        .object(node, &vocab::sh("minInclusive"))
        .map(|t| literal_decimal(&t))
        .transpose()?;
    let max_inclusive = graph
        .object(node, &vocab::sh("maxInclusive"))
        .map(|t| literal_decimal(&t))
        .transpose()?;
    if let (Some(min), Some(max)) = (min_count, max_count) {
        if min > max {
            return Err(ShaclError::Shape(format!(
                "sh:minCount {min} exceeds sh:maxCount {max} for path {}",
                path.as_str()
            )));
        }
    }
    if let (Some(min), Some(max)) = (min_inclusive, max_inclusive) {
        if min > max {
            return Err(ShaclError::Shape(format!(
                "sh:minInclusive {min} exceeds sh:maxInclusive {max} for path {}",
                path.as_str()
            )));
        }
    }
    Ok(PropertyShape {
        path,
        datatype,
        min_count,
        max_count,
        min_inclusive,
        max_inclusive,
        name: graph
            .object(node, &vocab::sh("name"))
            .and_then(|t| literal_string(&t)),
        description: graph
            .object(node, &vocab::sh("description"))
            .and_then(|t| literal_string(&t)),
    })
}

fn collection_members(graph: &Graph, head: &Term) -> Result<Vec<Term>, ShaclError> {
    let mut members = Vec::new();
    let mut cursor = head.clone();
    let mut seen = BTreeSet::new();
    loop {
        if cursor == Term::Iri(vocab::rdf_nil()) {
            return Ok(members);
        }
        if !seen.insert(cursor.clone()) {
            return Err(ShaclError::Shape("cyclic RDF collection".into()));
        }
        let cell = cursor
            .as_subject()
            .ok_or_else(|| ShaclError::Shape(format!("malformed collection cell {cursor}")))?;
        let first = graph.object(&cell, &vocab::rdf_first()).ok_or_else(|| {
            ShaclError::Shape(format!("collection cell {cursor} lacks rdf:first"))
        })?;
        members.push(first);
        cursor = graph.object(&cell, &vocab::rdf_rest()).ok_or_else(|| {
            ShaclError::Shape(format!("collection cell {cursor} lacks rdf:rest"))
        })?;
    }
}

/// Extracts every sh:NodeShape from a shapes graph, in shape-IRI order.
pub fn parse_shapes(shapes_graph: &Graph) -> Result<Vec<NodeShape>, ShaclError> {
    let mut shapes = Vec::new();
    for subject in shapes_graph.instances_of(&vocab::sh("NodeShape")) {
        let shape_iri = match &subject {
            Subject::Iri(iri) => iri.clone(),
            Subject::Blank(_) => {
                return Err(ShaclError::Shape(
                    "blank node shapes are not supported; name the shape with an IRI".into(),
                ))
            }
        };
        let target_class = match shapes_graph.object(&subject, &vocab::sh("targetClass")) {
            Some(Term::Iri(iri)) => iri,
            _ => {
                return Err(ShaclError::Shape(format!(
                    "shape {} lacks a single sh:targetClass IRI",
                    shape_iri.as_str()
                )))
            }
        };
        let mut properties = Vec::new();
        for prop in shapes_graph.objects(&subject, &vocab::sh("property")) {
            let node = prop.as_subject().ok_or_else(|| {
                ShaclError::Shape(format!("sh:property value {prop} is not a node"))
            })?;
            properties.push(parse_property_shape(shapes_graph, &node)?);
        }
        let mut and_constraints = Vec::new();
        for head in shapes_graph.objects(&subject, &vocab::sh("and")) {
            for member in collection_members(shapes_graph, &head)? {
                let node = member.as_subject().ok_or_else(|| {
                    ShaclError::Shape(format!("sh:and member {member} is not a node"))
                })?;
                and_constraints.push(parse_property_shape(shapes_graph, &node)?);
            }
        }
        shapes.push(NodeShape {
            shape_iri,
            target_class,
            properties,
            and_constraints,
        });
    }
    shapes.sort_by(|a, b| a.shape_iri.cmp(&b.shape_iri));
    Ok(shapes)
}

/// All classes whose rdfs:subClassOf closure reaches `class`, including the
/// class itself. Fails on a cyclic hierarchy.
fn subclass_closure(hierarchy: &Graph, class: &Iri) -> Result<BTreeSet<Iri>, ShaclError> {
    // build the sub→super edge map once, then walk downwards
    let sub_of = vocab::rdfs_subclass_of();
    let mut children: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for t in hierarchy.matching(None, Some(&sub_of), None) {
        if let (Subject::Iri(sub), Some(sup)) = (&t.subject, t.object.as_iri()) {
            children.entry(sup.clone()).or_default().push(sub.clone());
        }
    }
    // cycle check over the whole hierarchy
    detect_cycles(&children)?;
    let mut closure = BTreeSet::new();
    let mut stack = vec![class.clone()];
    while let Some(c) = stack.pop() {
        if closure.insert(c.clone()) {
            if let Some(subs) = children.get(&c) {
                stack.extend(subs.iter().cloned());
            }
        }
    }
    Ok(closure)
}

fn detect_cycles(children: &BTreeMap<Iri, Vec<Iri>>) -> Result<(), ShaclError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        InProgress,
        Done,
    }
    fn visit(
        node: &Iri,
        children: &BTreeMap<Iri, Vec<Iri>>,
        marks: &mut BTreeMap<Iri, Mark>,
    ) -> Result<(), ShaclError> {
        match marks.get(node) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::InProgress) => {
                return Err(ShaclError::Cycle(node.as_str().to_string()))
            }
            None => {}
        }
        marks.insert(node.clone(), Mark::InProgress);
        for child in children.get(node).into_iter().flatten() {
            visit(child, children, marks)?;
        }
        marks.insert(node.clone(), Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for node in children.keys() {
        visit(node, children, &mut marks)?;
    }
    Ok(())
}

/// Focus nodes of a shape: every node typed with the target class or a
/// transitive subclass of it.
pub fn target_nodes(
    data_graph: &Graph,
    shape: &NodeShape,
    class_hierarchy: &Graph,
) -> Result<Vec<Iri>, ShaclError> {
    let classes = subclass_closure(class_hierarchy, &shape.target_class)?;
    let mut nodes = BTreeSet::new();
    for class in &classes {
        for subject in data_graph.instances_of(class) {
            if let Subject::Iri(iri) = subject {
                nodes.insert(iri);
            }
        }
    }
    Ok(nodes.into_iter().collect())
}

fn describe(prop: &PropertyShape) -> String {
    match (&prop.name, &prop.description) {
        (Some(n), Some(d)) => format!(" ({n}: {d})"),
        (Some(n), None) => format!(" ({n})"),
        (None, Some(d)) => format!(" ({d})"),
        (None, None) => String::new(),
    }
}

fn check_property(
    graph: &Graph,
    focus: &Iri,
    prop: &PropertyShape,
    violations: &mut Vec<Violation>,
) {
    let values = graph.objects(&Subject::Iri(focus.clone()), &prop.path);
    let count = values.len() as u64;
    let suffix = describe(prop);
    if let Some(min) = prop.min_count {
        if count < min {
            violations.push(Violation {
                focus_node: focus.as_str().to_string(),
                path: prop.path.as_str().to_string(),
                constraint: ConstraintKind::MinCount,
                actual: count.to_string(),
                message: format!("expected at least {min} value(s), found {count}{suffix}"),
            });
        }
    }
    if let Some(max) = prop.max_count {
        if count > max {
            violations.push(Violation {
                focus_node: focus.as_str().to_string(),
                path: prop.path.as_str().to_string(),
                constraint: ConstraintKind::MaxCount,
                actual: count.to_string(),
                message: format!("expected at most {max} value(s), found {count}{suffix}"),
            });
        }
    }
    for value in &values {
        if let Some(dt) = prop.datatype {
            let matches = value.as_literal().is_some_and(|l| l.datatype() == dt);
            if !matches {
                violations.push(Violation {
                    focus_node: focus.as_str().to_string(),
                    path: prop.path.as_str().to_string(),
                    constraint: ConstraintKind::Datatype,
                    actual: value.to_string(),
                    message: format!("expected an xsd:{dt} literal{suffix}"),
                });
            }
        }
        if let Some(min) = prop.min_inclusive {
            match value.as_literal().and_then(|l| l.as_decimal()) {
                Some(v) if v >= min => {}
                _ => violations.push(Violation {
                    focus_node: focus.as_str().to_string(),
                    path: prop.path.as_str().to_string(),
                    constraint: ConstraintKind::MinInclusive,
                    actual: value.to_string(),
                    message: format!("value must be >= {min}{suffix}"),
                }),
            }
        }
        if let Some(max) = prop.max_inclusive {
            match value.as_literal().and_then(|l| l.as_decimal()) {
                Some(v) if v <= max => {}
                _ => violations.push(Violation {
                    focus_node: focus.as_str().to_string(),
                    path: prop.path.as_str().to_string(),
                    constraint: ConstraintKind::MaxInclusive,
                    actual: value.to_string(),
                    message: format!("value must be <= {max}{suffix}"),
                }),
            }
        }
    }
}

/// Validates a data graph against shapes under the closed-world assumption.
/// All violations for all nodes are collected; nothing aborts early.
pub fn validate(
    data_graph: &Graph,
    shapes: &[NodeShape],
    class_hierarchy: &Graph,
) -> Result<ValidationReport, ShaclError> {
    let mut violations = Vec::new();
    for shape in shapes {
        for focus in target_nodes(data_graph, shape, class_hierarchy)? {
            for prop in shape.properties.iter().chain(&shape.and_constraints) {
                check_property(data_graph, &focus, prop, &mut violations);
            }
        }
    }
    violations.sort();
    violations.dedup();
    Ok(ValidationReport {
        conforms: violations.is_empty(),
        violations,
    })
}
