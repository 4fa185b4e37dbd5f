//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Tolerances are pinned here, not imported from the library, so a library
//! regression cannot silently relax a bound.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use cpes::attack::{self, AttackScenario, Objective};
use cpes::augment;
use cpes::grid::{self, GridTables};
use cpes::ontology;
use cpes::powerflow::{self, PowerFlowError, SolveOptions};
use cpes::query::{
    evaluate, BindingSet, CompareOp, Filter, FilterOperand, PatternTerm, SelectQuery,
    TriplePattern, Variable,
};
use cpes::rdf::{parse_turtle, serialize_turtle, Graph, Iri, Literal, Subject, Term, Triple};
use cpes::shacl;
use cpes::vocab::{self, errol};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn d(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

// ---------------------------------------------------------------------------
// criterion 1: static-generator shape conformance
// ---------------------------------------------------------------------------

const STATIC_GENERATOR_SHAPE: &str = r#"
errol:StaticGenerator
  rdf:type rdfs:Class ;
  rdf:type sh:NodeShape ;
  rdfs:label "Static generator" ;
  rdfs:subClassOf errol:GenerationConsumption ;
  sh:and (
      [
        sh:path errol:p_mw ;
        sh:maxInclusive "0"^^xsd:decimal ;
      ]
    ) ;
  sh:property [
      rdf:type sh:PropertyShape ;
      sh:path errol:q_mvar ;
      sh:datatype xsd:decimal ;
      sh:description "reactive power" ;
      sh:maxCount 1 ;
      sh:minCount 1 ;
      sh:name "q mvar" ;
    ] ;
  sh:property [
      rdf:type sh:PropertyShape ;
      sh:path errol:type ;
      sh:datatype xsd:string ;
      sh:description "sgen type" ;
      sh:maxCount 1 ;
      sh:name "type" ;
    ] ;
  sh:targetClass errol:StaticGenerator ;
"#;

#[test]
fn criterion_1_static_generator_shape_conformance() {
    let start = std::time::Instant::now();
    let shape_graph = parse_turtle(STATIC_GENERATOR_SHAPE).expect("shape text parses");
    let shapes = shacl::parse_shapes(&shape_graph).unwrap();

    let sgen = |p_mw: &str, q_mvar: Option<&str>| {
        let mut g = Graph::new();
        let node = errol("sgen/1");
        g.insert(Triple::new(
            node.clone(),
            vocab::rdf_type(),
            errol("StaticGenerator"),
        ));
        g.insert(Triple::new(
            node.clone(),
            errol("p_mw"),
            Literal::Dec(d(p_mw)),
        ));
        if let Some(q) = q_mvar {
            g.insert(Triple::new(node.clone(), errol("q_mvar"), Literal::Dec(d(q))));
        }
        g
    };

    let positive = shacl::validate(&sgen("0.5", Some("0.1")), &shapes, &shape_graph).unwrap();
    assert_eq!(positive.violations.len(), 1, "exactly one violation expected");
    assert!(format!("{:?}", positive.violations[0].constraint).contains("MaxInclusive"));

    let fine = shacl::validate(&sgen("-0.5", Some("0.1")), &shapes, &shape_graph).unwrap();
    assert!(fine.conforms);

    let missing_q = shacl::validate(&sgen("-0.5", None), &shapes, &shape_graph).unwrap();
    assert_eq!(missing_q.violations.len(), 1);
    assert!(format!("{:?}", missing_q.violations[0].constraint).contains("MinCount"));

    assert!(start.elapsed().as_secs() < 1);
    println!("criterion 1 (static-generator shape conformance): PASS");
}

// ---------------------------------------------------------------------------
// criterion 2: query engine vs exhaustive-assignment oracle
// ---------------------------------------------------------------------------

/// Independent evaluator: assigns every pattern to every triple by depth-first
/// search with consistency checks, no indexes, then filters and projects.
fn oracle_evaluate(graph: &Graph, query: &SelectQuery) -> BTreeSet<BindingSet> {
    let triples: Vec<&Triple> = graph.iter().collect();

    fn unify(pattern: &PatternTerm, actual: Term, binding: &mut BindingSet) -> bool {
        match pattern {
            PatternTerm::Var(v) => match binding.get(v) {
                Some(existing) => *existing == actual,
                None => {
                    binding.insert(v.clone(), actual);
                    true
                }
            },
            PatternTerm::Iri(i) => actual == Term::Iri(i.clone()),
            PatternTerm::Literal(l) => actual == Term::Literal(l.clone()),
        }
    }

    fn oracle_compare(left: &Term, op: CompareOp, right: &Term) -> bool {
        use std::cmp::Ordering;
        let ord = match (left, right) {
            (Term::Literal(Literal::Str(a)), Term::Literal(Literal::Str(b))) => a.cmp(b),
            (Term::Literal(Literal::Bool(a)), Term::Literal(Literal::Bool(b))) => a.cmp(b),
            (Term::Literal(a), Term::Literal(b)) => {
                match (a.as_decimal(), b.as_decimal()) {
                    (Some(x), Some(y)) => x.cmp(&y),
                    _ => return false, // type error drops the candidate
                }
            }
            (Term::Iri(a), Term::Iri(b)) if matches!(op, CompareOp::Eq | CompareOp::Ne) => {
                a.cmp(b)
            }
            _ => return false,
        };
        match op {
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Ge => ord != Ordering::Less,
        }
    }

    fn dfs(
        patterns: &[TriplePattern],
        triples: &[&Triple],
        binding: BindingSet,
        query: &SelectQuery,
        out: &mut BTreeSet<BindingSet>,
    ) {
        let Some(pattern) = patterns.first() else {
            for f in &query.filters {
                let Some(left) = binding.get(&f.left) else {
                    return;
                };
                let right = match &f.right {
                    FilterOperand::Var(v) => match binding.get(v) {
                        Some(t) => t.clone(),
                        None => return,
                    },
                    FilterOperand::Iri(i) => Term::Iri(i.clone()),
                    FilterOperand::Literal(l) => Term::Literal(l.clone()),
                };
                if !oracle_compare(left, f.op, &right) {
                    return;
                }
            }
            out.insert(
                query
                    .projected
                    .iter()
                    .map(|v| (v.clone(), binding[v].clone()))
                    .collect(),
            );
            return;
        };
        for t in triples {
            let mut next = binding.clone();
            if unify(&pattern.subject, Term::from(t.subject.clone()), &mut next)
                && unify(&pattern.predicate, Term::Iri(t.predicate.clone()), &mut next)
                && unify(&pattern.object, t.object.clone(), &mut next)
            {
                dfs(&patterns[1..], triples, next, query, out);
            }
        }
    }

    let mut out = BTreeSet::new();
    dfs(&query.patterns, &triples, BTreeMap::new(), query, &mut out);
    out
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::new();
    let n = rng.gen_range(5..=50);
    for _ in 0..n {
        let s = iri(&format!("http://x/s{}", rng.gen_range(0..8)));
        let p = iri(&format!("http://x/p{}", rng.gen_range(0..4)));
        let o: Term = if rng.gen_bool(0.5) {
            Term::Iri(iri(&format!("http://x/s{}", rng.gen_range(0..8))))
        } else {
            Term::Literal(Literal::Int(rng.gen_range(-5..5)))
        };
        g.insert(Triple::new(s, p, o));
    }
    g
}

fn random_query(rng: &mut ChaCha8Rng) -> SelectQuery {
    let n_patterns = rng.gen_range(1..=4);
    let mut patterns: Vec<TriplePattern> = Vec::new();
    let mut used: Vec<Variable> = Vec::new();
    fn slot(
        rng: &mut ChaCha8Rng,
        used: &mut Vec<Variable>,
        allow_literal: bool,
    ) -> PatternTerm {
        let var_names = ["a", "b", "c", "d", "e", "f"];
        match rng.gen_range(0..4) {
                0 if !used.is_empty() => {
                    PatternTerm::Var(used[rng.gen_range(0..used.len())].clone())
                }
                0 | 1 => {
                    let v = Variable::new(var_names[rng.gen_range(0..var_names.len())]).unwrap();
                    if !used.contains(&v) {
                        used.push(v.clone());
                    }
                    PatternTerm::Var(v)
                }
                2 if allow_literal => PatternTerm::Literal(Literal::Int(rng.gen_range(-5..5))),
                _ => PatternTerm::Iri(iri(&format!("http://x/s{}", rng.gen_range(0..8)))),
        }
    }
    for i in 0..n_patterns {
        let subject = if i > 0 && !used.is_empty() {
            // chain on an existing variable to keep the search space bounded
            PatternTerm::Var(used[rng.gen_range(0..used.len())].clone())
        } else {
            slot(rng, &mut used, false)
        };
        let predicate = if rng.gen_bool(0.7) {
            PatternTerm::Iri(iri(&format!("http://x/p{}", rng.gen_range(0..4))))
        } else {
            slot(rng, &mut used, false)
        };
        let object = slot(rng, &mut used, true);
        patterns.push(TriplePattern {
            subject,
            predicate,
            object,
        });
    }
    let mut filters = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        if used.is_empty() {
            break;
        }
        let left = used[rng.gen_range(0..used.len())].clone();
        let op = [
            CompareOp::Eq,
            CompareOp::Ne,
            CompareOp::Lt,
            CompareOp::Le,
            CompareOp::Gt,
            CompareOp::Ge,
        ][rng.gen_range(0..6)];
        let right = if rng.gen_bool(0.5) && used.len() > 1 {
            FilterOperand::Var(used[rng.gen_range(0..used.len())].clone())
        } else {
            FilterOperand::Literal(Literal::Int(rng.gen_range(-5..5)))
        };
        filters.push(Filter { left, op, right });
    }
    SelectQuery {
        projected: used,
        patterns,
        filters,
    }
}

#[test]
fn criterion_2_query_engine_matches_oracle() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let g = random_graph(&mut rng);
        let q = random_query(&mut rng);
        let got: BTreeSet<BindingSet> = evaluate(&g, &q).into_iter().collect();
        let expected = oracle_evaluate(&g, &q);
        assert_eq!(got, expected, "case {case} diverged: {q:?}");
    }
    assert!(start.elapsed().as_secs() < 10);
    println!("criterion 2 (query engine vs exhaustive oracle, 100 cases): PASS");
}

// ---------------------------------------------------------------------------
// criterion 3: round-trips
// ---------------------------------------------------------------------------

fn random_tables(rng: &mut ChaCha8Rng) -> GridTables {
    let n_bus = rng.gen_range(2..10u64);
    let mut t = GridTables::default();
    for i in 0..n_bus {
        t.bus.push(grid::BusRecord {
            id: i,
            name: format!("bus-{i}"),
            vn_kv: d(if i == 0 { "20" } else { "0.4" }),
        });
    }
    // random tree over the buses keeps references valid
    for i in 1..n_bus {
        let parent = rng.gen_range(0..i);
        t.line.push(grid::LineRecord {
            id: i - 1,
            from_bus: parent,
            to_bus: i,
            r_ohm_per_km: Decimal::new(rng.gen_range(1..500), 3),
            x_ohm_per_km: Decimal::new(rng.gen_range(1..200), 3),
            length_km: Decimal::new(rng.gen_range(1..300), 2),
            max_i_ka: Decimal::new(rng.gen_range(10..100), 2),
        });
    }
    for i in 0..rng.gen_range(0..6u64) {
        t.load.push(grid::LoadRecord {
            id: i,
            bus: rng.gen_range(0..n_bus),
            p_mw: Decimal::new(rng.gen_range(0..100), 3),
            q_mvar: Decimal::new(rng.gen_range(0..30), 3),
            load_type: [
                grid::LoadType::Household,
                grid::LoadType::Commercial,
                grid::LoadType::Heatpump,
                grid::LoadType::Ev,
            ][rng.gen_range(0..4)],
            controllable: false,
            max_p_mw: None,
            min_p_mw: None,
        });
    }
    for i in 0..rng.gen_range(0..4u64) {
        let p = -Decimal::new(rng.gen_range(0..50), 3);
        t.sgen.push(grid::SgenRecord {
            id: i,
            bus: rng.gen_range(0..n_bus),
            p_mw: p,
            q_mvar: Decimal::ZERO,
            sgen_type: "pv".into(),
            controllable: rng.gen_bool(0.5),
            max_p_mw: Some(Decimal::ZERO),
            min_p_mw: Some(p - Decimal::new(1, 3)),
        });
    }
    t.ext_grid.push(grid::ExtGridRecord {
        id: 0,
        bus: 0,
        vm_pu: d("1.0"),
        va_deg: d("0"),
    });
    t.normalize();
    t
}

fn random_turtle_graph(rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::new();
    for i in 0..rng.gen_range(1..40) {
        let s = iri(&format!("http://t/s{}", rng.gen_range(0..10)));
        let p = iri(&format!("http://t/p{}", rng.gen_range(0..5)));
        let o: Term = match rng.gen_range(0..5) {
            0 => Term::Iri(iri(&format!("http://t/o{}", rng.gen_range(0..10)))),
            1 => Term::Literal(Literal::Int(rng.gen_range(-100..100))),
            2 => Term::Literal(Literal::Dec(Decimal::new(rng.gen_range(-999..999), 2))),
            3 => Term::Literal(Literal::Bool(rng.gen_bool(0.5))),
            _ => Term::Literal(Literal::string(format!("text {i}"))),
        };
        g.insert(Triple::new(s, p, o));
    }
    // a few blank nodes, each with a unique tag so isomorphism is checkable
    for k in 0..rng.gen_range(0..4u32) {
        let b = g.fresh_blank();
        g.insert(Triple::new(b, iri("http://t/tag"), Literal::string(format!("blank-{k}"))));
        g.insert(Triple::new(
            iri(&format!("http://t/s{}", rng.gen_range(0..10))),
            iri("http://t/ref"),
            b,
        ));
    }
    g
}

/// Rewrites blank node ids through the bijection induced by their unique
/// `http://t/tag` literal.
fn canonical_triples(g: &Graph) -> BTreeSet<Triple> {
    let mut tag_of: BTreeMap<u64, String> = BTreeMap::new();
    for t in g.iter() {
        if t.predicate == iri("http://t/tag") {
            if let (Subject::Blank(b), Term::Literal(Literal::Str(s))) = (&t.subject, &t.object) {
                tag_of.insert(b.0, s.clone());
            }
        }
    }
    let rename = |id: u64| -> Iri {
        iri(&format!("urn:blank:{}", tag_of.get(&id).expect("tagged blank")))
    };
    g.iter()
        .map(|t| {
            let subject = match &t.subject {
                Subject::Blank(b) => Subject::Iri(rename(b.0)),
                s => s.clone(),
            };
            let object = match &t.object {
                Term::Blank(b) => Term::Iri(rename(b.0)),
                o => o.clone(),
            };
            Triple::new(subject, t.predicate.clone(), object)
        })
        .collect()
}

#[test]
fn criterion_3_round_trips() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..50 {
        let t = random_tables(&mut rng);
        let g = grid::import_grid(&t).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let back = grid::export_grid(&g).unwrap();
        assert_eq!(t, back, "grid round-trip case {case}");
        let reparsed = GridTables::from_json(&t.to_json()).unwrap();
        assert_eq!(t, reparsed, "grid JSON round-trip case {case}");
    }
    for case in 0..100 {
        let g = random_turtle_graph(&mut rng);
        let text = serialize_turtle(&g);
        let back = parse_turtle(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        assert_eq!(
            canonical_triples(&g),
            canonical_triples(&back),
            "turtle round-trip case {case}"
        );
    }
    assert!(start.elapsed().as_secs() < 10);
    println!("criterion 3 (grid and Turtle round-trips): PASS");
}

// ---------------------------------------------------------------------------
// criterion 4: augmentation template distribution
// ---------------------------------------------------------------------------

/// 1000 households, each owning one controllable unit.
fn thousand_households() -> Graph {
    let mut g = Graph::new();
    for i in 0..1000 {
        let hh = errol(&format!("household/bus{i:04}"));
        let unit = errol(&format!("load/{i:04}"));
        g.insert(Triple::new(hh.clone(), vocab::rdf_type(), errol("HouseHold")));
        g.insert(Triple::new(hh.clone(), errol("pccBus"), errol(&format!("bus/{i:04}"))));
        g.insert(Triple::new(hh, errol("owns"), unit.clone()));
        g.insert(Triple::new(unit.clone(), errol("controllable"), Literal::Bool(true)));
        g.insert(Triple::new(unit.clone(), errol("p_mw"), Literal::Dec(d("0.002"))));
        g.insert(Triple::new(unit.clone(), errol("min_p_mw"), Literal::Dec(d("0"))));
        g.insert(Triple::new(unit, errol("max_p_mw"), Literal::Dec(d("0.005"))));
    }
    g
}

fn demo_rules() -> Vec<augment::AugmentationRule> {
    let text = std::fs::read_to_string(repo_root().join("fixtures/demo/rules.ttl")).unwrap();
    augment::parse_rules(&parse_turtle(&text).unwrap()).unwrap()
}

fn template_counts(logs: &[augment::AppliedLog]) -> (usize, usize, usize) {
    let count = |name: &str| {
        logs.iter()
            .flat_map(|l| &l.entries)
            .filter(|e| e.template.as_deref() == Some(name))
            .count()
    };
    (count("hems-m1"), count("hems-m2"), count("hems-m3"))
}

#[test]
fn criterion_4_augmentation_distribution() {
    let start = std::time::Instant::now();
    let g = thousand_households();
    let rules = demo_rules();

    // pinned-seed golden counts (seed 42)
    let (_, logs) = augment::apply_all(&g, &rules, 42).unwrap();
    let counts = template_counts(&logs);
    assert_eq!(counts, (525, 293, 182), "golden counts for seed 42");

    // statistical bound over 20 seeds: 4σ binomial around (500, 300, 200)
    for seed in 0..20 {
        let (_, logs) = augment::apply_all(&g, &rules, seed).unwrap();
        let (m1, m2, m3) = template_counts(&logs);
        assert_eq!(m1 + m2 + m3, 1000, "p=1 rule must fire for every household");
        for (count, p) in [(m1, 0.5f64), (m2, 0.3), (m3, 0.2)] {
            let sigma = (1000.0 * p * (1.0 - p)).sqrt();
            assert!(
                (count as f64 - 1000.0 * p).abs() <= 4.0 * sigma,
                "seed {seed}: count {count} outside 4σ of {}",
                1000.0 * p
            );
        }
    }
    assert!(start.elapsed().as_secs() < 30);
    println!("criterion 4 (augmentation 50/30/20 distribution): PASS");
}

// ---------------------------------------------------------------------------
// criteria 5 & 9: pipeline determinism and the healthy-grid finding
// ---------------------------------------------------------------------------

fn write_pipeline_config(dir: &Path, out_name: &str) -> PathBuf {
    let root = repo_root();
    let config = serde_json::json!({
        "grid_file": root.join("fixtures/demo/grid.json"),
        "rules_file": root.join("fixtures/demo/rules.ttl"),
        "shapes_power": root.join("assets/shapes/power.ttl"),
        "shapes_cpes": root.join("assets/shapes/cpes.ttl"),
        "seed": 42,
        "output_dir": dir.join(out_name),
        "scenarios": [
            { "actor": "https://w3id.org/errol#backend/m1", "objective": "max", "label": "Max. 1" },
            { "actor": "https://w3id.org/errol#backend/m2", "objective": "max", "label": "Max. 2" },
            { "actor": "https://w3id.org/errol#backend/m3", "objective": "max", "label": "Max. 3" },
            { "actor": "https://w3id.org/errol#backend/m1", "objective": "min", "label": "Min. 1" },
            { "actor": "https://w3id.org/errol#backend/m2", "objective": "min", "label": "Min. 2" },
            { "actor": "https://w3id.org/errol#backend/m3", "objective": "min", "label": "Min. 3" }
        ]
    });
    let path = dir.join(format!("{out_name}.config.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn criterion_5_pipeline_determinism() {
    let start = std::time::Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let summaries: Vec<_> = ["run1", "run2"]
        .iter()
        .map(|name| {
            let config = write_pipeline_config(tmp.path(), name);
            cpes::pipeline::run_pipeline(&config, Some(2)).unwrap()
        })
        .collect();
    assert_eq!(summaries[0].scenarios.len(), 6);

    let mut compared = 0;
    for entry in std::fs::read_dir(tmp.path().join("run1")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_owned();
        let a = std::fs::read(&path).unwrap();
        let b = std::fs::read(tmp.path().join("run2").join(name)).unwrap();
        assert_eq!(a, b, "artifact {path:?} differs between runs");
        compared += 1;
    }
    assert!(compared >= 20, "expected the full artifact set, saw {compared}");
    assert!(start.elapsed().as_secs() < 60);
    println!("criterion 5 (byte-identical pipeline artifacts): PASS");
}

#[test]
fn criterion_9_healthy_grid_finding() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_pipeline_config(tmp.path(), "healthy");
    let summary = cpes::pipeline::run_pipeline(&config, None).unwrap();
    assert_eq!(summary.scenarios.len(), 6);
    for s in &summary.scenarios {
        assert!(s.converged, "{} failed to converge", s.label);
        assert_eq!(s.violations, 0, "{} produced limit violations", s.label);
    }
    println!("criterion 9 (all six scenarios leave the grid healthy): PASS");
}

// ---------------------------------------------------------------------------
// criterion 6: attack reach
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_attack_reach() {
    // part 1: fixture with 3 backends; enumerate == brute force per actor
    let mut text = String::new();
    for (hh, manu) in [("a", "m1"), ("b", "m1"), ("c", "m2"), ("d", "m3")] {
        text.push_str(&format!(
            r#"
            errol:load/{hh} errol:p_mw 0.004 ; errol:min_p_mw 0.0 ; errol:max_p_mw 0.01 .
            errol:block/{hh} a errol:FunctionBlock .
            errol:cv/{hh} a errol:ControlValue ; errol:referencesUnit errol:load/{hh} .
            errol:flow/{hh} a errol:InformationObjectFlow ;
                errol:from errol:backend-block/{manu} ;
                errol:to errol:block/{hh} ;
                errol:transmits errol:cv/{hh} .
            "#
        ));
    }
    for manu in ["m1", "m2", "m3"] {
        text.push_str(&format!(
            "errol:backend/{manu} a errol:FunctionalActor ; errol:hasFunctionBlock errol:backend-block/{manu} .\n"
        ));
    }
    let g = parse_turtle(&text).unwrap();
    for (manu, expected) in [("m1", 2usize), ("m2", 1), ("m3", 1)] {
        let targets =
            attack::enumerate_controllables(&g, &errol(&format!("backend/{manu}")), None, None)
                .unwrap();
        // brute force: fixpoint over raw triples
        let actor = Subject::Iri(errol(&format!("backend/{manu}")));
        let mut blocks: BTreeSet<Term> = g
            .objects(&actor, &errol("hasFunctionBlock"))
            .into_iter()
            .collect();
        loop {
            let before = blocks.len();
            for t in g.iter() {
                if t.predicate == errol("from") && blocks.contains(&t.object) {
                    if let Some(to) = g.object(&t.subject, &errol("to")) {
                        blocks.insert(to);
                    }
                }
            }
            if blocks.len() == before {
                break;
            }
        }
        let mut brute: BTreeSet<Iri> = BTreeSet::new();
        for t in g.iter() {
            if t.predicate == errol("from") && blocks.contains(&t.object) {
                for cv in g.objects(&t.subject, &errol("transmits")) {
                    if let Some(cv_s) = cv.as_subject() {
                        if let Some(Term::Iri(u)) = g.object(&cv_s, &errol("referencesUnit")) {
                            brute.insert(u);
                        }
                    }
                }
            }
        }
        let fast: BTreeSet<Iri> = targets.iter().map(|t| t.unit.clone()).collect();
        assert_eq!(fast, brute, "reachability mismatch for {manu}");
        assert_eq!(fast.len(), expected);
    }

    // part 2: manufacturer 1 (weight 0.5) reaches the most units for >= 18/20 seeds
    let households = thousand_households();
    let rules = demo_rules();
    let mut m1_wins = 0;
    for seed in 0..20 {
        let (augmented, _) = augment::apply_all(&households, &rules, seed).unwrap();
        let reach = |manu: &str| {
            attack::enumerate_controllables(
                &augmented,
                &errol(&format!("backend/{manu}")),
                None,
                None,
            )
            .unwrap()
            .len()
        };
        if reach("m1") > reach("m2") && reach("m1") > reach("m3") {
            m1_wins += 1;
        }
    }
    assert!(m1_wins >= 18, "manufacturer 1 won only {m1_wins}/20 seeds");
    println!("criterion 6 (attack reach vs brute force; manufacturer-1 dominance {m1_wins}/20): PASS");
}

// ---------------------------------------------------------------------------
// criterion 7: power-flow correctness
// ---------------------------------------------------------------------------

fn two_bus(p_load_mw: &str) -> GridTables {
    let mut t = GridTables::default();
    t.bus.push(grid::BusRecord {
        id: 0,
        name: "slack".into(),
        vn_kv: d("1"),
    });
    t.bus.push(grid::BusRecord {
        id: 1,
        name: "load".into(),
        vn_kv: d("1"),
    });
    t.line.push(grid::LineRecord {
        id: 0,
        from_bus: 0,
        to_bus: 1,
        r_ohm_per_km: d("0"),
        x_ohm_per_km: d("0.1"),
        length_km: d("1"),
        max_i_ka: d("10"),
    });
    t.load.push(grid::LoadRecord {
        id: 0,
        bus: 1,
        p_mw: d(p_load_mw),
        q_mvar: d("0"),
        load_type: grid::LoadType::Commercial,
        controllable: false,
        max_p_mw: None,
        min_p_mw: None,
    });
    t.ext_grid.push(grid::ExtGridRecord {
        id: 0,
        bus: 0,
        vm_pu: d("1"),
        va_deg: d("0"),
    });
    t.normalize();
    t
}

fn demo_tables() -> GridTables {
    let text = std::fs::read_to_string(repo_root().join("fixtures/demo/grid.json")).unwrap();
    GridTables::from_json(&text).unwrap()
}

#[test]
fn criterion_7_power_flow_correctness() {
    let start = std::time::Instant::now();

    // analytic two-bus oracle: V₂² is a root of V⁴ − V²(V₁² − 2Qx) + x²(P²+Q²)
    let (p, q, x, v1) = (1.0f64, 0.0f64, 0.1f64, 1.0f64);
    let b = v1 * v1 - 2.0 * q * x;
    let v2 = ((b + (b * b - 4.0 * x * x * (p * p + q * q)).sqrt()) / 2.0).sqrt();
    let r = powerflow::solve(&two_bus("1"), SolveOptions::default()).unwrap();
    assert!((r.bus(1).unwrap().vm_pu - v2).abs() < 1e-6, "analytic |V2| mismatch");

    // demo feeder: convergence speed, mismatch certificate, power balance
    let tables = demo_tables();
    let result = powerflow::solve(&tables, SolveOptions::default()).unwrap();
    assert!(result.iterations <= 6, "took {} iterations", result.iterations);
    assert!(result.max_mismatch_pu <= 1e-7);
    let total_consumption: f64 = tables
        .load
        .iter()
        .map(|l| f64::try_from(l.p_mw).unwrap())
        .chain(tables.sgen.iter().map(|s| f64::try_from(s.p_mw).unwrap()))
        .chain(tables.storage.iter().map(|s| f64::try_from(s.p_mw).unwrap()))
        .sum();
    let losses: f64 = result
        .line_results
        .iter()
        .map(|l| l.p_from_mw + l.p_to_mw)
        .chain(result.trafo_results.iter().map(|t| t.p_hv_mw + t.p_lv_mw))
        .sum();
    // slack import equals the flow on the two head lines out of bus 0
    let slack_import: f64 = result.line_results[..2].iter().map(|l| l.p_from_mw).sum();
    assert!(
        (slack_import - total_consumption - losses).abs() <= 1e-7,
        "power balance residual too large"
    );

    // loadability limit exceeded by construction
    assert!(matches!(
        powerflow::solve(&two_bus("30"), SolveOptions::default()),
        Err(PowerFlowError::NonConvergence { .. })
    ));
    assert!(start.elapsed().as_secs() < 5);
    println!("criterion 7 (power-flow analytic oracle, balance, convergence): PASS");
}

// ---------------------------------------------------------------------------
// criterion 8: sign property of the impact
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_impact_sign_property() {
    let tables = demo_tables();
    let mut g = grid::import_grid(&tables).unwrap();
    ontology::derive_households(&mut g);
    let (augmented, _) = augment::apply_all(&g, &demo_rules(), 42).unwrap();

    let solve_graph = |graph: &Graph| {
        let t = grid::export_grid(graph).unwrap();
        powerflow::solve(&t, SolveOptions::default()).unwrap()
    };

    let baseline = solve_graph(&augmented);
    let mut max_delta_with_pv = 0.0f64;
    for manu in ["m1", "m2", "m3"] {
        for objective in [Objective::MaximizeLoad, Objective::MinimizeLoad] {
            let scenario = AttackScenario {
                compromised_actor: errol(&format!("backend/{manu}")),
                objective,
                label: format!("{manu}-{}", objective.as_str()),
                manufacturer: None,
                firmware: None,
            };
            let (attacked, _) = attack::apply_attack(&augmented, &scenario).unwrap();
            let solved = solve_graph(&attacked);
            let impact = cpes::report::compare(&baseline, &solved, &scenario.label).unwrap();
            for delta in &impact.deltas {
                match objective {
                    Objective::MaximizeLoad => assert!(
                        delta.delta_p_mw >= -1e-9,
                        "{}: trafo {} delta {}",
                        scenario.label,
                        delta.trafo_id,
                        delta.delta_p_mw
                    ),
                    Objective::MinimizeLoad => assert!(
                        delta.delta_p_mw <= 1e-9,
                        "{}: trafo {} delta {}",
                        scenario.label,
                        delta.trafo_id,
                        delta.delta_p_mw
                    ),
                }
            }
            if objective == Objective::MaximizeLoad {
                max_delta_with_pv += impact.max_abs_delta_mw;
            }
        }
    }

    // the same maximising attacks with PV neutralised move less power
    let mut no_pv = augmented.clone();
    for sgen in no_pv.instances_of(&errol("StaticGenerator")) {
        for prop in ["p_mw", "min_p_mw"] {
            no_pv.remove_matching(Some(&sgen), Some(&errol(prop)), None);
        }
        if let Subject::Iri(s) = sgen {
            no_pv.insert(Triple::new(s.clone(), errol("p_mw"), Literal::Dec(d("0"))));
            no_pv.insert(Triple::new(s, errol("min_p_mw"), Literal::Dec(d("0"))));
        }
    }
    let baseline_no_pv = solve_graph(&no_pv);
    let mut max_delta_no_pv = 0.0f64;
    for manu in ["m1", "m2", "m3"] {
        let scenario = AttackScenario {
            compromised_actor: errol(&format!("backend/{manu}")),
            objective: Objective::MaximizeLoad,
            label: format!("{manu}-max"),
            manufacturer: None,
            firmware: None,
        };
        let (attacked, _) = attack::apply_attack(&no_pv, &scenario).unwrap();
        let solved = solve_graph(&attacked);
        max_delta_no_pv += cpes::report::compare(&baseline_no_pv, &solved, &scenario.label)
            .unwrap()
            .max_abs_delta_mw;
    }
    assert!(
        max_delta_with_pv > max_delta_no_pv,
        "PV shutdown should dominate the maximising delta ({max_delta_with_pv} vs {max_delta_no_pv})"
    );
    println!("criterion 8 (maximising ≥ 0, minimising ≤ 0, PV dominates): PASS");
}
