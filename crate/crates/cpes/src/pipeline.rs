//! End-to-end scenario pipeline behind a single JSON config.
//!
//! import → validate (power shapes) → derive households → augment → validate
//! (control shapes) → baseline solve → per scenario: attack → solve →
//! compare → aggregated CSV/JSON report. All artifacts are written under the
//! config's output directory; two runs with the same config are
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{self, AttackScenario, Objective};
use crate::augment;
use crate::grid::{self, GridTables};
use crate::ontology;
use crate::powerflow::{self, PowerFlowResult, SolveOptions};
use crate::rdf::{parse_turtle, serialize_turtle, Graph, Iri};
use crate::report::{self, ImpactReport, Limits};
use crate::shacl::{self, NodeShape, ValidationReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("validation failed with {} violation(s)", report.violations.len())]
    Validation { report: ValidationReport },
    #[error("power flow did not converge: {0}")]
    Solver(String),
}

impl PipelineError {
    /// 1 = I/O or parse, 2 = non-conformance, 3 = non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } | PipelineError::Parse(_) => 1,
            PipelineError::Validation { .. } => 2,
            PipelineError::Solver(_) => 3,
        }
    }
}

fn parse_err(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Parse(e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioConfig {
    pub actor: String,
    /// "max" or "min"
    pub objective: String,
    pub label: String,
    #[serde(default)]
    pub manufacturer: Option<String>,
    #[serde(default)]
    pub firmware: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PipelineConfig {
    pub grid_file: PathBuf,
    pub rules_file: PathBuf,
    pub shapes_power: PathBuf,
    pub shapes_cpes: PathBuf,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scenarios: Vec<ScenarioConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub label: String,
    pub converged: bool,
    pub max_abs_delta_mw: f64,
    pub violations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct PipelineSummary {
    pub scenarios: Vec<ScenarioOutcome>,
}

impl PipelineSummary {
    pub fn to_table(&self) -> String {
        let mut s = String::from("scenario          max |Δp| [MW]  violations  status\n");
        for o in &self.scenarios {
            let status = if o.converged {
                "ok".to_string()
            } else {
                format!("failed: {}", o.error.as_deref().unwrap_or("?"))
            };
            s.push_str(&format!(
                "{:<18}{:<15.6}{:<12}{}\n",
                o.label, o.max_abs_delta_mw, o.violations, status
            ));
        }
        if self
            .scenarios
            .iter()
            .all(|o| o.converged && o.violations == 0)
        {
            s.push_str("no problematic grid states in any scenario\n");
        }
        s
    }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, content: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, content).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_shapes(path: &Path) -> Result<(Vec<NodeShape>, Graph), PipelineError> {
    let graph = parse_turtle(&read(path)?).map_err(parse_err)?;
    let shapes = shacl::parse_shapes(&graph).map_err(parse_err)?;
    Ok((shapes, graph))
}

fn sanitize_label(label: &str) -> String {
    let mut out = String::new();
    for c in label.to_lowercase().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

pub fn parse_objective(s: &str) -> Result<Objective, PipelineError> {
    match s {
        "max" => Ok(Objective::MaximizeLoad),
        "min" => Ok(Objective::MinimizeLoad),
        other => Err(PipelineError::Parse(format!(
            "objective must be \"max\" or \"min\", not {other:?}"
        ))),
    }
}

struct ScenarioResult {
    outcome: ScenarioOutcome,
    report: Option<ImpactReport>,
}

fn run_scenario(
    cpes_graph: &Graph,
    baseline: &PowerFlowResult,
    scenario: &ScenarioConfig,
    out_dir: &Path,
) -> Result<ScenarioResult, PipelineError> {
    let slug = sanitize_label(&scenario.label);
    let attack_scenario = AttackScenario {
        compromised_actor: Iri::new(scenario.actor.clone()).map_err(parse_err)?,
        objective: parse_objective(&scenario.objective)?,
        label: scenario.label.clone(),
        manufacturer: scenario.manufacturer.clone(),
        firmware: scenario.firmware.clone(),
    };
    let (attacked_graph, targets) =
        attack::apply_attack(cpes_graph, &attack_scenario).map_err(parse_err)?;
    write(
        &out_dir.join(format!("{slug}.attacked.ttl")),
        &serialize_turtle(&attacked_graph),
    )?;
    let targets_json = serde_json::Value::Array(
        targets
            .iter()
            .map(|t| {
                serde_json::json!({
                    "control_value": t.control_value.as_str(),
                    "unit": t.unit.as_str(),
                    "min_p_mw": t.min_p_mw.to_string(),
                    "max_p_mw": t.max_p_mw.to_string(),
                    "current_p_mw": t.current_p_mw.to_string(),
                })
            })
            .collect(),
    );
    write(
        &out_dir.join(format!("{slug}.targets.json")),
        &format!("{}\n", serde_json::to_string_pretty(&targets_json).unwrap()),
    )?;

    let attacked_tables = grid::export_grid(&attacked_graph).map_err(parse_err)?;
    let solved = match powerflow::solve(&attacked_tables, SolveOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            return Ok(ScenarioResult {
                outcome: ScenarioOutcome {
                    label: scenario.label.clone(),
                    converged: false,
                    max_abs_delta_mw: 0.0,
                    violations: 0,
                    error: Some(e.to_string()),
                },
                report: None,
            })
        }
    };
    write(&out_dir.join(format!("{slug}.result.json")), &solved.to_json())?;
    let impact = report::compare(baseline, &solved, &scenario.label).map_err(parse_err)?;
    let violations = report::check_limits(&solved, &Limits::default());
    Ok(ScenarioResult {
        outcome: ScenarioOutcome {
            label: scenario.label.clone(),
            converged: true,
            max_abs_delta_mw: impact.max_abs_delta_mw,
            violations: violations.len(),
            error: None,
        },
        report: Some(impact),
    })
}

/// Loads and runs the full pipeline. `jobs` bounds scenario concurrency.
pub fn run_pipeline(
    config_path: &Path,
    jobs: Option<usize>,
) -> Result<PipelineSummary, PipelineError> {
    let config: PipelineConfig =
        serde_json::from_str(&read(config_path)?).map_err(parse_err)?;
    {
        let mut labels: Vec<&str> = config.scenarios.iter().map(|s| s.label.as_str()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != config.scenarios.len() {
            return Err(PipelineError::Parse("scenario labels must be unique".into()));
        }
    }
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| base_dir.join(p);
    let out_dir = resolve(&config.output_dir);

    // import + power-shape validation
    let tables = GridTables::from_json(&read(&resolve(&config.grid_file))?).map_err(parse_err)?;
    let model_graph = grid::import_grid(&tables).map_err(parse_err)?;
    let (power_shapes, power_shape_graph) = load_shapes(&resolve(&config.shapes_power))?;
    let power_report =
        shacl::validate(&model_graph, &power_shapes, &power_shape_graph).map_err(parse_err)?;
    write(
        &out_dir.join("validation.power.json"),
        &format!("{}\n", serde_json::to_string_pretty(&power_report).unwrap()),
    )?;
    if !power_report.conforms {
        return Err(PipelineError::Validation {
            report: power_report,
        });
    }
    write(&out_dir.join("model.ttl"), &serialize_turtle(&model_graph))?;

    // augmentation + control-shape validation
    let mut cpes_graph = model_graph.clone();
    ontology::derive_households(&mut cpes_graph);
    let rules_graph = parse_turtle(&read(&resolve(&config.rules_file))?).map_err(parse_err)?;
    let rules = augment::parse_rules(&rules_graph).map_err(parse_err)?;
    let (cpes_graph, logs) =
        augment::apply_all(&cpes_graph, &rules, config.seed).map_err(parse_err)?;
    let (cpes_shapes, cpes_shape_graph) = load_shapes(&resolve(&config.shapes_cpes))?;
    let mut hierarchy = power_shape_graph.clone();
    for t in cpes_shape_graph.iter() {
        hierarchy.insert(t.clone());
    }
    let cpes_report =
        shacl::validate(&cpes_graph, &cpes_shapes, &hierarchy).map_err(parse_err)?;
    write(
        &out_dir.join("validation.cpes.json"),
        &format!("{}\n", serde_json::to_string_pretty(&cpes_report).unwrap()),
    )?;
    if !cpes_report.conforms {
        return Err(PipelineError::Validation {
            report: cpes_report,
        });
    }
    write(&out_dir.join("cpes.ttl"), &serialize_turtle(&cpes_graph))?;
    let log_json = serde_json::Value::Array(logs.iter().map(|l| l.to_json()).collect());
    write(
        &out_dir.join("log.json"),
        &format!("{}\n", serde_json::to_string_pretty(&log_json).unwrap()),
    )?;

    // baseline
    let baseline_tables = grid::export_grid(&cpes_graph).map_err(parse_err)?;
    let baseline = powerflow::solve(&baseline_tables, SolveOptions::default())
        .map_err(|e| PipelineError::Solver(e.to_string()))?;
    write(&out_dir.join("baseline.result.json"), &baseline.to_json())?;

    // scenarios, concurrently but with deterministic collection order
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(parse_err)?;
    let results: Vec<Result<ScenarioResult, PipelineError>> = pool.install(|| {
        use rayon::prelude::*;
        config
            .scenarios
            .par_iter()
            .map(|s| run_scenario(&cpes_graph, &baseline, s, &out_dir))
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut reports = Vec::new();
    for r in results {
        let r = r?;
        outcomes.push(r.outcome);
        if let Some(rep) = r.report {
            reports.push(rep);
        }
    }
    write(&out_dir.join("report.csv"), &report::to_csv(&reports))?;
    write(
        &out_dir.join("report.json"),
        &format!("{}\n", serde_json::to_string_pretty(&reports).unwrap()),
    )?;
    let summary = PipelineSummary { scenarios: outcomes };
    write(
        &out_dir.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
    )?;
    if let Some(failed) = summary.scenarios.iter().find(|o| !o.converged) {
        return Err(PipelineError::Solver(format!(
            "scenario {} did not converge (others completed; see {})",
            failed.label,
            out_dir.display()
        )));
    }
    Ok(summary)
}

/// Shared by the `augment` subcommand: households + rules + seed, no shapes.
pub fn augment_graph(
    model_graph: &Graph,
    rules_graph: &Graph,
    seed: u64,
) -> Result<(Graph, Vec<augment::AppliedLog>), PipelineError> {
    let mut g = model_graph.clone();
    ontology::derive_households(&mut g);
    let rules = augment::parse_rules(rules_graph).map_err(parse_err)?;
    augment::apply_all(&g, &rules, seed).map_err(parse_err)
}

/// Decimal-preserving helper used by CLI target dumps.
pub fn decimal_str(d: Decimal) -> String {
    d.normalize().to_string()
}
