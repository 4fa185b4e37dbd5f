use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpes::attack::AttackScenario;
use cpes::grid::{self, GridTables};
use cpes::pipeline::{self, PipelineError};
use cpes::powerflow::{self, PowerFlowResult, SolveOptions};
use cpes::query::parse_select;
use cpes::rdf::{parse_turtle, serialize_turtle, Graph, Iri};
use cpes::report::{self, Limits};
use cpes::shacl;

#[derive(Parser)]
#[command(name = "cpes", version, about = "Knowledge-graph based cyber-attack impact analysis for distribution grids")]
struct Cli {
    /// Seed for probabilistic steps
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Concurrency bound for scenario runs (0 = number of cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert tabular grid JSON into a Turtle knowledge graph
    Import {
        grid: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert a knowledge graph back into tabular grid JSON
    Export {
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Validate a graph against a shape file (closed world)
    Validate {
        model: PathBuf,
        #[arg(long)]
        shapes: PathBuf,
    },
    /// Run a SELECT query against a graph
    Query {
        model: PathBuf,
        #[arg(short, long)]
        query: String,
    },
    /// Derive households and apply augmentation rules
    Augment {
        model: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Apply an attack scenario to an augmented graph
    Attack {
        cpes: PathBuf,
        #[arg(long)]
        actor: String,
        #[arg(long, value_parser = ["max", "min"])]
        objective: String,
        #[arg(long)]
        manufacturer: Option<String>,
        #[arg(long)]
        firmware: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// AC power flow over tabular grid JSON
    Solve {
        grid: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare a baseline result against attacked results
    Report {
        #[arg(long)]
        baseline: PathBuf,
        /// Attacked result files; the scenario label is the file stem
        #[arg(long, num_args = 1..)]
        attacked: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Full import → augment → attack → solve → report pipeline
    Pipeline { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &PathBuf, content: &str) -> Result<(), PipelineError> {
    fs::write(path, content).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_graph(path: &PathBuf) -> Result<Graph, PipelineError> {
    parse_turtle(&read(path)?).map_err(|e| PipelineError::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let parse_err = |e: &dyn std::fmt::Display| PipelineError::Parse(e.to_string());
    match cli.command {
        Command::Import { grid, output } => {
            let tables = GridTables::from_json(&read(&grid)?).map_err(|e| parse_err(&e))?;
            let graph = grid::import_grid(&tables).map_err(|e| parse_err(&e))?;
            write(&output, &serialize_turtle(&graph))?;
        }
        Command::Export { model, output } => {
            let graph = read_graph(&model)?;
            let tables = grid::export_grid(&graph).map_err(|e| parse_err(&e))?;
            write(&output, &tables.to_json())?;
        }
        Command::Validate { model, shapes } => {
            let graph = read_graph(&model)?;
            let (shape_set, shape_graph) = pipeline::load_shapes(&shapes)?;
            let report = shacl::validate(&graph, &shape_set, &shape_graph)
                .map_err(|e| parse_err(&e))?;
            print!("{}", report.to_table());
            if !report.conforms {
                return Err(PipelineError::Validation { report });
            }
        }
        Command::Query { model, query } => {
            let graph = read_graph(&model)?;
            let parsed = parse_select(&query).map_err(|e| parse_err(&e))?;
            for solution in cpes::query::evaluate(&graph, &parsed) {
                let row: Vec<String> = parsed
                    .projected
                    .iter()
                    .map(|v| format!("?{} = {}", v.name(), solution[v]))
                    .collect();
                println!("{}", row.join("  "));
            }
        }
        Command::Augment {
            model,
            rules,
            output,
            log,
        } => {
            let model_graph = read_graph(&model)?;
            let rules_graph = read_graph(&rules)?;
            let (augmented, logs) = pipeline::augment_graph(&model_graph, &rules_graph, cli.seed)?;
            write(&output, &serialize_turtle(&augmented))?;
            if let Some(log_path) = log {
                let log_json =
                    serde_json::Value::Array(logs.iter().map(|l| l.to_json()).collect());
                write(
                    &log_path,
                    &format!("{}\n", serde_json::to_string_pretty(&log_json).unwrap()),
                )?;
            }
        }
        Command::Attack {
            cpes,
            actor,
            objective,
            manufacturer,
            firmware,
            output,
            targets,
        } => {
            let graph = read_graph(&cpes)?;
            let scenario = AttackScenario {
                compromised_actor: Iri::new(actor).map_err(|e| parse_err(&e))?,
                objective: pipeline::parse_objective(&objective)?,
                label: objective.clone(),
                manufacturer,
                firmware,
            };
            let (attacked, hit) =
                cpes::attack::apply_attack(&graph, &scenario).map_err(|e| parse_err(&e))?;
            write(&output, &serialize_turtle(&attacked))?;
            if let Some(targets_path) = targets {
                let json = serde_json::Value::Array(
                    hit.iter()
                        .map(|t| {
                            serde_json::json!({
                                "control_value": t.control_value.as_str(),
                                "unit": t.unit.as_str(),
                                "min_p_mw": pipeline::decimal_str(t.min_p_mw),
                                "max_p_mw": pipeline::decimal_str(t.max_p_mw),
                                "current_p_mw": pipeline::decimal_str(t.current_p_mw),
                            })
                        })
                        .collect(),
                );
                write(
                    &targets_path,
                    &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()),
                )?;
            }
            if cli.verbose {
                eprintln!("{} unit(s) affected", hit.len());
            }
        }
        Command::Solve { grid, output } => {
            let tables = GridTables::from_json(&read(&grid)?).map_err(|e| parse_err(&e))?;
            let result = powerflow::solve(&tables, SolveOptions::default())
                .map_err(|e| PipelineError::Solver(e.to_string()))?;
            write(&output, &result.to_json())?;
        }
        Command::Report {
            baseline,
            attacked,
            output,
            json,
        } => {
            let base =
                PowerFlowResult::from_json(&read(&baseline)?).map_err(|e| parse_err(&e))?;
            let mut reports = Vec::new();
            for path in &attacked {
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                let result =
                    PowerFlowResult::from_json(&read(path)?).map_err(|e| parse_err(&e))?;
                reports.push(
                    report::compare(&base, &result, &label).map_err(|e| parse_err(&e))?,
                );
                let violations = report::check_limits(&result, &Limits::default());
                if violations.is_empty() {
                    println!("{label}: no problematic grid states");
                } else {
                    println!("{label}: {} limit violation(s)", violations.len());
                }
            }
            write(&output, &report::to_csv(&reports))?;
            if let Some(json_path) = json {
                write(
                    &json_path,
                    &format!("{}\n", serde_json::to_string_pretty(&reports).unwrap()),
                )?;
            }
        }
        Command::Pipeline { config } => {
            let jobs = if cli.jobs == 0 { None } else { Some(cli.jobs) };
            let summary = pipeline::run_pipeline(&config, jobs)?;
            print!("{}", summary.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::Validation { report } = &e {
                eprint!("{}", report.to_table());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
