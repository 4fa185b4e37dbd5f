//! Baseline-vs-attacked comparison: transformer loading deltas, voltage
//! distributions per voltage level, and limit checks.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::grid::GridTables;
use crate::powerflow::PowerFlowResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("baseline and attacked results cover different transformers")]
    TopologyMismatch,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrafoDelta {
    pub trafo_id: u64,
    pub p_baseline_mw: f64,
    pub p_attacked_mw: f64,
    /// attacked − baseline, at the hv side.
    pub delta_p_mw: f64,
    pub loading_percent_attacked: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpactReport {
    pub scenario: String,
    pub deltas: Vec<TrafoDelta>,
    pub max_abs_delta_mw: f64,
}

/// Per-transformer hv-side active-power deltas between two converged runs.
pub fn compare(
    baseline: &PowerFlowResult,
    attacked: &PowerFlowResult,
    label: &str,
) -> Result<ImpactReport, ReportError> {
    let base_ids: Vec<u64> = baseline.trafo_results.iter().map(|t| t.id).collect();
    let att_ids: Vec<u64> = attacked.trafo_results.iter().map(|t| t.id).collect();
    if base_ids != att_ids {
        return Err(ReportError::TopologyMismatch);
    }
    let deltas: Vec<TrafoDelta> = baseline
        .trafo_results
        .iter()
        .zip(&attacked.trafo_results)
        .map(|(b, a)| TrafoDelta {
            trafo_id: b.id,
            p_baseline_mw: b.p_hv_mw,
            p_attacked_mw: a.p_hv_mw,
            delta_p_mw: a.p_hv_mw - b.p_hv_mw,
            loading_percent_attacked: a.loading_percent,
        })
        .collect();
    let max_abs_delta_mw = deltas
        .iter()
        .map(|d| d.delta_p_mw.abs())
        .fold(0.0, f64::max);
    Ok(ImpactReport {
        scenario: label.to_string(),
        deltas,
        max_abs_delta_mw,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats {
    pub vn_kv: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VoltageStats {
    pub levels: Vec<LevelStats>,
}

/// Quantile by linear interpolation between closest ranks: the rank is
/// (n + 1) · p, clamped into [1, n] (so the 5-element quartiles of
/// {0.95 … 0.99} are 0.955 / 0.97 / 0.985).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let rank = ((n as f64 + 1.0) * p).clamp(1.0, n as f64);
    let lo = rank.floor() as usize - 1;
    let hi = rank.ceil() as usize - 1;
    let frac = rank - rank.floor();
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Five-number summary of bus voltage magnitudes, grouped by voltage level.
pub fn voltage_stats(result: &PowerFlowResult, tables: &GridTables) -> VoltageStats {
    let mut groups: BTreeMap<Decimal, Vec<f64>> = BTreeMap::new();
    for bus in &result.bus_results {
        if let Some(vn) = tables.bus_vn_kv(bus.id) {
            groups.entry(vn.normalize()).or_default().push(bus.vm_pu);
        }
    }
    let levels = groups
        .into_iter()
        .map(|(vn, mut vms)| {
            vms.sort_by(|a, b| a.total_cmp(b));
            LevelStats {
                vn_kv: vn.to_string(),
                min: vms[0],
                q1: quantile(&vms, 0.25),
                median: quantile(&vms, 0.5),
                q3: quantile(&vms, 0.75),
                max: *vms.last().unwrap(),
            }
        })
        .collect();
    VoltageStats { levels }
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub vm_min_pu: f64,
    pub vm_max_pu: f64,
    pub loading_max_percent: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            vm_min_pu: 0.9,
            vm_max_pu: 1.1,
            loading_max_percent: 100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LimitViolation {
    pub element: String,
    pub quantity: String,
    pub value: f64,
    pub limit: f64,
}

/// Every bus, line or transformer outside the given operating limits.
pub fn check_limits(result: &PowerFlowResult, limits: &Limits) -> Vec<LimitViolation> {
    let mut out = Vec::new();
    for b in &result.bus_results {
        if b.vm_pu < limits.vm_min_pu {
            out.push(LimitViolation {
                element: format!("bus {}", b.id),
                quantity: "vm_pu".into(),
                value: b.vm_pu,
                limit: limits.vm_min_pu,
            });
        }
        if b.vm_pu > limits.vm_max_pu {
            out.push(LimitViolation {
                element: format!("bus {}", b.id),
                quantity: "vm_pu".into(),
                value: b.vm_pu,
                limit: limits.vm_max_pu,
            });
        }
    }
    for l in &result.line_results {
        if l.loading_percent > limits.loading_max_percent {
            out.push(LimitViolation {
                element: format!("line {}", l.id),
                quantity: "loading_percent".into(),
                value: l.loading_percent,
                limit: limits.loading_max_percent,
            });
        }
    }
    for t in &result.trafo_results {
        if t.loading_percent > limits.loading_max_percent {
            out.push(LimitViolation {
                element: format!("trafo {}", t.id),
                quantity: "loading_percent".into(),
                value: t.loading_percent,
                limit: limits.loading_max_percent,
            });
        }
    }
    out
}

/// Plot-ready CSV, one row per transformer per scenario.
pub fn to_csv(reports: &[ImpactReport]) -> String {
    let mut s = String::from(
        "scenario,trafo_id,p_baseline_mw,p_attacked_mw,delta_p_mw,loading_percent_attacked\n",
    );
    for report in reports {
        for d in &report.deltas {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                report.scenario,
                d.trafo_id,
                d.p_baseline_mw,
                d.p_attacked_mw,
                d.delta_p_mw,
                d.loading_percent_attacked
            ));
        }
    }
    s
}
