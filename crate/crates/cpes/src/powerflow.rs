//! Stationary AC power flow: Newton-Raphson in polar coordinates.
//!
//! Everything runs in per-unit on a single system base (default 1 MVA), with
//! the voltage base per bus taken from its vn_kv; transformers connect the
//! two voltage frames, so no off-nominal ratios or taps are supported. All
//! non-slack buses are PQ (generation is fixed-power in the load reference
//! frame), external-grid buses are slack. Line charging and transformer
//! magnetizing branches are omitted — fine at distribution-feeder scale,
//! and it keeps the admittance matrix exactly the branch graph Laplacian.

use nalgebra::{Complex, DMatrix, DVector};
use rust_decimal::prelude::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridTables;

type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error("island without a slack bus: buses {buses:?}")]
    Singularity { buses: Vec<u64> },
    #[error("no convergence after {iterations} iterations (mismatch {final_mismatch:.3e} pu)")]
    NonConvergence {
        iterations: usize,
        final_mismatch: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Convergence threshold on max(|ΔP|, |ΔQ|) in pu.
    pub tol: f64,
    pub max_iter: usize,
    pub s_base_mva: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 30,
            s_base_mva: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BranchKind {
    Line,
    Trafo,
}

#[derive(Debug, Clone)]
struct Branch {
    kind: BranchKind,
    id: u64,
    from: usize,
    to: usize,
    y_series: C64,
    /// line: max_i_ka; trafo: sn_mva
    rating: f64,
    /// vn_kv at the from (line) / hv (trafo) side, for ampere conversion
    vn_from_kv: f64,
}

/// Bus admittance matrix plus the branch list used to build it.
#[derive(Debug)]
pub struct AdmittanceMatrix {
    ybus: DMatrix<C64>,
    branches: Vec<Branch>,
    bus_ids: Vec<u64>,
}

impl AdmittanceMatrix {
    pub fn ybus(&self) -> &DMatrix<C64> {
        &self.ybus
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BusResult {
    pub id: u64,
    pub vm_pu: f64,
    pub va_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LineResult {
    pub id: u64,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    pub i_ka: f64,
    pub loading_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrafoResult {
    pub id: u64,
    pub p_hv_mw: f64,
    pub q_hv_mvar: f64,
    pub p_lv_mw: f64,
    pub q_lv_mvar: f64,
    pub loading_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PowerFlowResult {
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch_pu: f64,
    pub bus_results: Vec<BusResult>,
    pub line_results: Vec<LineResult>,
    pub trafo_results: Vec<TrafoResult>,
}

impl PowerFlowResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn bus(&self, id: u64) -> Option<&BusResult> {
        self.bus_results.iter().find(|b| b.id == id)
    }

    pub fn trafo(&self, id: u64) -> Option<&TrafoResult> {
        self.trafo_results.iter().find(|t| t.id == id)
    }
}

fn f(d: rust_decimal::Decimal) -> f64 {
    d.to_f64().expect("decimal fits f64")
}

/// Per-unit bus admittance matrix. Errors if any connected component lacks an
/// external-grid (slack) bus — the Jacobian would be singular.
pub fn build_ybus(
    tables: &GridTables,
    s_base_mva: f64,
) -> Result<AdmittanceMatrix, PowerFlowError> {
    let bus_ids: Vec<u64> = tables.bus.iter().map(|b| b.id).collect();
    let index_of = |id: u64| bus_ids.iter().position(|&b| b == id).unwrap();
    let n = bus_ids.len();

    let mut branches = Vec::new();
    for l in &tables.line {
        let vn = f(tables.bus_vn_kv(l.from_bus).unwrap());
        let z_base = vn * vn / s_base_mva;
        let z = C64::new(
            f(l.r_ohm_per_km) * f(l.length_km) / z_base,
            f(l.x_ohm_per_km) * f(l.length_km) / z_base,
        );
        branches.push(Branch {
            kind: BranchKind::Line,
            id: l.id,
            from: index_of(l.from_bus),
            to: index_of(l.to_bus),
            y_series: z.inv(),
            rating: f(l.max_i_ka),
            vn_from_kv: vn,
        });
    }
    for t in &tables.trafo {
        let z_mag = f(t.vk_percent) / 100.0 * s_base_mva / f(t.sn_mva);
        let r = f(t.vkr_percent) / 100.0 * s_base_mva / f(t.sn_mva);
        let x = (z_mag * z_mag - r * r).max(0.0).sqrt();
        branches.push(Branch {
            kind: BranchKind::Trafo,
            id: t.id,
            from: index_of(t.hv_bus),
            to: index_of(t.lv_bus),
            y_series: C64::new(r, x).inv(),
            rating: f(t.sn_mva),
            vn_from_kv: f(t.vn_hv_kv),
        });
    }

    // connectivity check: every component must hold a slack bus
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let c = n_components;
        n_components += 1;
        let mut stack = vec![start];
        component[start] = c;
        while let Some(i) = stack.pop() {
            for b in &branches {
                for (a, z) in [(b.from, b.to), (b.to, b.from)] {
                    if a == i && component[z] == usize::MAX {
                        component[z] = c;
                        stack.push(z);
                    }
                }
            }
        }
    }
    let mut has_slack = vec![false; n_components];
    for e in &tables.ext_grid {
        has_slack[component[index_of(e.bus)]] = true;
    }
    for c in 0..n_components {
        if !has_slack[c] {
            let buses: Vec<u64> = (0..n)
                .filter(|&i| component[i] == c)
                .map(|i| bus_ids[i])
                .collect();
            return Err(PowerFlowError::Singularity { buses });
        }
    }

    let mut ybus = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for b in &branches {
        ybus[(b.from, b.from)] += b.y_series;
        ybus[(b.to, b.to)] += b.y_series;
        ybus[(b.from, b.to)] -= b.y_series;
        ybus[(b.to, b.from)] -= b.y_series;
    }
    Ok(AdmittanceMatrix {
        ybus,
        branches,
        bus_ids,
    })
}

fn calc_power(ybus: &DMatrix<C64>, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = vm.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            let y = ybus[(i, k)];
            if y.re == 0.0 && y.im == 0.0 {
                continue;
            }
            let theta = va[i] - va[k];
            p[i] += vm[i] * vm[k] * (y.re * theta.cos() + y.im * theta.sin());
            q[i] += vm[i] * vm[k] * (y.re * theta.sin() - y.im * theta.cos());
        }
    }
    (p, q)
}

/// Full AC power flow over the tables.
pub fn solve(tables: &GridTables, opts: SolveOptions) -> Result<PowerFlowResult, PowerFlowError> {
    let adm = build_ybus(tables, opts.s_base_mva)?;
    let ybus = &adm.ybus;
    let bus_ids = &adm.bus_ids;
    let n = bus_ids.len();
    let index_of = |id: u64| bus_ids.iter().position(|&b| b == id).unwrap();

    // specified injections (pu): negative of total consumption per bus
    let mut p_spec = vec![0.0; n];
    let mut q_spec = vec![0.0; n];
    let mut consume = |bus: u64, p_mw: f64, q_mvar: f64| {
        let i = index_of(bus);
        p_spec[i] -= p_mw / opts.s_base_mva;
        q_spec[i] -= q_mvar / opts.s_base_mva;
    };
    for l in &tables.load {
        consume(l.bus, f(l.p_mw), f(l.q_mvar));
    }
    for s in &tables.sgen {
        consume(s.bus, f(s.p_mw), f(s.q_mvar));
    }
    for s in &tables.storage {
        consume(s.bus, f(s.p_mw), f(s.q_mvar));
    }

    let mut is_slack = vec![false; n];
    let mut vm = vec![1.0; n];
    let mut va = vec![0.0; n];
    for e in &tables.ext_grid {
        let i = index_of(e.bus);
        is_slack[i] = true;
        vm[i] = f(e.vm_pu);
        va[i] = f(e.va_deg).to_radians();
    }
    // flat start at the (first) slack angle
    let slack_angle = va[is_slack.iter().position(|&s| s).unwrap()];
    for i in 0..n {
        if !is_slack[i] {
            va[i] = slack_angle;
        }
    }
    let pq: Vec<usize> = (0..n).filter(|&i| !is_slack[i]).collect();
    let m = pq.len();

    let mut iterations = 0;
    let mut mismatch = f64::INFINITY;
    while iterations < opts.max_iter {
        let (p, q) = calc_power(ybus, &vm, &va);
        let mut rhs = DVector::zeros(2 * m);
        for (r, &i) in pq.iter().enumerate() {
            rhs[r] = p_spec[i] - p[i];
            rhs[m + r] = q_spec[i] - q[i];
        }
        mismatch = rhs.amax();
        if mismatch <= opts.tol {
            break;
        }
        iterations += 1;

        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        for (r, &i) in pq.iter().enumerate() {
            for (c, &j) in pq.iter().enumerate() {
                let y = ybus[(i, j)];
                if i == j {
                    let gii = y.re;
                    let bii = y.im;
                    jac[(r, c)] = -q[i] - bii * vm[i] * vm[i];
                    jac[(r, m + c)] = p[i] / vm[i] + gii * vm[i];
                    jac[(m + r, c)] = p[i] - gii * vm[i] * vm[i];
                    jac[(m + r, m + c)] = q[i] / vm[i] - bii * vm[i] * vm[i];
                } else {
                    let theta = va[i] - va[j];
                    let g = y.re;
                    let b = y.im;
                    let s = theta.sin();
                    let co = theta.cos();
                    jac[(r, c)] = vm[i] * vm[j] * (g * s - b * co);
                    jac[(r, m + c)] = vm[i] * (g * co + b * s);
                    jac[(m + r, c)] = -vm[i] * vm[j] * (g * co + b * s);
                    jac[(m + r, m + c)] = vm[i] * (g * s - b * co);
                }
            }
        }
        let lu = jac.lu();
        let Some(dx) = lu.solve(&rhs) else {
            return Err(PowerFlowError::NonConvergence {
                iterations,
                final_mismatch: mismatch,
            });
        };
        if !dx.iter().all(|v| v.is_finite()) {
            return Err(PowerFlowError::NonConvergence {
                iterations,
                final_mismatch: mismatch,
            });
        }
        for (r, &i) in pq.iter().enumerate() {
            va[i] += dx[r];
            vm[i] += dx[m + r];
            if vm[i] <= 0.0 {
                // voltage collapsed below zero: past the loadability limit
                return Err(PowerFlowError::NonConvergence {
                    iterations,
                    final_mismatch: mismatch,
                });
            }
        }
    }
    if mismatch > opts.tol {
        return Err(PowerFlowError::NonConvergence {
            iterations,
            final_mismatch: mismatch,
        });
    }

    let voltage: Vec<C64> = (0..n)
        .map(|i| C64::from_polar(vm[i], va[i]))
        .collect();
    let mut line_results = Vec::new();
    let mut trafo_results = Vec::new();
    for b in &adm.branches {
        let i_ft = (voltage[b.from] - voltage[b.to]) * b.y_series;
        let s_from = voltage[b.from] * i_ft.conj() * opts.s_base_mva;
        let s_to = voltage[b.to] * (-i_ft).conj() * opts.s_base_mva;
        match b.kind {
            BranchKind::Line => {
                // ampere base on the from side; both ends share one level
                let i_base_ka = opts.s_base_mva / (3.0f64.sqrt() * b.vn_from_kv);
                let i_ka = i_ft.norm() * i_base_ka;
                line_results.push(LineResult {
                    id: b.id,
                    p_from_mw: s_from.re,
                    q_from_mvar: s_from.im,
                    p_to_mw: s_to.re,
                    q_to_mvar: s_to.im,
                    i_ka,
                    loading_percent: i_ka / b.rating * 100.0,
                });
            }
            BranchKind::Trafo => {
                trafo_results.push(TrafoResult {
                    id: b.id,
                    p_hv_mw: s_from.re,
                    q_hv_mvar: s_from.im,
                    p_lv_mw: s_to.re,
                    q_lv_mvar: s_to.im,
                    loading_percent: s_from.norm() / b.rating * 100.0,
                });
            }
        }
    }
    line_results.sort_by_key(|r| r.id);
    trafo_results.sort_by_key(|r| r.id);

    Ok(PowerFlowResult {
        converged: true,
        iterations,
        max_mismatch_pu: mismatch,
        bus_results: bus_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| BusResult {
                id,
                vm_pu: vm[i],
                va_deg: va[i].to_degrees(),
            })
            .collect(),
        line_results,
        trafo_results,
    })
}
