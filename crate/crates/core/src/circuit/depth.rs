//! Depth measurement and the depth-versus-steps scaling experiment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_circuit, decompose, route, Circuit, CouplingMap};
use crate::walk::{Model, WalkParams};
use crate::Result;

/// Length of the longest chain of gates sharing qubits, by greedy layering.
pub fn depth(circuit: &Circuit) -> usize {
    let mut front = vec![0usize; circuit.num_qubits];
    let mut total = 0;
    for g in &circuit.gates {
        let layer = g.qubits.iter().map(|&q| front[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            front[q] = layer;
        }
        total = total.max(layer);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthReport {
    pub model: Model,
    /// Qubits per position register.
    pub n_qubits: usize,
    pub t: usize,
    pub logical_depth: usize,
    pub routed_depth: usize,
    pub gate_count: usize,
    pub swap_count: usize,
}

impl DepthReport {
    pub const CSV_HEADER: &'static str = "model,n_qubits,t,logical_depth,routed_depth,gate_count,swap_count";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.model, self.n_qubits, self.t, self.logical_depth, self.routed_depth, self.gate_count, self.swap_count
        )
    }

    /// Decomposes `circuit`, routes it on `coupling` (or on a map sized to
    /// the circuit from `preset`) and measures both depths.
    pub fn measure(
        circuit: &Circuit,
        model: Model,
        n_qubits: usize,
        t: usize,
        coupling: &CouplingPreset,
    ) -> Result<Self> {
        let low = decompose(circuit);
        let logical_depth = depth(&low);
        let map = coupling.map_for(low.num_qubits)?;
        let routed = route(&low, &map)?;
        Ok(DepthReport {
            model,
            n_qubits,
            t,
            logical_depth,
            routed_depth: depth(&routed.circuit),
            gate_count: low.gate_count(),
            swap_count: routed.swap_count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingPreset {
    AllToAll,
    /// Smallest heavy-hex patch that fits the circuit.
    HeavyHex,
}

impl CouplingPreset {
    pub fn map_for(&self, n: usize) -> Result<CouplingMap> {
        Ok(match self {
            CouplingPreset::AllToAll => CouplingMap::all_to_all(n),
            CouplingPreset::HeavyHex => CouplingMap::heavy_hex_for(n),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LineFit { slope, intercept: my - slope * mx, r_squared }
}

/// Depth-per-step fit for one model and register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub model: Model,
    pub n_qubits: usize,
    pub logical: LineFit,
    pub routed: LineFit,
}

/// Per-step logical depth regressed on `n` (LAQW) or `n²` (CAQW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: Model,
    pub regressor: String,
    pub fit: LineFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthExperiment {
    pub rows: Vec<DepthReport>,
    pub slopes: Vec<SlopeFit>,
    pub scaling: Vec<ScalingFit>,
}

impl DepthExperiment {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(DepthReport::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }

    pub fn slope(&self, model: Model, n: usize) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.model == model && s.n_qubits == n)
    }

    pub fn row(&self, model: Model, n: usize, t: usize) -> Option<&DepthReport> {
        self.rows.iter().find(|r| r.model == model && r.n_qubits == n && r.t == t)
    }
}

/// Cycle length used for an `n`-qubit register: `2^n` for LAQW and the
/// largest odd size `2^n - 1` for CAQW.
pub fn cycle_for(model: Model, n: usize) -> usize {
    match model {
        Model::Laqw => 1 << n,
        Model::Caqw => (1 << n) - 1,
    }
}

/// Fixed walk instance for depth measurements. Depth does not depend on the
/// angles or key bits, only on `t` and the lattice.
pub fn depth_params(model: Model, n: usize, t: usize) -> Result<WalkParams> {
    let size = cycle_for(model, n);
    let key: String = (0..t).map(|i| if i % 2 == 0 { '0' } else { '1' }).collect();
    WalkParams::new(model, size, size, 1, 1, 0.7, 1.1, 2.3, &key)
}

pub fn depth_scaling_experiment(
    models: &[Model],
    n_range: &[usize],
    t_range: &[usize],
    coupling: &CouplingPreset,
) -> Result<DepthExperiment> {
    let tuples: Vec<(Model, usize, usize)> = models
        .iter()
        .flat_map(|&m| n_range.iter().flat_map(move |&n| t_range.iter().map(move |&t| (m, n, t))))
        .collect();
    let rows = tuples
        .par_iter()
        .map(|&(m, n, t)| {
            let c = build_circuit(&depth_params(m, n, t)?)?;
            DepthReport::measure(&c, m, n, t, coupling)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slopes = Vec::new();
    for &m in models {
        for &n in n_range {
            let sel: Vec<&DepthReport> = rows.iter().filter(|r| r.model == m && r.n_qubits == n).collect();
            if sel.len() < 2 {
                continue;
            }
            let ts: Vec<f64> = sel.iter().map(|r| r.t as f64).collect();
            let ld: Vec<f64> = sel.iter().map(|r| r.logical_depth as f64).collect();
            let rd: Vec<f64> = sel.iter().map(|r| r.routed_depth as f64).collect();
            slopes.push(SlopeFit { model: m, n_qubits: n, logical: fit_line(&ts, &ld), routed: fit_line(&ts, &rd) });
        }
    }

    let mut scaling = Vec::new();
    for &m in models {
        let sel: Vec<&SlopeFit> = slopes.iter().filter(|s| s.model == m).collect();
        if sel.len() < 2 {
            continue;
        }
        let (regressor, xs): (&str, Vec<f64>) = match m {
            Model::Laqw => ("n", sel.iter().map(|s| s.n_qubits as f64).collect()),
            Model::Caqw => ("n^2", sel.iter().map(|s| (s.n_qubits * s.n_qubits) as f64).collect()),
        };
        let ys: Vec<f64> = sel.iter().map(|s| s.logical.slope).collect();
        scaling.push(ScalingFit { model: m, regressor: regressor.into(), fit: fit_line(&xs, &ys) });
    }
    Ok(DepthExperiment { rows, slopes, scaling })
}
