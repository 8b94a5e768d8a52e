//! Gate-level circuits for the walks: construction, simulation,
//! decomposition to `{RY, PHASE, H, X, CX}`, routing and depth analysis.
//!
//! Qubit `q` carries weight `2^q` in simulated basis indices. Walk circuits
//! place the coin qubits first, then the `y` register, then the `x`
//! register, so for power-of-two lattices the simulated statevector uses the
//! same index layout as [`crate::walk::StateVector`].

mod build;
mod decompose;
mod depth;
mod route;
mod sim;

pub use build::{
    append_iqft, append_qft, build_caqw_circuit, build_circuit, build_laqw_circuit, build_laqw_circuit_with,
    build_qadd, build_qft, cyclic_increment, register_bits, LaqwAdder, QaddSign,
};
pub use decompose::{cancel_inverse_pairs, decompose};
pub use depth::{
    cycle_for, depth, depth_params, depth_scaling_experiment, fit_line, CouplingPreset, DepthExperiment, DepthReport,
    LineFit, ScalingFit, SlopeFit,
};
pub use route::{route, CouplingMap, RoutedCircuit};
pub use sim::{circuit_unitary, embed_walk_state, simulate, simulate_from_zero};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    X,
    H,
    Ry,
    Phase,
    Cx,
    Cphase,
    Swap,
    Mcx,
    Mcphase,
}

impl GateKind {
    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::Ry | GateKind::Phase | GateKind::Cphase | GateKind::Mcphase)
    }
}

/// A gate with its qubits listed controls first, target last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl Gate {
    fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<f64>) -> Self {
        Gate { kind, qubits, angle }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q], None)
    }
    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q], None)
    }
    pub fn ry(q: usize, angle: f64) -> Self {
        Self::new(GateKind::Ry, vec![q], Some(angle))
    }
    pub fn phase(q: usize, angle: f64) -> Self {
        Self::new(GateKind::Phase, vec![q], Some(angle))
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cx, vec![control, target], None)
    }
    pub fn cphase(control: usize, target: usize, angle: f64) -> Self {
        Self::new(GateKind::Cphase, vec![control, target], Some(angle))
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b], None)
    }
    pub fn mcx(controls: &[usize], target: usize) -> Self {
        let mut q = controls.to_vec();
        q.push(target);
        Self::new(GateKind::Mcx, q, None)
    }
    pub fn mcphase(controls: &[usize], target: usize, angle: f64) -> Self {
        let mut q = controls.to_vec();
        q.push(target);
        Self::new(GateKind::Mcphase, q, Some(angle))
    }

    pub fn target(&self) -> usize {
        *self.qubits.last().expect("gate without qubits")
    }

    pub fn controls(&self) -> &[usize] {
        match self.kind {
            GateKind::Swap => &[],
            _ => &self.qubits[..self.qubits.len() - 1],
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle.unwrap_or(0.0)
    }

    /// Gate undoing this one.
    pub fn inverse(&self) -> Gate {
        let mut g = self.clone();
        if let Some(a) = g.angle.as_mut() {
            *a = -*a;
        }
        g
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let arity_ok = match self.kind {
            GateKind::X | GateKind::H | GateKind::Ry | GateKind::Phase => self.qubits.len() == 1,
            GateKind::Cx | GateKind::Cphase | GateKind::Swap => self.qubits.len() == 2,
            GateKind::Mcx | GateKind::Mcphase => !self.qubits.is_empty(),
        };
        if !arity_ok {
            return bad(format!("{:?} with {} qubits", self.kind, self.qubits.len()));
        }
        if self.kind.has_angle() != self.angle.is_some() {
            return bad(format!("{:?} angle presence mismatch", self.kind));
        }
        if let Some(a) = self.angle {
            if !a.is_finite() {
                return bad("non-finite angle".into());
            }
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return bad(format!("qubit {q} out of range for {num_qubits} qubits"));
            }
            if self.qubits[..i].contains(&q) {
                return bad(format!("repeated qubit {q}"));
            }
        }
        Ok(())
    }
}

/// Qubit roles in a walk circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registers {
    /// `x[j]` holds the bit of weight `2^j` of the x coordinate.
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub coin: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub registers: Option<Registers>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new(), registers: None }
    }

    /// Appends a gate, panicking if it violates the circuit's invariants.
    /// Builders in this crate only produce valid gates.
    pub fn add(&mut self, gate: Gate) {
        if let Err(e) = gate.check(self.num_qubits) {
            panic!("invalid gate {gate:?}: {e}");
        }
        self.gates.push(gate);
    }

    pub fn try_add(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) {
        for g in gates {
            self.add(g);
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            registers: self.registers.clone(),
        }
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// One JSON object per gate, newline separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&serde_json::to_string(g).expect("gate serialises"));
            out.push('\n');
        }
        out
    }

    /// Parses JSON lines. Without `num_qubits` the width is one more than
    /// the largest qubit index seen.
    pub fn from_json_lines(text: &str, num_qubits: Option<usize>) -> Result<Circuit> {
        let mut gates = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let g: Gate =
                serde_json::from_str(line).map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))?;
            gates.push(g);
        }
        let width = num_qubits.unwrap_or_else(|| gates.iter().flat_map(|g| g.qubits.iter()).max().map_or(0, |m| m + 1));
        let mut c = Circuit::new(width);
        for g in gates {
            c.try_add(g)?;
        }
        Ok(c)
    }
}
