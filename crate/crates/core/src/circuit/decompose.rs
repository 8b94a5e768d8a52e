//! Lowering to the `{RY, PHASE, H, X, CX}` basis.
//!
//! Multi-controlled gates are expanded without adding qubits. An MCX with
//! three or more controls borrows idle qubits of the circuit as dirty
//! ancillas (their state is restored), which keeps its CX count linear in
//! the control count. When no qubit is idle it falls back to the quadratic
//! ancilla-free phase recursion.

use std::f64::consts::{FRAC_PI_4, PI};

use super::{Circuit, Gate, GateKind};

struct Lowering {
    out: Vec<Gate>,
}

impl Lowering {
    fn push(&mut self, g: Gate) {
        self.out.push(g);
    }

    fn cphase(&mut self, c: usize, t: usize, lambda: f64) {
        self.push(Gate::phase(c, lambda / 2.0));
        self.push(Gate::cx(c, t));
        self.push(Gate::phase(t, -lambda / 2.0));
        self.push(Gate::cx(c, t));
        self.push(Gate::phase(t, lambda / 2.0));
    }

    fn toffoli(&mut self, a: usize, b: usize, t: usize) {
        let tg = |q| Gate::phase(q, FRAC_PI_4);
        let tdg = |q| Gate::phase(q, -FRAC_PI_4);
        self.push(Gate::h(t));
        self.push(Gate::cx(b, t));
        self.push(tdg(t));
        self.push(Gate::cx(a, t));
        self.push(tg(t));
        self.push(Gate::cx(b, t));
        self.push(tdg(t));
        self.push(Gate::cx(a, t));
        self.push(tg(b));
        self.push(tg(t));
        self.push(Gate::h(t));
        self.push(Gate::cx(a, b));
        self.push(tg(a));
        self.push(tdg(b));
        self.push(Gate::cx(a, b));
    }

    /// Toffoli up to a diagonal phase on `a, b, t`. Self-inverse.
    fn margolus(&mut self, a: usize, b: usize, t: usize) {
        let q = FRAC_PI_4;
        self.push(Gate::ry(t, q));
        self.push(Gate::cx(b, t));
        self.push(Gate::ry(t, q));
        self.push(Gate::cx(a, t));
        self.push(Gate::ry(t, -q));
        self.push(Gate::cx(b, t));
        self.push(Gate::ry(t, -q));
    }

    /// Toffoli ladder over `anc.len() >= c.len() - 2` dirty ancillas. Only
    /// the two gates hitting `t` need to be exact; the ancilla ladder runs
    /// twice with the same phase-carrying gates, which cancel.
    fn mcx_chain(&mut self, c: &[usize], anc: &[usize], t: usize) {
        let m = c.len();
        let a = &anc[..m - 2];
        let ladder = |s: &mut Self| {
            for i in (2..m - 1).rev() {
                s.margolus(c[i], a[i - 2], a[i - 1]);
            }
            s.margolus(c[0], c[1], a[0]);
            for i in 2..m - 1 {
                s.margolus(c[i], a[i - 2], a[i - 1]);
            }
        };
        for _ in 0..2 {
            self.toffoli(c[m - 1], a[m - 3], t);
            ladder(self);
        }
    }

    fn mcx(&mut self, c: &[usize], t: usize, borrow: &[usize]) {
        match c.len() {
            0 => self.push(Gate::x(t)),
            1 => self.push(Gate::cx(c[0], t)),
            2 => self.toffoli(c[0], c[1], t),
            m if borrow.len() >= m - 2 => self.mcx_chain(c, borrow, t),
            m if !borrow.is_empty() => {
                let (g1, g2) = c.split_at(m.div_ceil(2));
                let b = borrow[0];
                let rest = &borrow[1..];
                let mut b1: Vec<usize> = g2.to_vec();
                b1.push(t);
                b1.extend_from_slice(rest);
                let mut c2: Vec<usize> = g2.to_vec();
                c2.push(b);
                let mut b2: Vec<usize> = g1.to_vec();
                b2.extend_from_slice(rest);
                for _ in 0..2 {
                    self.mcx(g1, b, &b1);
                    self.mcx(&c2, t, &b2);
                }
            }
            _ => {
                self.push(Gate::h(t));
                self.mcphase(c, t, PI, &[]);
                self.push(Gate::h(t));
            }
        }
    }

    fn mcphase(&mut self, c: &[usize], t: usize, lambda: f64, idle: &[usize]) {
        match c.len() {
            0 => self.push(Gate::phase(t, lambda)),
            1 => self.cphase(c[0], t, lambda),
            k => {
                let ck = c[k - 1];
                let rest = &c[..k - 1];
                let mut borrow = vec![t];
                borrow.extend_from_slice(idle);
                self.cphase(ck, t, lambda / 2.0);
                self.mcx(rest, ck, &borrow);
                self.cphase(ck, t, -lambda / 2.0);
                self.mcx(rest, ck, &borrow);
                self.mcphase(rest, t, lambda / 2.0, idle);
            }
        }
    }

    fn lower(&mut self, g: &Gate, num_qubits: usize) {
        let idle = || -> Vec<usize> { (0..num_qubits).filter(|q| !g.qubits.contains(q)).collect() };
        match g.kind {
            GateKind::X | GateKind::H | GateKind::Ry | GateKind::Phase | GateKind::Cx => self.push(g.clone()),
            GateKind::Cphase => self.cphase(g.qubits[0], g.qubits[1], g.angle()),
            GateKind::Swap => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                self.push(Gate::cx(a, b));
                self.push(Gate::cx(b, a));
                self.push(Gate::cx(a, b));
            }
            GateKind::Mcx => self.mcx(g.controls(), g.target(), &idle()),
            GateKind::Mcphase => self.mcphase(g.controls(), g.target(), g.angle(), &idle()),
        }
    }
}

pub fn decompose(circuit: &Circuit) -> Circuit {
    let mut low = Lowering { out: Vec::with_capacity(circuit.gates.len() * 4) };
    for g in &circuit.gates {
        low.lower(g, circuit.num_qubits);
    }
    Circuit { num_qubits: circuit.num_qubits, gates: low.out, registers: circuit.registers.clone() }
}

fn cancels(a: &Gate, b: &Gate) -> bool {
    if a.kind != b.kind {
        return false;
    }
    let same_qubits = match a.kind {
        GateKind::Swap => a.qubits == b.qubits || (a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0]),
        _ => a.qubits == b.qubits,
    };
    same_qubits
        && match (a.angle, b.angle) {
            (Some(x), Some(y)) => (x + y).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        }
}

/// Removes pairs of mutually inverse gates that meet on the same qubits
/// with nothing in between. Off unless requested.
pub fn cancel_inverse_pairs(circuit: &Circuit) -> Circuit {
    // Per-qubit stacks of indices into `kept` let a gate find the last gate
    // touching its qubits.
    let mut kept: Vec<Option<Gate>> = Vec::with_capacity(circuit.gates.len());
    let mut last: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_qubits];
    for g in &circuit.gates {
        let prev = last[g.qubits[0]].last().copied();
        let adjacent = prev.is_some_and(|p| {
            g.qubits.iter().all(|&q| last[q].last() == Some(&p))
                && kept[p].as_ref().is_some_and(|h| h.qubits.len() == g.qubits.len() && cancels(h, g))
        });
        if let (true, Some(p)) = (adjacent, prev) {
            kept[p] = None;
            for &q in &g.qubits {
                last[q].pop();
            }
        } else {
            let idx = kept.len();
            kept.push(Some(g.clone()));
            for &q in &g.qubits {
                last[q].push(idx);
            }
        }
    }
    Circuit {
        num_qubits: circuit.num_qubits,
        gates: kept.into_iter().flatten().collect(),
        registers: circuit.registers.clone(),
    }
}
