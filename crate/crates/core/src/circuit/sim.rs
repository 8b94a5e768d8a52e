//! Dense statevector simulation of circuits.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;
use num_complex::Complex64;

use super::{Circuit, Gate, GateKind, Registers};
use crate::walk::{StateVector, DENSE_LIMIT};
use crate::{Error, Result};

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gate_matrix(g: &Gate) -> Option<Mat2> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    Some(match g.kind {
        GateKind::X | GateKind::Cx | GateKind::Mcx => [[z, o], [o, z]],
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::Ry => {
            let (s, co) = (g.angle() / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateKind::Phase | GateKind::Cphase | GateKind::Mcphase => [[o, z], [z, Complex64::from_polar(1.0, g.angle())]],
        GateKind::Swap => return None,
    })
}

fn apply_gate(state: &mut [Complex64], g: &Gate) {
    if g.kind == GateKind::Swap {
        let (a, b) = (1usize << g.qubits[0], 1usize << g.qubits[1]);
        for i in 0..state.len() {
            if i & a != 0 && i & b == 0 {
                state.swap(i, i ^ a ^ b);
            }
        }
        return;
    }
    let m = gate_matrix(g).expect("non-swap gate has a matrix");
    let cmask: usize = g.controls().iter().map(|&q| 1usize << q).sum();
    let tbit = 1usize << g.target();
    for i in 0..state.len() {
        if i & tbit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tbit;
        let (a, b) = (state[i], state[j]);
        state[i] = m[0][0] * a + m[0][1] * b;
        state[j] = m[1][0] * a + m[1][1] * b;
    }
}

fn check_width(num_qubits: usize) -> Result<usize> {
    let dim = 1usize.checked_shl(num_qubits as u32).filter(|&d| d <= (1 << 24));
    dim.ok_or(Error::DimensionTooLarge { dim: usize::MAX, limit: 1 << 24 })
}

/// Runs the circuit on an arbitrary initial statevector.
pub fn simulate(circuit: &Circuit, initial: &[Complex64]) -> Result<Vec<Complex64>> {
    let dim = check_width(circuit.num_qubits)?;
    if initial.len() != dim {
        return Err(Error::LengthMismatch(initial.len(), dim));
    }
    let mut state = initial.to_vec();
    for g in &circuit.gates {
        apply_gate(&mut state, g);
    }
    Ok(state)
}

pub fn simulate_from_zero(circuit: &Circuit) -> Result<Vec<Complex64>> {
    let dim = check_width(circuit.num_qubits)?;
    let mut init = vec![c(0.0, 0.0); dim];
    init[0] = c(1.0, 0.0);
    simulate(circuit, &init)
}

/// Full matrix of the circuit, column `k` being the image of basis state `k`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Array2<Complex64>> {
    let dim = check_width(circuit.num_qubits)?;
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge { dim, limit: DENSE_LIMIT });
    }
    let mut u = Array2::zeros((dim, dim));
    for k in 0..dim {
        let mut col = vec![c(0.0, 0.0); dim];
        col[k] = c(1.0, 0.0);
        for g in &circuit.gates {
            apply_gate(&mut col, g);
        }
        for (r, v) in col.into_iter().enumerate() {
            u[[r, k]] = v;
        }
    }
    Ok(u)
}

fn circuit_index(regs: &Registers, x: usize, y: usize, coin: usize) -> usize {
    let place = |value: usize, qubits: &[usize]| -> usize {
        qubits.iter().enumerate().map(|(j, &q)| ((value >> j) & 1) << q).sum()
    };
    place(x, &regs.x) | place(y, &regs.y) | place(coin, &regs.coin)
}

/// Places a walk statevector into the circuit's basis using its register map.
pub fn embed_walk_state(state: &StateVector, circuit: &Circuit) -> Result<Vec<Complex64>> {
    let regs =
        circuit.registers.as_ref().ok_or_else(|| Error::InvalidArgument("circuit has no register map".into()))?;
    let dim = check_width(circuit.num_qubits)?;
    if state.coin_dim != 1 << regs.coin.len() || state.nx > 1 << regs.x.len() || state.ny > 1 << regs.y.len() {
        return Err(Error::InvalidArgument("state does not fit the circuit registers".into()));
    }
    let mut out = vec![c(0.0, 0.0); dim];
    for x in 0..state.nx {
        for y in 0..state.ny {
            for coin in 0..state.coin_dim {
                out[circuit_index(regs, x, y, coin)] = state.amplitudes[state.index(x, y, coin)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair() {
        let mut circ = Circuit::new(2);
        circ.add(Gate::h(0));
        circ.add(Gate::cx(0, 1));
        let s = simulate_from_zero(&circ).unwrap();
        assert!((s[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s[3].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(s[1].norm() + s[2].norm() < 1e-15);
    }

    #[test]
    fn swap_exchanges_qubits() {
        let mut circ = Circuit::new(3);
        circ.add(Gate::x(0));
        circ.add(Gate::swap(0, 2));
        let s = simulate_from_zero(&circ).unwrap();
        assert!((s[4].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mcx_fires_only_on_all_ones() {
        let mut circ = Circuit::new(3);
        circ.add(Gate::mcx(&[0, 1], 2));
        let u = circuit_unitary(&circ).unwrap();
        for k in 0..8 {
            let expect = if k & 3 == 3 { k ^ 4 } else { k };
            assert!((u[[expect, k]].re - 1.0).abs() < 1e-15);
        }
    }
}
