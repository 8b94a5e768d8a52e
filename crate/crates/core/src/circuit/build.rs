//! Circuit builders for the QFT, the Fourier-space adder and both walks.

use std::f64::consts::PI;

use super::{Circuit, Gate, Registers};
use crate::walk::{Model, WalkParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaddSign {
    Plus,
    Minus,
}

impl QaddSign {
    fn factor(self) -> f64 {
        match self {
            QaddSign::Plus => 1.0,
            QaddSign::Minus => -1.0,
        }
    }
}

/// Qubits needed to hold the values `0..n`.
pub fn register_bits(n: usize) -> usize {
    (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize
}

/// QFT on `reg`, where `reg[j]` carries weight `2^j`.
pub fn append_qft(circ: &mut Circuit, reg: &[usize]) {
    let n = reg.len();
    for j in (0..n).rev() {
        circ.add(Gate::h(reg[j]));
        for k in (0..j).rev() {
            circ.add(Gate::cphase(reg[k], reg[j], PI / (1u64 << (j - k)) as f64));
        }
    }
    for j in 0..n / 2 {
        circ.add(Gate::swap(reg[j], reg[n - 1 - j]));
    }
}

pub fn append_iqft(circ: &mut Circuit, reg: &[usize]) {
    let mut tmp = Circuit::new(circ.num_qubits);
    append_qft(&mut tmp, reg);
    circ.extend(tmp.inverse().gates);
}

pub fn build_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    let reg: Vec<usize> = (0..n).collect();
    append_qft(&mut c, &reg);
    c
}

fn qadd_angle(j: usize, n: usize, sign: QaddSign) -> f64 {
    sign.factor() * 2.0 * PI * (1u64 << j) as f64 / (1u64 << n) as f64
}

pub fn build_qadd(n: usize, sign: QaddSign) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.add(Gate::phase(j, qadd_angle(j, n, sign)));
    }
    c
}

/// Controlled QADD: one MCPHASE per register qubit.
fn append_controlled_qadd(circ: &mut Circuit, controls: &[usize], reg: &[usize], sign: QaddSign) {
    for (j, &q) in reg.iter().enumerate() {
        circ.add(Gate::mcphase(controls, q, qadd_angle(j, reg.len(), sign)));
    }
}

fn append_coin(circ: &mut Circuit, coin: &[usize], theta: f64) {
    for &q in coin {
        circ.add(Gate::phase(q, PI));
        circ.add(Gate::ry(q, 2.0 * theta));
    }
}

fn append_value(circ: &mut Circuit, reg: &[usize], value: usize) {
    for (j, &q) in reg.iter().enumerate() {
        if (value >> j) & 1 == 1 {
            circ.add(Gate::x(q));
        }
    }
}

fn layout(params: &WalkParams) -> (usize, Registers) {
    let nc = params.model.coin_qubits();
    let by = register_bits(params.ny);
    let bx = register_bits(params.nx);
    let coin: Vec<usize> = (0..nc).collect();
    let y: Vec<usize> = (nc..nc + by).collect();
    let x: Vec<usize> = (nc + by..nc + by + bx).collect();
    (nc + by + bx, Registers { x, y, coin })
}

fn init_block(params: &WalkParams) -> Circuit {
    let (n, regs) = layout(params);
    let mut c = Circuit::new(n);
    append_value(&mut c, &regs.x, params.x0);
    append_value(&mut c, &regs.y, params.y0);
    for &q in &regs.coin {
        c.add(Gate::ry(q, 2.0 * params.alpha));
    }
    c.registers = Some(regs);
    c
}

fn require(params: &WalkParams, model: Model) -> Result<()> {
    if params.model != model {
        return Err(Error::WrongModel { expected: model.name(), got: params.model.name() });
    }
    params.validate()
}

/// How the pair of coin-controlled adders of an LAQW shift is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaqwAdder {
    /// `QADD⁺` on coin `|00⟩` and `QADD⁻` on coin `|11⟩` as one
    /// doubly-controlled phase per register qubit each.
    DoublyControlled,
    /// The same diagonal written with single-control phases. Since
    /// `[c=00] - [c=11] = 1 - c1 - c2`, register qubit `j` needs
    /// `PHASE(φ_j)` plus `CPHASE(-φ_j)` from each coin qubit.
    #[default]
    SingleControl,
}

fn laqw_shift(circ: &mut Circuit, coin: &[usize], reg: &[usize], adder: LaqwAdder) {
    append_qft(circ, reg);
    match adder {
        LaqwAdder::DoublyControlled => {
            for &q in coin {
                circ.add(Gate::x(q));
            }
            append_controlled_qadd(circ, coin, reg, QaddSign::Plus);
            for &q in coin {
                circ.add(Gate::x(q));
            }
            append_controlled_qadd(circ, coin, reg, QaddSign::Minus);
        }
        LaqwAdder::SingleControl => {
            let n = reg.len();
            for (j, &q) in reg.iter().enumerate() {
                circ.add(Gate::phase(q, qadd_angle(j, n, QaddSign::Plus)));
            }
            // The two coin qubits walk the register in opposite orders so
            // their phase ladders overlap.
            for j in 0..n {
                let k = n - 1 - j;
                circ.add(Gate::cphase(coin[0], reg[j], qadd_angle(j, n, QaddSign::Minus)));
                circ.add(Gate::cphase(coin[1], reg[k], qadd_angle(k, n, QaddSign::Minus)));
            }
        }
    }
    append_iqft(circ, reg);
}

pub fn build_laqw_circuit(params: &WalkParams) -> Result<Circuit> {
    build_laqw_circuit_with(params, LaqwAdder::default())
}

pub fn build_laqw_circuit_with(params: &WalkParams, adder: LaqwAdder) -> Result<Circuit> {
    require(params, Model::Laqw)?;
    let mut c = init_block(params);
    let regs = c.registers.clone().expect("init block sets registers");
    for &bit in &params.key_string {
        let theta = params.coin_angle(bit);
        append_coin(&mut c, &regs.coin, theta);
        laqw_shift(&mut c, &regs.coin, &regs.x, adder);
        append_coin(&mut c, &regs.coin, theta);
        laqw_shift(&mut c, &regs.coin, &regs.y, adder);
    }
    Ok(c)
}

/// Swaps basis values `a` and `b` of `reg` when every qubit in `controls`
/// is set.
fn transposition(controls: &[usize], reg: &[usize], a: usize, b: usize) -> Vec<Gate> {
    let diff = a ^ b;
    debug_assert!(diff != 0);
    let p = diff.trailing_zeros() as usize;
    // After the CX fan-out the two values differ only in bit p; `low` is the
    // one with bit p clear, which the fan-out leaves unchanged.
    let low = if (a >> p) & 1 == 0 { a } else { b };
    let fan: Vec<Gate> =
        (0..reg.len()).filter(|&q| q != p && (diff >> q) & 1 == 1).map(|q| Gate::cx(reg[p], reg[q])).collect();
    let flips: Vec<Gate> = (0..reg.len()).filter(|&q| q != p && (low >> q) & 1 == 0).map(|q| Gate::x(reg[q])).collect();
    let mut ctrl: Vec<usize> = controls.to_vec();
    ctrl.extend((0..reg.len()).filter(|&q| q != p).map(|q| reg[q]));

    let mut out = fan.clone();
    out.extend(flips.iter().cloned());
    out.push(Gate::mcx(&ctrl, reg[p]));
    out.extend(flips);
    out.extend(fan.into_iter().rev());
    out
}

/// Increment modulo `n` on `reg`, controlled on `controls`. Basis values
/// `n..2^bits` are left in place.
pub fn cyclic_increment(controls: &[usize], reg: &[usize], n: usize) -> Vec<Gate> {
    let bits = reg.len();
    let mut out = Vec::new();
    for j in (0..bits).rev() {
        let mut ctrl = controls.to_vec();
        ctrl.extend_from_slice(&reg[..j]);
        out.push(Gate::mcx(&ctrl, reg[j]));
    }
    let full = 1usize << bits;
    if n < full {
        let mut cycle = vec![n, 0];
        cycle.extend((n + 1..full).rev());
        for w in cycle.windows(2).rev() {
            out.extend(transposition(controls, reg, w[0], w[1]));
        }
    }
    out
}

fn caqw_shift(circ: &mut Circuit, coin: usize, reg: &[usize], n: usize) {
    let inc = cyclic_increment(&[coin], reg, n);
    circ.add(Gate::x(coin));
    circ.extend(inc.iter().cloned());
    circ.add(Gate::x(coin));
    circ.extend(inc.into_iter().rev());
}

pub fn build_caqw_circuit(params: &WalkParams) -> Result<Circuit> {
    require(params, Model::Caqw)?;
    let mut c = init_block(params);
    let regs = c.registers.clone().expect("init block sets registers");
    let coin = regs.coin[0];
    for &bit in &params.key_string {
        let theta = params.coin_angle(bit);
        append_coin(&mut c, &regs.coin, theta);
        caqw_shift(&mut c, coin, &regs.x, params.nx);
        append_coin(&mut c, &regs.coin, theta);
        caqw_shift(&mut c, coin, &regs.y, params.ny);
    }
    Ok(c)
}

pub fn build_circuit(params: &WalkParams) -> Result<Circuit> {
    match params.model {
        Model::Laqw => build_laqw_circuit(params),
        Model::Caqw => build_caqw_circuit(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::{circuit_unitary, simulate};
    use num_complex::Complex64;

    #[test]
    fn register_widths() {
        assert_eq!(register_bits(2), 1);
        assert_eq!(register_bits(7), 3);
        assert_eq!(register_bits(8), 3);
        assert_eq!(register_bits(9), 4);
    }

    #[test]
    fn small_qft_shapes() {
        assert_eq!(build_qft(1).gates, vec![Gate::h(0)]);
        let two = build_qft(2);
        assert_eq!(two.gates, vec![Gate::h(1), Gate::cphase(0, 1, PI / 2.0), Gate::h(0), Gate::swap(0, 1)]);
    }

    #[test]
    fn transposition_is_a_permutation_of_two_values() {
        for (a, b) in [(5, 0), (7, 0), (3, 6), (1, 2)] {
            let mut c = Circuit::new(3);
            c.extend(transposition(&[], &[0, 1, 2], a, b));
            let u = circuit_unitary(&c).unwrap();
            for k in 0..8 {
                let img = if k == a {
                    b
                } else if k == b {
                    a
                } else {
                    k
                };
                assert!((u[[img, k]].re - 1.0).abs() < 1e-12, "({a} {b}) at {k}");
            }
        }
    }

    #[test]
    fn cyclic_increment_on_odd_cycles() {
        for n in [3, 5, 7, 9, 11] {
            let bits = register_bits(n);
            let reg: Vec<usize> = (0..bits).collect();
            let mut c = Circuit::new(bits);
            c.extend(cyclic_increment(&[], &reg, n));
            for k in 0..1usize << bits {
                let mut s = vec![Complex64::new(0.0, 0.0); 1 << bits];
                s[k] = Complex64::new(1.0, 0.0);
                let out = simulate(&c, &s).unwrap();
                let img = if k < n { (k + 1) % n } else { k };
                assert!((out[img].re - 1.0).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn wrong_model_rejected() {
        let p = WalkParams::new(Model::Caqw, 7, 7, 0, 0, 0.5, 1.0, 2.0, "01").unwrap();
        assert!(matches!(build_laqw_circuit(&p), Err(Error::WrongModel { .. })));
        let q = WalkParams::new(Model::Laqw, 8, 8, 0, 0, 0.5, 1.0, 2.0, "01").unwrap();
        assert!(build_caqw_circuit(&q).is_err());
    }
}
