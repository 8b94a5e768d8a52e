use std::f64::consts::PI;

use laqw::circuit::*;
use laqw::walk::{dft_matrix, evolve, omega_matrix, shift_matrices, Model, WalkParams};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

fn real(m: &Array2<f64>) -> Array2<Complex64> {
    m.mapv(|v| Complex64::new(v, 0.0))
}

/// Circuit output from |0…0⟩ against walk-core evolution embedded in the
/// circuit basis.
fn circuit_vs_walk(circ: &Circuit, params: &WalkParams) -> f64 {
    let got = simulate_from_zero(circ).unwrap();
    let want = embed_walk_state(&evolve(params).unwrap(), circ).unwrap();
    vec_diff(&got, &want)
}

fn permute_to_physical(state: &[Complex64], layout: &[usize], n_phys: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << n_phys];
    for (l, &amp) in state.iter().enumerate() {
        let p: usize = layout.iter().enumerate().map(|(q, &pq)| ((l >> q) & 1) << pq).sum();
        out[p] = amp;
    }
    out
}

#[test]
fn qft_matches_inverse_dft() {
    for n in 1..=4 {
        let u = circuit_unitary(&build_qft(n)).unwrap();
        let f = dft_matrix(1 << n);
        assert!(max_diff(&u, &adjoint(&f)) < 1e-10, "n={n}");
    }
}

#[test]
fn qadd_is_the_omega_diagonal() {
    for n in 1..=4 {
        let plus = build_qadd(n, QaddSign::Plus);
        let minus = build_qadd(n, QaddSign::Minus);
        assert_eq!(depth(&plus), 1);
        assert_eq!(plus.gate_count(), n);
        let om = omega_matrix(1 << n);
        assert!(max_diff(&circuit_unitary(&plus).unwrap(), &om) < 1e-10);
        assert!(max_diff(&circuit_unitary(&minus).unwrap(), &adjoint(&om)) < 1e-10);
        let mut both = plus.clone();
        both.extend(minus.gates.clone());
        let id: Array2<Complex64> = Array2::eye(1 << n);
        assert!(max_diff(&circuit_unitary(&both).unwrap(), &id) < 1e-12);
    }
    let single = build_qadd(1, QaddSign::Plus);
    assert_eq!(single.gates, vec![Gate::phase(0, PI)]);
}

#[test]
fn qft_sandwich_gives_the_increment() {
    let mut c = build_qft(3);
    c.extend(build_qadd(3, QaddSign::Plus).gates);
    c.extend(build_qft(3).inverse().gates);
    let p1 = real(&shift_matrices(8).unwrap().p1);
    assert!(max_diff(&circuit_unitary(&c).unwrap(), &p1) < 1e-10);
}

#[test]
fn laqw_circuit_reproduces_the_walk() {
    let p = WalkParams::new(Model::Laqw, 4, 4, 1, 2, 0.6, 1.2, 2.5, "011").unwrap();
    for adder in [LaqwAdder::SingleControl, LaqwAdder::DoublyControlled] {
        let c = build_laqw_circuit_with(&p, adder).unwrap();
        assert!(circuit_vs_walk(&c, &p) < 1e-9, "{adder:?}");
        assert!(circuit_vs_walk(&decompose(&c), &p) < 1e-9, "{adder:?}");
    }
    let rect = WalkParams::new(Model::Laqw, 2, 8, 1, 5, 0.3, 0.9, 2.0, "10").unwrap();
    assert!(circuit_vs_walk(&build_laqw_circuit(&rect).unwrap(), &rect) < 1e-9);
}

#[test]
fn zero_step_circuit_is_the_init_block() {
    let p = WalkParams::new(Model::Laqw, 4, 4, 3, 1, 0.6, 1.2, 2.5, "").unwrap();
    let c = build_laqw_circuit(&p).unwrap();
    // x0 = 3 sets two bits, y0 = 1 one bit, plus one RY per coin qubit.
    assert_eq!(c.gate_count(), 5);
    let s = simulate_from_zero(&c).unwrap();
    let regs = c.registers.clone().unwrap();
    let pos_mask: usize = regs.x.iter().chain(&regs.y).map(|&q| 1 << q).sum();
    let want = (3usize << regs.x[0]) | (1 << regs.y[0]);
    let mass: f64 = s.iter().enumerate().filter(|(i, _)| i & pos_mask == want).map(|(_, a)| a.norm_sqr()).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn seven_cycle_increment_wraps() {
    let mut c = Circuit::new(3);
    c.extend(cyclic_increment(&[], &[0, 1, 2], 7));
    let mut s = vec![Complex64::new(0.0, 0.0); 8];
    s[6] = Complex64::new(1.0, 0.0);
    let out = simulate(&c, &s).unwrap();
    assert!((out[0].re - 1.0).abs() < 1e-12);
    s[6] = Complex64::new(0.0, 0.0);
    s[7] = Complex64::new(1.0, 0.0);
    assert!((simulate(&c, &s).unwrap()[7].re - 1.0).abs() < 1e-12);
}

#[test]
fn caqw_circuit_reproduces_the_walk() {
    let p = WalkParams::new(Model::Caqw, 7, 7, 2, 5, 0.9, 0.7, 2.1, "10").unwrap();
    let c = build_caqw_circuit(&p).unwrap();
    assert!(circuit_vs_walk(&c, &p) < 1e-9);
    assert!(circuit_vs_walk(&decompose(&c), &p) < 1e-9);
    let q = WalkParams::new(Model::Caqw, 5, 3, 4, 0, 0.4, 1.3, 2.6, "0110").unwrap();
    assert!(circuit_vs_walk(&build_caqw_circuit(&q).unwrap(), &q) < 1e-9);
}

#[test]
fn routing_preserves_semantics_up_to_layout() {
    let p = WalkParams::new(Model::Laqw, 4, 4, 1, 2, 0.6, 1.2, 2.5, "01").unwrap();
    let low = decompose(&build_laqw_circuit(&p).unwrap());
    let logical = simulate_from_zero(&low).unwrap();
    for map in [CouplingMap::heavy_hex_for(low.num_qubits), CouplingMap::line(6).unwrap()] {
        let r = route(&low, &map).unwrap();
        assert!(r.swap_count > 0);
        for g in &r.circuit.gates {
            if g.qubits.len() == 2 {
                assert!(map.adjacent(g.qubits[0], g.qubits[1]), "{g:?}");
            }
        }
        let phys = simulate_from_zero(&r.circuit).unwrap();
        let want = permute_to_physical(&logical, &r.final_layout, map.num_qubits());
        assert!(vec_diff(&phys, &want) < 1e-8);
        assert!(depth(&r.circuit) >= depth(&low));
    }
}

#[test]
fn heavy_hex_routing_deepens_laqw() {
    let key: String = "01".repeat(10);
    let p = WalkParams::new(Model::Laqw, 8, 8, 1, 1, 0.7, 1.1, 2.3, &key).unwrap();
    let c = build_laqw_circuit(&p).unwrap();
    let r = DepthReport::measure(&c, Model::Laqw, 3, 20, &CouplingPreset::HeavyHex).unwrap();
    assert!(r.swap_count > 0);
    assert!(r.routed_depth > r.logical_depth);
    let a = DepthReport::measure(&c, Model::Laqw, 3, 20, &CouplingPreset::AllToAll).unwrap();
    assert_eq!(a.swap_count, 0);
    assert_eq!(a.routed_depth, a.logical_depth);
}

#[test]
fn controlled_qadd_depth_is_linear() {
    let depths: Vec<usize> = (2..=6)
        .map(|n| {
            let mut c = Circuit::new(n + 2);
            for j in 0..n {
                c.add(Gate::mcphase(&[0, 1], j + 2, 0.1 * (j + 1) as f64));
            }
            depth(&decompose(&c))
        })
        .collect();
    let steps: Vec<usize> = depths.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|&s| s == steps[0]), "{depths:?}");
}

#[test]
fn laqw_depth_is_affine_in_t() {
    let e = depth_scaling_experiment(&[Model::Laqw], &[3], &[8, 9, 10, 11, 12], &CouplingPreset::AllToAll).unwrap();
    let d: Vec<usize> = e.rows.iter().map(|r| r.logical_depth).collect();
    let diffs: Vec<usize> = d.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(diffs.iter().all(|&x| x == diffs[0]), "{d:?}");
    let s = e.slope(Model::Laqw, 3).unwrap();
    assert!((s.logical.r_squared - 1.0).abs() < 1e-12);
    assert!(e.to_csv().starts_with("model,n_qubits,t,logical_depth,routed_depth,gate_count,swap_count\n"));
}

#[test]
fn walk_circuit_json_lines_round_trip() {
    let p = WalkParams::new(Model::Caqw, 5, 5, 1, 1, 0.7, 1.1, 2.3, "01").unwrap();
    let c = build_caqw_circuit(&p).unwrap();
    let back = Circuit::from_json_lines(&c.to_json_lines(), Some(c.num_qubits)).unwrap();
    assert_eq!(back.gates, c.gates);
}

fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
    let qubits = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(5)).prop_shuffle();
    (0usize..9, qubits, -3.0f64..3.0).prop_map(|(k, qs, a)| match (k, qs.len()) {
        (0, _) => Gate::x(qs[0]),
        (1, _) => Gate::h(qs[0]),
        (3, _) => Gate::phase(qs[0], a),
        (4, l) if l >= 2 => Gate::cx(qs[0], qs[1]),
        (5, l) if l >= 2 => Gate::cphase(qs[0], qs[1], a),
        (6, l) if l >= 2 => Gate::swap(qs[0], qs[1]),
        (7, l) => Gate::mcx(&qs[..l - 1], qs[l - 1]),
        (8, l) => Gate::mcphase(&qs[..l - 1], qs[l - 1], a),
        _ => Gate::ry(qs[0], a),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decompose_preserves_unitary(gates in proptest::collection::vec(arb_gate(5), 1..8), width in 5usize..7) {
        let mut c = Circuit::new(width);
        c.extend(gates);
        let d = decompose(&c);
        prop_assert!(d.gates.iter().all(|g| matches!(g.kind,
            GateKind::Ry | GateKind::Phase | GateKind::H | GateKind::X | GateKind::Cx)));
        let err = max_diff(&circuit_unitary(&c).unwrap(), &circuit_unitary(&d).unwrap());
        prop_assert!(err < 1e-8, "err {}", err);
    }

    #[test]
    fn route_on_a_line_preserves_state(gates in proptest::collection::vec(arb_gate(5), 1..10)) {
        let mut c = Circuit::new(5);
        c.extend(gates);
        let low = decompose(&c);
        let map = CouplingMap::line(5).unwrap();
        let r = route(&low, &map).unwrap();
        let want = permute_to_physical(&simulate_from_zero(&low).unwrap(), &r.final_layout, 5);
        prop_assert!(vec_diff(&simulate_from_zero(&r.circuit).unwrap(), &want) < 1e-8);
        if r.swap_count > 0 {
            prop_assert!(depth(&r.circuit) >= depth(&low));
        }
    }

    #[test]
    fn peephole_pass_preserves_unitary(gates in proptest::collection::vec(arb_gate(4), 1..12)) {
        let mut c = Circuit::new(4);
        for g in gates {
            c.add(g.clone());
            c.add(g.inverse());
        }
        let p = cancel_inverse_pairs(&c);
        prop_assert!(p.gate_count() <= c.gate_count());
        let err = max_diff(&circuit_unitary(&c).unwrap(), &circuit_unitary(&p).unwrap());
        prop_assert!(err < 1e-10);
    }
}
