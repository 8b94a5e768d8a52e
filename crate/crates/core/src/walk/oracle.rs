//! Dense operator oracles for small lattices.
//!
//! Everything here is assembled from Kronecker products of explicit
//! matrices and never calls the index-permutation path in the parent module,
//! so it can serve as an independent check on it.

use std::f64::consts::PI;

use ndarray::{linalg::kron, Array2};
use num_complex::Complex64;

use super::{coin_operator, Model, WalkParams};
use crate::{Error, Result};

/// Largest statevector dimension for which dense matrices are built.
pub const DENSE_LIMIT: usize = 4096;

/// Decrement (`p0`) and increment (`p1`) permutations on an `n`-cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrices {
    pub n: usize,
    pub p0: Array2<f64>,
    pub p1: Array2<f64>,
}

pub fn shift_matrices(n: usize) -> Result<ShiftMatrices> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cycle size {n} < 2")));
    }
    let mut p0 = Array2::zeros((n, n));
    let mut p1 = Array2::zeros((n, n));
    for k in 0..n {
        p1[[(k + 1) % n, k]] = 1.0;
        p0[[(k + n - 1) % n, k]] = 1.0;
    }
    Ok(ShiftMatrices { n, p0, p1 })
}

/// Normalised DFT matrix `F[j,k] = e^{-2πi jk/n} / √n`, the convention under
/// which `P1 = F Ω F†` and `P0 = F Ω† F†`.
pub fn dft_matrix(n: usize) -> Array2<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| Complex64::from_polar(scale, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// `Ω = diag(1, ω, …, ω^{n-1})` with `ω = e^{2πi/n}`.
pub fn omega_matrix(n: usize) -> Array2<Complex64> {
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[[k, k]] = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
    }
    m
}

pub(crate) fn to_complex(m: &Array2<f64>) -> Array2<Complex64> {
    m.mapv(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
pub(crate) fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

#[cfg(test)]
pub(crate) fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn projector(dim: usize, k: usize) -> Array2<f64> {
    let mut m = Array2::zeros((dim, dim));
    m[[k, k]] = 1.0;
    m
}

/// Explicit one-step matrix `U = S_v (I ⊗ C) S_h (I ⊗ C)` for the coin
/// selected by `coin_bit`. The model's lattice rule is not enforced, so even
/// CAQW cycles can be built for control experiments.
pub fn build_unitary(params: &WalkParams, coin_bit: u8) -> Result<Array2<Complex64>> {
    let dim = params.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge { dim, limit: DENSE_LIMIT });
    }
    let (nx, ny) = (params.nx, params.ny);
    let sx = shift_matrices(nx)?;
    let sy = shift_matrices(ny)?;
    let ix: Array2<f64> = Array2::eye(nx);
    let iy: Array2<f64> = Array2::eye(ny);
    let c = coin_operator(params.coin_angle(coin_bit)).0;
    let c2 = Array2::from_shape_fn((2, 2), |(i, j)| c[i][j]);
    let dc = params.model.coin_dim();

    // Coin indices that increment / decrement / stay.
    let (inc, dec) = match params.model {
        Model::Caqw => (0, 1),
        Model::Laqw => (0, 3),
    };
    let coin = match params.model {
        Model::Caqw => c2,
        Model::Laqw => kron(&c2, &c2),
    };
    let ipos: Array2<f64> = Array2::eye(nx * ny);
    let shift = |k: usize, horizontal: bool| -> Array2<f64> {
        let (p1, p0) =
            if horizontal { (kron(&sx.p1, &iy), kron(&sx.p0, &iy)) } else { (kron(&ix, &sy.p1), kron(&ix, &sy.p0)) };
        if k == inc {
            p1
        } else if k == dec {
            p0
        } else {
            ipos.clone()
        }
    };

    // With S_h = Σ_k H_k ⊗ |k⟩⟨k| and S_v = Σ_l V_l ⊗ |l⟩⟨l|, the mixed-product
    // rule gives U = Σ_{l,k} (V_l H_k) ⊗ (|l⟩⟨l| C |k⟩⟨k| C).
    let mut u = Array2::zeros((dim, dim));
    for l in 0..dc {
        let v_l = shift(l, false);
        for k in 0..dc {
            let pos = sparse_dot(&v_l, &shift(k, true));
            let coin_part = projector(dc, l).dot(&coin).dot(&projector(dc, k)).dot(&coin);
            kron_add(&mut u, &pos, &coin_part);
        }
    }
    Ok(to_complex(&u))
}

/// Dense product that skips the zero entries of `a`.
fn sparse_dot(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for ((i, k), &v) in a.indexed_iter() {
        if v != 0.0 {
            out.row_mut(i).scaled_add(v, &b.row(k));
        }
    }
    out
}

/// `out += a ⊗ b`, visiting only the non-zero entries of `a`.
fn kron_add(out: &mut Array2<f64>, a: &Array2<f64>, b: &Array2<f64>) {
    let (r, c) = b.dim();
    for ((i, j), &v) in a.indexed_iter() {
        if v != 0.0 {
            let mut block = out.slice_mut(ndarray::s![i * r..(i + 1) * r, j * c..(j + 1) * c]);
            block.scaled_add(v, b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{evolve_unchecked, initial_state, probability_distribution, step, StateVector, Walker};
    use ndarray::Array1;

    fn apply(u: &Array2<Complex64>, s: &StateVector) -> StateVector {
        let v = Array1::from(s.amplitudes.clone());
        StateVector { amplitudes: u.dot(&v).to_vec(), ..s.clone() }
    }

    #[test]
    fn two_cycle_shifts_are_swaps() {
        let s = shift_matrices(2).unwrap();
        let swap = ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(s.p0, swap);
        assert_eq!(s.p1, swap);
        assert!(shift_matrices(1).is_err());
    }

    #[test]
    fn three_cycle_increment_wraps() {
        let s = shift_matrices(3).unwrap();
        let e2 = Array1::from(vec![0.0, 0.0, 1.0]);
        assert_eq!(s.p1.dot(&e2), Array1::from(vec![1.0, 0.0, 0.0]));
        assert_eq!(s.p0, s.p1.t());
    }

    #[test]
    fn circulant_diagonalisation() {
        for n in [2, 4, 8, 16, 32] {
            let s = shift_matrices(n).unwrap();
            let f = dft_matrix(n);
            let om = omega_matrix(n);
            let p1 = f.dot(&om).dot(&adjoint(&f));
            let p0 = f.dot(&adjoint(&om)).dot(&adjoint(&f));
            assert!(max_abs_diff(&p1, &to_complex(&s.p1)) < 1e-10, "n={n}");
            assert!(max_abs_diff(&p0, &to_complex(&s.p0)) < 1e-10, "n={n}");
            // F† Ω† F is the complex conjugate of F Ω F†, so for the real
            // increment it yields the increment again, not the decrement.
            let conj = adjoint(&f).dot(&adjoint(&om)).dot(&f);
            assert!(max_abs_diff(&conj, &to_complex(&s.p1)) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn unitary_matches_step_on_small_lattices() {
        let cases = [
            WalkParams::new(Model::Laqw, 4, 4, 1, 3, 0.4, 1.3, 2.2, "").unwrap(),
            WalkParams::new(Model::Laqw, 2, 8, 1, 3, 0.4, 1.3, 2.2, "").unwrap(),
            WalkParams::new(Model::Caqw, 5, 3, 1, 2, 0.4, 1.3, 2.2, "").unwrap(),
        ];
        for p in cases {
            let s0 = initial_state(&p).unwrap();
            for bit in [0, 1] {
                let u = build_unitary(&p, bit).unwrap();
                let id: Array2<Complex64> = Array2::eye(p.dim());
                assert!(max_abs_diff(&u.dot(&adjoint(&u)), &id) < 1e-10);
                let a = apply(&u, &s0);
                let b = step(&s0, bit, &p).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_unitary_matches_evolve() {
        let p = WalkParams::new(Model::Laqw, 4, 4, 0, 2, 0.8, 0.6, 2.9, "0110100").unwrap();
        let u = [build_unitary(&p, 0).unwrap(), build_unitary(&p, 1).unwrap()];
        let mut s = initial_state(&p).unwrap();
        for &b in &p.key_string {
            s = apply(&u[b as usize], &s);
        }
        assert!(s.max_abs_diff(&crate::walk::evolve(&p).unwrap()) < 1e-10);
    }

    #[test]
    fn even_cycle_caqw_keeps_parity() {
        let p = WalkParams {
            x0: 2,
            y0: 5,
            alpha: 0.7,
            theta0: 1.1,
            theta1: 0.4,
            t: 0,
            key_string: vec![],
            model: Model::Caqw,
            nx: 8,
            ny: 8,
        };
        let u = build_unitary(&p, 0).unwrap();
        let s0 = Walker::unchecked(&p).initial_state(2, 5, 0.7);
        let s2 = apply(&u, &apply(&u, &s0));
        let d = probability_distribution(&s2);
        for x in 0..8 {
            for y in 0..8 {
                if d.get(x, y) > 1e-14 {
                    assert_eq!(x % 2, 0);
                    assert_eq!(y % 2, 1);
                }
            }
        }
        // The permutation path agrees.
        let q = WalkParams { t: 2, key_string: vec![0, 0], ..p };
        assert!(evolve_unchecked(&q).max_abs_diff(&s2) < 1e-12);
    }

    #[test]
    fn refuses_large_dimension() {
        let p = WalkParams::new(Model::Laqw, 64, 32, 0, 0, 0.4, 1.3, 2.2, "").unwrap();
        assert!(matches!(build_unitary(&p, 0), Err(Error::DimensionTooLarge { .. })));
    }
}
