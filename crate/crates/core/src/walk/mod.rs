//! Exact statevector evolution of coined alternating walks on `nx × ny`
//! periodic lattices.
//!
//! Amplitudes are stored position-major, coin-minor: the amplitude of
//! `|x, y⟩ ⊗ |c⟩` lives at `(x * ny + y) * coin_dim + c`. For the
//! lackadaisical walk the coin register holds two qubits and `c = 2·c₁ + c₂`,
//! so the basis order is `|00⟩, |01⟩, |10⟩, |11⟩`.
//!
//! Shift conventions: coin `|0⟩` (CAQW) or `|00⟩` (LAQW) increments the
//! coordinate, `|1⟩` / `|11⟩` decrements it, and `|01⟩`, `|10⟩` leave the
//! walker in place.

pub(crate) mod oracle;
mod params;

pub use oracle::{build_unitary, dft_matrix, omega_matrix, shift_matrices, ShiftMatrices, DENSE_LIMIT};
pub use params::{Model, WalkParams};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Result;

/// The real-orthogonal coin `[[cos θ, sin θ], [sin θ, −cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator(pub [[f64; 2]; 2]);

pub fn coin_operator(theta: f64) -> CoinOperator {
    let (s, c) = theta.sin_cos();
    CoinOperator([[c, s], [s, -c]])
}

impl CoinOperator {
    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Two-qubit coin `C ⊗ C`, indexed by `2·c₁ + c₂`.
    pub fn tensor_square(&self) -> [[f64; 4]; 4] {
        let m = &self.0;
        let mut out = [[0.0; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[r >> 1][c >> 1] * m[r & 1][c & 1];
            }
        }
        out
    }
}

/// Builds the four-dimensional LAQW coin for an angle.
pub type LaqwCoinBuilder = fn(f64) -> [[f64; 4]; 4];

/// Default LAQW coin: the single-qubit coin applied to both coin qubits.
pub fn tensor_coin(theta: f64) -> [[f64; 4]; 4] {
    coin_operator(theta).tensor_square()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub nx: usize,
    pub ny: usize,
    pub coin_dim: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(nx: usize, ny: usize, coin_dim: usize) -> Self {
        StateVector { nx, ny, coin_dim, amplitudes: vec![Complex64::new(0.0, 0.0); nx * ny * coin_dim] }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, coin: usize) -> usize {
        (x * self.ny + y) * self.coin_dim + coin
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Measurement distribution over lattice positions, indexed by `x * ny + y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    pub nx: usize,
    pub ny: usize,
    pub probs: Vec<f64>,
}

impl ProbDist {
    pub fn uniform(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        ProbDist { nx, ny, probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(nx: usize, ny: usize, x: usize, y: usize) -> Self {
        let mut probs = vec![0.0; nx * ny];
        probs[x * ny + y] = 1.0;
        ProbDist { nx, ny, probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Coin and shift actions of a walk model, without parameter validation.
#[derive(Debug, Clone, Copy)]
pub struct Walker {
    pub nx: usize,
    pub ny: usize,
    pub model: Model,
    pub laqw_coin: LaqwCoinBuilder,
}

impl Walker {
    /// Walker for validated parameters.
    pub fn new(params: &WalkParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::unchecked(params))
    }

    /// Walker that skips the lattice-size rule of the model. Even-cycle
    /// CAQW instances (the parity negative control) are built this way.
    pub fn unchecked(params: &WalkParams) -> Self {
        Walker { nx: params.nx, ny: params.ny, model: params.model, laqw_coin: tensor_coin }
    }

    pub fn with_laqw_coin(mut self, coin: LaqwCoinBuilder) -> Self {
        self.laqw_coin = coin;
        self
    }

    pub fn coin_dim(&self) -> usize {
        self.model.coin_dim()
    }

    pub fn initial_state(&self, x0: usize, y0: usize, alpha: f64) -> StateVector {
        let mut state = StateVector::zeros(self.nx, self.ny, self.coin_dim());
        let (s, c) = alpha.sin_cos();
        let qubit = [c, s];
        match self.model {
            Model::Caqw => {
                for (k, amp) in qubit.iter().enumerate() {
                    let i = state.index(x0, y0, k);
                    state.amplitudes[i] = Complex64::new(*amp, 0.0);
                }
            }
            Model::Laqw => {
                for k in 0..4 {
                    let i = state.index(x0, y0, k);
                    state.amplitudes[i] = Complex64::new(qubit[k >> 1] * qubit[k & 1], 0.0);
                }
            }
        }
        state
    }

    /// Applies the coin for `theta` to the coin register at every position.
    pub fn apply_coin(&self, state: &mut StateVector, theta: f64) {
        match self.model {
            Model::Caqw => {
                let m = coin_operator(theta).0;
                for block in state.amplitudes.chunks_exact_mut(2) {
                    let (a, b) = (block[0], block[1]);
                    block[0] = a * m[0][0] + b * m[0][1];
                    block[1] = a * m[1][0] + b * m[1][1];
                }
            }
            Model::Laqw => {
                let m = (self.laqw_coin)(theta);
                for block in state.amplitudes.chunks_exact_mut(4) {
                    let old = [block[0], block[1], block[2], block[3]];
                    for (r, out) in block.iter_mut().enumerate() {
                        *out = old.iter().zip(&m[r]).map(|(a, w)| a * *w).sum::<Complex64>();
                    }
                }
            }
        }
    }

    /// Coordinate displacement for each coin basis state.
    fn displacement(&self, coin: usize) -> isize {
        match (self.model, coin) {
            (Model::Caqw, 0) | (Model::Laqw, 0) => 1,
            (Model::Caqw, 1) | (Model::Laqw, 3) => -1,
            _ => 0,
        }
    }

    /// Horizontal shift `S_h`.
    pub fn shift_horizontal(&self, state: &StateVector) -> StateVector {
        self.shift(state, true)
    }

    /// Vertical shift `S_v`.
    pub fn shift_vertical(&self, state: &StateVector) -> StateVector {
        self.shift(state, false)
    }

    fn shift(&self, state: &StateVector, horizontal: bool) -> StateVector {
        let (nx, ny, dc) = (self.nx, self.ny, self.coin_dim());
        let mut out = StateVector::zeros(nx, ny, dc);
        for x in 0..nx {
            for y in 0..ny {
                for coin in 0..dc {
                    let d = self.displacement(coin);
                    let (tx, ty) = if horizontal { (wrap(x, d, nx), y) } else { (x, wrap(y, d, ny)) };
                    let dst = out.index(tx, ty, coin);
                    out.amplitudes[dst] = state.amplitudes[state.index(x, y, coin)];
                }
            }
        }
        out
    }

    /// One step `U = S_v (I ⊗ C) S_h (I ⊗ C)` with the coin chosen by `coin_bit`.
    pub fn step(&self, state: &StateVector, theta: f64) -> StateVector {
        let mut s = state.clone();
        self.apply_coin(&mut s, theta);
        let mut s = self.shift_horizontal(&s);
        self.apply_coin(&mut s, theta);
        self.shift_vertical(&s)
    }

    /// Evolves through every key bit, calling `observe` after each step
    /// (step index starting at 1).
    pub fn evolve_with<F>(&self, params: &WalkParams, mut observe: F) -> StateVector
    where
        F: FnMut(usize, &StateVector),
    {
        let mut state = self.initial_state(params.x0, params.y0, params.alpha);
        for (i, &bit) in params.key_string.iter().enumerate() {
            state = self.step(&state, params.coin_angle(bit));
            observe(i + 1, &state);
        }
        state
    }
}

#[inline]
fn wrap(v: usize, d: isize, n: usize) -> usize {
    ((v as isize + d).rem_euclid(n as isize)) as usize
}

pub fn initial_state(params: &WalkParams) -> Result<StateVector> {
    let walker = Walker::new(params)?;
    Ok(walker.initial_state(params.x0, params.y0, params.alpha))
}

/// One walk step using coin `θ₀` (bit 0) or `θ₁` (bit 1).
pub fn step(state: &StateVector, coin_bit: u8, params: &WalkParams) -> Result<StateVector> {
    let walker = Walker::new(params)?;
    Ok(walker.step(state, params.coin_angle(coin_bit)))
}

/// Applies `t` steps, using key bit `K[i]` to select the coin at step `i`.
pub fn evolve(params: &WalkParams) -> Result<StateVector> {
    let walker = Walker::new(params)?;
    Ok(walker.evolve_with(params, |_, _| {}))
}

/// Like [`evolve`] but without the lattice-size rule of the model.
pub fn evolve_unchecked(params: &WalkParams) -> StateVector {
    Walker::unchecked(params).evolve_with(params, |_, _| {})
}

pub fn probability_distribution(state: &StateVector) -> ProbDist {
    let probs =
        state.amplitudes.chunks_exact(state.coin_dim).map(|block| block.iter().map(|a| a.norm_sqr()).sum()).collect();
    ProbDist { nx: state.nx, ny: state.ny, probs }
}

/// Exact distribution `p_{x,y} = |⟨x,y|U^t|ψ₀⟩|²` for the parameters.
pub fn distribution(params: &WalkParams) -> Result<ProbDist> {
    evolve(params).map(|s| probability_distribution(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn laqw(n: usize, bits: &str) -> WalkParams {
        WalkParams::new(Model::Laqw, n, n, 1, 2, 0.7, 1.1, 2.3, bits).unwrap()
    }

    #[test]
    fn coin_special_angles() {
        assert_eq!(coin_operator(0.0).0, [[1.0, 0.0], [0.0, -1.0]]);
        let flip = coin_operator(FRAC_PI_2).0;
        assert_abs_diff_eq!(flip[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flip[0][1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flip[1][1], 0.0, epsilon = 1e-15);
        let h = coin_operator(FRAC_PI_4).0;
        for (v, e) in h.iter().flatten().zip([FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn coin_is_symmetric_orthogonal_with_det_minus_one() {
        for k in 0..50 {
            let c = coin_operator(0.13 * k as f64).0;
            assert_eq!(c[0][1], c[1][0]);
            let cc = |i: usize, j: usize| c[i][0] * c[j][0] + c[i][1] * c[j][1];
            assert_abs_diff_eq!(cc(0, 0), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cc(0, 1), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cc(1, 1), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(coin_operator(0.13 * k as f64).determinant(), -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn initial_coin_amplitudes() {
        let mut p = laqw(4, "");
        p.alpha = FRAC_PI_4;
        let s = initial_state(&p).unwrap();
        for c in 0..4 {
            assert_abs_diff_eq!(s.amplitudes[s.index(1, 2, c)].re, 0.5, epsilon = 1e-15);
        }
        p.alpha = FRAC_PI_3;
        let s = initial_state(&p).unwrap();
        let expect = [0.25, 3f64.sqrt() / 4.0, 3f64.sqrt() / 4.0, 0.75];
        for (c, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(s.amplitudes[s.index(1, 2, c)].re, *e, epsilon = 1e-15);
        }

        let mut c = WalkParams::new(Model::Caqw, 5, 5, 3, 4, 1e-9, 1.0, 2.0, "").unwrap();
        c.alpha = 1e-9;
        let s = initial_state(&c).unwrap();
        assert_abs_diff_eq!(s.amplitudes[s.index(3, 4, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes[s.index(3, 4, 1)].re, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn laqw_self_loop_coins_do_not_move() {
        let p = laqw(4, "");
        let w = Walker::new(&p).unwrap();
        for coin in [1, 2] {
            let mut s = StateVector::zeros(4, 4, 4);
            let i = s.index(2, 3, coin);
            s.amplitudes[i] = Complex64::new(1.0, 0.0);
            assert_eq!(w.shift_horizontal(&s), s);
            assert_eq!(w.shift_vertical(&s), s);
        }
    }

    #[test]
    fn caqw_coin_zero_increments_x_with_wrap() {
        let p = WalkParams::new(Model::Caqw, 5, 5, 0, 0, 0.5, 0.5, 0.5, "").unwrap();
        let w = Walker::new(&p).unwrap();
        for x in 0..5 {
            let mut s = StateVector::zeros(5, 5, 2);
            let i = s.index(x, 1, 0);
            s.amplitudes[i] = Complex64::new(1.0, 0.0);
            let out = w.shift_horizontal(&s);
            assert_eq!(out.amplitudes[out.index((x + 1) % 5, 1, 0)].re, 1.0);
            let mut s = StateVector::zeros(5, 5, 2);
            s.amplitudes[i + 1] = Complex64::new(1.0, 0.0);
            let out = w.shift_horizontal(&s);
            assert_eq!(out.amplitudes[out.index((x + 4) % 5, 1, 1)].re, 1.0);
        }
    }

    #[test]
    fn empty_and_single_step_evolution() {
        let p = laqw(4, "");
        assert_eq!(evolve(&p).unwrap(), initial_state(&p).unwrap());
        let p1 = laqw(4, "0");
        let expect = step(&initial_state(&p1).unwrap(), 0, &p1).unwrap();
        assert_eq!(evolve(&p1).unwrap(), expect);
    }

    #[test]
    fn distribution_of_basis_and_uniform_states() {
        let mut s = StateVector::zeros(8, 8, 4);
        let i = s.index(2, 3, 1);
        s.amplitudes[i] = Complex64::new(0.0, 1.0);
        let d = probability_distribution(&s);
        assert_eq!(d.get(2, 3), 1.0);
        assert_eq!(d.total(), 1.0);

        let amp = 1.0 / (256f64).sqrt();
        let u = StateVector { nx: 8, ny: 8, coin_dim: 4, amplitudes: vec![Complex64::new(amp, 0.0); 256] };
        for p in probability_distribution(&u).probs {
            assert_abs_diff_eq!(p, 1.0 / 64.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn laqw_covers_8x8_for_t_above_lattice_size() {
        let p = WalkParams::new(Model::Laqw, 8, 8, 3, 5, 0.9, 1.2, 2.1, "010011010").unwrap();
        let d = distribution(&p).unwrap();
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-9);
        assert!(d.probs.iter().all(|&q| q > 0.0), "{:?}", d.probs);
    }

    #[test]
    fn evolution_preserves_norm() {
        let p = WalkParams::new(Model::Caqw, 7, 7, 3, 5, 0.9, 1.2, 2.1, "0100110101100").unwrap();
        assert_abs_diff_eq!(evolve(&p).unwrap().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = laqw(4, "01");
        p.t = 3;
        assert!(evolve(&p).is_err());
        let p = WalkParams { nx: 6, ..laqw(4, "") };
        assert!(evolve(&p).is_err());
        let p = WalkParams { x0: 4, ..laqw(4, "") };
        assert!(initial_state(&p).is_err());
    }
}
