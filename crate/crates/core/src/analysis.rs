//! Experiment harnesses: Hellinger sensitivity of exact distributions,
//! Hamming reproducibility of the key pipeline, byte uniformity of the two
//! byte mappings and noise sweeps.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::keygen::{
    generate_key, mod256_map, prime_modulus_map, prime_plan, round_counts, KeyGenConfig, RoundingPolicy,
};
use crate::sampling::{derive_seeds, CountsTable, NoiseParams};
use crate::walk::{distribution, Model, ProbDist, WalkParams};
use crate::{Error, Result};

pub fn hellinger_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2)).sum();
    Ok((FRAC_1_SQRT_2 * s.sqrt()).min(1.0))
}

pub fn hellinger(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    hellinger_slices(&p.probs, &q.probs)
}

/// Differing bit count and its fraction of the length.
pub fn hamming(a: &[u8], b: &[u8]) -> Result<(usize, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok((0, 0.0));
    }
    let d = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok((d, d as f64 / a.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByteUniformity {
    /// Total variation distance of the byte histogram from uniform.
    pub tv_distance: f64,
    pub ones_fraction: f64,
    pub histogram: Vec<u64>,
}

pub fn byte_uniformity(bytes: &[u8]) -> Result<ByteUniformity> {
    if bytes.is_empty() {
        return Err(Error::Empty);
    }
    let mut histogram = vec![0u64; 256];
    for &b in bytes {
        histogram[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    let tv = 0.5 * histogram.iter().map(|&c| (c as f64 / n - 1.0 / 256.0).abs()).sum::<f64>();
    let ones: u32 = bytes.iter().map(|b| b.count_ones()).sum();
    Ok(ByteUniformity { tv_distance: tv, ones_fraction: ones as f64 / (8.0 * n), histogram })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityComparison {
    pub prime: ByteUniformity,
    pub mod256: ByteUniformity,
}

/// Both byte mappings applied to the same rounded tables.
pub fn uniformity_comparison(tables: &[CountsTable], policy: &RoundingPolicy, m1: u32) -> Result<UniformityComparison> {
    let first = tables.first().ok_or(Error::Empty)?;
    let plan = prime_plan(m1, first.positions())?;
    let (mut prime, mut plain) = (Vec::new(), Vec::new());
    for t in tables {
        let rounded = round_counts(t, policy)?;
        prime.extend(prime_modulus_map(&rounded, &plan)?);
        plain.extend(mod256_map(&rounded));
    }
    Ok(UniformityComparison { prime: byte_uniformity(&prime)?, mod256: byte_uniformity(&plain)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationTarget {
    Theta0,
    Theta1,
    Alpha,
    T,
    AllAngles,
    FreshParams,
}

impl PerturbationTarget {
    pub const ALL: [PerturbationTarget; 6] = [
        PerturbationTarget::Theta0,
        PerturbationTarget::Theta1,
        PerturbationTarget::Alpha,
        PerturbationTarget::T,
        PerturbationTarget::AllAngles,
        PerturbationTarget::FreshParams,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationTarget::Theta0 => "theta0",
            PerturbationTarget::Theta1 => "theta1",
            PerturbationTarget::Alpha => "alpha",
            PerturbationTarget::T => "t",
            PerturbationTarget::AllAngles => "all_angles",
            PerturbationTarget::FreshParams => "fresh_params",
        }
    }
}

fn default_magnitude() -> f64 {
    0.01
}
fn default_t_max() -> usize {
    20
}

/// How parameter sets are drawn and perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub target: PerturbationTarget,
    /// Relative angle change; `t` always moves by one step.
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub nx: usize,
    pub ny: usize,
    /// Smallest sampled `t`; defaults to `max(nx, ny) + 1`.
    #[serde(default)]
    pub t_min: Option<usize>,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
}

impl PerturbationSpec {
    pub fn new(target: PerturbationTarget, samples: usize, seed: u64, nx: usize, ny: usize) -> Self {
        PerturbationSpec { target, magnitude: 0.01, samples, seed, nx, ny, t_min: None, t_max: 20 }
    }

    /// Default lattice for each model: 8×8 LAQW, 7×7 CAQW.
    pub fn standard(model: Model, target: PerturbationTarget, samples: usize, seed: u64) -> Self {
        let n = match model {
            Model::Laqw => 8,
            Model::Caqw => 7,
        };
        Self::new(target, samples, seed, n, n)
    }

    pub fn t_range(&self) -> (usize, usize) {
        (self.t_min.unwrap_or(self.nx.max(self.ny) + 1), self.t_max)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.t_range();
        if lo > hi {
            return Err(Error::Config(format!("empty t range {lo}..={hi}")));
        }
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(Error::Config(format!("magnitude {} must be a finite non-negative number", self.magnitude)));
        }
        Ok(())
    }
}

fn open_angle(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let v = rng.random_range(0.0..PI);
        if v > 0.0 {
            return v;
        }
    }
}

fn random_bits(rng: &mut ChaCha20Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Uniformly drawn parameters on the spec's lattice and `t` range.
pub fn random_params(model: Model, spec: &PerturbationSpec, rng: &mut ChaCha20Rng) -> WalkParams {
    let (lo, hi) = spec.t_range();
    let t = rng.random_range(lo..=hi);
    WalkParams {
        x0: rng.random_range(0..spec.nx),
        y0: rng.random_range(0..spec.ny),
        alpha: open_angle(rng),
        theta0: open_angle(rng),
        theta1: open_angle(rng),
        t,
        key_string: random_bits(rng, t),
        model,
        nx: spec.nx,
        ny: spec.ny,
    }
}

/// Perturbed copy of `p`. Angles are scaled by `1 ± magnitude`; `t` moves
/// by one, dropping or appending a key bit, and never drops to the lower
/// end of the range.
pub fn perturb(p: &WalkParams, spec: &PerturbationSpec, rng: &mut ChaCha20Rng) -> WalkParams {
    let mut q = p.clone();
    let scale = |v: &mut f64, rng: &mut ChaCha20Rng| {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        *v *= 1.0 + s * spec.magnitude;
    };
    match spec.target {
        PerturbationTarget::Theta0 => scale(&mut q.theta0, rng),
        PerturbationTarget::Theta1 => scale(&mut q.theta1, rng),
        PerturbationTarget::Alpha => scale(&mut q.alpha, rng),
        PerturbationTarget::AllAngles => {
            scale(&mut q.theta0, rng);
            scale(&mut q.theta1, rng);
            scale(&mut q.alpha, rng);
        }
        PerturbationTarget::T => {
            let down = rng.random::<bool>() && q.t > spec.t_range().0;
            if down {
                q.t -= 1;
                q.key_string.pop();
            } else {
                q.t += 1;
                q.key_string.push(rng.random_range(0..2u8));
            }
        }
        PerturbationTarget::FreshParams => q = random_params(p.model, spec, rng),
    }
    q
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub model: Model,
    pub target: PerturbationTarget,
    pub mean: f64,
    pub std: f64,
    pub n_samples: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

/// Mean Hellinger distance between exact distributions of sampled
/// parameter sets and their perturbations. In fresh-parameter mode every
/// sample is a pair of independently drawn sets.
pub fn sensitivity_experiment(model: Model, spec: &PerturbationSpec) -> Result<SensitivityResult> {
    spec.validate()?;
    let values: Vec<f64> = derive_seeds(spec.seed, spec.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            let p = random_params(model, spec, &mut rng);
            let q = perturb(&p, spec, &mut rng);
            hellinger(&distribution(&p)?, &distribution(&q)?)
        })
        .collect::<Result<_>>()?;
    let (mean, std) = mean_std(&values);
    Ok(SensitivityResult { model, target: spec.target, mean, std, n_samples: values.len(), values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRatio {
    pub target: PerturbationTarget,
    pub laqw: f64,
    pub caqw: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub results: Vec<SensitivityResult>,
    pub ratios: Vec<SensitivityRatio>,
}

pub const SENSITIVITY_CSV_HEADER: &str = "model,target,mean,std,n_samples";

impl SensitivityReport {
    pub fn from_results(results: Vec<SensitivityResult>) -> Self {
        let find = |m: Model, t| results.iter().find(|r| r.model == m && r.target == t);
        let ratios = PerturbationTarget::ALL
            .iter()
            .filter_map(|&t| {
                let (l, c) = (find(Model::Laqw, t)?, find(Model::Caqw, t)?);
                Some(SensitivityRatio { target: t, laqw: l.mean, caqw: c.mean, ratio: l.mean / c.mean })
            })
            .collect();
        SensitivityReport { results, ratios }
    }

    pub fn get(&self, model: Model, target: PerturbationTarget) -> Option<&SensitivityResult> {
        self.results.iter().find(|r| r.model == model && r.target == target)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{SENSITIVITY_CSV_HEADER}\n");
        for r in &self.results {
            let _ = writeln!(s, "{},{},{:.6},{:.6},{}", r.model, r.target.name(), r.mean, r.std, r.n_samples);
        }
        s
    }
}

/// Fixed-width bins on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn of(values: &[f64], bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        for &v in values {
            counts[((v * bins as f64) as usize).min(bins - 1)] += 1;
        }
        Histogram { bin_width: 1.0 / bins as f64, counts }
    }
}

const HISTOGRAM_BINS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub trial_i: usize,
    pub trial_j: usize,
    pub raw_hamming: f64,
    pub key_hamming: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub h_min: f64,
    pub m_max: usize,
    pub key_hex: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproducibilityReport {
    pub trials: Vec<TrialSummary>,
    #[serde(skip)]
    pub pairs: Vec<PairRow>,
    pub mean_raw_hamming: f64,
    pub mean_key_hamming: f64,
    /// Fraction of trial pairs whose keys are identical.
    pub key_identity_rate: f64,
    pub mean_h_min: f64,
    pub mean_m_max: f64,
    pub raw_histogram: Histogram,
    pub key_histogram: Histogram,
    #[serde(skip)]
    pub keys: Vec<Vec<u8>>,
}

pub const PAIR_CSV_HEADER: &str = "trial_i,trial_j,raw_hamming,key_hamming";

impl ReproducibilityReport {
    pub fn pairs_csv(&self) -> String {
        let mut s = format!("{PAIR_CSV_HEADER}\n");
        for p in &self.pairs {
            let _ = writeln!(s, "{},{},{:.6},{:.6}", p.trial_i, p.trial_j, p.raw_hamming, p.key_hamming);
        }
        s
    }
}

/// Runs the pipeline `trials` times. With `fresh_seeds` each trial derives
/// its sampling seeds from its own base seed; otherwise every trial reuses
/// the configuration's seeds.
pub fn reproducibility_experiment(
    config: &KeyGenConfig,
    trials: usize,
    seed: u64,
    fresh_seeds: bool,
) -> Result<ReproducibilityReport> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("{trials} trials, need at least 2")));
    }
    let trial_seeds = if fresh_seeds { derive_seeds(seed, trials) } else { vec![config.seed; trials] };
    let outs = trial_seeds
        .par_iter()
        .map(|&s| {
            let c = KeyGenConfig {
                seed: s,
                seeds: if fresh_seeds { None } else { config.seeds.clone() },
                ..config.clone()
            };
            generate_key(&c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::with_capacity(trials * (trials - 1) / 2);
    for i in 0..trials {
        for j in i + 1..trials {
            pairs.push(PairRow {
                trial_i: i,
                trial_j: j,
                raw_hamming: hamming(&outs[i].raw.bits, &outs[j].raw.bits)?.1,
                key_hamming: hamming(&outs[i].key.key, &outs[j].key.key)?.1,
            });
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|p| p.raw_hamming).collect();
    let key: Vec<f64> = pairs.iter().map(|p| p.key_hamming).collect();
    let n = pairs.len() as f64;
    Ok(ReproducibilityReport {
        trials: outs
            .iter()
            .zip(&trial_seeds)
            .enumerate()
            .map(|(i, (o, &s))| TrialSummary {
                trial: i,
                seed: s,
                h_min: o.entropy.h_min,
                m_max: o.entropy.m_max,
                key_hex: o.key_hex(),
            })
            .collect(),
        mean_raw_hamming: raw.iter().sum::<f64>() / n,
        mean_key_hamming: key.iter().sum::<f64>() / n,
        key_identity_rate: key.iter().filter(|&&k| k == 0.0).count() as f64 / n,
        mean_h_min: outs.iter().map(|o| o.entropy.h_min).sum::<f64>() / trials as f64,
        mean_m_max: outs.iter().map(|o| o.entropy.m_max as f64).sum::<f64>() / trials as f64,
        raw_histogram: Histogram::of(&raw, HISTOGRAM_BINS),
        key_histogram: Histogram::of(&key, HISTOGRAM_BINS),
        keys: outs.into_iter().map(|o| o.key.key).collect(),
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub mix: f64,
    pub readout_flip: f64,
    pub mean_m_max: f64,
    pub mean_raw_hamming: f64,
    pub mean_key_hamming: f64,
    pub key_identity_rate: f64,
    /// Mean normalized Hamming distance of each trial key to the noiseless
    /// key of the configuration's own seed.
    pub key_vs_noiseless: f64,
}

pub const NOISE_CSV_HEADER: &str =
    "mix,readout_flip,mean_m_max,mean_raw_hamming,mean_key_hamming,key_identity_rate,key_vs_noiseless";

/// One reproducibility experiment per noise point.
pub fn noise_sweep(config: &KeyGenConfig, grid: &[NoiseParams], trials: usize, seed: u64) -> Result<Vec<NoiseRow>> {
    let baseline = generate_key(&KeyGenConfig { noise: None, ..config.clone() })?.key.key;
    grid.iter()
        .map(|n| {
            let c = KeyGenConfig { noise: Some(*n), ..config.clone() };
            let rep = reproducibility_experiment(&c, trials, seed, true)?;
            let vs: f64 =
                rep.keys.iter().map(|k| hamming(k, &baseline).map(|h| h.1)).sum::<Result<f64>>()? / trials as f64;
            Ok(NoiseRow {
                mix: n.mix,
                readout_flip: n.readout_flip,
                mean_m_max: rep.mean_m_max,
                mean_raw_hamming: rep.mean_raw_hamming,
                mean_key_hamming: rep.mean_key_hamming,
                key_identity_rate: rep.key_identity_rate,
                key_vs_noiseless: vs,
            })
        })
        .collect()
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut s = format!("{NOISE_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.3},{:.6},{:.6},{:.6},{:.6}",
            r.mix,
            r.readout_flip,
            r.mean_m_max,
            r.mean_raw_hamming,
            r.mean_key_hamming,
            r.key_identity_rate,
            r.key_vs_noiseless
        );
    }
    s
}
