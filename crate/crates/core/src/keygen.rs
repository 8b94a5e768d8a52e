//! Key generation from sampled walk counts: interval rounding, prime-modulus
//! byte mapping, min-entropy bounds, the leftover-hash budget and weighted
//! extraction.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, bytes_to_bits};
use crate::sampling::{derive_seeds, run_experiment, CountsTable, NoiseParams};
use crate::special::beta_quantile;
use crate::walk::WalkParams;
use crate::{Error, Result};

/// Interval rounding, all fractions of the shot count `S`.
///
/// `fine_fraction` and `coarse_fraction` are the two interval widths; a count
/// at or below `threshold_fraction·S` is rounded up to the fine grid, larger
/// counts to the nearest coarse multiple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundingPolicy {
    pub fine_fraction: f64,
    pub coarse_fraction: f64,
    pub threshold_fraction: f64,
}

impl Default for RoundingPolicy {
    fn default() -> Self {
        RoundingPolicy { fine_fraction: 0.005, coarse_fraction: 0.010, threshold_fraction: 0.03 }
    }
}

fn exact_multiple(fraction: f64, shots: u64, name: &str) -> Result<u64> {
    let v = fraction * shots as f64;
    let r = v.round();
    if r < 1.0 || (v - r).abs() > 1e-9 * v.max(1.0) {
        return Err(Error::Config(format!("{name}·S = {v} is not a positive integer")));
    }
    Ok(r as u64)
}

impl RoundingPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = self.fine_fraction > 0.0
            && self.fine_fraction <= self.coarse_fraction
            && self.threshold_fraction >= self.fine_fraction;
        if !ok {
            return Err(Error::Config(format!("inconsistent rounding policy {self:?}")));
        }
        Ok(())
    }

    /// Integer interval sizes and threshold for `shots`.
    pub fn steps(&self, shots: u64) -> Result<(u64, u64, u64)> {
        self.validate()?;
        let fine = exact_multiple(self.fine_fraction, shots, "fine_fraction")?;
        let coarse = exact_multiple(self.coarse_fraction, shots, "coarse_fraction")?;
        let threshold = (self.threshold_fraction * shots as f64 * (1.0 + 1e-12)).floor() as u64;
        Ok((fine, coarse, threshold))
    }

    pub fn round(&self, c: u64, shots: u64) -> Result<u64> {
        let (fine, coarse, threshold) = self.steps(shots)?;
        Ok(round_with(c, fine, coarse, threshold))
    }
}

fn round_with(c: u64, fine: u64, coarse: u64, threshold: u64) -> u64 {
    if c <= threshold {
        c.div_ceil(fine) * fine
    } else {
        (2 * c + coarse) / (2 * coarse) * coarse
    }
}

/// Rounded copy of `counts`. The rounded values need not sum to `S`.
pub fn round_counts(counts: &CountsTable, policy: &RoundingPolicy) -> Result<CountsTable> {
    let (fine, coarse, threshold) = policy.steps(counts.shots)?;
    Ok(CountsTable {
        counts: counts.counts.iter().map(|&c| round_with(c, fine, coarse, threshold)).collect(),
        ..counts.clone()
    })
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Moduli assigned to rank positions: consecutive primes from `m1`,
/// restarting at `m1` whenever the next prime would reach 256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePlan {
    pub m1: u32,
    pub primes: Vec<u32>,
}

pub fn prime_plan(m1: u32, positions: usize) -> Result<PrimePlan> {
    if !is_prime(m1) || m1 >= 256 {
        return Err(Error::Config(format!("m1 = {m1} must be a prime below 256")));
    }
    let mut primes = Vec::with_capacity(positions);
    let mut p = m1;
    while primes.len() < positions {
        primes.push(p);
        p = (p + 1..).find(|&q| is_prime(q)).expect("primes are unbounded");
        if p >= 256 {
            p = m1;
        }
    }
    Ok(PrimePlan { m1, primes })
}

fn prime_byte(value: u64, m: u32) -> u8 {
    let m = m as u64;
    let r = value % m;
    // floor(r/(m-1)·255 + 1/2) in integers; m = 2 gives 0 or 255.
    ((510 * r + (m - 1)) / (2 * (m - 1))) as u8
}

/// Rank order 𝓘_r: positions sorted by `(c̃_i, i)`.
pub fn rank_order(rounded: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rounded.len()).collect();
    idx.sort_by_key(|&i| (rounded[i], i));
    idx
}

/// Byte per position, in position order. The `k`-th position in rank order
/// is reduced modulo `plan.primes[k]`.
pub fn prime_modulus_map(rounded: &CountsTable, plan: &PrimePlan) -> Result<Vec<u8>> {
    let n = rounded.positions();
    if plan.primes.len() != n {
        return Err(Error::LengthMismatch(plan.primes.len(), n));
    }
    let mut bytes = vec![0u8; n];
    for (k, &i) in rank_order(&rounded.counts).iter().enumerate() {
        bytes[i] = prime_byte(rounded.counts[i], plan.primes[k]);
    }
    Ok(bytes)
}

/// Baseline mapping `c̃ mod 256`.
pub fn mod256_map(rounded: &CountsTable) -> Vec<u8> {
    rounded.counts.iter().map(|&c| (c % 256) as u8).collect()
}

/// Concatenated big-endian bit expansion of per-run byte blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBitstring {
    #[serde(with = "bits::serde_ascii")]
    pub bits: Vec<u8>,
    pub segment_len: usize,
    pub runs: usize,
}

impl RawBitstring {
    pub fn segment(&self, r: usize) -> &[u8] {
        &self.bits[r * self.segment_len..(r + 1) * self.segment_len]
    }

    pub fn segments(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks(self.segment_len.max(1))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn assemble_raw(blocks: &[Vec<u8>]) -> Result<RawBitstring> {
    let width = blocks.first().map_or(0, Vec::len);
    if let Some(b) = blocks.iter().find(|b| b.len() != width) {
        return Err(Error::LengthMismatch(b.len(), width));
    }
    let bits: Vec<u8> = blocks.iter().flat_map(|b| bytes_to_bits(b)).collect();
    Ok(RawBitstring { bits, segment_len: 8 * width, runs: blocks.len() })
}

/// Clopper–Pearson one-sided upper bound on the largest outcome probability
/// and the corresponding min-entropy.
pub fn min_entropy_cp(c_max: u64, shots: u64, confidence: f64) -> (f64, f64) {
    let p_ub = if c_max >= shots { 1.0 } else { beta_quantile(confidence, (c_max + 1) as f64, (shots - c_max) as f64) };
    (p_ub, h_from(p_ub))
}

/// Normal-approximation bound at z = 2.576.
pub fn min_entropy_normal(c_max: u64, shots: u64) -> (f64, f64) {
    const Z: f64 = 2.576;
    let p = c_max as f64 / shots as f64;
    let sd = if shots > 1 { (p * (1.0 - p) / (shots - 1) as f64).sqrt() } else { 0.0 };
    let p_ub = (p + Z * sd).min(1.0);
    (p_ub, h_from(p_ub))
}

fn h_from(p_ub: f64) -> f64 {
    (-p_ub.log2()).max(0.0)
}

/// `floor(h_min·positions·R − 2·log2(1/ε))`, clamped at zero.
pub fn extraction_budget(h_min: f64, positions: usize, runs: usize, epsilon: f64) -> usize {
    let loss = 2.0 * (1.0 / epsilon).log2();
    let m = (h_min * positions as f64 * runs as f64 - loss).floor();
    if m < 0.0 {
        warn!("extraction budget {m} is negative, clamping to 0");
        return 0;
    }
    m as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    #[serde(with = "bits::serde_ascii")]
    pub key: Vec<u8>,
    pub allocations: Vec<usize>,
    pub weights: Vec<u64>,
    pub total_weight: u64,
}

impl KeyMaterial {
    pub fn hex(&self) -> String {
        bits::to_hex(&self.key)
    }
}

/// Takes `m_r` leading bits from each segment, with `m_r` proportional to
/// `w_r = floor(S·α_r)` and the rounding remainder given to the last run.
pub fn weighted_extract(segments: &[&[u8]], alphas: &[f64], shots: u64, m: usize) -> Result<KeyMaterial> {
    if segments.len() != alphas.len() {
        return Err(Error::LengthMismatch(segments.len(), alphas.len()));
    }
    if segments.is_empty() {
        return Err(Error::Empty);
    }
    let weights: Vec<u64> = alphas.iter().map(|&a| (shots as f64 * a).floor().max(0.0) as u64).collect();
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("total extraction weight is zero".into()));
    }
    let r = segments.len();
    let mut alloc: Vec<usize> =
        weights[..r - 1].iter().map(|&w| (w as u128 * m as u128 / total as u128) as usize).collect();
    alloc.push(m - alloc.iter().sum::<usize>());
    let mut key = Vec::with_capacity(m);
    for (run, (seg, &need)) in segments.iter().zip(&alloc).enumerate() {
        if need > seg.len() {
            return Err(Error::Allocation { run, needed: need, available: seg.len() });
        }
        key.extend_from_slice(&seg[..need]);
    }
    Ok(KeyMaterial { key, allocations: alloc, weights, total_weight: total })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntropy {
    pub run: usize,
    pub c_max: u64,
    pub p_hat_max: f64,
    pub p_ub: f64,
    pub h_min: f64,
    pub p_ub_normal: f64,
    pub h_min_normal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub runs: Vec<RunEntropy>,
    /// Minimum Clopper–Pearson min-entropy over runs, bits per block.
    pub h_min: f64,
    pub h_min_normal: f64,
    /// `h_min · positions`, the raw entropy of one run.
    pub k_raw: f64,
    pub positions: usize,
    pub confidence: f64,
    pub epsilon_exponent: u32,
    pub m_max: usize,
}

/// Min-entropy from the unrounded counts of every run.
pub fn entropy_report(tables: &[CountsTable], confidence: f64, epsilon_exponent: u32) -> Result<EntropyReport> {
    let first = tables.first().ok_or(Error::Empty)?;
    let positions = first.positions();
    let runs: Vec<RunEntropy> = tables
        .iter()
        .map(|t| {
            let c_max = t.max_count();
            let (p_ub, h_min) = min_entropy_cp(c_max, t.shots, confidence);
            let (p_ub_normal, h_min_normal) = min_entropy_normal(c_max, t.shots);
            RunEntropy {
                run: t.run,
                c_max,
                p_hat_max: c_max as f64 / t.shots as f64,
                p_ub,
                h_min,
                p_ub_normal,
                h_min_normal,
            }
        })
        .collect();
    let h_min = runs.iter().map(|r| r.h_min).fold(f64::INFINITY, f64::min);
    let h_min_normal = runs.iter().map(|r| r.h_min_normal).fold(f64::INFINITY, f64::min);
    let eps = (-(epsilon_exponent as f64)).exp2();
    Ok(EntropyReport {
        m_max: extraction_budget(h_min, positions, tables.len(), eps),
        runs,
        h_min,
        h_min_normal,
        k_raw: h_min * positions as f64,
        positions,
        confidence,
        epsilon_exponent,
    })
}

fn default_m1() -> u32 {
    11
}
fn default_confidence() -> f64 {
    0.995
}
fn default_epsilon_exponent() -> u32 {
    80
}
fn default_key_bits() -> usize {
    128
}
fn default_shots() -> u64 {
    1_000_000
}
fn default_runs() -> usize {
    10
}

/// Full pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyGenConfig {
    /// One shared parameter set or one per run.
    pub params: Vec<WalkParams>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Explicit per-run sampling seeds; derived from `seed` when absent.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rounding: RoundingPolicy,
    #[serde(default = "default_m1")]
    pub m1: u32,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_epsilon_exponent")]
    pub epsilon_exponent: u32,
    #[serde(default = "default_key_bits")]
    pub key_bits: usize,
    #[serde(default)]
    pub noise: Option<NoiseParams>,
}

impl KeyGenConfig {
    /// Ten 8×8 LAQW runs of 10⁶ shots, each with its own parameters, and
    /// the default post-processing.
    pub fn reference() -> Self {
        let walk = |x0, y0, alpha, theta0, theta1, key: &str| {
            WalkParams::new(crate::walk::Model::Laqw, 8, 8, x0, y0, alpha, theta0, theta1, key)
                .expect("reference parameters are valid")
        };
        KeyGenConfig {
            params: vec![
                walk(1, 4, 0.47286202043922704, 2.3601341816576173, 3.105486085508826, "0111001111"),
                walk(5, 1, 2.3889675104553048, 1.886540718444314, 1.4418252170376247, "11111001100010100"),
                walk(5, 3, 0.3175838947133332, 2.861524666966439, 1.4301360921277653, "1010010011"),
                walk(2, 0, 2.1283238622504994, 2.9527455920676666, 1.7021581887504136, "0100101110"),
                walk(3, 3, 1.7650399575573414, 2.0836993661858885, 0.490068933763777, "0100000111"),
                walk(0, 5, 2.9550894381975823, 1.8662915082538982, 1.3574907006893553, "0111001111"),
                walk(4, 6, 1.29567271962376, 1.483539959002641, 0.3023132575828758, "110100110"),
                walk(4, 7, 1.7674264620491875, 1.5404855451526607, 0.23151509326512104, "0110010001110101110"),
                walk(3, 6, 2.9338043576145636, 1.1170153044862074, 1.8354856834822646, "100101101110"),
                walk(6, 4, 1.7744562469498035, 0.9489078475243791, 1.6728163755960788, "111111110001"),
            ],
            shots: default_shots(),
            runs: default_runs(),
            seeds: None,
            seed: 0,
            rounding: RoundingPolicy::default(),
            m1: default_m1(),
            confidence: default_confidence(),
            epsilon_exponent: default_epsilon_exponent(),
            key_bits: default_key_bits(),
            noise: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.params.len() != 1 && self.params.len() != self.runs {
            return Err(Error::Config(format!("{} parameter sets for {} runs", self.params.len(), self.runs)));
        }
        let positions = self.params[0].positions();
        for p in &self.params {
            p.validate()?;
            if p.positions() != positions {
                return Err(Error::Config("runs must share the lattice size".into()));
            }
        }
        if let Some(s) = &self.seeds {
            if s.len() != self.runs {
                return Err(Error::Config(format!("{} seeds for {} runs", s.len(), self.runs)));
            }
        }
        if !(0.0 < self.confidence && self.confidence < 1.0) {
            return Err(Error::Config("confidence must lie in (0, 1)".into()));
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.rounding.steps(self.shots)?;
        prime_plan(self.m1, positions)?;
        Ok(())
    }

    pub fn resolved_seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| derive_seeds(self.seed, self.runs))
    }

    pub fn alphas(&self) -> Vec<f64> {
        (0..self.runs).map(|r| self.params[r.min(self.params.len() - 1)].alpha).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyGenOutput {
    pub key: KeyMaterial,
    pub entropy: EntropyReport,
    pub raw: RawBitstring,
    pub seeds: Vec<u64>,
}

impl KeyGenOutput {
    pub fn key_hex(&self) -> String {
        self.key.hex()
    }
}

/// Post-processing of already sampled tables.
pub fn keygen_from_counts(
    tables: &[CountsTable],
    config: &KeyGenConfig,
) -> Result<(KeyMaterial, EntropyReport, RawBitstring)> {
    let entropy = entropy_report(tables, config.confidence, config.epsilon_exponent)?;
    if config.key_bits > entropy.m_max {
        return Err(Error::BudgetExceeded { requested: config.key_bits, budget: entropy.m_max });
    }
    let plan = prime_plan(config.m1, entropy.positions)?;
    let blocks: Vec<Vec<u8>> = tables
        .par_iter()
        .map(|t| prime_modulus_map(&round_counts(t, &config.rounding)?, &plan))
        .collect::<Result<_>>()?;
    let raw = assemble_raw(&blocks)?;
    let segments: Vec<&[u8]> = raw.segments().collect();
    let key = weighted_extract(&segments, &config.alphas(), config.shots, config.key_bits)?;
    Ok((key, entropy, raw))
}

/// Sampling followed by post-processing.
pub fn generate_key(config: &KeyGenConfig) -> Result<KeyGenOutput> {
    config.validate()?;
    let seeds = config.resolved_seeds();
    let tables = run_experiment(&config.params, config.shots, &seeds, config.noise.as_ref())?;
    let (key, entropy, raw) = keygen_from_counts(&tables, config)?;
    Ok(KeyGenOutput { key, entropy, raw, seeds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_examples() {
        let p = RoundingPolicy::default();
        assert_eq!(p.round(0, 1_000_000).unwrap(), 0);
        assert_eq!(p.round(12_300, 1_000_000).unwrap(), 15_000);
        assert_eq!(p.round(47_600, 1_000_000).unwrap(), 50_000);
        assert_eq!(p.round(30_000, 1_000_000).unwrap(), 30_000);
        assert_eq!(p.round(30_001, 1_000_000).unwrap(), 30_000);
        assert_eq!(p.round(45_000, 1_000_000).unwrap(), 50_000);
        assert!(matches!(p.round(5, 999), Err(Error::Config(_))));
    }

    #[test]
    fn prime_plans() {
        assert_eq!(prime_plan(2, 5).unwrap().primes, vec![2, 3, 5, 7, 11]);
        assert_eq!(prime_plan(241, 4).unwrap().primes, vec![241, 251, 241, 251]);
        assert_eq!(prime_plan(251, 3).unwrap().primes, vec![251, 251, 251]);
        assert!(prime_plan(12, 3).is_err());
        assert!(prime_plan(257, 3).is_err());
    }

    #[test]
    fn byte_mapping_endpoints() {
        assert_eq!(prime_byte(13 * 7, 13), 0);
        assert_eq!(prime_byte(12, 13), 255);
        assert_eq!(prime_byte(15_000, 13), 234);
        assert_eq!(prime_byte(1, 2), 255);
    }

    #[test]
    fn ties_rank_by_position() {
        assert_eq!(rank_order(&[5, 0, 5, 0]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn entropy_bounds() {
        let (p, h) = min_entropy_cp(1_000_000, 1_000_000, 0.995);
        assert_eq!((p, h), (1.0, 0.0));
        let (p, h) = min_entropy_cp(145_000, 1_000_000, 0.995);
        assert!((p - 0.14591).abs() < 5e-6);
        assert!((h - 2.777).abs() < 5e-4);
        let (p, _) = min_entropy_normal(145_000, 1_000_000);
        assert!((p - 0.14591).abs() < 5e-6);
        assert_eq!(min_entropy_normal(999_999, 1_000_000), (1.0, 0.0));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(extraction_budget(2.781, 64, 10, (-80f64).exp2()), 1619);
        assert_eq!(extraction_budget(2.781, 64, 10, 1.0), 1779);
        assert_eq!(extraction_budget(2.5, 64, 1, (-80f64).exp2()), 0);
        assert_eq!(extraction_budget(1.0, 64, 1, (-80f64).exp2()), 0);
    }

    #[test]
    fn weighted_allocations() {
        let seg = vec![1u8; 512];
        let s: Vec<&[u8]> = vec![&seg; 3];
        let k = weighted_extract(&s, &[0.5, 1.0, 1.5], 1_000_000, 128).unwrap();
        assert_eq!(k.weights, vec![500_000, 1_000_000, 1_500_000]);
        assert_eq!(k.total_weight, 3_000_000);
        assert_eq!(k.allocations, vec![21, 42, 65]);
        assert_eq!(k.key.len(), 128);
        let two = weighted_extract(&s[..2], &[0.8, 0.8], 1_000_000, 128).unwrap();
        assert_eq!(two.allocations, vec![64, 64]);
        let short = [&seg[..10]];
        assert!(matches!(weighted_extract(&short, &[1.0], 10, 11), Err(Error::Allocation { .. })));
        assert!(weighted_extract(&s[..1], &[0.0], 10, 1).is_err());
    }

    #[test]
    fn normal_bound_is_not_more_conservative() {
        for k in 1..=50 {
            let c = k * 10_000;
            let (cp, _) = min_entropy_cp(c, 1_000_000, 0.995);
            let (nb, _) = min_entropy_normal(c, 1_000_000);
            assert!(nb <= cp + 1e-3, "c = {c}");
            assert!(cp >= c as f64 / 1e6);
        }
    }

    #[test]
    fn reference_config_is_valid() {
        let c = KeyGenConfig::reference();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<KeyGenConfig>(&text).unwrap(), c);
        assert!(serde_json::from_str::<KeyGenConfig>(&text.replace("\"m1\"", "\"m2\"")).is_err());
    }

    #[test]
    fn raw_lengths() {
        let raw = assemble_raw(&vec![vec![0u8; 64]; 10]).unwrap();
        assert_eq!(raw.len(), 5120);
        let raw = assemble_raw(&vec![vec![0u8; 49]; 10]).unwrap();
        assert_eq!(raw.len(), 3920);
        assert_eq!(&raw.segment(3)[..8], &[0; 8]);
        assert!(assemble_raw(&[vec![1], vec![1, 2]]).is_err());
    }
}
