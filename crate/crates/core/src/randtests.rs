//! Six tests from NIST SP 800-22: frequency (monobit), block frequency, runs,
//! longest run of ones, discrete Fourier transform (spectral) and cumulative
//! sums.
//!
//! Each test is split into a statistic computation and a `*_p` function
//! mapping the statistic to a p-value, so published statistics can be
//! re-evaluated directly.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::special::{erfc, igamc, normal_cdf};
use crate::{Error, Result};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;
pub const BLOCK_FREQUENCY_M: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: String,
    pub statistics: Vec<Statistic>,
    pub p_values: Vec<f64>,
    pub significance: f64,
    pub pass: bool,
    /// False when the input is shorter than the test's recommended length.
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestResult {
    fn new(test: &str, stats: &[(&str, f64)], p_values: Vec<f64>, valid: bool) -> Self {
        let p_values: Vec<f64> = p_values.into_iter().map(clamp_p).collect();
        TestResult {
            test: test.to_string(),
            statistics: stats.iter().map(|&(n, v)| Statistic { name: n.to_string(), value: v }).collect(),
            pass: p_values.iter().all(|&p| p >= DEFAULT_SIGNIFICANCE),
            p_values,
            significance: DEFAULT_SIGNIFICANCE,
            valid,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-evaluates `pass` against another significance level.
    pub fn at_significance(mut self, significance: f64) -> Self {
        self.significance = significance;
        self.pass = self.min_p() >= significance;
        self
    }

    pub fn min_p(&self) -> f64 {
        self.p_values.iter().copied().fold(1.0, f64::min)
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

fn clamp_p(p: f64) -> f64 {
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.is_empty() {
        return Err(Error::Empty);
    }
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(Error::MalformedBits(i)),
        None => Ok(()),
    }
}

fn ones(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

pub fn monobit_p(s_obs: f64) -> f64 {
    erfc(s_obs / SQRT_2)
}

pub fn frequency_monobit(bits: &[u8]) -> Result<TestResult> {
    check_bits(bits)?;
    let n = bits.len() as f64;
    let sum = 2.0 * ones(bits) as f64 - n;
    let s_obs = sum.abs() / n.sqrt();
    Ok(TestResult::new("frequency", &[("s_obs", s_obs)], vec![monobit_p(s_obs)], bits.len() >= 100))
}

/// `blocks` is the number of complete blocks `N`.
pub fn block_frequency_p(chi2: f64, blocks: usize) -> f64 {
    igamc(blocks as f64 / 2.0, chi2 / 2.0)
}

pub fn block_frequency(bits: &[u8], m: usize) -> Result<TestResult> {
    check_bits(bits)?;
    if m == 0 || m > bits.len() {
        return Err(Error::InvalidArgument(format!("block size {m} for {} bits", bits.len())));
    }
    let blocks = bits.len() / m;
    let chi2 = 4.0 * m as f64 * bits.chunks_exact(m).map(|b| (ones(b) as f64 / m as f64 - 0.5).powi(2)).sum::<f64>();
    Ok(TestResult::new(
        "block_frequency",
        &[("chi2", chi2), ("M", m as f64), ("N", blocks as f64)],
        vec![block_frequency_p(chi2, blocks)],
        bits.len() >= 100,
    ))
}

pub fn runs_p(v_obs: f64, n: usize, pi: f64) -> f64 {
    let n = n as f64;
    let q = pi * (1.0 - pi);
    erfc((v_obs - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q))
}

pub fn runs_test(bits: &[u8]) -> Result<TestResult> {
    check_bits(bits)?;
    let n = bits.len();
    let pi = ones(bits) as f64 / n as f64;
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let stats = [("V_n", v_obs as f64), ("pi", pi)];
    let valid = n >= 100;
    if (pi - 0.5).abs() >= 2.0 / (n as f64).sqrt() {
        return Ok(TestResult::new("runs", &stats, vec![0.0], valid).with_note("frequency prerequisite failed"));
    }
    Ok(TestResult::new("runs", &stats, vec![runs_p(v_obs as f64, n, pi)], valid))
}

struct LongestRunTable {
    m: usize,
    /// Longest-run value of the lowest category; the `K+1` categories are
    /// `≤ lo, lo+1, …, ≥ lo+K`.
    lo: usize,
    pi: &'static [f64],
}

const LONGEST_RUN_TABLES: [(usize, LongestRunTable); 3] = [
    (128, LongestRunTable { m: 8, lo: 1, pi: &[0.2148, 0.3672, 0.2305, 0.2266] }),
    (6272, LongestRunTable { m: 128, lo: 4, pi: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124] }),
    (750_000, LongestRunTable { m: 10_000, lo: 10, pi: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727] }),
];

/// `k` is the number of degrees of freedom (categories minus one).
pub fn longest_run_p(chi2: f64, k: usize) -> f64 {
    igamc(k as f64 / 2.0, chi2 / 2.0)
}

fn longest_run(block: &[u8]) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &b in block {
        cur = if b == 1 { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

pub fn longest_run_of_ones(bits: &[u8]) -> Result<TestResult> {
    check_bits(bits)?;
    let n = bits.len();
    let table = &LONGEST_RUN_TABLES
        .iter()
        .rev()
        .find(|(min, _)| n >= *min)
        .ok_or_else(|| Error::InvalidArgument(format!("longest-run test needs at least 128 bits, got {n}")))?
        .1;
    let k = table.pi.len() - 1;
    let mut v = vec![0usize; k + 1];
    let mut v_max = 0;
    for block in bits.chunks_exact(table.m) {
        let run = longest_run(block);
        v_max = v_max.max(run);
        v[run.clamp(table.lo, table.lo + k) - table.lo] += 1;
    }
    let blocks = (n / table.m) as f64;
    let chi2: f64 = v.iter().zip(table.pi).map(|(&obs, &p)| (obs as f64 - blocks * p).powi(2) / (blocks * p)).sum();
    Ok(TestResult::new(
        "longest_run",
        &[("chi2", chi2), ("M", table.m as f64), ("K", k as f64), ("V_max", v_max as f64)],
        vec![longest_run_p(chi2, k)],
        true,
    ))
}

pub fn spectral_p(d: f64) -> f64 {
    erfc(d.abs() / SQRT_2)
}

/// Magnitudes `|S_j|` for `j < n/2` of the ±1 mapped sequence.
pub fn spectral_magnitudes(bits: &[u8]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = bits.iter().map(|&b| Complex64::new(2.0 * b as f64 - 1.0, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf[..bits.len() / 2].iter().map(|c| c.norm()).collect()
}

pub fn dft_spectral(bits: &[u8]) -> Result<TestResult> {
    check_bits(bits)?;
    let n = bits.len() as f64;
    let threshold = (n * (1.0f64 / 0.05).ln()).sqrt();
    let n0 = 0.95 * n / 2.0;
    let n1 = spectral_magnitudes(bits).iter().filter(|&&m| m < threshold).count() as f64;
    let d = (n1 - n0) / (n * 0.95 * 0.05 / 4.0).sqrt();
    let r = TestResult::new("spectral", &[("d", d), ("N_1", n1), ("N_0", n0)], vec![spectral_p(d)], n >= 1000.0);
    Ok(if r.valid { r } else { r.with_note("sequence shorter than 1000 bits") })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CusumMode {
    Forward,
    Backward,
}

/// Maximum absolute partial sum of the ±1 mapped sequence.
pub fn cusum_statistic(bits: &[u8], mode: CusumMode) -> u64 {
    let step = |(s, m): (i64, i64), &b: &u8| {
        let s = s + 2 * b as i64 - 1;
        (s, m.max(s.abs()))
    };
    let (_, z) = match mode {
        CusumMode::Forward => bits.iter().fold((0, 0), step),
        CusumMode::Backward => bits.iter().rev().fold((0, 0), step),
    };
    z as u64
}

pub fn cusum_p(z: f64, n: usize) -> f64 {
    let nf = n as f64;
    let sq = nf.sqrt();
    let phi = |k: f64, c: f64| normal_cdf((4.0 * k + c) * z / sq);
    let range = |lo: f64, hi: f64| (lo.trunc() as i64)..=(hi.trunc() as i64);
    let s1: f64 =
        range((-nf / z + 1.0) / 4.0, (nf / z - 1.0) / 4.0).map(|k| phi(k as f64, 1.0) - phi(k as f64, -1.0)).sum();
    let s2: f64 =
        range((-nf / z - 3.0) / 4.0, (nf / z - 1.0) / 4.0).map(|k| phi(k as f64, 3.0) - phi(k as f64, 1.0)).sum();
    clamp_p(1.0 - s1 + s2)
}

pub fn cumulative_sums(bits: &[u8], mode: CusumMode) -> Result<TestResult> {
    check_bits(bits)?;
    let z = cusum_statistic(bits, mode) as f64;
    let name = match mode {
        CusumMode::Forward => "z_f",
        CusumMode::Backward => "z_b",
    };
    Ok(TestResult::new("cumulative_sums", &[(name, z)], vec![cusum_p(z, bits.len())], bits.len() >= 100))
}

/// Forward and backward modes in one result.
pub fn cumulative_sums_both(bits: &[u8]) -> Result<TestResult> {
    let f = cumulative_sums(bits, CusumMode::Forward)?;
    let b = cumulative_sums(bits, CusumMode::Backward)?;
    let mut r = f.clone();
    r.statistics.extend(b.statistics);
    r.p_values.extend(b.p_values);
    r.pass = f.pass && b.pass;
    Ok(r)
}

pub fn run_suite(bits: &[u8], significance: f64) -> Result<Vec<TestResult>> {
    let mut out =
        vec![frequency_monobit(bits)?, block_frequency(bits, BLOCK_FREQUENCY_M.min(bits.len()))?, runs_test(bits)?];
    out.push(
        longest_run_of_ones(bits)
            .unwrap_or_else(|e| TestResult::new("longest_run", &[], vec![0.0], false).with_note(e.to_string())),
    );
    out.push(dft_spectral(bits)?);
    out.push(cumulative_sums_both(bits)?);
    Ok(out.into_iter().map(|r| r.at_significance(significance)).collect())
}

/// Fixed-width text table of test, statistics, p-values and outcome.
pub fn format_table(results: &[TestResult]) -> String {
    let mut s = format!("{:<16} {:<34} {:<18} {}\n", "test", "statistic", "p-value", "result");
    for r in results {
        let stats =
            r.statistics.iter().map(|st| format!("{}={}", st.name, fmt_num(st.value))).collect::<Vec<_>>().join(" ");
        let ps = r.p_values.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join("/");
        let verdict = match (r.pass, r.valid) {
            (true, true) => "pass",
            (true, false) => "pass*",
            (false, _) => "fail",
        };
        let _ = writeln!(s, "{:<16} {:<34} {:<18} {}", r.test, stats, ps, verdict);
    }
    if results.iter().any(|r| !r.valid) {
        s.push_str("* input shorter than the recommended length\n");
    }
    s
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}
