//! Finite-shot sampling of walk distributions and the parametric readout
//! noise channel.
//!
//! Draws use ChaCha20 (`rand_chacha` 0.9) seeded with `seed_from_u64`, and
//! a multinomial is realised as sequential conditional binomials
//! (`rand_distr` 0.5), so a `(dist, shots, seed)` triple replays exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::walk::{distribution, ProbDist, WalkParams};
use crate::{Error, Result};

pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9";

/// `count` seeds drawn from a generator seeded with `base`.
pub fn derive_seeds(base: u64, count: usize) -> Vec<u64> {
    use rand::RngCore;
    let mut rng = ChaCha20Rng::seed_from_u64(base);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// Observed counts of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub nx: usize,
    pub ny: usize,
    pub counts: Vec<u64>,
    pub shots: u64,
    pub run: usize,
    pub seed: u64,
}

impl CountsTable {
    pub fn positions(&self) -> usize {
        self.counts.len()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn frequencies(&self) -> ProbDist {
        let s = self.shots as f64;
        ProbDist { nx: self.nx, ny: self.ny, probs: self.counts.iter().map(|&c| c as f64 / s).collect() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# shots={}\n# seed={}\n# run={}\n# lattice={}x{}\nposition_index,count\n",
            self.shots, self.seed, self.run, self.nx, self.ny
        );
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{i},{c}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("counts csv: {m}"));
        let (mut shots, mut seed, mut run, mut lattice) = (None, 0, 0, None);
        let mut counts = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.trim().split_once('=').ok_or_else(|| bad("metadata line"))?;
                match k.trim() {
                    "shots" => shots = Some(v.trim().parse().map_err(|_| bad("shots"))?),
                    "seed" => seed = v.trim().parse().map_err(|_| bad("seed"))?,
                    "run" => run = v.trim().parse().map_err(|_| bad("run"))?,
                    "lattice" => {
                        let (a, b) = v.trim().split_once('x').ok_or_else(|| bad("lattice"))?;
                        lattice = Some((
                            a.parse::<usize>().map_err(|_| bad("lattice"))?,
                            b.parse::<usize>().map_err(|_| bad("lattice"))?,
                        ));
                    }
                    _ => {}
                }
                continue;
            }
            if line.starts_with("position_index") {
                continue;
            }
            let (i, c) = line.split_once(',').ok_or_else(|| bad("row"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("position index"))?;
            if i != counts.len() {
                return Err(bad("rows out of order"));
            }
            counts.push(c.trim().parse().map_err(|_| bad("count"))?);
        }
        let shots: u64 = shots.ok_or_else(|| bad("missing shots"))?;
        if counts.iter().sum::<u64>() != shots {
            return Err(bad("counts do not sum to shots"));
        }
        let (nx, ny) = lattice.unwrap_or((counts.len(), 1));
        if nx * ny != counts.len() {
            return Err(bad("lattice does not match row count"));
        }
        Ok(CountsTable { nx, ny, counts, shots, run, seed })
    }
}

/// Uniform-mixture weight `mix` (λ) and per-bit readout flip probability
/// `readout_flip` (q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub mix: f64,
    pub readout_flip: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { mix: 0.02, readout_flip: 0.01 }
    }
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams { mix: 0.0, readout_flip: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mix) || !(0.0..=0.5).contains(&self.readout_flip) {
            return Err(Error::InvalidArgument(format!(
                "noise out of range: mix={}, readout_flip={}",
                self.mix, self.readout_flip
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.mix == 0.0 && self.readout_flip == 0.0
    }
}

fn flip_axis(grid: &mut [f64], stride: usize, len: usize, q: f64) {
    let bits = len.trailing_zeros();
    let outer = grid.len() / (stride * len);
    for b in 0..bits {
        let m = 1usize << b;
        for o in 0..outer {
            for v in 0..len {
                if v & m != 0 {
                    continue;
                }
                for s in 0..stride {
                    let i = (o * len + v) * stride + s;
                    let j = (o * len + (v | m)) * stride + s;
                    let (a, c) = (grid[i], grid[j]);
                    grid[i] = (1.0 - q) * a + q * c;
                    grid[j] = (1.0 - q) * c + q * a;
                }
            }
        }
    }
}

/// `p' = (1 − λ)·R_q(p) + λ/positions`. `R_q` flips every bit of the x and
/// y readouts independently with probability `q`; on lattices that are not
/// powers of two the flips act on the padded register and readouts outside
/// the lattice are discarded.
pub fn apply_noise(dist: &ProbDist, noise: &NoiseParams) -> Result<ProbDist> {
    noise.validate()?;
    let (nx, ny) = (dist.nx, dist.ny);
    let mut probs = dist.probs.clone();
    if noise.readout_flip > 0.0 {
        let (px, py) = (nx.next_power_of_two(), ny.next_power_of_two());
        let mut grid = vec![0.0; px * py];
        for x in 0..nx {
            grid[x * py..x * py + ny].copy_from_slice(&dist.probs[x * ny..(x + 1) * ny]);
        }
        flip_axis(&mut grid, 1, py, noise.readout_flip);
        flip_axis(&mut grid, py, px, noise.readout_flip);
        for x in 0..nx {
            probs[x * ny..(x + 1) * ny].copy_from_slice(&grid[x * py..x * py + ny]);
        }
        let kept: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= kept);
    }
    let u = 1.0 / probs.len() as f64;
    probs.iter_mut().for_each(|p| *p = (1.0 - noise.mix) * *p + noise.mix * u);
    Ok(ProbDist { nx, ny, probs })
}

/// Multinomial draw of `shots` samples from `dist`.
pub fn sample_counts(dist: &ProbDist, shots: u64, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if dist.is_empty() {
        return Err(Error::Empty);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let total: f64 = dist.probs.iter().sum();
    let mut remaining_mass = total;
    let mut remaining = shots;
    let mut counts = vec![0u64; dist.len()];
    let last = dist.len() - 1;
    for (i, &p) in dist.probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last || remaining_mass <= 0.0 {
            counts[i] = remaining;
            remaining = 0;
            break;
        }
        let cond = (p / remaining_mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, cond)
            .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
            .sample(&mut rng);
        counts[i] = c;
        remaining -= c;
        remaining_mass -= p;
    }
    if remaining > 0 {
        // Only reachable through rounding of the remaining mass to zero.
        let i = dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(last);
        counts[i] += remaining;
    }
    Ok(CountsTable { nx: dist.nx, ny: dist.ny, counts, shots, run: 0, seed })
}

/// `R = seeds.len()` runs. `params` holds either one shared parameter set
/// or one per run.
pub fn run_experiment(
    params: &[WalkParams],
    shots: u64,
    seeds: &[u64],
    noise: Option<&NoiseParams>,
) -> Result<Vec<CountsTable>> {
    if params.len() != 1 && params.len() != seeds.len() {
        return Err(Error::LengthMismatch(params.len(), seeds.len()));
    }
    let dists: Vec<ProbDist> = params
        .par_iter()
        .map(|p| {
            let d = distribution(p)?;
            match noise {
                Some(n) if !n.is_noiseless() => apply_noise(&d, n),
                _ => Ok(d),
            }
        })
        .collect::<Result<_>>()?;
    seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| {
            let d = &dists[if dists.len() == 1 { 0 } else { r }];
            let mut t = sample_counts(d, shots, seed)?;
            t.run = r;
            Ok(t)
        })
        .collect()
}
