use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use laqw::analysis::{
    noise_csv, noise_sweep, reproducibility_experiment, sensitivity_experiment, PerturbationSpec, SensitivityReport,
};
use laqw::bits;
use laqw::circuit::depth_scaling_experiment;
use laqw::keygen::{generate_key, KeyGenConfig};
use laqw::randtests::{format_table, run_suite};
use laqw::sampling::RNG_ALGORITHM;
use laqw::walk::{distribution, Model, WalkParams};
use log::warn;
use serde::Serialize;
use serde_json::json;

use crate::args::Format;
use crate::config::{read_json, DepthConfig, NoiseConfig, ReproduceConfig, SensitivityConfig};
use crate::error::{CliError, CliResult};
use crate::output::{to_json, Artifacts, Report};

/// Rendered forms of one command's result.
pub struct Outcome {
    pub json: String,
    pub csv: String,
    pub text: String,
    pub files: Artifacts,
}

impl Outcome {
    pub fn render(&self, format: Format) -> &str {
        match format {
            Format::Json => &self.json,
            Format::Csv => &self.csv,
            Format::Text => &self.text,
        }
    }
}

fn report<C: Serialize, R: Serialize>(command: &str, config: &C, result: R) -> String {
    to_json(&Report { command, config, rng: RNG_ALGORITHM, result })
}

pub fn simulate(path: &Path) -> CliResult<Outcome> {
    let params: WalkParams = read_json(path)?;
    params.validate()?;
    let dist = distribution(&params)?;
    let mut csv = String::from("position,probability\n");
    for (i, p) in dist.probs.iter().enumerate() {
        let _ = writeln!(csv, "{i},{p:.17e}");
    }
    let (argmax, max) =
        dist.probs.iter().copied().enumerate().fold((0, f64::MIN), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    let summary = json!({
        "positions": dist.len(),
        "total": dist.total(),
        "max_probability": max,
        "max_position": [argmax / dist.ny, argmax % dist.ny],
        "support": dist.probs.iter().filter(|&&p| p > 0.0).count(),
    });
    let json = report("simulate", &params, json!({ "summary": summary, "probabilities": dist.probs }));
    let text = format!(
        "{} {}x{} t={}: {} positions, total {:.12}, max {:.6} at ({}, {})\n",
        params.model,
        params.nx,
        params.ny,
        params.t,
        dist.len(),
        dist.total(),
        max,
        argmax / dist.ny,
        argmax % dist.ny
    );
    let mut files = Artifacts::default();
    files.add("distribution.csv", csv.clone());
    files.add("summary.json", report("simulate", &params, &summary));
    Ok(Outcome { json, csv, text, files })
}

pub fn keygen(path: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut config: KeyGenConfig = read_json(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let out = generate_key(&config)?;
    let key_hex = out.key_hex();
    let json = report(
        "keygen",
        &config,
        json!({ "key_hex": key_hex, "seeds": out.seeds, "key": out.key, "entropy": out.entropy }),
    );
    let mut csv = String::from("run,c_max,p_hat_max,p_ub,h_min,p_ub_normal,h_min_normal\n");
    for r in &out.entropy.runs {
        let _ = writeln!(
            csv,
            "{},{},{:.8},{:.8},{:.6},{:.8},{:.6}",
            r.run, r.c_max, r.p_hat_max, r.p_ub, r.h_min, r.p_ub_normal, r.h_min_normal
        );
    }
    let text = format!(
        "key      {key_hex}\nbits     {}\nh_min    {:.4}\nm_max    {}\nraw bits {}\n",
        out.key.key.len(),
        out.entropy.h_min,
        out.entropy.m_max,
        out.raw.len()
    );
    let mut files = Artifacts::default();
    files.add("key.hex", format!("{key_hex}\n"));
    files.add("entropy.json", report("keygen", &config, &out.entropy));
    files.add("raw.txt", format!("{}\n", bits::to_ascii(&out.raw.bits)));
    files.add("key.txt", format!("{}\n", bits::to_ascii(&out.key.key)));
    files.add("report.json", json.clone());
    Ok(Outcome { json, csv, text, files })
}

pub fn nist(path: &Path, significance: f64) -> CliResult<Outcome> {
    if !(0.0 < significance && significance < 1.0) {
        return Err(CliError::Config(format!("significance {significance} must lie in (0, 1)")));
    }
    let text_in = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let bits = bits::parse_ascii(&text_in)?;
    let results = run_suite(&bits, significance)?;
    let config = json!({ "input": path.display().to_string(), "n_bits": bits.len(), "significance": significance });
    let json = report("nist", &config, &results);
    let mut csv = String::from("test,statistics,p_values,pass,valid\n");
    for r in &results {
        let stats: Vec<String> = r.statistics.iter().map(|s| format!("{}={}", s.name, s.value)).collect();
        let ps: Vec<String> = r.p_values.iter().map(|p| format!("{p:.6}")).collect();
        let _ = writeln!(csv, "{},{},{},{},{}", r.test, stats.join(";"), ps.join(";"), r.pass, r.valid);
    }
    let text = format!("{} bits, significance {significance}\n{}", bits.len(), format_table(&results));
    let mut files = Artifacts::default();
    files.add("nist.json", json.clone());
    files.add("nist.txt", text.clone());
    Ok(Outcome { json, csv, text, files })
}

pub fn sensitivity(path: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut config: SensitivityConfig = read_json(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let mut results = Vec::new();
    if config.samples == 0 {
        warn!("sensitivity requested with 0 samples, report is empty");
    } else {
        for &model in &config.models {
            let [nx, ny] = match model {
                Model::Laqw => config.laqw_lattice,
                Model::Caqw => config.caqw_lattice,
            };
            for &target in &config.targets {
                let mut spec = PerturbationSpec::new(target, config.samples, config.seed, nx, ny);
                spec.magnitude = config.magnitude;
                spec.t_max = config.t_max;
                results.push(sensitivity_experiment(model, &spec)?);
            }
        }
    }
    let rep = SensitivityReport::from_results(results);
    let csv = rep.to_csv();
    let json = report("sensitivity", &config, &rep);
    let mut text = format!("{:<6} {:<14} {:>9} {:>9} {:>8}\n", "model", "target", "mean", "std", "samples");
    for r in &rep.results {
        let _ =
            writeln!(text, "{:<6} {:<14} {:>9.5} {:>9.5} {:>8}", r.model, r.target.name(), r.mean, r.std, r.n_samples);
    }
    for r in &rep.ratios {
        let _ = writeln!(text, "ratio  {:<14} {:>9.5}", r.target.name(), r.ratio);
    }
    let mut files = Artifacts::default();
    files.add("sensitivity.csv", csv.clone());
    files.add("sensitivity.json", json.clone());
    Ok(Outcome { json, csv, text, files })
}

pub fn depth(path: Option<&Path>) -> CliResult<Outcome> {
    let config: DepthConfig = path.map_or_else(|| Ok(DepthConfig::default()), read_json)?;
    if config.t_min > config.t_max {
        return Err(CliError::Config(format!("empty t range {}..={}", config.t_min, config.t_max)));
    }
    if let Some(&n) = config.register_bits.iter().find(|&&n| !(2..=8).contains(&n)) {
        return Err(CliError::Config(format!("register width {n} outside 2..=8")));
    }
    let ts: Vec<usize> = (config.t_min..=config.t_max).collect();
    let exp = depth_scaling_experiment(&config.models, &config.register_bits, &ts, &config.coupling)?;
    let csv = exp.to_csv();
    let json = report("depth", &config, &exp);
    let mut text = String::new();
    for s in &exp.slopes {
        let _ = writeln!(
            text,
            "{} n={}: logical depth {:.2}·t + {:.1}, routed {:.2}·t + {:.1}",
            s.model, s.n_qubits, s.logical.slope, s.logical.intercept, s.routed.slope, s.routed.intercept
        );
    }
    for &n in &config.register_bits {
        if let (Some(l), Some(c)) = (exp.row(Model::Laqw, n, config.t_max), exp.row(Model::Caqw, n, config.t_max)) {
            let _ = writeln!(
                text,
                "n={n} t={}: laqw/caqw logical depth {}/{} = {:.4}",
                config.t_max,
                l.logical_depth,
                c.logical_depth,
                l.logical_depth as f64 / c.logical_depth as f64
            );
        }
    }
    let mut files = Artifacts::default();
    files.add("depth.csv", csv.clone());
    files.add("depth.json", json.clone());
    Ok(Outcome { json, csv, text, files })
}

pub fn reproduce(path: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut config: ReproduceConfig = read_json(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.pipeline.validate()?;
    let rep = reproducibility_experiment(&config.pipeline, config.trials, config.seed, config.fresh_seeds)?;
    let csv = rep.pairs_csv();
    let json = report("reproduce", &config, &rep);
    let text = format!(
        "trials            {}\npairs             {}\nmean raw hamming  {:.5}\nmean key hamming  {:.5}\nidentical keys    {:.4}\nmean h_min        {:.4}\nmean m_max        {:.1}\n",
        rep.trials.len(),
        rep.pairs.len(),
        rep.mean_raw_hamming,
        rep.mean_key_hamming,
        rep.key_identity_rate,
        rep.mean_h_min,
        rep.mean_m_max
    );
    let mut files = Artifacts::default();
    files.add("pairs.csv", csv.clone());
    files.add("reproducibility.json", json.clone());
    Ok(Outcome { json, csv, text, files })
}

pub fn noise(path: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut config: NoiseConfig = read_json(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.pipeline.validate()?;
    for n in &config.grid {
        n.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let rows = noise_sweep(&config.pipeline, &config.grid, config.trials, config.seed)?;
    let csv = noise_csv(&rows);
    let json = report("noise", &config, &rows);
    let mut text = format!(
        "{:>6} {:>6} {:>8} {:>9} {:>9} {:>9} {:>9}\n",
        "mix", "flip", "m_max", "raw_ham", "key_ham", "ident", "vs_clean"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:>6} {:>6} {:>8.1} {:>9.5} {:>9.5} {:>9.4} {:>9.4}",
            r.mix,
            r.readout_flip,
            r.mean_m_max,
            r.mean_raw_hamming,
            r.mean_key_hamming,
            r.key_identity_rate,
            r.key_vs_noiseless
        );
    }
    let mut files = Artifacts::default();
    files.add("noise.csv", csv.clone());
    files.add("noise.json", json.clone());
    Ok(Outcome { json, csv, text, files })
}
