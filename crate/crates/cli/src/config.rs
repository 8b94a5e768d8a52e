use std::fs;
use std::path::Path;

use laqw::analysis::PerturbationTarget;
use laqw::circuit::CouplingPreset;
use laqw::keygen::KeyGenConfig;
use laqw::sampling::NoiseParams;
use laqw::walk::Model;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn both_models() -> Vec<Model> {
    vec![Model::Laqw, Model::Caqw]
}
fn all_targets() -> Vec<PerturbationTarget> {
    PerturbationTarget::ALL.to_vec()
}
fn one_percent() -> f64 {
    0.01
}
fn twenty() -> usize {
    20
}
fn eight() -> usize {
    8
}
fn laqw_lattice() -> [usize; 2] {
    [8, 8]
}
fn caqw_lattice() -> [usize; 2] {
    [7, 7]
}
fn three() -> Vec<usize> {
    vec![3]
}
fn all_to_all() -> CouplingPreset {
    CouplingPreset::AllToAll
}
fn yes() -> bool {
    true
}
fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    #[serde(default = "both_models")]
    pub models: Vec<Model>,
    #[serde(default = "all_targets")]
    pub targets: Vec<PerturbationTarget>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_percent")]
    pub magnitude: f64,
    #[serde(default = "twenty")]
    pub t_max: usize,
    #[serde(default = "laqw_lattice")]
    pub laqw_lattice: [usize; 2],
    #[serde(default = "caqw_lattice")]
    pub caqw_lattice: [usize; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthConfig {
    #[serde(default = "both_models")]
    pub models: Vec<Model>,
    /// Qubits per position register; 3 gives 8×8 LAQW and 7×7 CAQW.
    #[serde(default = "three")]
    pub register_bits: Vec<usize>,
    #[serde(default = "eight")]
    pub t_min: usize,
    #[serde(default = "twenty")]
    pub t_max: usize,
    #[serde(default = "all_to_all")]
    pub coupling: CouplingPreset,
}

impl Default for DepthConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    pub pipeline: KeyGenConfig,
    #[serde(default = "hundred")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub fresh_seeds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub pipeline: KeyGenConfig,
    pub grid: Vec<NoiseParams>,
    #[serde(default = "hundred")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}
