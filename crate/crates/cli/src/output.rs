use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Every JSON report carries the resolved configuration.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub rng: &'a str,
    pub result: R,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Files produced by a command, written into `--out` when given.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                fs::write(&path, contents).map_err(io)?;
                Ok(path)
            })
            .collect()
    }
}
