use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::{bits, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Caqw,
    Laqw,
}

impl Model {
    pub fn coin_dim(self) -> usize {
        match self {
            Model::Caqw => 2,
            Model::Laqw => 4,
        }
    }

    pub fn coin_qubits(self) -> usize {
        match self {
            Model::Caqw => 1,
            Model::Laqw => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Caqw => "caqw",
            Model::Laqw => "laqw",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The walk's shared secret: start position, coin angles, step count and
/// the key string selecting the coin at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkParams {
    pub x0: usize,
    pub y0: usize,
    pub alpha: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub t: usize,
    #[serde(with = "bits::serde_ascii")]
    pub key_string: Vec<u8>,
    pub model: Model,
    pub nx: usize,
    pub ny: usize,
}

impl WalkParams {
    /// Validated parameters; `t` is the length of `key`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: Model,
        nx: usize,
        ny: usize,
        x0: usize,
        y0: usize,
        alpha: f64,
        theta0: f64,
        theta1: f64,
        key: &str,
    ) -> Result<Self> {
        let key_string = bits::parse_ascii(key)?;
        let params = WalkParams { x0, y0, alpha, theta0, theta1, t: key_string.len(), key_string, model, nx, ny };
        params.validate()?;
        Ok(params)
    }

    pub fn coin_angle(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.theta0
        } else {
            self.theta1
        }
    }

    pub fn positions(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dim(&self) -> usize {
        self.positions() * self.model.coin_dim()
    }

    /// Checks every structural invariant except angle ranges, which only
    /// produce warnings.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.key_string.len() != self.t {
            return bad(format!("key string has {} bits but t = {}", self.key_string.len(), self.t));
        }
        if let Some(b) = self.key_string.iter().find(|&&b| b > 1) {
            return bad(format!("key string contains non-bit value {b}"));
        }
        if self.nx < 2 || self.ny < 2 {
            return bad(format!("lattice {}x{} is too small", self.nx, self.ny));
        }
        match self.model {
            Model::Laqw if !(self.nx.is_power_of_two() && self.ny.is_power_of_two()) => {
                return bad(format!("laqw needs power-of-two cycles, got {}x{}", self.nx, self.ny));
            }
            Model::Caqw if self.nx.is_multiple_of(2) || self.ny.is_multiple_of(2) => {
                return bad(format!("caqw needs odd cycles, got {}x{}", self.nx, self.ny));
            }
            _ => {}
        }
        if self.x0 >= self.nx || self.y0 >= self.ny {
            return bad(format!("start ({}, {}) outside {}x{}", self.x0, self.y0, self.nx, self.ny));
        }
        for (name, v) in [("alpha", self.alpha), ("theta0", self.theta0), ("theta1", self.theta1)] {
            if !v.is_finite() {
                return bad(format!("{name} is not finite"));
            }
            if v <= 0.0 || v >= PI {
                warn!("{name} = {v} lies outside (0, pi)");
            } else if name != "alpha" && (v - FRAC_PI_2).abs() < 1e-12 {
                warn!("{name} = pi/2 gives a degenerate bit-flip coin");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_uses_exact_keys() {
        let p = WalkParams::new(Model::Laqw, 8, 8, 1, 2, 0.5, 1.0, 2.0, "0110").unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(
            text,
            r#"{"x0":1,"y0":2,"alpha":0.5,"theta0":1.0,"theta1":2.0,"t":4,"key_string":"0110","model":"laqw","nx":8,"ny":8}"#
        );
        let back: WalkParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn unknown_keys_and_bad_bits_rejected() {
        let text = r#"{"x0":1,"y0":2,"alpha":0.5,"theta0":1.0,"theta1":2.0,"t":2,"key_string":"01","model":"laqw","nx":8,"ny":8,"extra":1}"#;
        assert!(serde_json::from_str::<WalkParams>(text).is_err());
        let text = r#"{"x0":1,"y0":2,"alpha":0.5,"theta0":1.0,"theta1":2.0,"t":2,"key_string":"0a","model":"laqw","nx":8,"ny":8}"#;
        assert!(serde_json::from_str::<WalkParams>(text).is_err());
    }

    #[test]
    fn model_lattice_rules() {
        assert!(WalkParams::new(Model::Caqw, 7, 7, 0, 0, 0.5, 1.0, 2.0, "").is_ok());
        assert!(WalkParams::new(Model::Caqw, 8, 8, 0, 0, 0.5, 1.0, 2.0, "").is_err());
        assert!(WalkParams::new(Model::Laqw, 7, 7, 0, 0, 0.5, 1.0, 2.0, "").is_err());
        assert!(WalkParams::new(Model::Laqw, 8, 8, 0, 0, f64::NAN, 1.0, 2.0, "").is_err());
        // Out-of-range angles only warn.
        assert!(WalkParams::new(Model::Laqw, 8, 8, 0, 0, 4.0, 0.0, 2.0, "").is_ok());
    }
}
