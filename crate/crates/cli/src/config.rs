use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use subdyn::error::invalid;
use subdyn::hierarchy::MATERIALIZATION_CAP;
use subdyn::tiling::{golden_conjugate, TileLengths};
use subdyn::Result;

use crate::{Cli, Command, Emit};

/// Named tolerances and their defaults.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("freq", 2e-3),
    ("stderr", 3.0),
    ("spectral", 0.05),
    ("rigidity", 0.9),
    ("contrast", 0.1),
    ("joining", 0.0),
    ("marginal", 1e-3),
    ("djr", 0.45),
    ("offset", 1e-12),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaSpec {
    pub name: String,
    pub value: f64,
    pub irrational_asserted: bool,
}

impl AlphaSpec {
    pub fn parse(text: &str) -> Result<AlphaSpec> {
        let (value, name) = match text {
            "golden" => (golden_conjugate(), "golden"),
            "sqrt2m1" => (std::f64::consts::SQRT_2 - 1.0, "sqrt2m1"),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => (v, "decimal"),
                _ => {
                    return invalid(format!(
                        "alpha must be golden, sqrt2m1 or a positive decimal, got {other:?}"
                    ))
                }
            },
        };
        Ok(AlphaSpec {
            name: name.to_string(),
            value,
            irrational_asserted: true,
        })
    }

    pub fn lengths(&self) -> Result<TileLengths> {
        TileLengths::unit_and(self.value, self.irrational_asserted)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub family: String,
    pub depth: u32,
    pub window: u64,
    pub alpha: AlphaSpec,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub emit: Emit,
    #[serde(skip)]
    pub out_dir: std::path::PathBuf,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Result<ExperimentConfig> {
        let c = &cli.common;
        if c.window < 1000 {
            return invalid(format!("window {} is below 1000", c.window));
        }
        if c.window as u128 > MATERIALIZATION_CAP as u128 {
            return invalid(format!(
                "window {} exceeds the materialization cap {MATERIALIZATION_CAP}",
                c.window
            ));
        }
        if c.depth == 0 || c.depth > 64 {
            return invalid(format!("depth {} outside 1..=64", c.depth));
        }
        let mut tolerances: BTreeMap<String, f64> = DEFAULT_TOLERANCES
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        for t in &c.tolerances {
            let Some((k, v)) = t.split_once('=') else {
                return invalid(format!("tolerance {t:?} is not K=V"));
            };
            if !tolerances.contains_key(k) {
                return invalid(format!("unknown tolerance {k:?}"));
            }
            let v: f64 = v
                .parse()
                .or_else(|_| invalid(format!("tolerance value {v:?} is not a number")))?;
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("tolerance {k} must be nonnegative"));
            }
            tolerances.insert(k.to_string(), v);
        }
        Ok(ExperimentConfig {
            command: cli.command.clone(),
            family: c.family.clone(),
            depth: c.depth,
            window: c.window,
            alpha: AlphaSpec::parse(&c.alpha)?,
            seed: c.seed,
            tolerances,
            emit: c.emit,
            out_dir: c.out_dir.clone(),
        })
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }
}
