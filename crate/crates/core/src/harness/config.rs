//! JSON experiment configs.
//!
//! ```json
//! {
//!   "label": "lc-constant",
//!   "system": { "builtin": "lc_factorial" },
//!   "input": { "channels": [ { "type": "constant", "value": 1.0 } ] },
//!   "T": 0.5, "L": 50, "J": 10,
//!   "bound_mode": "statement",
//!   "increment_rule": "exact",
//!   "outputs": [ "table_row", { "trajectory_csv": { "path": "lc.csv", "resolution": 50 } } ]
//! }
//! ```
//!
//! `system` may also be `{"polynomial": {...}}` or `{"representation": {...}}`,
//! see [`SystemConfig`]. A channel may be `{"sampled_file": "path.csv"}`,
//! resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algebra::{
    Alphabet, GrowthClass, LinearRepresentation, Polynomial, SeriesSpec, Word, DEFAULT_ENUMERATION_CAP,
};
use crate::bounds::BoundMode;
use crate::signals::{Channel, ContinuousInput, IncrementRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub system: SystemConfig,
    pub input: InputConfig,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "L")]
    pub steps: usize,
    #[serde(rename = "J")]
    pub order: usize,
    #[serde(default)]
    pub bound_mode: BoundMode,
    #[serde(default)]
    pub increment_rule: IncrementRule,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
    /// Adds the resolvent-realization column to trajectories of rational systems.
    #[serde(default)]
    pub realization: bool,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
    /// Directory that relative `sampled_file` paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// `c = Σ_k k! x1^k`, `y = 1/(1 − ∫u)`.
    LcFactorial,
    /// `c = Σ_k x1^k`, `y = exp(∫u)`.
    GcGeometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemConfig {
    Builtin(Builtin),
    Polynomial(PolynomialConfig),
    Representation(RepresentationConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialConfig {
    pub m: usize,
    /// Word (`"x1x0"`, `""` for the empty word) to coefficient.
    pub terms: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationConfig {
    pub dim: usize,
    /// `A_0 .. A_m`, each row-major with `dim²` entries.
    pub matrices: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub channels: Vec<ChannelConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelConfig {
    File { sampled_file: PathBuf },
    Inline(Channel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSpec {
    TableRow,
    TrajectoryCsv { path: PathBuf, resolution: usize },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(HarnessError::Config(format!("T must be positive, got {}", self.horizon)));
        }
        if self.steps == 0 {
            return Err(HarnessError::Config("L must be at least 1".into()));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// The generating series, with its growth class and active letters.
    pub fn series(&self) -> Result<SeriesSpec, HarnessError> {
        Ok(match &self.system {
            SystemConfig::Builtin(b) => builtin_series(*b),
            SystemConfig::Polynomial(p) => {
                let mut poly = Polynomial::zero();
                for (w, &c) in &p.terms {
                    let word: Word = w.parse().map_err(|_| HarnessError::Config(format!("bad word {w:?}")))?;
                    poly.add_term(word, c);
                }
                let letters: Vec<usize> = poly.letters().into_iter().collect();
                let spec = SeriesSpec::from_polynomial(Alphabet::new(p.m), poly)?.with_active_letters(&letters)?;
                match p.growth {
                    Some(g) => spec.with_growth(g),
                    None => spec,
                }
            }
            SystemConfig::Representation(r) => {
                let spec = SeriesSpec::from_representation(LinearRepresentation::from_row_major(
                    r.dim, &r.matrices, &r.gamma, &r.lambda,
                )?);
                match r.growth {
                    Some(g) => spec.with_growth(g),
                    None => spec,
                }
            }
        })
    }

    pub fn input(&self) -> Result<ContinuousInput, HarnessError> {
        let mut channels = Vec::with_capacity(self.input.channels.len());
        for ch in &self.input.channels {
            channels.push(match ch {
                ChannelConfig::Inline(c) => c.clone(),
                ChannelConfig::File { sampled_file } => {
                    let path = match &self.base_dir {
                        Some(dir) if sampled_file.is_relative() => dir.join(sampled_file),
                        _ => sampled_file.clone(),
                    };
                    Channel::from_file(&path)?
                }
            });
        }
        Ok(ContinuousInput::new(channels, self.horizon)?)
    }
}

pub fn builtin_series(b: Builtin) -> SeriesSpec {
    match b {
        Builtin::LcFactorial => SeriesSpec::from_callback(Alphabet::new(1), |w: &Word| crate::numeric::factorial(w.len()))
            .with_active_letters(&[1])
            .expect("letter 1 is in the alphabet")
            .with_growth(GrowthClass::locally_convergent(1.0, 1.0).expect("valid constants")),
        Builtin::GcGeometric => SeriesSpec::from_representation(
            LinearRepresentation::scalar(&[0.0, 1.0], 1.0, 1.0).expect("valid scalar representation"),
        )
        .with_growth(GrowthClass::globally_convergent(1.0, 1.0).expect("valid constants")),
    }
}
