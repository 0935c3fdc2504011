//! Experiment configuration files (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparse_harmonics::grid::{Domain, DyadicCube, GridFunction};
use sparse_harmonics::harness::{Comparator, FunctionSpec, OperatorSpec, SharpnessSymbol, TGrid};
use sparse_harmonics::orlicz::YoungKind;
use sparse_harmonics::weights::{DimensionalConstants, WeightSpec};

use crate::CliError;

pub const SEED_ENV: &str = "SPARSE_HARMONICS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Decay,
    Cf,
    Mixed,
    Fs,
    Modular,
    Constants,
    Sharpness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub left: f64,
    pub length: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { left: -1.0, length: 4.0 }
    }
}

fn default_l() -> u32 {
    10
}

fn default_slack() -> f64 {
    10.0
}

/// One experiment. Keys that a kind does not use must be absent or are
/// reported as errors by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default)]
    pub dimensional: DimensionalConstants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    /// inputs `f⃗`; random kinds have the config seed added to their own
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    /// symbols `b⃗`, attached to input slots `0..l`
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSpec>,
    /// the weight `v` of the mixed weak-type bound
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<WeightSpec>,
    #[serde(default)]
    pub t_grid: TGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<Comparator>,
    /// `[level, index]` of the base dyadic cube `Q0`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<YoungKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SharpnessSymbol>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.seed = s
                .trim()
                .parse()
                .map_err(|_| config_err(format!("{SEED_ENV}={s} is not an unsigned integer")))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        use ExperimentKind::*;
        if !(self.slack >= 1.0) {
            return Err(config_err(format!("slack must be at least 1, got {}", self.slack)));
        }
        let allowed: &[&str] = match self.kind {
            Decay => &["operator", "comparator", "q0"],
            Cf => &["operator", "p"],
            Mixed => &["operator", "v", "t"],
            Fs => &["operator", "ps"],
            Modular => &["operator", "phi", "q", "r"],
            Constants => &["ps"],
            Sharpness => &["symbol"],
        };
        let present = [
            ("operator", self.operator.is_some()),
            ("comparator", self.comparator.is_some()),
            ("q0", self.q0.is_some()),
            ("p", self.p.is_some()),
            ("ps", self.ps.is_some()),
            ("t", self.t.is_some()),
            ("v", self.v.is_some()),
            ("phi", self.phi.is_some()),
            ("q", self.q.is_some()),
            ("r", self.r.is_some()),
            ("symbol", self.symbol.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(config_err(format!("key `{key}` is not used by {:?} experiments", self.kind)));
            }
        }
        let operator_kind = !matches!(self.kind, Constants | Sharpness);
        if operator_kind {
            let op = self.operator.ok_or_else(|| config_err("missing `operator`"))?;
            if self.functions.len() != op.arity() {
                return Err(config_err(format!(
                    "{} takes {} functions, got {}",
                    op.name(),
                    op.arity(),
                    self.functions.len()
                )));
            }
        } else if !self.functions.is_empty() || !self.symbols.is_empty() {
            return Err(config_err("`functions` and `symbols` are not used by this kind"));
        }
        let need = |v: Option<f64>, key: &str| v.map(|_| ()).ok_or_else(|| config_err(format!("missing `{key}`")));
        match self.kind {
            Cf => need(self.p, "p")?,
            Fs => {
                if self.ps.is_none() {
                    return Err(config_err("missing `ps`"));
                }
            }
            Modular => {
                need(self.q, "q")?;
                need(self.r, "r")?;
                if self.phi.is_none() {
                    return Err(config_err("missing `phi`"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Domain::new(self.domain.left, self.domain.length, self.l).map_err(|e| config_err(e.to_string()))
    }

    pub fn q0(&self) -> DyadicCube {
        let [level, index] = self.q0.unwrap_or([2, 1]);
        DyadicCube::base1(level, index as i64)
    }

    fn seeded(&self, spec: &FunctionSpec) -> FunctionSpec {
        match spec.clone() {
            FunctionSpec::RandomBumps { count, seed } => FunctionSpec::RandomBumps {
                count,
                seed: seed.wrapping_add(self.seed),
            },
            FunctionSpec::RandomStep { k, seed } => FunctionSpec::RandomStep {
                k,
                seed: seed.wrapping_add(self.seed),
            },
            other => other,
        }
    }

    pub fn sample_functions(&self, d: Domain) -> Vec<GridFunction> {
        self.functions.iter().map(|f| self.seeded(f).sample(d)).collect()
    }

    pub fn sample_symbols(&self, d: Domain) -> Vec<GridFunction> {
        self.symbols.iter().map(|f| self.seeded(f).sample(d)).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
