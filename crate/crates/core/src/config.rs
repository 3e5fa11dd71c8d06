//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionSpec;
use crate::num::{qser, Q};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BowersRuane,
    #[serde(rename = "example_6_1")]
    Example61,
    RigidFamily,
    CoxeterFamily,
    ConjectureScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BowersRuane => "bowers_ruane",
            ExperimentKind::Example61 => "example_6_1",
            ExperimentKind::RigidFamily => "rigid_family",
            ExperimentKind::CoxeterFamily => "coxeter_family",
            ExperimentKind::ConjectureScan => "conjecture_scan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidFamily {
    /// ℤ² on two lattices in ℝ².
    LatticePair,
    /// (ℤ×ℤ)∗ℤ₂ on two complexes.
    FlatInterval,
    /// ℤⁿ∗ℤ_m on two complexes.
    FlatCone,
    /// ℤ^{n₁}∗ℤ^{n₂} on two complexes.
    FlatFlat,
}

fn one() -> Q {
    Q::from_integer(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Covering radius used for `X` in (*) and for tracking rays.
    #[serde(default = "one", with = "qser")]
    pub n: Q,
    /// `M` for the (*) check; defaults to the scanned `M̂` when absent.
    #[serde(default, with = "qser::option")]
    pub m: Option<Q>,
    #[serde(default = "one", with = "qser")]
    pub big_r: Q,
    /// ε₀ of the Cauchy test.
    #[serde(default = "Constants::default_eps0")]
    pub eps0: f64,
    /// Additive slack allowed while fitting λ.
    #[serde(default)]
    pub c_max: f64,
    /// Subdivision mesh of the graph oracle.
    #[serde(default = "Constants::default_mesh")]
    pub mesh: f64,
}

impl Constants {
    fn default_eps0() -> f64 {
        1.0
    }
    fn default_mesh() -> f64 {
        0.01
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants { n: one(), m: None, big_r: one(), eps0: 1.0, c_max: 0.0, mesh: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Horizons {
    /// Unit-length ball radius for (*) scans.
    pub ball: u64,
    /// Sequence length for limits and Cauchy tests; the default depends on
    /// the experiment.
    pub sequence: Option<usize>,
    /// Radii for the Cauchy test; powers of two when absent.
    pub radii: Option<Vec<f64>>,
    /// Number of members of a parametrised family (the `g_i`).
    pub family: usize,
    /// Radius at which boundary gaps are compared.
    pub reference_radius: f64,
    /// Word-length bound for sampled elements.
    pub word_length: u64,
}

impl Default for Horizons {
    fn default() -> Self {
        Horizons { ball: 12, sequence: None, radii: None, family: 8, reference_radius: 8.0, word_length: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub x: Option<ActionSpec>,
    #[serde(default)]
    pub y: Option<ActionSpec>,
    /// Replace `Y` by `X`; every check should then pass trivially.
    #[serde(default)]
    pub sanity: bool,
    #[serde(default)]
    pub family: Option<RigidFamily>,
    /// `(p, q)` edge lengths for the conjecture scan.
    #[serde(default)]
    pub pairs: Vec<(i64, i64)>,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub horizons: Horizons,
    #[serde(default = "ExperimentConfig::default_out")]
    pub out: PathBuf,
}

impl ExperimentConfig {
    fn default_out() -> PathBuf {
        PathBuf::from("out")
    }

    /// A config with every field at its default.
    pub fn new(experiment: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            x: None,
            y: None,
            sanity: false,
            family: None,
            pairs: Vec::new(),
            constants: Constants::default(),
            horizons: Horizons::default(),
            out: Self::default_out(),
        }
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        let h = &self.horizons;
        if h.ball == 0 || h.sequence == Some(0) || h.family == 0 || h.word_length == 0 {
            return bad("horizons must be positive");
        }
        let doubling = matches!(self.experiment, ExperimentKind::Example61 | ExperimentKind::CoxeterFamily);
        if doubling && self.sequence() > 24 {
            return bad("doubling families have words of length 2^n; keep the sequence at most 24");
        }
        if !(h.reference_radius > 0.0) {
            return bad("reference_radius must be positive");
        }
        if h.radii.as_ref().is_some_and(|r| r.iter().any(|x| !(*x > 0.0))) {
            return bad("radii must be positive");
        }
        let c = &self.constants;
        if c.n <= Q::from_integer(0) || c.m.is_some_and(|m| m <= Q::from_integer(0)) || c.big_r <= Q::from_integer(0) {
            return bad("N, M and R must be positive");
        }
        if !(c.eps0 > 0.0) || !(c.mesh > 0.0) || c.c_max < 0.0 {
            return bad("eps0 and mesh must be positive and c_max nonnegative");
        }
        for &(p, q) in &self.pairs {
            if q < 1 || p < q {
                return Err(ConfigError::Invalid(format!("pair ({p}, {q}) needs p ≥ q ≥ 1")));
            }
        }
        if self.experiment == ExperimentKind::ConjectureScan && self.pairs.len() < 2 {
            return bad("conjecture_scan needs at least two (p, q) pairs");
        }
        Ok(())
    }

    /// Sequence length, with the experiment's default when unset.
    pub fn sequence(&self) -> usize {
        self.horizons.sequence.unwrap_or(match self.experiment {
            ExperimentKind::BowersRuane => 200,
            ExperimentKind::Example61 | ExperimentKind::CoxeterFamily => 20,
            ExperimentKind::RigidFamily => 50,
            ExperimentKind::ConjectureScan => 1,
        })
    }

    /// Overrides from the command line.
    pub fn apply_overrides(&mut self, ball: Option<u64>, horizon: Option<usize>, out: Option<PathBuf>) -> Result<(), ConfigError> {
        if let Some(b) = ball {
            self.horizons.ball = b;
        }
        if let Some(h) = horizon {
            self.horizons.sequence = Some(h);
        }
        if let Some(o) = out {
            self.out = o;
        }
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full() {
        let c = ExperimentConfig::from_toml("experiment = \"example_6_1\"").unwrap();
        assert_eq!(c.sequence(), 20);
        let text = r#"
            experiment = "rigid_family"
            family = "lattice_pair"
            [constants]
            n = "1"
            m = 1.5
            [horizons]
            ball = 16
            [x]
            space = "lattice"
            basis = [[1, 0], [0, 1]]
            [y]
            space = "lattice"
            basis = [[1, 0], [1, 1]]
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.constants.m, Some(Q::new(3, 2)));
        assert!(matches!(c.y, Some(ActionSpec::Lattice { .. })));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"conjecture_scan\"\npairs = [[1, 2], [2, 1]]").is_err());
        let e = ExperimentConfig::from_toml("experiment = \"example_6_1\"\n[horizons]\nball = 0");
        assert!(matches!(e, Err(ConfigError::Invalid(_))));
    }
}
