//! Experiment configuration, read from TOML.
//!
//! ```toml
//! mu = [4.0, 4.0, 4.0, 4.0]
//! sigma = [[1.0, 2.0, 2.0, 2.0], [2.0, 5.0, 4.0, 4.0],
//!          [2.0, 4.0, 4.5, 4.0], [2.0, 4.0, 4.0, 4.5]]
//! samples = 100000
//! seed = 42
//! estimators = ["is", "is-cv-beta-star", "is-cv-fixed"]
//!
//! [gamma_grid]
//! log_gamma_start = 3.0
//! log_gamma_end = -2.0
//! points = 6
//! ```
//!
//! The grid may instead be `gammas = [...]` (linear thresholds) or
//! `log_gammas = [...]`.

use std::fs;
use std::path::{Path, PathBuf};

use lntail::{validate_problem, EstimatorTag, Matrix, Problem, Threshold};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid model: {0}")]
    Model(#[from] lntail::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaGrid {
    Linear {
        gammas: Vec<f64>,
    },
    Log {
        log_gammas: Vec<f64>,
    },
    LogSpaced {
        log_gamma_start: f64,
        log_gamma_end: f64,
        points: usize,
    },
}

impl GammaGrid {
    pub fn thresholds(&self) -> Result<Vec<Threshold<f64>>, ConfigError> {
        let th = match self {
            GammaGrid::Linear { gammas } => gammas
                .iter()
                .map(|&g| Threshold::from_gamma(g))
                .collect::<Result<Vec<_>, _>>()?,
            GammaGrid::Log { log_gammas } => log_gammas
                .iter()
                .map(|&l| Threshold::from_log(l))
                .collect::<Result<Vec<_>, _>>()?,
            &GammaGrid::LogSpaced {
                log_gamma_start: a,
                log_gamma_end: b,
                points,
            } => {
                if points == 0 {
                    return Err(invalid("gamma_grid.points must be at least 1"));
                }
                if points == 1 {
                    vec![Threshold::from_log(a)?]
                } else {
                    let step = (b - a) / (points - 1) as f64;
                    (0..points)
                        .map(|k| {
                            let l = if k == points - 1 {
                                b
                            } else {
                                a + step * k as f64
                            };
                            Threshold::from_log(l)
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
            }
        };
        if th.is_empty() {
            return Err(invalid("gamma grid is empty"));
        }
        if let Some(w) = th.windows(2).find(|w| w[1].log() >= w[0].log()) {
            return Err(invalid(format!(
                "gamma grid must be strictly decreasing (log γ {} then {})",
                w[0].log(),
                w[1].log()
            )));
        }
        Ok(th)
    }
}

fn default_confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mu: Vec<f64>,
    /// Row-major, as nested arrays.
    pub sigma: Vec<Vec<f64>>,
    pub gamma_grid: GammaGrid,
    /// Samples per estimator per threshold.
    pub samples: u64,
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub estimators: Vec<String>,
    #[serde(default = "default_confidence")]
    pub confidence_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Worker threads; the rayon default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// A configuration that passed validation, with the model built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: Problem<f64>,
    pub thresholds: Vec<Threshold<f64>>,
    pub estimators: Vec<EstimatorTag>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    /// The echo written into output files: every field that affects the
    /// numbers. `threads` and `output` are left out, so the same experiment
    /// run on a different pool or into a different file is byte-identical.
    pub fn echo_toml(&self) -> String {
        Self {
            threads: None,
            output: None,
            ..self.clone()
        }
        .to_toml()
    }

    pub fn estimator_tags(&self) -> Result<Vec<EstimatorTag>, ConfigError> {
        if self.estimators.is_empty() {
            return Err(invalid("no estimators requested"));
        }
        let mut tags = Vec::new();
        for name in &self.estimators {
            let tag: EstimatorTag = name.parse().map_err(|_| {
                invalid(format!(
                    "unknown estimator `{name}` (expected one of naive, is, is-cv-beta-star, is-cv-fixed)"
                ))
            })?;
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        Ok(tags)
    }

    pub fn validate(self) -> Result<Experiment, ConfigError> {
        if self.samples < 2 {
            return Err(invalid(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if !(0.0..1.0).contains(&self.confidence_level) {
            return Err(invalid(format!(
                "confidence_level must lie in [0, 1), got {}",
                self.confidence_level
            )));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        let estimators = self.estimator_tags()?;
        let thresholds = self.gamma_grid.thresholds()?;
        let n = self.mu.len();
        if self.sigma.len() != n || self.sigma.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("sigma must be {n}×{n} to match mu")));
        }
        let sigma = Matrix::from_rows(&self.sigma)?;
        let problem = validate_problem(self.mu.clone(), sigma)?;
        Ok(Experiment {
            config: self,
            problem,
            thresholds,
            estimators,
        })
    }
}

/// TOML integers are signed 64-bit; seeds above `i64::MAX` are written as
/// strings.
mod seed_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => {
                u64::try_from(v).map_err(|_| de::Error::custom("seed must be non-negative"))
            }
            Repr::Text(s) => s.trim().parse().map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = r#"
mu = [4.0, 4.0, 4.0, 4.0]
sigma = [[1.0, 2.0, 2.0, 2.0], [2.0, 5.0, 4.0, 4.0], [2.0, 4.0, 4.5, 4.0], [2.0, 4.0, 4.0, 4.5]]
samples = 1000
seed = 7
estimators = ["is", "is-cv-fixed"]

[gamma_grid]
log_gamma_start = 3.0
log_gamma_end = -2.0
points = 6
"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_toml_str(PAPER).unwrap();
        assert_eq!(c.confidence_level, 0.95);
        let e = c.validate().unwrap();
        let logs: Vec<f64> = e.thresholds.iter().map(|t| t.log()).collect();
        assert_eq!(logs, vec![3.0, 2.0, 1.0, 0.0, -1.0, -2.0]);
        assert_eq!(
            e.estimators,
            vec![EstimatorTag::Is, EstimatorTag::IsCvFixed]
        );
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::from_toml_str(PAPER).unwrap();
        c.seed = u64::MAX;
        c.threads = Some(3);
        let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = |from: &str, to: &str| {
            ExperimentConfig::from_toml_str(&PAPER.replace(from, to))
                .and_then(|c| c.validate())
                .unwrap_err()
        };
        assert!(matches!(
            bad("samples = 1000", "samples = 1"),
            ConfigError::Invalid(_)
        ));
        assert!(matches!(
            bad("\"is\",", "\"magic\","),
            ConfigError::Invalid(_)
        ));
        assert!(matches!(
            bad("log_gamma_end = -2.0", "log_gamma_end = 5.0"),
            ConfigError::Invalid(_)
        ));
        assert!(matches!(
            bad("[2.0, 4.0, 4.0, 4.5]]", "[2.0, 4.0, 4.0, -4.5]]"),
            ConfigError::Model(lntail::Error::NotPositiveDefinite { pivot: 3, .. })
        ));
        assert!(matches!(bad("samples", "smaples"), ConfigError::Parse(_)));
        let linear = PAPER.replace(
            "log_gamma_start = 3.0\nlog_gamma_end = -2.0\npoints = 6",
            "gammas = [1.0, 2.0]",
        );
        let err = ExperimentConfig::from_toml_str(&linear)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }
}
