use std::fmt;
use std::path::{Path, PathBuf};

use saddlescape::{SolverParams, StepKind};
use serde::{Deserialize, Serialize};

/// Landscape selection by registry name, with per-landscape overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum LandscapeSpec {
    Mb,
    Mmb,
    RosenbrockI {
        #[serde(default = "default_rosenbrock_dim")]
        d: usize,
    },
    RosenbrockIi {
        #[serde(default = "default_rosenbrock_dim")]
        d: usize,
    },
    Convex2 {
        #[serde(default = "default_convex2_dim")]
        d: usize,
        #[serde(default = "default_convex2_k")]
        k: usize,
    },
    LinearNn {
        #[serde(default = "default_nn_dims")]
        dims: Vec<usize>,
        #[serde(default = "default_nn_samples")]
        samples: usize,
        /// 1-based indices into the descending spectrum of `Sigma`.
        #[serde(default = "default_nn_index_set")]
        index_set: Vec<usize>,
        #[serde(default)]
        data_seed: u64,
    },
    Quadratic {
        eigvals: Vec<f64>,
    },
}

fn default_rosenbrock_dim() -> usize {
    1000
}
fn default_convex2_dim() -> usize {
    100
}
fn default_convex2_k() -> usize {
    5
}
fn default_nn_dims() -> Vec<usize> {
    vec![10, 10, 10, 10, 10, 4]
}
fn default_nn_samples() -> usize {
    100
}
fn default_nn_index_set() -> Vec<usize> {
    vec![1, 2, 3]
}

impl LandscapeSpec {
    pub fn registry_name(&self) -> &'static str {
        match self {
            Self::Mb => "mb",
            Self::Mmb => "mmb",
            Self::RosenbrockI { .. } => "rosenbrock_i",
            Self::RosenbrockIi { .. } => "rosenbrock_ii",
            Self::Convex2 { .. } => "convex2",
            Self::LinearNn { .. } => "linear_nn",
            Self::Quadratic { .. } => "quadratic",
        }
    }
}

/// Initial point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Explicit { x: Vec<f64> },
    /// `x* + rho n/|n|`, `n` drawn from `params.seed`.
    KnownSaddlePlusSphere { rho: f64 },
    /// Linear network only: `W* + V` with layerwise standard deviations
    /// `scale ||W_h*||_F / sqrt(d_{h-1} d_h)`, drawn from `params.seed`.
    KnownSaddlePlusLayerwiseGaussian {
        #[serde(default = "default_layer_scale")]
        scale: f64,
    },
}

fn default_layer_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Trace file. Sweeps write the table here (`.csv` and `.txt`) and one
    /// trace per row next to it.
    pub path: Option<PathBuf>,
    pub format: TraceFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub landscape: LandscapeSpec,
    #[serde(default = "default_method")]
    pub method: StepKind,
    #[serde(default)]
    pub params: SolverParams,
    pub init: InitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_method() -> StepKind {
    StepKind::Ahisd
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { line: usize, column: usize, message: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            Self::Parse { line, column, message } => {
                write!(f, "config error at line {line}, column {column}: {message}")
            }
            Self::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Pretty JSON with every default filled in.
    pub fn effective_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match (&self.init, &self.landscape) {
            (InitSpec::KnownSaddlePlusLayerwiseGaussian { .. }, LandscapeSpec::LinearNn { .. }) => {}
            (InitSpec::KnownSaddlePlusLayerwiseGaussian { .. }, other) => {
                return Err(ConfigError::Invalid(format!(
                    "known_saddle_plus_layerwise_gaussian needs linear_nn, not {}",
                    other.registry_name()
                )))
            }
            (InitSpec::KnownSaddlePlusSphere { rho }, _) if !(*rho >= 0.0 && rho.is_finite()) => {
                return Err(ConfigError::Invalid(format!("rho must be nonnegative, got {rho}")))
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(ConfigError::Invalid("sweep list is empty".into()));
            }
            if let Some(g) = sweep.iter().find(|g| !(0.0..1.0).contains(*g)) {
                return Err(ConfigError::Invalid(format!("sweep gamma {g} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: &str = r#"{
        "landscape": {"name": "mb"},
        "params": {"beta": 2e-4, "gamma": 0.9, "k": 1, "stop_tol": 1e-11},
        "init": {"kind": "explicit", "x": [0.15, 1.5]}
    }"#;

    #[test]
    fn parses_minimal() {
        let cfg = ExperimentConfig::from_json(MB).unwrap();
        assert_eq!(cfg.landscape, LandscapeSpec::Mb);
        assert_eq!(cfg.method, StepKind::Ahisd);
        assert_eq!(cfg.params.beta, 2e-4);
        assert_eq!(cfg.params.max_iter, SolverParams::default().max_iter);
    }

    #[test]
    fn effective_dump_round_trips() {
        let cfg = ExperimentConfig::from_json(MB).unwrap();
        let again = ExperimentConfig::from_json(&cfg.effective_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = "{\n  \"landscape\": {\"name\": \"mb\"},\n  \"bogus\": 1,\n  \"init\": {\"kind\": \"explicit\", \"x\": [0, 0]}\n}";
        match ExperimentConfig::from_json(text) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_landscape_rejected() {
        let text = r#"{"landscape": {"name": "himmelblau"}, "init": {"kind": "explicit", "x": [0]}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn unknown_param_rejected() {
        let text = r#"{"landscape": {"name": "mb"}, "params": {"betta": 1},
                       "init": {"kind": "explicit", "x": [0, 0]}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn layerwise_init_needs_network() {
        let text = r#"{"landscape": {"name": "mb"},
                       "init": {"kind": "known_saddle_plus_layerwise_gaussian"}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Invalid(_))));
    }
}
