//! Experiment configuration: strict JSON schema (unknown fields rejected)
//! and exhaustive validation that reports every violation, not just the
//! first.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use kplab_core::control::Orientation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Hum,
    ScanLambda,
    Ingham,
    Counterexample,
    NonlinearSteer,
    Transit,
    Selftest,
}

pub const EXPERIMENT_NAMES: [&str; 7] = [
    "hum",
    "scan-lambda",
    "ingham",
    "counterexample",
    "nonlinear-steer",
    "transit",
    "selftest",
];

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::Hum => "hum",
            ExperimentKind::ScanLambda => "scan-lambda",
            ExperimentKind::Ingham => "ingham",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::NonlinearSteer => "nonlinear-steer",
            ExperimentKind::Transit => "transit",
            ExperimentKind::Selftest => "selftest",
        };
        f.write_str(name)
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hum" => Ok(ExperimentKind::Hum),
            "scan-lambda" => Ok(ExperimentKind::ScanLambda),
            "ingham" => Ok(ExperimentKind::Ingham),
            "counterexample" => Ok(ExperimentKind::Counterexample),
            "nonlinear-steer" => Ok(ExperimentKind::NonlinearSteer),
            "transit" => Ok(ExperimentKind::Transit),
            "selftest" => Ok(ExperimentKind::Selftest),
            other => Err(format!(
                "unknown experiment '{other}'; valid names: {}",
                EXPERIMENT_NAMES.join(", ")
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "K")]
    pub k_max: u32,
    #[serde(rename = "L")]
    pub l_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    pub a: f64,
    pub b: f64,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub dealias: f64,
    pub max_picard: usize,
    pub picard_tol: f64,
    #[serde(rename = "R")]
    pub r_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            dealias: 2.0 / 3.0,
            max_picard: 20,
            picard_tol: 1e-10,
            r_bound: 1.0,
        }
    }
}

/// Experiment-specific sweep lists; unused fields stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freqs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Packet cutoff radius; defaults to `alpha / (2.5 T)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_outer: Option<f64>,
    /// Weak-observability H⁻¹ weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Number of seeded random steering pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub grid: GridConfig,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub strip: StripConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub seed: u64,
    pub output_dir: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// Structural failure: malformed JSON, unknown field, wrong type.
    Schema(String),
    /// The document parsed but violates validation rules; every violation
    /// is listed.
    Violations(Vec<Violation>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Schema(msg) => write!(f, "configuration schema error: {msg}"),
            ConfigError::Violations(list) => {
                writeln!(f, "configuration violates {} rule(s):", list.len())?;
                for v in list {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parse and validate a JSON configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    let violations = validate(&cfg);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Violations(violations))
    }
}

/// Collect every validation violation of a structurally valid config.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: &str, message: String| {
        out.push(Violation {
            path: path.to_string(),
            message,
        })
    };

    if cfg.grid.k_max == 0 {
        push("grid.K", "must be at least 1".into());
    }
    if !(cfg.t_final > 0.0) {
        push("T", format!("must be positive, got {}", cfg.t_final));
    }
    if cfg.strip.a < -PI {
        push("strip.a", format!("must be >= -π, got {}", cfg.strip.a));
    }
    if cfg.strip.b > PI {
        push("strip.b", format!("must be <= π, got {}", cfg.strip.b));
    }
    if cfg.strip.a >= cfg.strip.b {
        push(
            "strip.a",
            format!("must be below strip.b, got a = {}", cfg.strip.a),
        );
        push(
            "strip.b",
            format!("must be above strip.a, got b = {}", cfg.strip.b),
        );
    }
    if !(cfg.solver.dt > 0.0) {
        push("solver.dt", format!("must be positive, got {}", cfg.solver.dt));
    }
    if !(cfg.solver.dealias > 0.0 && cfg.solver.dealias <= 1.0) {
        push(
            "solver.dealias",
            format!("must lie in (0, 1], got {}", cfg.solver.dealias),
        );
    }
    if !(cfg.solver.picard_tol > 0.0) {
        push(
            "solver.picard_tol",
            format!("must be positive, got {}", cfg.solver.picard_tol),
        );
    }
    if cfg.solver.max_picard == 0 {
        push("solver.max_picard", "must be at least 1".into());
    }
    if !(cfg.solver.r_bound > 0.0) {
        push(
            "solver.R",
            format!("must be positive, got {}", cfg.solver.r_bound),
        );
    }

    match cfg.experiment {
        ExperimentKind::Hum | ExperimentKind::NonlinearSteer | ExperimentKind::ScanLambda => {
            if cfg.strip.orientation != Orientation::Vertical {
                push(
                    "strip.orientation",
                    format!(
                        "{} requires the vertical orientation (the controllable side)",
                        cfg.experiment
                    ),
                );
            }
        }
        ExperimentKind::Counterexample => {
            if cfg.strip.orientation != Orientation::Horizontal {
                push(
                    "strip.orientation",
                    "counterexample requires horizontal orientation".into(),
                );
            }
            match cfg.sweep.alpha {
                None => push("sweep.alpha", "counterexample requires alpha".into()),
                Some(alpha) if !(0.0 < alpha && alpha < PI) => {
                    push("sweep.alpha", format!("must lie in (0, π), got {alpha}"))
                }
                _ => {}
            }
            match &cfg.sweep.n_list {
                None => push("sweep.n_list", "counterexample requires a scale list".into()),
                Some(list) if list.is_empty() => {
                    push("sweep.n_list", "scale list must be nonempty".into())
                }
                Some(list) if list.iter().any(|&n| n < 2) => {
                    push("sweep.n_list", "scales must satisfy n >= 2".into())
                }
                _ => {}
            }
        }
        ExperimentKind::Ingham | ExperimentKind::Transit | ExperimentKind::Selftest => {}
    }

    match cfg.experiment {
        ExperimentKind::ScanLambda | ExperimentKind::Transit => {
            match &cfg.sweep.lambdas {
                None => push(
                    "sweep.lambdas",
                    format!("{} requires a lambda list", cfg.experiment),
                ),
                Some(list) if list.is_empty() => {
                    push("sweep.lambdas", "lambda list must be nonempty".into())
                }
                Some(list) if list.iter().any(|&l| l < 0.0) => {
                    push("sweep.lambdas", "lambdas must be >= 0".into())
                }
                _ => {}
            }
        }
        ExperimentKind::Ingham => match &cfg.sweep.freqs {
            None => push("sweep.freqs", "ingham requires a frequency list".into()),
            Some(list) if list.is_empty() => {
                push("sweep.freqs", "frequency list must be nonempty".into())
            }
            _ => {}
        },
        _ => {}
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_hum_json() -> String {
        serde_json::json!({
            "experiment": "hum",
            "grid": {"K": 8, "L": 4},
            "T": 1.0,
            "strip": {"a": -1.5707963267948966, "b": 1.5707963267948966,
                      "orientation": "vertical"},
            "seed": 1,
            "output_dir": "out"
        })
        .to_string()
    }

    #[test]
    fn minimal_hum_round_trips() {
        let cfg = parse_config(&minimal_hum_json()).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn reversed_strip_names_both_fields() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_hum_json()).unwrap();
        v["strip"]["a"] = serde_json::json!(1.0);
        v["strip"]["b"] = serde_json::json!(0.5);
        let err = parse_config(&v.to_string()).unwrap_err();
        match err {
            ConfigError::Violations(list) => {
                assert!(list.iter().any(|x| x.path == "strip.a"));
                assert!(list.iter().any(|x| x.path == "strip.b"));
            }
            other => panic!("expected violations, got {other}"),
        }
    }

    #[test]
    fn counterexample_rejects_vertical_strip() {
        let v = serde_json::json!({
            "experiment": "counterexample",
            "grid": {"K": 64, "L": 26},
            "T": 1.0,
            "strip": {"a": -1.0, "b": 1.0, "orientation": "vertical"},
            "sweep": {"alpha": 1.0, "n_list": [4, 8]},
            "seed": 1,
            "output_dir": "out"
        });
        let err = parse_config(&v.to_string()).unwrap_err();
        match err {
            ConfigError::Violations(list) => {
                assert!(list
                    .iter()
                    .any(|x| x.message.contains("requires horizontal orientation")));
            }
            other => panic!("expected violations, got {other}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_hum_json()).unwrap();
        v["surprise"] = serde_json::json!(true);
        assert!(matches!(
            parse_config(&v.to_string()),
            Err(ConfigError::Schema(_))
        ));
    }

    #[test]
    fn unknown_experiment_lists_valid_names() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_hum_json()).unwrap();
        v["experiment"] = serde_json::json!("warp-drive");
        let err = parse_config(&v.to_string()).unwrap_err();
        match err {
            ConfigError::Schema(msg) => {
                // serde lists the expected variants in its error.
                assert!(msg.contains("hum"), "{msg}");
            }
            other => panic!("expected schema error, got {other}"),
        }
        assert!("warp-drive".parse::<ExperimentKind>().is_err());
        assert!("scan-lambda".parse::<ExperimentKind>().is_ok());
    }

    #[test]
    fn violations_are_collected_not_truncated() {
        let v = serde_json::json!({
            "experiment": "scan-lambda",
            "grid": {"K": 0, "L": 2},
            "T": -1.0,
            "strip": {"a": 1.0, "b": 0.5, "orientation": "horizontal"},
            "solver": {"dt": 0.0, "dealias": 1.5, "max_picard": 0,
                       "picard_tol": 0.0, "R": -2.0},
            "seed": 3,
            "output_dir": "out"
        });
        let err = parse_config(&v.to_string()).unwrap_err();
        match err {
            ConfigError::Violations(list) => {
                assert!(list.len() >= 9, "only {} violations: {list:?}", list.len());
            }
            other => panic!("expected violations, got {other}"),
        }
    }
}
