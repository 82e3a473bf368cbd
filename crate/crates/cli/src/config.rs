//! Effective run configuration: defaults, then a TOML config file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use causal_atlas::metric::{MetricSpec, TopologyName};
use causal_atlas::{Error, Metric2D, Target, Tolerances};
use serde::{Deserialize, Serialize};

/// Ratio of the absolute to the relative integrator tolerance when only
/// `--tol-ode` is given.
const ODE_ABS_PER_REL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// File path or `builtin[:k=v,...]`.
    pub metric: Option<String>,
    #[serde(skip_deserializing)]
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    /// `n_t x n_x`; check-metric defaults to 64x64, verify to 128x128.
    pub grid: Option<[usize; 2]>,
    pub margin: Option<f64>,
    pub points: Option<PathBuf>,
    pub target: Option<Target>,
    pub surface_map: Option<String>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metric: None,
            command: String::new(),
            seed: 0,
            samples: 500,
            grid: None,
            margin: None,
            points: None,
            target: None,
            surface_map: None,
            out: None,
            report: None,
            tolerances: Tolerances::default(),
        }
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub metric: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid: Option<[usize; 2]>,
    pub margin: Option<f64>,
    pub points: Option<PathBuf>,
    pub target: Option<Target>,
    pub surface_map: Option<String>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tol_ode: Option<f64>,
    pub tol_event: Option<f64>,
    pub tol_causal: Option<f64>,
    pub tol_conf: Option<f64>,
}

impl RunConfig {
    pub fn load(command: &str, file: Option<&Path>, flags: Overrides) -> Result<RunConfig, Error> {
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str::<RunConfig>(&text).map_err(|e| {
                    Error::InvalidSpec(format!("config file {}: {}", path.display(), e.message()))
                })?
            }
            None => RunConfig::default(),
        };
        cfg.command = command.to_string();
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = flags.$field { cfg.$field = Some(v); })*
            };
        }
        take!(metric, grid, margin, points, target, surface_map, out, report);
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.samples {
            cfg.samples = v;
        }
        if let Some(v) = flags.tol_ode {
            cfg.tolerances.ode_rel = v;
            cfg.tolerances.ode_abs = v * ODE_ABS_PER_REL;
        }
        if let Some(v) = flags.tol_event {
            cfg.tolerances.event = v;
        }
        if let Some(v) = flags.tol_causal {
            cfg.tolerances.causal = v;
        }
        if let Some(v) = flags.tol_conf {
            cfg.tolerances.conf = v;
        }
        cfg.tolerances.validate().map_err(Error::InvalidSpec)?;
        if let Some([a, b]) = cfg.grid {
            if a < 2 || b < 2 {
                return Err(Error::InvalidSpec(format!("grid must be at least 2x2, got {a}x{b}")));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load_metric(&self) -> Result<Metric2D, Error> {
        let source = self
            .metric
            .as_deref()
            .ok_or_else(|| Error::MissingField("--metric".into()))?;
        resolve_metric(source)
    }
}

pub fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok([parse(a)?, parse(b)?])
}

/// A metric from a JSON file, or `builtin[:k=v,...]`.
pub fn resolve_metric(source: &str) -> Result<Metric2D, Error> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return causal_atlas::parse_metric_spec(&text);
    }
    let (name, params) = match source.split_once(':') {
        Some((n, p)) => (n, p),
        None => (source, ""),
    };
    if name.ends_with(".json") || name.contains('/') {
        return Err(Error::InvalidSpec(format!("metric file '{source}' not found")));
    }
    let mut spec = MetricSpec::builtin(name);
    for kv in params.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidSpec(format!("expected k=v in metric parameters, got '{kv}'")))?;
        let (k, v) = (k.trim(), v.trim());
        let number = || {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidSpec(format!("parameter {k}: '{v}' is not a number")))
        };
        match k {
            "omega2" | "a" | "name" => spec = spec.with_field(k, v),
            "period" => spec = spec.with_period(number()?),
            "topology" => {
                spec = spec.with_topology(match v {
                    "line" => TopologyName::Line,
                    "circle" => TopologyName::Circle,
                    _ => return Err(Error::InvalidSpec(format!("unknown topology '{v}'"))),
                })
            }
            "t_min" => spec.t_range = Some([number()?, spec.t_range.map_or(4.0, |r| r[1])]),
            "t_max" => spec.t_range = Some([spec.t_range.map_or(-4.0, |r| r[0]), number()?]),
            "x_min" => spec.x_range = Some([number()?, spec.x_range.map_or(4.0, |r| r[1])]),
            "x_max" => spec.x_range = Some([spec.x_range.map_or(-4.0, |r| r[0]), number()?]),
            _ => return Err(Error::InvalidSpec(format!("unknown metric parameter '{k}'"))),
        }
    }
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("128x64").unwrap(), [128, 64]);
        assert!(parse_grid("128").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 7\nsamples = 40\n[tolerances]\ncausal = 1e-6\n").unwrap();
        let flags = Overrides {
            samples: Some(12),
            ..Default::default()
        };
        let cfg = RunConfig::load("verify", Some(&path), flags).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.samples, 12);
        assert_eq!(cfg.tolerances.causal, 1e-6);
        assert_eq!(cfg.tolerances.conf, Tolerances::default().conf);
    }

    #[test]
    fn builtin_parameters() {
        let m = resolve_metric("conformal_flat:omega2=exp(t),t_min=-2,t_max=3").unwrap();
        assert_eq!(m.t_range(), [-2.0, 3.0]);
        assert!(resolve_metric("minkowski:bogus=1").is_err());
    }
}
