//! Run configuration: flat dotted keys from a JSON file, then command-line
//! overrides of the same names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use subsol_core::{AnnulusGeometry, SubsolutionParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("key `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("override `{0}` has no value")]
    Dangling(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Float,
    Count,
    FloatList,
    Text,
    Seed,
}

/// Every accepted key, its type and its default (`None` = required when a
/// config file is given).
const KEYS: &[(&str, Kind, Option<&str>)] = &[
    ("geometry.rho", Kind::Float, Some("1")),
    ("geometry.R", Kind::Float, Some("2")),
    ("geometry.r0", Kind::Float, Some("1.5")),
    ("geometry.T", Kind::Float, Some("1")),
    ("params.lambda", Kind::Float, Some("0.1")),
    ("params.epsilon", Kind::Float, Some("0.5")),
    ("grid.n_r", Kind::Count, Some("50")),
    ("grid.n_theta", Kind::Count, Some("32")),
    ("grid.n_t", Kind::Count, Some("5")),
    ("grid.quad_order", Kind::Count, Some("8")),
    ("sweep.epsilon", Kind::FloatList, Some("[0, 0.25, 0.5, 0.75]")),
    ("sweep.nu", Kind::FloatList, Some("[0.01, 0.001, 0.0001]")),
    ("sweep.eps_cutoff", Kind::FloatList, Some("[0.04, 0.02, 0.01, 0.005]")),
    ("burgers.n_start", Kind::Count, Some("2000")),
    ("burgers.levels", Kind::Count, Some("4")),
    ("burgers.t", Kind::Float, Some("0.5")),
    ("energy.n_times", Kind::Count, Some("9")),
    ("residual.levels", Kind::Count, Some("4")),
    ("residual.n_points", Kind::Count, Some("200")),
    ("viscosity.n_r", Kind::Count, Some("2000")),
    ("viscosity.t", Kind::Float, Some("1")),
    ("boundary.holder_alpha", Kind::Float, Some("0.5")),
    ("output.dir", Kind::Text, Some("\"subsol-out\"")),
    ("seed", Kind::Seed, Some("0")),
];

const REQUIRED_WITH_FILE: &[&str] = &[
    "geometry.rho",
    "geometry.R",
    "geometry.r0",
    "geometry.T",
    "params.lambda",
    "params.epsilon",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: AnnulusGeometry,
    pub params: SubsolutionParams,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_t: usize,
    pub quad_order: usize,
    pub epsilon_sweep: Vec<f64>,
    pub nu_sweep: Vec<f64>,
    pub eps_cutoff: Vec<f64>,
    pub burgers_n_start: usize,
    pub burgers_levels: usize,
    pub burgers_t: f64,
    pub energy_n_times: usize,
    pub residual_levels: usize,
    pub residual_points: usize,
    pub viscosity_n_r: usize,
    pub viscosity_t: f64,
    pub holder_alpha: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Fully resolved key/value map, echoed into every report.
    #[serde(skip)]
    pub echo: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

/// Parses an override value from the command line. Lists are comma separated.
fn parse_override(key: &str, raw: &str) -> Result<Value, ConfigError> {
    let kind = kind_of(key).ok_or_else(|| ConfigError::Unknown(key.to_string()))?;
    let bad = |msg: &str| ConfigError::Value {
        key: key.to_string(),
        msg: format!("{msg}: `{raw}`"),
    };
    let num = |s: &str| -> Result<Value, ConfigError> {
        let x: f64 = s.trim().parse().map_err(|_| bad("not a number"))?;
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| bad("not finite"))
    };
    match kind {
        Kind::Text => Ok(Value::String(raw.to_string())),
        Kind::FloatList => raw
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Array),
        Kind::Count | Kind::Seed => raw
            .trim()
            .parse::<u64>()
            .map(Value::from)
            .map_err(|_| bad("not a non-negative integer")),
        Kind::Float => num(raw),
    }
}

/// Splits `--key value` / `--key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(body) = a.strip_prefix("--") else {
            return Err(ConfigError::Invalid(format!("unexpected argument `{a}`")));
        };
        if let Some((k, v)) = body.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it.next().ok_or_else(|| ConfigError::Dangling(body.to_string()))?;
            out.push((body.to_string(), v.clone()));
        }
    }
    Ok(out)
}

fn get_f64(m: &BTreeMap<String, Value>, key: &str) -> Result<f64, ConfigError> {
    m[key].as_f64().ok_or_else(|| ConfigError::Value {
        key: key.into(),
        msg: "expected a number".into(),
    })
}

fn get_count(m: &BTreeMap<String, Value>, key: &str) -> Result<usize, ConfigError> {
    match m[key].as_u64() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(ConfigError::Value {
            key: key.into(),
            msg: "expected a positive integer".into(),
        }),
    }
}

fn get_list(m: &BTreeMap<String, Value>, key: &str) -> Result<Vec<f64>, ConfigError> {
    let err = || ConfigError::Value {
        key: key.into(),
        msg: "expected a list of numbers".into(),
    };
    match &m[key] {
        Value::Array(a) => a.iter().map(|v| v.as_f64().ok_or_else(err)).collect(),
        Value::Number(n) => Ok(vec![n.as_f64().ok_or_else(err)?]),
        Value::String(s) => s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| err()))
            .collect(),
        _ => Err(err()),
    }
}

impl RunConfig {
    /// Defaults, then the file (if any), then overrides, then the explicit
    /// `--out` / `--seed` flags.
    pub fn load(
        file: Option<&Path>,
        overrides: &[(String, String)],
        out: Option<&Path>,
        seed: Option<u64>,
    ) -> Result<Self, ConfigError> {
        let mut m: BTreeMap<String, Value> = KEYS
            .iter()
            .map(|(k, _, d)| (k.to_string(), serde_json::from_str(d.unwrap()).unwrap()))
            .collect();

        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let root: Value = serde_json::from_str(&text)?;
            if !root.is_object() {
                return Err(ConfigError::Invalid("config root must be an object".into()));
            }
            let mut flat = Map::new();
            flatten("", &root, &mut flat);
            for key in REQUIRED_WITH_FILE {
                if !flat.contains_key(*key) {
                    return Err(ConfigError::Missing(key));
                }
            }
            for (k, v) in flat {
                if kind_of(&k).is_none() {
                    return Err(ConfigError::Unknown(k));
                }
                m.insert(k, v);
            }
        }
        for (k, raw) in overrides {
            let v = parse_override(k, raw)?;
            m.insert(k.clone(), v);
        }
        if let Some(p) = out {
            m.insert("output.dir".into(), Value::String(p.display().to_string()));
        }
        if let Some(s) = seed {
            m.insert("seed".into(), Value::from(s));
        }

        let geometry = AnnulusGeometry::new(
            get_f64(&m, "geometry.rho")?,
            get_f64(&m, "geometry.R")?,
            get_f64(&m, "geometry.r0")?,
            get_f64(&m, "geometry.T")?,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let params = SubsolutionParams {
            lambda: get_f64(&m, "params.lambda")?,
            epsilon: get_f64(&m, "params.epsilon")?,
        };
        let out_dir = match &m["output.dir"] {
            Value::String(s) if !s.is_empty() => PathBuf::from(s),
            _ => {
                return Err(ConfigError::Value {
                    key: "output.dir".into(),
                    msg: "expected a path".into(),
                })
            }
        };
        let seed = m["seed"].as_u64().ok_or_else(|| ConfigError::Value {
            key: "seed".into(),
            msg: "expected a non-negative integer".into(),
        })?;
        Ok(Self {
            geometry,
            params,
            n_r: get_count(&m, "grid.n_r")?,
            n_theta: get_count(&m, "grid.n_theta")?,
            n_t: get_count(&m, "grid.n_t")?,
            quad_order: get_count(&m, "grid.quad_order")?,
            epsilon_sweep: get_list(&m, "sweep.epsilon")?,
            nu_sweep: get_list(&m, "sweep.nu")?,
            eps_cutoff: get_list(&m, "sweep.eps_cutoff")?,
            burgers_n_start: get_count(&m, "burgers.n_start")?,
            burgers_levels: get_count(&m, "burgers.levels")?,
            burgers_t: get_f64(&m, "burgers.t")?,
            energy_n_times: get_count(&m, "energy.n_times")?,
            residual_levels: get_count(&m, "residual.levels")?,
            residual_points: get_count(&m, "residual.n_points")?,
            viscosity_n_r: get_count(&m, "viscosity.n_r")?,
            viscosity_t: get_f64(&m, "viscosity.t")?,
            holder_alpha: get_f64(&m, "boundary.holder_alpha")?,
            out_dir,
            seed,
            echo: m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn defaults_without_file() {
        let c = RunConfig::load(None, &[], None, None).unwrap();
        assert_eq!(c.geometry, AnnulusGeometry::default());
        assert_eq!(c.params, SubsolutionParams::default());
        assert_eq!((c.n_r, c.n_theta, c.n_t, c.quad_order), (50, 32, 5, 8));
        assert_eq!(c.nu_sweep, vec![1e-2, 1e-3, 1e-4]);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn overrides_take_precedence() {
        let c = RunConfig::load(
            None,
            &ov(&[("params.lambda", "0.2"), ("sweep.nu", "0.1,0.01,0.001")]),
            Some(Path::new("x")),
            Some(7),
        )
        .unwrap();
        assert_eq!(c.params.lambda, 0.2);
        assert_eq!(c.nu_sweep, vec![0.1, 0.01, 0.001]);
        assert_eq!(c.out_dir, PathBuf::from("x"));
        assert_eq!(c.seed, 7);
        assert_eq!(c.echo["params.lambda"], serde_json::json!(0.2));
    }

    #[test]
    fn unknown_override_rejected() {
        let e = RunConfig::load(None, &ov(&[("params.mu", "1")]), None, None).unwrap_err();
        assert!(matches!(e, ConfigError::Unknown(_)));
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::load(None, &ov(&[("grid.n_r", "0")]), None, None).is_err());
        assert!(RunConfig::load(None, &ov(&[("grid.n_r", "1.5")]), None, None).is_err());
        assert!(RunConfig::load(None, &ov(&[("params.lambda", "abc")]), None, None).is_err());
    }

    #[test]
    fn override_pairs_split() {
        let args: Vec<String> = ["--a.b", "1", "--c=2,3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            parse_overrides(&args).unwrap(),
            ov(&[("a.b", "1"), ("c", "2,3")])
        );
        assert!(parse_overrides(&["--a".to_string()]).is_err());
        assert!(parse_overrides(&["a".to_string()]).is_err());
    }

    #[test]
    fn nested_objects_flatten() {
        let mut m = Map::new();
        flatten("", &serde_json::json!({"geometry": {"rho": 1, "R": 2}, "seed": 3}), &mut m);
        assert_eq!(m["geometry.rho"], serde_json::json!(1));
        assert_eq!(m["geometry.R"], serde_json::json!(2));
        assert_eq!(m["seed"], serde_json::json!(3));
    }
}
