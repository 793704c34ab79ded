//! Run configuration: flat `key = value` files, command-line overrides and
//! defaults, in that order of precedence.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use tdot_core::gpp::GppOptions;
use tdot_core::model::{Params, DEFAULT_ETA};
use tdot_core::oracle::OracleOptions;
use tdot_core::ModelParams;

/// First line of a CSV result file; marks `#@ key = value` lines as config.
pub const RESULT_MARKER: &str = "#@ tdot results";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Static,
    Floquet,
    Gpp,
    Oracle,
    Compare,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Static => "static",
            Method::Floquet => "floquet",
            Method::Gpp => "gpp",
            Method::Oracle => "oracle",
            Method::Compare => "compare",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "static" => Method::Static,
            "floquet" => Method::Floquet,
            "gpp" => Method::Gpp,
            "oracle" => Method::Oracle,
            "compare" => Method::Compare,
            _ => return Err(format!("unknown method '{s}' (static|floquet|gpp|oracle|compare)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (csv|json)")),
        }
    }
}

/// Field-level configuration error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub h: f64,
    /// One or more dot levels; a list runs the sweep once per level.
    pub eps_d: Vec<f64>,
    pub g0: f64,
    pub g1: f64,
    pub omega: f64,
    pub eta: f64,
    pub method: Method,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub n_modes: usize,
    pub nu_max: i32,
    pub oracle_length: usize,
    pub oracle_sigma: f64,
    /// `None` picks `0.02 / h`.
    pub oracle_dt: Option<f64>,
    /// Momenta given to the wavepacket run inside `compare` (0 disables it).
    pub oracle_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            h: 0.5,
            eps_d: vec![-1.0],
            g0: 0.5,
            g1: 0.25,
            omega: 1.0,
            eta: DEFAULT_ETA,
            method: Method::Floquet,
            k_min: 0.05,
            k_max: PI - 0.05,
            k_points: 200,
            n_modes: 31,
            nu_max: 8,
            oracle_length: 4000,
            oracle_sigma: 40.0,
            oracle_dt: None,
            oracle_points: 0,
        }
    }
}

/// Keys accepted in files and as `--key` overrides, in output order.
pub const KEYS: &[&str] = &[
    "h",
    "eps_d",
    "g0",
    "g1",
    "omega",
    "eta",
    "method",
    "k_min",
    "k_max",
    "k_points",
    "n_modes",
    "nu_max",
    "oracle_length",
    "oracle_sigma",
    "oracle_dt",
    "oracle_points",
];

fn exact(x: f64) -> String {
    format!("{x:?}")
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot parse '{value}'")))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "h" => self.h = parse(key, v)?,
            "eps_d" => {
                self.eps_d = v.split(',').map(|s| parse(key, s.trim())).collect::<Result<_, _>>()?;
            }
            "g0" => self.g0 = parse(key, v)?,
            "g1" => self.g1 = parse(key, v)?,
            "omega" => self.omega = parse(key, v)?,
            "eta" => self.eta = parse(key, v)?,
            "method" => self.method = v.parse().map_err(|e| ConfigError::new(key, e))?,
            "k_min" => self.k_min = parse(key, v)?,
            "k_max" => self.k_max = parse(key, v)?,
            "k_points" => self.k_points = parse(key, v)?,
            "n_modes" => self.n_modes = parse(key, v)?,
            "nu_max" => self.nu_max = parse(key, v)?,
            "oracle_length" => self.oracle_length = parse(key, v)?,
            "oracle_sigma" => self.oracle_sigma = parse(key, v)?,
            "oracle_dt" => self.oracle_dt = if v == "auto" { None } else { Some(parse(key, v)?) },
            "oracle_points" => self.oracle_points = parse(key, v)?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Text form of one key, as written into result files. Numbers use the
    /// shortest form that parses back to the same value.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "h" => exact(self.h),
            "eps_d" => self.eps_d.iter().map(|&e| exact(e)).collect::<Vec<_>>().join(", "),
            "g0" => exact(self.g0),
            "g1" => exact(self.g1),
            "omega" => exact(self.omega),
            "eta" => exact(self.eta),
            "method" => self.method.as_str().to_string(),
            "k_min" => exact(self.k_min),
            "k_max" => exact(self.k_max),
            "k_points" => self.k_points.to_string(),
            "n_modes" => self.n_modes.to_string(),
            "nu_max" => self.nu_max.to_string(),
            "oracle_length" => self.oracle_length.to_string(),
            "oracle_sigma" => exact(self.oracle_sigma),
            "oracle_dt" => self.oracle_dt.map_or_else(|| "auto".to_string(), exact),
            "oracle_points" => self.oracle_points.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines. Lines starting with `#` are comments,
    /// except in CSV result files (first line [`RESULT_MARKER`]) where only the
    /// `#@ key = value` lines are read. JSON result files contribute their
    /// `config` object.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return self.apply_json(trimmed);
        }
        let results = trimmed.lines().next().is_some_and(|l| l.trim() == RESULT_MARKER);
        let mut seen = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = if results {
                match raw.strip_prefix("#@ ") {
                    Some(rest) if rest.contains('=') => rest,
                    _ => continue,
                }
            } else {
                let l = raw.split('#').next().unwrap_or("").trim();
                if l.is_empty() {
                    continue;
                }
                l
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(
                    &format!("line {}", no + 1),
                    format!("expected key = value, got '{}'", raw.trim()),
                ));
            };
            let key = key.trim();
            if seen.contains(&key) {
                return Err(ConfigError::new(key, format!("set twice (line {})", no + 1)));
            }
            seen.push(key);
            self.set(key, value)?;
        }
        Ok(())
    }

    fn apply_json(&mut self, text: &str) -> Result<(), ConfigError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::new("config", format!("invalid JSON: {e}")))?;
        let Some(cfg) = doc.get("config").and_then(|c| c.as_object()) else {
            return Err(ConfigError::new("config", "JSON file has no 'config' object"));
        };
        for (key, value) in cfg {
            let text = match value {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            self.set(key, &text)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Checks every field and the model invariants for each dot level.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.eps_d.is_empty() {
            return Err(ConfigError::new("eps_d", "at least one value required"));
        }
        if !(self.k_min > 0.0) {
            return Err(ConfigError::new("k_min", format!("must be > 0, got {}", self.k_min)));
        }
        if !(self.k_max < PI) {
            return Err(ConfigError::new("k_max", format!("must be < pi, got {}", self.k_max)));
        }
        if !(self.k_min < self.k_max) {
            return Err(ConfigError::new("k_max", "must exceed k_min"));
        }
        if self.k_points < 2 {
            return Err(ConfigError::new("k_points", "must be at least 2"));
        }
        if self.n_modes < 5 || self.n_modes.is_multiple_of(2) {
            return Err(ConfigError::new("n_modes", "must be odd and at least 5"));
        }
        if self.nu_max < 4 {
            return Err(ConfigError::new("nu_max", "must be at least 4"));
        }
        if let Some(dt) = self.oracle_dt {
            if !(dt > 0.0) {
                return Err(ConfigError::new("oracle_dt", "must be positive"));
            }
        }
        for i in 0..self.eps_d.len() {
            self.params(i)?;
        }
        Ok(())
    }

    /// Model parameters for the `i`-th dot level.
    pub fn params(&self, i: usize) -> Result<ModelParams, ConfigError> {
        Params::new(self.h, self.eps_d[i], self.g0, self.g1, self.omega, self.eta).map_err(|e| match e {
            tdot_core::Error::InvalidParam { field, reason } => ConfigError::new(field, reason),
            other => ConfigError::new("model", other.to_string()),
        })
    }

    /// Evenly spaced incoming momenta.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.k_points;
        (0..n)
            .map(|i| self.k_min + (self.k_max - self.k_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn gpp_options(&self) -> GppOptions {
        GppOptions {
            nu_max: self.nu_max,
            ..GppOptions::default()
        }
    }

    pub fn oracle_options(&self, p: &ModelParams) -> OracleOptions {
        let base = OracleOptions::for_params(p);
        OracleOptions {
            length: self.oracle_length,
            sigma: self.oracle_sigma,
            dt: self.oracle_dt.unwrap_or(base.dt),
        }
    }

    /// Resolved `(key, value)` pairs in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k).expect("listed key"))).collect()
    }
}
