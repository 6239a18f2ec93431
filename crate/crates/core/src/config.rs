//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, keys mirror the CLI flags
//! one-to-one (`grid_nt` ↔ `--grid-nt`, and so on). Flags override file
//! values.

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::scan::{Axis, AxisParam, Spacing};

#[derive(Debug, Clone, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

/// Grid definition `min,max,count[,lin|log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn axis(&self, param: AxisParam) -> Axis {
        Axis { param, min: self.min, max: self.max, count: self.count, spacing: self.spacing }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(format!("expected min,max,count[,lin|log], got `{s}`"));
        }
        let min: f64 = parts[0].parse().map_err(|_| format!("bad grid minimum `{}`", parts[0]))?;
        let max: f64 = parts[1].parse().map_err(|_| format!("bad grid maximum `{}`", parts[1]))?;
        let count: usize =
            parts[2].parse().map_err(|_| format!("bad grid point count `{}`", parts[2]))?;
        let spacing = match parts.get(3).copied() {
            None | Some("lin") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => return Err(format!("spacing must be lin or log, got `{other}`")),
        };
        Ok(Self { min, max, count, spacing })
    }
}

/// Optional values collected from a config file and/or CLI flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub g_a: Option<f64>,
    pub g_b: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub n_t: Option<f64>,
    pub cutoff: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub grid_nt: Option<GridSpec>,
    pub grid_kappa: Option<GridSpec>,
    pub grid_t: Option<GridSpec>,
    pub log_base: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Settings {
    /// Parse the flat key = value format.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut settings = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            settings.assign(key, value).map_err(|message| ConfigError::Parse {
                line: line_no,
                message,
            })?;
        }
        Ok(settings)
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("bad value `{value}` for {key}"))
        }
        match key {
            "g_a" => self.g_a = Some(num(key, value)?),
            "g_b" => self.g_b = Some(num(key, value)?),
            "kappa" => self.kappa = Some(num(key, value)?),
            "gamma" => self.gamma = Some(num(key, value)?),
            "n_t" => self.n_t = Some(num(key, value)?),
            "cutoff" => self.cutoff = Some(num(key, value)?),
            "t_max" => self.t_max = Some(num(key, value)?),
            "dt" => self.dt = Some(num(key, value)?),
            "grid_nt" => self.grid_nt = Some(value.parse()?),
            "grid_kappa" => self.grid_kappa = Some(value.parse()?),
            "grid_t" => self.grid_t = Some(value.parse()?),
            "log_base" => self.log_base = Some(num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(ConfigError::UnknownKey(other.to_string()).to_string()),
        }
        Ok(())
    }

    /// Overlay `self` (higher priority) on top of `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            g_a: self.g_a.or(base.g_a),
            g_b: self.g_b.or(base.g_b),
            kappa: self.kappa.or(base.kappa),
            gamma: self.gamma.or(base.gamma),
            n_t: self.n_t.or(base.n_t),
            cutoff: self.cutoff.or(base.cutoff),
            t_max: self.t_max.or(base.t_max),
            dt: self.dt.or(base.dt),
            grid_nt: self.grid_nt.or(base.grid_nt),
            grid_kappa: self.grid_kappa.or(base.grid_kappa),
            grid_t: self.grid_t.or(base.grid_t),
            log_base: self.log_base.or(base.log_base),
            out: self.out.or(base.out),
        }
    }
}
