//! Run configuration: case defaults overridden by `key = value` text.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dg::{NumericalFluxKind, ProjectionMethod};
use crate::error::{Error, Result};
use crate::estimator::QuadratureConfig;
use crate::experiments::cases::lookup;
use crate::time::SchemeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinementMode {
    /// Double the elements and halve the step per level at fixed chaos degree.
    HRefine,
    /// Raise the chaos degree by one per level on a fixed mesh.
    NRefine,
}

impl FromStr for RefinementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "h_refine" | "h" => Ok(Self::HRefine),
            "n_refine" | "n" => Ok(Self::NRefine),
            other => Err(Error::Config(format!("unknown refinement mode `{other}` (h_refine, N_refine)"))),
        }
    }
}

impl fmt::Display for RefinementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HRefine => write!(f, "h_refine"),
            Self::NRefine => write!(f, "N_refine"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format `{other}` (csv, json)"))),
        }
    }
}

/// Every key accepted in config files and `--set`, with a short description.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("case", "test case name (see list-cases)"),
    ("M", "number of elements (alias: elements)"),
    ("dt", "time step"),
    ("N", "chaos degree"),
    ("p", "DG polynomial degree"),
    ("T", "final time (alias: t_end)"),
    ("flux", "numerical flux: upwind | lax-wendroff"),
    ("limiter", "slope limiter: true | false"),
    ("tvb", "TVB constant of the limiter"),
    ("scheme", "time stepper: ssprk3 | rk3-7"),
    ("projection", "initial projection: radau | gauss-legendre"),
    ("reconstruction_start", "time at which reconstruction and residual integrals start"),
    ("quad_time", "Gauss points per time interval"),
    ("quad_space", "Gauss points per element"),
    ("quad_stochastic", "Gauss points in the random variable"),
    ("oversampling", "sampling factor for sup norms"),
    ("levels", "number of refinement levels"),
    ("mode", "refinement mode: h_refine | N_refine"),
    ("out", "output path"),
    ("format", "output format: csv | json"),
];

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub elements: usize,
    pub dt: f64,
    pub chaos_degree: usize,
    pub dg_degree: usize,
    pub t_end: f64,
    pub flux: NumericalFluxKind,
    pub limiter: bool,
    pub tvb: f64,
    pub scheme: SchemeKind,
    pub projection: ProjectionMethod,
    pub reconstruction_start: f64,
    pub quadrature: QuadratureConfig,
    pub levels: usize,
    pub mode: RefinementMode,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Defaults of the named case.
    pub fn for_case(name: &str) -> Result<Self> {
        let case = lookup(name)?;
        let d = case.defaults;
        Ok(Self {
            case: case.name.to_string(),
            elements: d.elements,
            dt: d.dt,
            chaos_degree: d.chaos_degree,
            dg_degree: d.dg_degree,
            t_end: case.t_end,
            flux: d.flux,
            limiter: d.limiter,
            tvb: d.tvb,
            scheme: d.scheme,
            projection: d.projection,
            reconstruction_start: d.reconstruction_start,
            quadrature: QuadratureConfig::default(),
            levels: 4,
            mode: RefinementMode::HRefine,
            out: None,
            format: OutputFormat::Csv,
        })
    }

    /// Builds a config from `key = value` text; `case` must be present
    /// unless `default_case` is given.
    pub fn from_config_str(text: &str, default_case: Option<&str>) -> Result<Self> {
        let pairs = parse_config(text)?;
        let case = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "case")
            .map(|(_, v)| v.as_str())
            .or(default_case)
            .ok_or_else(|| Error::Config("no `case` given".into()))?;
        let mut cfg = Self::for_case(case)?;
        for (k, v) in &pairs {
            if k != "case" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a single override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "case" => {
                let fresh = Self::for_case(value)?;
                *self = Self {
                    quadrature: self.quadrature,
                    levels: self.levels,
                    mode: self.mode,
                    out: self.out.take(),
                    format: self.format,
                    ..fresh
                };
            }
            "M" | "elements" => self.elements = parse_num(key, value)?,
            "dt" => self.dt = parse_num(key, value)?,
            "N" => self.chaos_degree = parse_num(key, value)?,
            "p" => self.dg_degree = parse_num(key, value)?,
            "T" | "t_end" => self.t_end = parse_num(key, value)?,
            "flux" => self.flux = value.parse()?,
            "limiter" => self.limiter = parse_bool(key, value)?,
            "tvb" => self.tvb = parse_num(key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "projection" => self.projection = value.parse()?,
            "reconstruction_start" => self.reconstruction_start = parse_num(key, value)?,
            "quad_time" => self.quadrature.n_time_per_interval = parse_num(key, value)?,
            "quad_space" => self.quadrature.n_space_per_element = parse_num(key, value)?,
            "quad_stochastic" => self.quadrature.n_stochastic = parse_num(key, value)?,
            "oversampling" => self.quadrature.oversampling = parse_num(key, value)?,
            "levels" => self.levels = parse_num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            other => {
                let known: Vec<&str> = CONFIG_KEYS.iter().map(|(k, _)| *k).collect();
                return Err(Error::Config(format!("unknown key `{other}`; known keys: {}", known.join(", "))));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if !(self.tvb >= 0.0 && self.tvb.is_finite()) {
            return Err(Error::Config(format!("tvb must be nonnegative, got {}", self.tvb)));
        }
        if !(0.0..=self.t_end).contains(&self.reconstruction_start) {
            return Err(Error::Config(format!(
                "reconstruction_start {} outside [0, T]",
                self.reconstruction_start
            )));
        }
        if self.dg_degree == 0 {
            return Err(Error::Config("p must be at least 1 for the reconstruction".into()));
        }
        if self.dg_degree > 12 || self.chaos_degree > 40 {
            return Err(Error::Config("degrees too large (p <= 12, N <= 40)".into()));
        }
        if self.levels == 0 || self.levels > 12 {
            return Err(Error::Config(format!("levels must be in 1..=12, got {}", self.levels)));
        }
        if self.elements > 1 << 16 || self.t_end / self.dt > 1e6 {
            return Err(Error::Config("problem size too large".into()));
        }
        self.quadrature.validate()
    }

    /// Config of refinement level `level` relative to this base.
    pub fn level(&self, level: usize) -> Self {
        let mut c = self.clone();
        match self.mode {
            RefinementMode::HRefine => {
                c.elements = self.elements << level;
                c.dt = self.dt / (1u64 << level) as f64;
            }
            RefinementMode::NRefine => c.chaos_degree = self.chaos_degree + level,
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let pairs = parse_config("# header\n\ncase = advection  # inline\n M=32\n").unwrap();
        assert_eq!(pairs, vec![("case".into(), "advection".into()), ("M".into(), "32".into())]);
        assert!(parse_config("no equals sign").is_err());
        assert!(parse_config(" = 3").is_err());
    }

    #[test]
    fn overrides_apply_on_case_defaults() {
        let c = RunConfig::from_config_str("case = burgers_smooth\nN = 12\nlimiter = on\nflux = upwind", None).unwrap();
        assert_eq!(c.elements, 16);
        assert_eq!(c.dt, 0.008);
        assert_eq!(c.chaos_degree, 12);
        assert!(c.limiter);
        assert_eq!(c.flux, NumericalFluxKind::Upwind);
        assert_eq!(c.reconstruction_start, 0.008);
        assert!(RunConfig::from_config_str("M = 3", None).is_err());
        assert!(RunConfig::from_config_str("case = advection\nbogus = 1", None).is_err());
        assert!(RunConfig::from_config_str("case = advection\ndt = -1", None).is_err());
        assert!(RunConfig::from_config_str("case = nope", None).is_err());
    }

    #[test]
    fn levels_refine_in_lockstep() {
        let base = RunConfig::for_case("advection").unwrap();
        let l2 = base.level(2);
        assert_eq!(l2.elements, 64);
        assert_eq!(l2.dt, 0.005);
        let mut n = base.clone();
        n.mode = RefinementMode::NRefine;
        let l3 = n.level(3);
        assert_eq!((l3.elements, l3.chaos_degree), (16, 5));
        // no power-of-two restriction
        let mut odd = base;
        odd.set("M", "24").unwrap();
        assert!(odd.validate().is_ok());
    }

    #[test]
    fn every_documented_key_is_accepted() {
        let mut c = RunConfig::for_case("advection").unwrap();
        let sample = |k: &str| match k {
            "case" => "riemann",
            "flux" => "lw",
            "limiter" => "true",
            "scheme" => "ssprk3",
            "projection" => "gl",
            "mode" => "N_refine",
            "out" => "x.csv",
            "format" => "json",
            "reconstruction_start" => "0",
            "dt" | "T" | "tvb" => "0.5",
            _ => "3",
        };
        for (k, _) in CONFIG_KEYS {
            c.set(k, sample(k)).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }
}
