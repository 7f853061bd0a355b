//! Experiment configuration: defaults, flat key=value files, and CLI
//! overrides (precedence: CLI > file > defaults).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qbdrive_core::spin1::SpinPerturbation;

use crate::CliError;

/// Which perturbation is added on top of the ideal driving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbationChoice {
    #[default]
    None,
    S3,
    L4,
    L5,
    L8,
}

impl PerturbationChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::S3 => "s3",
            Self::L4 => "l4",
            Self::L5 => "l5",
            Self::L8 => "l8",
        }
    }

    pub fn kind(&self) -> Option<SpinPerturbation> {
        match self {
            Self::None => None,
            Self::S3 => Some(SpinPerturbation::S3),
            Self::L4 => Some(SpinPerturbation::Lambda4),
            Self::L5 => Some(SpinPerturbation::Lambda5),
            Self::L8 => Some(SpinPerturbation::Lambda8),
        }
    }
}

impl FromStr for PerturbationChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "none" => Ok(Self::None),
            "s3" => Ok(Self::S3),
            "l4" => Ok(Self::L4),
            "l5" => Ok(Self::L5),
            "l8" => Ok(Self::L8),
            other => Err(CliError::Validation(format!(
                "unknown perturbation '{other}' (expected none|s3|l4|l5|l8)"
            ))),
        }
    }
}

impl fmt::Display for PerturbationChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Benchmark run parameters. Defaults are the reference values of the
/// rotating-field experiment: unit field, one full rotation period.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Hilbert-space dimension; the experiment registry covers the spin-1
    /// case, so this must be 3.
    pub n: usize,
    pub h0: f64,
    pub omega: f64,
    pub delta_h: f64,
    pub t_max: f64,
    pub dt: f64,
    pub perturbation: PerturbationChoice,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    /// Seed for the randomized verification suites.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 3,
            h0: 1.0,
            omega: std::f64::consts::PI / 20.0,
            delta_h: 0.5,
            t_max: 40.0,
            dt: 1e-3,
            perturbation: PerturbationChoice::None,
            out_csv: None,
            out_svg: None,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n != 3 {
            return Err(CliError::Validation(format!(
                "n={} unsupported: the experiment registry covers the spin-1 system (n=3)",
                self.n
            )));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(CliError::Validation(format!("h0={} must be positive", self.h0)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Validation(format!("dt={} must be positive", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(CliError::Validation(format!(
                "t_max={} must be at least dt={}",
                self.t_max, self.dt
            )));
        }
        if !self.omega.is_finite() || !self.delta_h.is_finite() {
            return Err(CliError::Validation("omega and delta_h must be finite".into()));
        }
        Ok(())
    }

    /// Loads a flat `key=value` file ('#' starts a comment) over the
    /// defaults.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("line {}: expected key=value, got '{raw}'", lineno + 1))
            })?;
            self.apply_pair(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_pair(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| {
            CliError::Validation(format!("cannot parse {key}={value} as {what}"))
        };
        match key {
            "n" => self.n = value.parse().map_err(|_| bad("integer"))?,
            "h0" => self.h0 = value.parse().map_err(|_| bad("float"))?,
            "omega" => self.omega = value.parse().map_err(|_| bad("float"))?,
            "delta_h" => self.delta_h = value.parse().map_err(|_| bad("float"))?,
            "t_max" => self.t_max = value.parse().map_err(|_| bad("float"))?,
            "dt" => self.dt = value.parse().map_err(|_| bad("float"))?,
            "perturbation" => self.perturbation = value.parse()?,
            "out_csv" => self.out_csv = Some(PathBuf::from(value)),
            "out_svg" => self.out_svg = Some(PathBuf::from(value)),
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "version" => {} // accepted so emitted headers can be replayed
            other => {
                return Err(CliError::Validation(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Deterministic `key=value` echo; parsing it back reproduces the
    /// numeric configuration exactly (floats use shortest round-trip form).
    pub fn echo(&self) -> String {
        format!(
            "n={} h0={} omega={} delta_h={} t_max={} dt={} perturbation={} seed={}",
            self.n,
            self.h0,
            self.omega,
            self.delta_h,
            self.t_max,
            self.dt,
            self.perturbation,
            self.seed
        )
    }

    /// Number of propagation intervals.
    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }
}
