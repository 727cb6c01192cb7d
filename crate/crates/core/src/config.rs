//! Flat run configuration shared by the config file and the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::bsm::{BsmModel, Convention, Protocol};
use crate::erasure::CorrelationMode;
use crate::error::{Error, Result};
use crate::gsm::{Architecture, TableId, DEFAULT_TABLE_FLOOR};
use crate::presets::Preset;
use crate::threshold::{
    linear_grid, validate_grid, CrossingOptions, SweepConfig, ThresholdOptions, DEFAULT_BOOTSTRAP,
    DEFAULT_DISTANCES, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN, DEFAULT_SAMPLES,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "GSM_THRESHOLD_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Efficiency,
    Threshold,
    Verify,
    Sweep,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Command::Efficiency => "efficiency",
            Command::Threshold => "threshold",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub architecture: Architecture,
    pub protocol: Protocol,
    pub n: u32,
    pub m: u32,
    pub j: u32,
    /// `None` picks the architecture's default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    /// GSM arity for efficiency calculations.
    pub k: u32,
    /// Single loss rate for a one-off efficiency calculation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableId>,
    pub floor: f64,
    pub distances: Vec<u32>,
    /// Explicit loss grid: a list, or `"lo:hi:points"` in a config file.
    #[serde(
        skip_serializing_if = "Option::is_none",
        deserialize_with = "grid_field"
    )]
    pub eta_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_center: Option<f64>,
    pub grid_points: usize,
    pub grid_span: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub correlation: CorrelationMode,
    pub hub_rotation: u8,
    pub bootstrap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Restricts a preset to these `"n,m[,j]"` keys.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    pub output_dir: PathBuf,
    pub corrupt: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            architecture: Architecture::Cyclic,
            protocol: Protocol::Static,
            n: 3,
            m: 2,
            j: 0,
            convention: None,
            k: 4,
            eta: None,
            table: None,
            floor: DEFAULT_TABLE_FLOOR,
            distances: DEFAULT_DISTANCES.to_vec(),
            eta_grid: None,
            eta_center: None,
            grid_points: DEFAULT_GRID_POINTS,
            grid_span: DEFAULT_GRID_SPAN,
            samples: DEFAULT_SAMPLES,
            seed: 1,
            workers: 0,
            correlation: CorrelationMode::Independent,
            hub_rotation: 0,
            bootstrap: DEFAULT_BOOTSTRAP,
            preset: None,
            params: Vec::new(),
            output_dir: default_output_dir(),
            corrupt: false,
        }
    }
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Parses `"lo:hi:points"` into an evenly spaced grid.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || Error::validation("eta_grid", format!("expected lo:hi:points, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    linear_grid(lo, hi, points)
}

fn grid_field<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Grid {
        Spec(String),
        List(Vec<f64>),
    }
    match Grid::deserialize(de)? {
        Grid::List(v) => Ok(Some(v)),
        Grid::Spec(s) => parse_grid_spec(&s)
            .map(Some)
            .map_err(serde::de::Error::custom),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let key = e
                .message()
                .split('`')
                .nth(1)
                .filter(|_| e.message().starts_with("unknown field"))
                .unwrap_or("config")
                .to_string();
            Error::validation(key, e.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always serialisable")
    }

    pub fn convention(&self) -> Convention {
        self.convention
            .unwrap_or(self.architecture.default_convention())
    }

    pub fn validate(&self) -> Result<()> {
        BsmModel::new(
            self.protocol,
            self.n,
            self.m,
            self.j,
            self.convention(),
            0.0,
        )?;
        if self.k < 2 {
            return Err(Error::validation("k", "a GSM acts on at least two qubits"));
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::validation(
                    "eta",
                    format!("loss rate {eta} is outside [0, 1]"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::validation(
                "floor",
                format!("{} is outside [0, 1]", self.floor),
            ));
        }
        if let Some(grid) = &self.eta_grid {
            validate_grid(grid)?;
        }
        if let Some(c) = self.eta_center {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::validation(
                    "eta_center",
                    format!("{c} is outside (0, 1)"),
                ));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::validation(
                "grid_points",
                "at least two grid points are needed",
            ));
        }
        if !(self.grid_span > 0.0 && self.grid_span < 1.0) {
            return Err(Error::validation("grid_span", "must lie in (0, 1)"));
        }
        if self.bootstrap == 0 {
            return Err(Error::validation(
                "bootstrap",
                "at least one resample is needed",
            ));
        }
        if self.hub_rotation > 3 {
            return Err(Error::validation("hub_rotation", "must be 0, 1, 2 or 3"));
        }
        let mut sweep = self.sweep_config();
        if sweep.etas.is_empty() {
            sweep.etas = vec![0.0];
        }
        sweep.validate()
    }

    /// Sweep settings for the configured scheme; the grid is empty unless
    /// `eta_grid` is set.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            architecture: self.architecture,
            protocol: self.protocol,
            n: self.n,
            m: self.m,
            j: self.j,
            convention: self.convention(),
            distances: self.distances.clone(),
            etas: self.eta_grid.clone().unwrap_or_default(),
            samples: self.samples,
            seed: self.seed,
            correlation: self.correlation,
            hub_rotation: self.hub_rotation,
            workers: self.workers,
        }
    }

    pub fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions {
            centre: self.eta_center,
            span: self.grid_span,
            points: self.grid_points,
            crossing: CrossingOptions {
                resamples: self.bootstrap,
                seed: self.seed,
            },
        }
    }
}
