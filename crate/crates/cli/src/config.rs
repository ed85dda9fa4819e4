use std::path::{Path, PathBuf};

use anyhow::Context;
use hubbard_lax::ness::DrivingConfig;
use hubbard_lax::sampling::DEFAULT_SEED;
use hubbard_lax::verify::DEFAULT_TOL;
use serde::{Deserialize, Serialize};

use crate::args::{CommonArgs, DrivingArgs};

/// Keys accepted in the TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub gamma_l: Option<f64>,
    pub gamma_r: Option<f64>,
    pub mu_l: Option<f64>,
    pub mu_r: Option<f64>,
    pub u: Option<f64>,
    pub cutoff: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub const DEFAULT_N: usize = 4;

/// Parameters after merging flags, file and defaults.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Settings {
    pub cutoff: Option<usize>,
    pub tol: f64,
    pub seed: u64,
}

pub fn settings(flags: &CommonArgs, file: &FileConfig) -> Settings {
    Settings {
        cutoff: flags.cutoff.or(file.cutoff),
        tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
        seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    }
}

pub fn driving(flags: &DrivingArgs, file: &FileConfig) -> DrivingConfig {
    DrivingConfig {
        gamma_l: flags.gamma_l.or(file.gamma_l).unwrap_or(1.0),
        gamma_r: flags.gamma_r.or(file.gamma_r).unwrap_or(1.0),
        mu_l: flags.mu_l.or(file.mu_l).unwrap_or(0.0),
        mu_r: flags.mu_r.or(file.mu_r).unwrap_or(0.0),
        u: flags.u.or(file.u).unwrap_or(1.0),
        n_sites: flags.n.or(file.n).unwrap_or(DEFAULT_N),
    }
}
