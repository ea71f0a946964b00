use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use opalg_core::ToleranceConfig;

use crate::error::{CliError, CliResult};

pub const SCENARIO_SCHEMA: &str = "opalg-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Norm,
    QuotientNorm,
    Compress,
    Bimodule,
    Fock,
    Subgraph,
    Envelope,
    Builtin,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Norm => "norm",
            Kind::QuotientNorm => "quotient-norm",
            Kind::Compress => "compress",
            Kind::Bimodule => "bimodule",
            Kind::Fock => "fock",
            Kind::Subgraph => "subgraph",
            Kind::Envelope => "envelope",
            Kind::Builtin => "builtin",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub structural_tol: Option<f64>,
    pub norm_tol: Option<f64>,
    pub psd_tol: Option<f64>,
    pub opt_starts: Option<usize>,
    pub opt_iters: Option<usize>,
    pub rng_seed: Option<u64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, cfg: &mut ToleranceConfig) {
        if let Some(v) = self.structural_tol {
            cfg.structural_tol = v;
        }
        if let Some(v) = self.norm_tol {
            cfg.norm_tol = v;
        }
        if let Some(v) = self.psd_tol {
            cfg.psd_tol = v;
        }
        if let Some(v) = self.opt_starts {
            cfg.opt_starts = v;
        }
        if let Some(v) = self.opt_iters {
            cfg.opt_iters = v;
        }
        if let Some(v) = self.rng_seed {
            cfg.rng_seed = v;
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub schema: Option<String>,
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub payload: Value,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Directory that relative graph paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn parse(text: &str, file: &str, base_dir: &Path) -> CliResult<Self> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| CliError::parse(file, e))?;
        if let Some(schema) = &s.schema {
            if schema != SCENARIO_SCHEMA {
                return Err(CliError::Validation(format!(
                    "{file}: unsupported schema '{schema}', expected '{SCENARIO_SCHEMA}'"
                )));
            }
        }
        if s.name.trim().is_empty() {
            return Err(CliError::Validation(format!("{file}: scenario name is empty")));
        }
        s.base_dir = base_dir.to_path_buf();
        Ok(s)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }
}

/// Run-wide settings after merging defaults, `OPALG_SEED`, scenario overrides and flags.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flags {
    pub seed: Option<u64>,
    pub tol_norm: Option<f64>,
    pub tol_structural: Option<f64>,
    pub levels: Option<usize>,
    pub cutoff: Option<usize>,
    pub emit_matrices: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub cfg: ToleranceConfig,
    pub levels: Option<usize>,
    pub cutoff: Option<usize>,
    pub emit: bool,
}

impl Settings {
    /// Precedence, lowest first: defaults, `env_seed`, scenario overrides, flags.
    pub fn resolve(env_seed: Option<u64>, overrides: &ToleranceOverrides, flags: &Flags) -> CliResult<Self> {
        let mut cfg = ToleranceConfig::default();
        if let Some(s) = env_seed {
            cfg.rng_seed = s;
        }
        overrides.apply(&mut cfg);
        if let Some(s) = flags.seed {
            cfg.rng_seed = s;
        }
        if let Some(t) = flags.tol_norm {
            cfg.norm_tol = t;
        }
        if let Some(t) = flags.tol_structural {
            cfg.structural_tol = t;
        }
        cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(Self {
            cfg,
            levels: flags.levels,
            cutoff: flags.cutoff,
            emit: flags.emit_matrices,
        })
    }
}

pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var("OPALG_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Validation(format!("OPALG_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}
