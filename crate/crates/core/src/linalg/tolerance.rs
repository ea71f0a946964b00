use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances and optimizer budgets shared by every operation.
///
/// All randomness in the workbench is derived from `rng_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub structural_tol: f64,
    pub norm_tol: f64,
    pub psd_tol: f64,
    pub opt_starts: usize,
    pub opt_iters: usize,
    pub rng_seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            structural_tol: 1e-10,
            norm_tol: 1e-8,
            psd_tol: 1e-10,
            opt_starts: 32,
            opt_iters: 500,
            rng_seed: 0,
        }
    }
}

impl ToleranceConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("structural_tol", self.structural_tol)?;
        positive("norm_tol", self.norm_tol)?;
        positive("psd_tol", self.psd_tol)?;
        if self.opt_starts == 0 {
            return Err(Error::InvalidConfig("opt_starts must be at least 1".into()));
        }
        Ok(())
    }
}
