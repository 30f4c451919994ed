use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Frequencies closer than this are treated as equal.
    pub freq_merge_tol: f64,
    /// Coefficients with smaller modulus are dropped.
    pub prune_threshold: f64,
    /// Target Wiener-norm error for truncated exp/log series.
    pub series_tail_target: f64,
    /// Relative residual accepted for a root, and boundary clearance for contours.
    pub root_tol: f64,
    /// Largest grid step used when scanning for zeros.
    pub quadrature_step: f64,
    pub max_terms: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            freq_merge_tol: 1e-9,
            prune_threshold: 1e-14,
            series_tail_target: 1e-14,
            root_tol: 1e-10,
            quadrature_step: 0.125,
            max_terms: 200_000,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("freq_merge_tol", self.freq_merge_tol),
            ("prune_threshold", self.prune_threshold),
            ("series_tail_target", self.series_tail_target),
            ("root_tol", self.root_tol),
            ("quadrature_step", self.quadrature_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidInput("max_terms must be at least 1".into()));
        }
        Ok(())
    }

    /// Same configuration with pruning effectively disabled.
    ///
    /// Used by band-limited computations whose term count is bounded by the band
    /// and whose coefficients are rescaled afterwards.
    pub(crate) fn without_pruning(&self) -> Self {
        ToleranceConfig {
            prune_threshold: f64::MIN_POSITIVE,
            ..*self
        }
    }
}
