//! Principal-value oscillatory integrals with 1/x and 1/(xy) kernels.

mod pv;
pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveControl;

pub use pv::{
    log_growth_fit, pv_bilinear, pv_odd_singular, pv_product_phase, pv_product_phase_tensor, si_over_u_integral,
    LogFit, PvResult,
};

/// Controls the panel quadratures.
///
/// `oscillation_resolution` is the minimum number of quadrature nodes per
/// period of the fastest local phase; with 15-node panels a panel spans at
/// most `15 / oscillation_resolution` periods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub target_abs_tol: f64,
    pub max_subdivisions: usize,
    pub oscillation_resolution: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { target_abs_tol: 1e-10, max_subdivisions: 200_000, oscillation_resolution: 16 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_tol > 0.0 && self.target_abs_tol.is_finite()) {
            return Err(Error::arg("target_abs_tol must be positive"));
        }
        if self.oscillation_resolution < 8 {
            return Err(Error::arg("oscillation_resolution must be at least 8"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::arg("max_subdivisions must be positive"));
        }
        Ok(())
    }

    /// Widest admissible panel for a phase with `rate` cycles per unit length.
    pub fn panel_width(&self, rate: f64) -> f64 {
        if rate <= 0.0 {
            f64::INFINITY
        } else {
            15.0 / (self.oscillation_resolution as f64 * rate)
        }
    }

    pub(crate) fn control(&self) -> AdaptiveControl {
        AdaptiveControl { abs_tol: self.target_abs_tol, max_subdivisions: self.max_subdivisions, max_depth: 30 }
    }
}

/// Si(x) = ∫₀ˣ sin t/t dt, odd in x, with Si(±∞) = ±π/2.
pub fn sine_integral(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NonFinite("sine integral argument".into()));
    }
    Ok(special::si(x))
}
