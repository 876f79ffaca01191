//! Nonlinear drift model with an interface rectifier in parallel.
//!
//! The state is the normalized width `x ∈ [0, 1]`, which keeps `x^n` in the
//! port relation dimensionless.

use serde::{Deserialize, Serialize};

use super::{checked_exp, checked_sinh, default_overflow_cap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YangParams {
    /// Rate coefficient on the normalized state, s⁻¹·V⁻ᵐ.
    pub alpha: f64,
    /// Odd drive exponent of the state equation.
    pub m: u32,
    /// Memristive branch current scale, A.
    pub beta: f64,
    /// Memristive branch inverse voltage, V⁻¹.
    pub delta: f64,
    /// Rectifier saturation current, A.
    pub chi: f64,
    /// Rectifier inverse voltage, V⁻¹.
    pub gamma: f64,
    /// State exponent in the port relation.
    pub n: u32,
    #[serde(default = "default_overflow_cap")]
    pub overflow_cap: f64,
}

impl YangParams {
    pub fn validate(&self) -> Result<()> {
        if self.m.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("must be an odd positive integer, got {}", self.m),
            });
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must be finite".into(),
            });
        }
        for (name, value) in [
            ("beta", self.beta),
            ("delta", self.delta),
            ("chi", self.chi),
            ("gamma", self.gamma),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and non-negative, got {value}"),
                });
            }
        }
        if !(self.overflow_cap > 0.0) {
            return Err(Error::InvalidParameter {
                name: "overflow_cap",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    /// `alpha * v^m`, in normalized state per second.
    pub fn dwdt(&self, v_m: f64) -> f64 {
        self.alpha * v_m.powi(self.m as i32)
    }

    /// Port current `x^n β sinh(δ v) + χ (exp(γ v) − 1)` for normalized state `x`.
    pub fn current(&self, x: f64, v_m: f64) -> Result<f64> {
        let (i, _) = self.current_and_slope(x, v_m)?;
        Ok(i)
    }

    /// Port current and its derivative with respect to `v_m`.
    pub(crate) fn current_and_slope(&self, x: f64, v_m: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::StateOutOfBounds {
                w: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let cap = self.overflow_cap;
        let weight = x.powi(self.n as i32) * self.beta;
        let dv = self.delta * v_m;
        let gv = self.gamma * v_m;
        let sinh = checked_sinh(dv, cap, "yang sinh(delta v)")?;
        let exp = checked_exp(gv, cap, "yang exp(gamma v)")?;
        // exp_m1 keeps the rectifier term accurate near v = 0.
        let i = weight * sinh + self.chi * gv.exp_m1();
        let slope = weight * self.delta * dv.cosh() + self.chi * self.gamma * exp;
        Ok((i, slope))
    }
}
