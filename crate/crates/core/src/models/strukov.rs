//! Linear ion-drift model: two state-dependent resistors in series, with the
//! doped/undoped boundary moving at a velocity proportional to the current.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed on `0 <= w <= D` before a state is rejected.
const BOUNDS_TOL: f64 = 1e-9;

/// All quantities SI: mobility in m²/(V·s), resistances in Ω, thickness in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrukovParams {
    pub mu_v: f64,
    pub r_on: f64,
    pub r_off: f64,
    pub d: f64,
}

impl StrukovParams {
    pub fn new(mu_v: f64, r_on: f64, r_off: f64, d: f64) -> Result<Self> {
        let p = Self {
            mu_v,
            r_on,
            r_off,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.mu_v > 0.0 && self.mu_v.is_finite()) {
            return bad("mu_v", "must be positive and finite");
        }
        if !(self.r_on > 0.0 && self.r_on.is_finite()) {
            return bad("r_on", "must be positive and finite");
        }
        if !(self.r_off > self.r_on && self.r_off.is_finite()) {
            return bad("r_off", "must be finite and greater than r_on");
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad("d", "must be positive and finite");
        }
        Ok(())
    }

    /// `R_OFF / R_ON`.
    pub fn transfer_ratio(&self) -> f64 {
        self.r_off / self.r_on
    }

    /// Boundary velocity `mu_v * R_ON / D * i` in m/s.
    pub fn dwdt(&self, i_m: f64) -> f64 {
        self.mu_v * self.r_on / self.d * i_m
    }

    /// Series resistance `R_ON w/D + R_OFF (1 - w/D)` for a boundary at `w` metres.
    pub fn memristance(&self, w: f64) -> Result<f64> {
        let slack = BOUNDS_TOL * self.d;
        if !(w >= -slack && w <= self.d + slack) {
            return Err(Error::StateOutOfBounds {
                w,
                lo: 0.0,
                hi: self.d,
            });
        }
        let x = (w / self.d).clamp(0.0, 1.0);
        Ok(self.memristance_normalized(x))
    }

    pub(crate) fn memristance_normalized(&self, x: f64) -> f64 {
        self.r_on * x + self.r_off * (1.0 - x)
    }
}
