use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The single internal state variable of a device together with its hard bounds.
///
/// Units depend on the model: the drift models integrate the normalized width
/// `w / D`, the tunnel-barrier model integrates the gap width in nanometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub w: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl DeviceState {
    pub fn new(w: f64, w_min: f64, w_max: f64) -> Result<Self> {
        if !(w_min.is_finite() && w_max.is_finite() && w_min < w_max) {
            return Err(Error::InvalidParameter {
                name: "state bounds",
                reason: format!("need w_min < w_max, got [{w_min}, {w_max}]"),
            });
        }
        if !(w_min..=w_max).contains(&w) {
            return Err(Error::StateOutOfBounds {
                w,
                lo: w_min,
                hi: w_max,
            });
        }
        Ok(Self { w, w_min, w_max })
    }

    pub fn with_w(self, w: f64) -> Self {
        Self { w, ..self }
    }

    pub fn clamp(&self, w: f64) -> f64 {
        w.clamp(self.w_min, self.w_max)
    }

    /// Hard-clamp boundary rule: a rate pointing out of the box at a bound is zero.
    pub fn effective_rate(&self, w: f64, rate: f64) -> f64 {
        if (w <= self.w_min && rate < 0.0) || (w >= self.w_max && rate > 0.0) {
            0.0
        } else {
            rate
        }
    }

    pub fn span(&self) -> f64 {
        self.w_max - self.w_min
    }

    /// Position of `w` inside the bounds, 0 at `w_min` and 1 at `w_max`.
    pub fn fraction(&self, w: f64) -> f64 {
        (w - self.w_min) / self.span()
    }
}
