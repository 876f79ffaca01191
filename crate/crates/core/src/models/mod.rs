//! Device models and the common memristive-system interface.
//!
//! Every model is a first-order system: a state equation `dw/dt = f(w, u)`
//! and a port relation tying the terminal voltage and current together
//! through the state. [`ModelParams`] dispatches both over the three models
//! in the units of the integrated state (see [`ModelParams::state_unit`]).

mod pickett;
mod state;
mod strukov;
mod yang;

use serde::{Deserialize, Serialize};

pub use pickett::{PickettAuxiliaries, PickettParams};
pub use state::DeviceState;
pub use strukov::StrukovParams;
pub use yang::YangParams;

use crate::drive::DriveKind;
use crate::error::{Error, Result};

pub const DEFAULT_OVERFLOW_CAP: f64 = 700.0;

pub(crate) fn default_overflow_cap() -> f64 {
    DEFAULT_OVERFLOW_CAP
}

pub(crate) fn checked_exp(arg: f64, cap: f64, what: &'static str) -> Result<f64> {
    if arg > cap || arg.is_nan() {
        return Err(Error::Overflow { what, arg, cap });
    }
    Ok(arg.exp())
}

pub(crate) fn checked_sinh(arg: f64, cap: f64, what: &'static str) -> Result<f64> {
    if arg.abs() > cap || arg.is_nan() {
        return Err(Error::Overflow { what, arg, cap });
    }
    Ok(arg.sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Strukov,
    Yang,
    Pickett,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Strukov => "strukov",
            ModelKind::Yang => "yang",
            ModelKind::Pickett => "pickett",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which end of the state range is the low-resistance (ON) state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnSide {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelParams {
    Strukov(StrukovParams),
    Yang(YangParams),
    Pickett(PickettParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Strukov(_) => ModelKind::Strukov,
            ModelParams::Yang(_) => ModelKind::Yang,
            ModelParams::Pickett(_) => ModelKind::Pickett,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Strukov(p) => p.validate(),
            ModelParams::Yang(p) => p.validate(),
            ModelParams::Pickett(p) => p.validate(),
        }
    }

    /// The port quantity the state equation is written in.
    pub fn controlling_drive(&self) -> DriveKind {
        match self {
            ModelParams::Strukov(_) | ModelParams::Pickett(_) => DriveKind::Current,
            ModelParams::Yang(_) => DriveKind::Voltage,
        }
    }

    pub fn on_side(&self) -> OnSide {
        match self {
            ModelParams::Strukov(_) | ModelParams::Yang(_) => OnSide::High,
            ModelParams::Pickett(_) => OnSide::Low,
        }
    }

    /// Unit of the integrated state.
    pub fn state_unit(&self) -> &'static str {
        match self {
            ModelParams::Strukov(_) | ModelParams::Yang(_) => "w/D",
            ModelParams::Pickett(_) => "nm",
        }
    }

    /// Checks the state box against the model's own domain.
    pub fn check_state(&self, state: &DeviceState) -> Result<()> {
        match self {
            ModelParams::Strukov(_) | ModelParams::Yang(_) => {
                if state.w_min < 0.0 || state.w_max > 1.0 {
                    return Err(Error::InvalidParameter {
                        name: "state bounds",
                        reason: format!(
                            "normalized state bounds must lie in [0, 1], got [{}, {}]",
                            state.w_min, state.w_max
                        ),
                    });
                }
            }
            ModelParams::Pickett(p) => {
                if !(p.w_1_nm() < state.w_min) {
                    return Err(Error::InvalidParameter {
                        name: "w_min",
                        reason: format!(
                            "gap lower bound {} nm must exceed w_1 = {} nm",
                            state.w_min,
                            p.w_1_nm()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Raw state rate at state `w` given the resolved port pair, in state
    /// units per second. Only the controlling quantity is read.
    pub fn state_rate(&self, w: f64, v_m: f64, i_m: f64) -> Result<f64> {
        match self {
            ModelParams::Strukov(p) => Ok(p.dwdt(i_m) / p.d),
            ModelParams::Yang(p) => Ok(p.dwdt(v_m)),
            ModelParams::Pickett(p) => Ok(p.dwdt(w * 1e-9, i_m)? * 1e9),
        }
    }
}
