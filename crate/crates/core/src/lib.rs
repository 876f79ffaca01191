//! Memristor device models, transient simulation and switching-dynamics analysis.
//!
//! Three compact models share one first-order interface ([`models`]): the
//! linear ion-drift model, the nonlinear drift model with a parallel
//! rectifier, and the tunnel-barrier model with Simmons conduction through
//! the gap. [`solver::integrate`] runs any of them under a current or voltage
//! [`drive`], [`analysis`] extracts thresholds, switching times, linearity and
//! symmetry from the resulting [`trace`], and [`scenario`] binds it all into
//! reproducible runs described by TOML files.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod drive;
pub mod error;
pub mod models;
pub mod scenario;
pub mod solver;
pub mod trace;

pub use error::{Error, Result};
