//! Transient integration of `dw/dt = f(w, drive(t))`.
//!
//! The port pair is resolved inside every RK stage when the drive is not the
//! model's controlling quantity, so a voltage-driven current-controlled model
//! keeps the integrator's formal order. The hard-clamp boundary rule is part
//! of the right-hand side (an outward rate at a bound is zero), while the
//! state itself is clamped only after each accepted step.

mod port;
mod root;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use port::{port_solve, solve_gap_voltage};
pub use root::{newton_bisect, RootOptions};

use crate::drive::DriveSignal;
use crate::error::{Error, Result};
use crate::models::{DeviceState, ModelParams};
use crate::trace::{Sample, Trace, TraceMeta};

fn default_newton_tol() -> f64 {
    1e-12
}

fn default_newton_max_iter() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed {
        dt: f64,
    },
    Rk45Adaptive {
        dt_min: f64,
        dt_max: f64,
        rel_tol: f64,
        abs_tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(flatten)]
    pub method: Method,
    pub t_end: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
}

impl SolverConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk4Fixed { dt },
            t_end,
            newton_tol: default_newton_tol(),
            newton_max_iter: default_newton_max_iter(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {x}"),
                })
            }
        };
        positive("t_end", self.t_end)?;
        positive("newton_tol", self.newton_tol)?;
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "newton_max_iter",
                reason: "must be at least 1".into(),
            });
        }
        match self.method {
            Method::Rk4Fixed { dt } => positive("dt", dt),
            Method::Rk45Adaptive {
                dt_min,
                dt_max,
                rel_tol,
                abs_tol,
            } => {
                positive("dt_min", dt_min)?;
                positive("dt_max", dt_max)?;
                positive("rel_tol", rel_tol)?;
                positive("abs_tol", abs_tol)?;
                if dt_min > dt_max {
                    return Err(Error::InvalidParameter {
                        name: "dt_min",
                        reason: format!("must not exceed dt_max ({dt_min} > {dt_max})"),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self.method {
            Method::Rk4Fixed { dt } => format!("rk4_fixed dt={dt:e} t_end={:e}", self.t_end),
            Method::Rk45Adaptive { dt_min, dt_max, rel_tol, abs_tol } => format!(
                "rk45_adaptive dt=[{dt_min:e},{dt_max:e}] rtol={rel_tol:e} atol={abs_tol:e} t_end={:e}",
                self.t_end
            ),
        }
    }
}

/// Hex SHA-256 of the canonical JSON form of the model parameters.
pub fn params_hash(model: &ModelParams) -> String {
    let json = serde_json::to_vec(model).expect("model params serialize");
    hex::encode(Sha256::digest(&json))
}

/// A model bound to a drive and a state box: the right-hand side of the ODE.
struct System<'a> {
    model: &'a ModelParams,
    drive: &'a DriveSignal,
    bounds: DeviceState,
    tol: f64,
    max_iter: usize,
}

impl System<'_> {
    fn port(&self, t: f64, w: f64) -> Result<(f64, f64)> {
        port_solve(
            self.model,
            w,
            self.drive.evaluate(t),
            self.drive.kind,
            self.tol,
            self.max_iter,
        )
    }

    /// Effective rate at a stage point. Stage states outside the box are
    /// evaluated at the nearest bound.
    fn rate(&self, t: f64, w: f64) -> Result<f64> {
        let w = self.bounds.clamp(w);
        let u = self.drive.evaluate(t);
        let raw = if self.drive.kind == self.model.controlling_drive() {
            // the state equation reads the drive directly
            self.model.state_rate(w, u, u)?
        } else {
            let (v, i) = port_solve(self.model, w, u, self.drive.kind, self.tol, self.max_iter)?;
            self.model.state_rate(w, v, i)?
        };
        Ok(self.bounds.effective_rate(w, raw))
    }

    fn sample(&self, t: f64, w: f64) -> Result<Sample> {
        let (v, i) = self.port(t, w)?;
        let raw = self.model.state_rate(w, v, i)?;
        Ok(Sample {
            t,
            v,
            i,
            w,
            dwdt: self.bounds.effective_rate(w, raw),
        })
    }
}

/// Integrates the device from `w0` over `[0, cfg.t_end]`.
pub fn integrate(
    model: &ModelParams,
    drive: &DriveSignal,
    w0: DeviceState,
    cfg: &SolverConfig,
) -> Result<Trace> {
    model.validate()?;
    drive.validate()?;
    cfg.validate()?;
    let w0 = DeviceState::new(w0.w, w0.w_min, w0.w_max)?;
    model.check_state(&w0)?;

    let sys = System {
        model,
        drive,
        bounds: w0,
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
    };
    let samples = match cfg.method {
        Method::Rk4Fixed { dt } => rk4_fixed(&sys, w0.w, dt, cfg.t_end)?,
        Method::Rk45Adaptive {
            dt_min,
            dt_max,
            rel_tol,
            abs_tol,
        } => dormand_prince(&sys, w0.w, cfg.t_end, dt_min, dt_max, rel_tol, abs_tol)?,
    };
    Ok(Trace {
        meta: TraceMeta {
            model: model.kind(),
            params_hash: params_hash(model),
            drive: drive.describe(),
            controlling: model.controlling_drive(),
            on_side: model.on_side(),
            state_unit: model.state_unit().to_string(),
            w_min: w0.w_min,
            w_max: w0.w_max,
            solver: cfg.describe(),
        },
        samples,
    })
}

fn rk4_fixed(sys: &System, w0: f64, dt: f64, t_end: f64) -> Result<Vec<Sample>> {
    // times are k*dt rather than an accumulated sum so grid points stay exact
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let mut w = w0;
    samples.push(sys.sample(0.0, w).map_err(|e| e.at(0.0))?);
    let mut t = 0.0;
    for k in 1..=n {
        let t_next = if k == n { t_end } else { k as f64 * dt };
        let h = t_next - t;
        let step = || -> Result<f64> {
            let k1 = sys.rate(t, w)?;
            let k2 = sys.rate(t + 0.5 * h, w + 0.5 * h * k1)?;
            let k3 = sys.rate(t + 0.5 * h, w + 0.5 * h * k2)?;
            let k4 = sys.rate(t + h, w + h * k3)?;
            Ok(w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        };
        w = sys.bounds.clamp(step().map_err(|e| e.at(t))?);
        t = t_next;
        samples.push(sys.sample(t, w).map_err(|e| e.at(t))?);
    }
    Ok(samples)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dormand_prince(
    sys: &System,
    w0: f64,
    t_end: f64,
    dt_min: f64,
    dt_max: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Vec<Sample>> {
    let mut samples = vec![sys.sample(0.0, w0).map_err(|e| e.at(0.0))?];
    // drive zero crossings and jumps are stepped onto exactly
    let mut stops = sys.drive.breakpoints(t_end);
    stops.push(t_end);
    let mut next_stop = 0;
    let mut t = 0.0;
    let mut w = w0;
    let mut h = dt_max.min(t_end);
    while t < t_end {
        let stop = stops[next_stop];
        let proposed = h;
        let landing = t + h >= stop;
        if landing {
            h = stop - t;
        }
        let mut k = [0.0f64; 7];
        for s in 0..7 {
            let mut ws = w;
            for (a, kj) in A[s].iter().zip(&k).take(s) {
                ws += h * a * kj;
            }
            k[s] = sys.rate(t + C[s] * h, ws).map_err(|e| e.at(t))?;
        }
        let w5 = w + h * B5.iter().zip(&k).map(|(b, kj)| b * kj).sum::<f64>();
        let w4 = w + h * B4.iter().zip(&k).map(|(b, kj)| b * kj).sum::<f64>();
        let scale = abs_tol + rel_tol * w.abs().max(w5.abs());
        let err = ((w5 - w4) / scale).abs();

        if err <= 1.0 {
            if landing {
                t = stop;
                next_stop += 1;
            } else {
                t += h;
            }
            w = sys.bounds.clamp(w5);
            samples.push(sys.sample(t, w).map_err(|e| e.at(t))?);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        // a step shortened only to land on a stop does not shrink the next one
        h = if landing && err <= 1.0 {
            proposed.max(h * factor)
        } else {
            h * factor
        }
        .min(dt_max);
        if h < dt_min && t < t_end {
            if err > 1.0 {
                return Err(Error::SolverDiverged { t, dt_min });
            }
            h = dt_min;
        }
    }
    Ok(samples)
}
