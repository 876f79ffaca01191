//! Tunnel-barrier model: an ohmic series resistance in front of a tunnelling
//! gap of width `w`, with Simmons-type conduction through the gap.
//!
//! The conduction formula carries numeric constants that assume the gap in
//! nanometres and voltages in volts, so [`PickettParams::aux`] and
//! [`PickettParams::gap_current`] take `w` in nm. The state equation is
//! evaluated in SI.

use serde::{Deserialize, Serialize};

use super::{checked_exp, checked_sinh, default_overflow_cap};
use crate::error::{Error, Result};

const SIMMONS_PREFACTOR: f64 = 0.0617;
const IMAGE_FORCE_LN_COEF: f64 = 0.1148;
const BARRIER_B_COEF: f64 = 10.24634;
const LAMBDA_COEF: f64 = 0.0998;

fn default_phi_0() -> f64 {
    0.95
}

fn default_w_1() -> f64 {
    0.1261e-9
}

fn default_current_scale() -> f64 {
    1.0
}

/// Fitting parameters. Lengths in m, velocities in m/s, currents in A,
/// resistance in Ω, barrier height in V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickettParams {
    pub f_off: f64,
    pub i_off: f64,
    pub a_off: f64,
    pub f_on: f64,
    pub i_on: f64,
    pub a_on: f64,
    pub b: f64,
    pub w_c: f64,
    pub r_s: f64,
    #[serde(default = "default_phi_0")]
    pub phi_0: f64,
    #[serde(default = "default_w_1")]
    pub w_1: f64,
    /// Multiplier taking the conduction formula's native output to amperes.
    #[serde(default = "default_current_scale")]
    pub current_scale: f64,
    #[serde(default = "default_overflow_cap")]
    pub overflow_cap: f64,
}

/// Intermediate quantities of the gap conduction formula, lengths in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickettAuxiliaries {
    pub lambda: f64,
    pub w_2: f64,
    pub delta_w: f64,
    pub b_coef: f64,
    pub phi_i: f64,
}

impl PickettParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("f_off", self.f_off),
            ("i_off", self.i_off),
            ("a_off", self.a_off),
            ("f_on", self.f_on),
            ("i_on", self.i_on),
            ("a_on", self.a_on),
            ("b", self.b),
            ("w_c", self.w_c),
            ("phi_0", self.phi_0),
            ("w_1", self.w_1),
            ("current_scale", self.current_scale),
            ("overflow_cap", self.overflow_cap),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(self.r_s >= 0.0 && self.r_s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r_s",
                reason: format!("must be finite and non-negative, got {}", self.r_s),
            });
        }
        Ok(())
    }

    pub fn w_1_nm(&self) -> f64 {
        self.w_1 * 1e9
    }

    /// Barrier geometry and effective height at gap `w_nm` under gap voltage `v_g`.
    pub fn aux(&self, w_nm: f64, v_g: f64) -> Result<PickettAuxiliaries> {
        let w_1 = self.w_1_nm();
        let v = v_g.abs();
        if !(w_nm > w_1) {
            return Err(Error::OutOfValidityRange(format!(
                "gap {w_nm} nm not wider than w_1 = {w_1} nm"
            )));
        }
        let lambda = LAMBDA_COEF / w_nm;
        let denom = 2.85 + 4.0 * lambda - 2.0 * v;
        if !(denom > 0.0) {
            return Err(Error::OutOfValidityRange(format!(
                "|v_g| = {v} V collapses the barrier at w = {w_nm} nm"
            )));
        }
        let w_2 = w_1 + w_nm * (1.0 - 9.2 * lambda / denom);
        let delta_w = w_2 - w_1;
        if !(delta_w > 0.0) {
            return Err(Error::OutOfValidityRange(format!(
                "non-positive barrier width {delta_w} nm at w = {w_nm} nm, |v_g| = {v} V"
            )));
        }
        let ln_arg = w_2 * (w_nm - w_1) / (w_1 * (w_nm - w_2));
        if !(ln_arg > 0.0 && ln_arg.is_finite()) {
            return Err(Error::OutOfValidityRange(format!(
                "image-force log argument {ln_arg} at w = {w_nm} nm, |v_g| = {v} V"
            )));
        }
        let phi_i =
            self.phi_0 - v * (w_1 + w_2) / w_nm - IMAGE_FORCE_LN_COEF / delta_w * ln_arg.ln();
        if !(phi_i > 0.0) {
            return Err(Error::OutOfValidityRange(format!(
                "barrier height {phi_i} V at w = {w_nm} nm, |v_g| = {v} V"
            )));
        }
        Ok(PickettAuxiliaries {
            lambda,
            w_2,
            delta_w,
            b_coef: BARRIER_B_COEF * delta_w,
            phi_i,
        })
    }

    /// Tunnel current through the gap, in A, carrying the sign of `v_g`.
    ///
    /// The bracket is evaluated as `e^{-B√φ}·(φ(1 − e^{-d}) − v·e^{-d})` with
    /// `d = B(√(φ+v) − √φ)`, which keeps full relative precision at small bias.
    pub fn gap_current(&self, w_nm: f64, v_g: f64) -> Result<f64> {
        let aux = self.aux(w_nm, v_g)?;
        let v = v_g.abs();
        let phi = aux.phi_i;
        let b = aux.b_coef;
        let root_phi = phi.sqrt();
        let d = b * v / ((phi + v).sqrt() + root_phi);
        let bracket = (-b * root_phi).exp() * (-phi * (-d).exp_m1() - v * (-d).exp());
        let magnitude =
            self.current_scale * SIMMONS_PREFACTOR / (aux.delta_w * aux.delta_w) * bracket;
        Ok(if v_g < 0.0 { -magnitude } else { magnitude })
    }

    /// `|v_g|` at which `2.85 + 4λ − 2|v_g|` reaches zero; no valid point lies beyond.
    pub(crate) fn collapse_voltage(w_nm: f64) -> f64 {
        0.5 * (2.85 + 4.0 * LAMBDA_COEF / w_nm)
    }

    /// Upper end of the operating window for gap `w_nm`, located by bisection
    /// to `tol` volts. Past this point the conduction formula either loses
    /// validity or the current turns over and falls with rising `|v_g|`, so
    /// `[0, edge]` is where the current is strictly increasing.
    pub fn validity_edge(&self, w_nm: f64, tol: f64) -> Result<f64> {
        self.aux(w_nm, 0.0)?;
        let h = 1e-7;
        let rising = |v: f64| match (self.gap_current(w_nm, v), self.gap_current(w_nm, v + h)) {
            (Ok(a), Ok(b)) => b > a,
            _ => false,
        };
        let mut lo = 0.0;
        let mut hi = Self::collapse_voltage(w_nm);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if rising(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Gap velocity in m/s for gap `w` in m. Positive currents switch OFF
    /// (gap widens), negative currents switch ON.
    pub fn dwdt(&self, w: f64, i_m: f64) -> Result<f64> {
        if i_m == 0.0 {
            return Ok(0.0);
        }
        let (f, i_scale, a) = if i_m > 0.0 {
            (self.f_off, self.i_off, self.a_off)
        } else {
            (self.f_on, self.i_on, self.a_on)
        };
        let cap = self.overflow_cap;
        let sinh = checked_sinh(i_m / i_scale, cap, "tunnel-gap sinh(i/i_0)")?;
        let inner = checked_exp(
            (w - a) / self.w_c - i_m.abs() / self.b,
            cap,
            "tunnel-gap exp(...)",
        )?;
        Ok(f * sinh * (-inner - w / self.w_c).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn published() -> PickettParams {
        PickettParams {
            f_off: 3.5e-6,
            i_off: 115e-6,
            a_off: 1.2e-9,
            f_on: 40e-6,
            i_on: 8.9e-6,
            a_on: 1.8e-9,
            b: 500e-6,
            w_c: 107e-12,
            r_s: 215.0,
            phi_0: 0.95,
            w_1: 0.1261e-9,
            current_scale: 1.0,
            overflow_cap: 700.0,
        }
    }

    #[test]
    fn lambda_at_0998() {
        let aux = published().aux(0.998, 0.0).unwrap();
        assert!((aux.lambda - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_bias_barrier_height() {
        // Hand-evaluated chain at w = 1.5 nm, v_g = 0.
        let w = 1.5f64;
        let w1 = 0.1261f64;
        let lambda = 0.0998 / w;
        let w2 = w1 + w * (1.0 - 9.2 * lambda / (2.85 + 4.0 * lambda));
        let dw = w2 - w1;
        let phi = 0.95 - (0.1148 / dw) * (w2 * (w - w1) / (w1 * (w - w2))).ln();
        let aux = published().aux(w, 0.0).unwrap();
        assert!((aux.phi_i - phi).abs() < 1e-14);
        assert!((aux.w_2 - w2).abs() < 1e-14);
        assert!((aux.b_coef - 10.24634 * dw).abs() < 1e-13);
        // frozen from the chain above
        assert!(
            (aux.phi_i - 0.525_684_000_561).abs() < 1e-11,
            "{}",
            aux.phi_i
        );
    }

    #[test]
    fn collapsing_barrier_is_out_of_range() {
        let p = published();
        for v in [1.5, 2.0, 5.0] {
            assert!(
                matches!(p.aux(1.2, v), Err(Error::OutOfValidityRange(_))),
                "{v}"
            );
        }
        assert!(matches!(p.aux(0.1, 0.0), Err(Error::OutOfValidityRange(_))));
    }

    #[test]
    fn zero_bias_current_vanishes() {
        let p = published();
        for w in [0.8, 1.0, 1.3, 1.7] {
            assert_eq!(p.gap_current(w, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn current_is_odd_in_gap_voltage() {
        let p = published();
        assert_eq!(
            p.gap_current(1.1, -0.2).unwrap(),
            -p.gap_current(1.1, 0.2).unwrap()
        );
    }

    #[test]
    fn current_increases_with_gap_voltage() {
        let p = published();
        for w in [0.9, 1.0, 1.1, 1.2, 1.3, 1.4] {
            let edge = p.validity_edge(w, 1e-9).unwrap();
            let mut last = p.gap_current(w, 0.0).unwrap();
            for k in 1..=400 {
                let v = edge * k as f64 / 400.0 * 0.999;
                let i = p.gap_current(w, v).unwrap();
                assert!(i > last, "w={w} v={v}: {i} <= {last}");
                last = i;
            }
        }
    }

    #[test]
    fn wider_gap_conducts_less() {
        let p = published();
        for w in [0.9, 1.0, 1.1, 1.2, 1.3] {
            let edge = p
                .validity_edge(w, 1e-9)
                .unwrap()
                .min(p.validity_edge(w + 0.1, 1e-9).unwrap());
            for k in 1..=50 {
                let v = edge * k as f64 / 51.0;
                assert!(p.gap_current(w + 0.1, v).unwrap() < p.gap_current(w, v).unwrap());
            }
        }
    }

    #[test]
    fn small_bias_matches_direct_bracket() {
        let p = published();
        let (w, v) = (1.2, 0.3);
        let aux = p.aux(w, v).unwrap();
        let (phi, b) = (aux.phi_i, aux.b_coef);
        let direct = 0.0617 / (aux.delta_w * aux.delta_w)
            * (phi * (-b * phi.sqrt()).exp() - (phi + v) * (-b * (phi + v).sqrt()).exp());
        let i = p.gap_current(w, v).unwrap();
        assert!((i - direct).abs() < 1e-12 * direct.abs(), "{i} {direct}");
        // linear response near zero bias
        let i1 = p.gap_current(w, 1e-9).unwrap();
        let i2 = p.gap_current(w, 2e-9).unwrap();
        assert!((i2 / i1 - 2.0).abs() < 1e-6, "{}", i2 / i1);
    }

    #[test]
    fn edge_sits_at_the_current_peak() {
        let p = published();
        let w = 0.9;
        let edge = p.validity_edge(w, 1e-9).unwrap();
        assert!(p.aux(w, edge * 1.3).is_ok());
        assert!(p.gap_current(w, edge * 1.3).unwrap() < p.gap_current(w, edge).unwrap());
    }

    #[test]
    fn zero_current_freezes_the_gap() {
        assert_eq!(published().dwdt(1.0e-9, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_sign_follows_current() {
        let p = published();
        assert!(p.dwdt(1.0e-9, 50e-6).unwrap() > 0.0);
        assert!(p.dwdt(1.0e-9, -50e-6).unwrap() < 0.0);
    }

    #[test]
    fn on_and_off_rates_differ() {
        let p = published();
        let off = p.dwdt(1.0e-9, 50e-6).unwrap();
        let on = p.dwdt(1.0e-9, -50e-6).unwrap();
        assert!(on.abs() > 10.0 * off.abs(), "on {on} off {off}");
    }

    #[test]
    fn sinh_overflow_is_an_error() {
        let p = published();
        assert!(matches!(p.dwdt(1.0e-9, -1.0), Err(Error::Overflow { .. })));
    }
}
