//! Completing the terminal (v, i) pair from the state and one drive value.

use super::root::{newton_bisect, RootOptions};
use crate::drive::DriveKind;
use crate::error::{Error, Result};
use crate::models::{ModelParams, PickettParams, YangParams};

/// Returns `(v_m, i_m)` for a device at state `w` (model state units) driven
/// by `drive` of the given kind.
///
/// `tol` is relative: voltages are resolved to `tol * max(1, |v|)` and
/// currents to `tol * |i|`.
pub fn port_solve(
    model: &ModelParams,
    w: f64,
    drive: f64,
    kind: DriveKind,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    match (model, kind) {
        (ModelParams::Strukov(p), DriveKind::Current) => {
            Ok((p.memristance(w * p.d)? * drive, drive))
        }
        (ModelParams::Strukov(p), DriveKind::Voltage) => {
            Ok((drive, drive / p.memristance(w * p.d)?))
        }
        (ModelParams::Yang(p), DriveKind::Voltage) => Ok((drive, p.current(w, drive)?)),
        (ModelParams::Yang(p), DriveKind::Current) => {
            Ok((yang_voltage_for_current(p, w, drive, tol, max_iter)?, drive))
        }
        (ModelParams::Pickett(p), DriveKind::Voltage) => {
            let v_g = solve_gap_voltage(p, w, drive, tol, max_iter)?;
            Ok((drive, p.gap_current(w, v_g)?))
        }
        (ModelParams::Pickett(p), DriveKind::Current) => {
            let v_g = gap_voltage_for_current(p, w, drive, tol, max_iter)?;
            Ok((v_g + drive * p.r_s, drive))
        }
    }
}

/// Resolution of the operating-window edge used to bracket the port solves.
const EDGE_TOL: f64 = 1e-9;

/// Solves `v_m = v_g + i(w, v_g) R_S` for the gap voltage, `w` in nm.
pub fn solve_gap_voltage(
    p: &PickettParams,
    w_nm: f64,
    v_m: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if v_m == 0.0 {
        return Ok(0.0);
    }
    // Odd symmetry: solve for |v_m| and restore the sign.
    let target = v_m.abs();
    let edge = p.validity_edge(w_nm, EDGE_TOL)?;
    let reach = edge + p.r_s * p.gap_current(w_nm, edge)?;
    if target > reach {
        return Err(Error::OutOfValidityRange(format!(
            "|v_m| = {target} V exceeds the conduction window ({reach} V) at w = {w_nm} nm"
        )));
    }
    if p.r_s == 0.0 {
        return Ok(v_m);
    }
    let opts = RootOptions {
        tol: tol * target.max(1.0),
        max_iter,
    };
    let g = |v: f64| -> Result<(f64, f64)> {
        let i = p.gap_current(w_nm, v)?;
        let slope = gap_conductance(p, w_nm, v);
        Ok((v + p.r_s * i - target, 1.0 + p.r_s * slope))
    };
    let v_g = newton_bisect(g, 0.0, target.min(edge), target.min(edge), opts)?;
    Ok(v_g.copysign(v_m))
}

/// Gap voltage carrying current `i_m` at gap `w_nm`.
fn gap_voltage_for_current(
    p: &PickettParams,
    w_nm: f64,
    i_m: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if i_m == 0.0 {
        return Ok(0.0);
    }
    let target = i_m.abs();
    let edge = p.validity_edge(w_nm, EDGE_TOL)?;
    let i_edge = p.gap_current(w_nm, edge)?;
    if target > i_edge {
        return Err(Error::OutOfValidityRange(format!(
            "|i| = {target} A exceeds the largest gap current ({i_edge} A) at w = {w_nm} nm"
        )));
    }
    let opts = RootOptions {
        tol: tol * target,
        max_iter,
    };
    let g = |v: f64| -> Result<(f64, f64)> {
        Ok((
            p.gap_current(w_nm, v)? - target,
            gap_conductance(p, w_nm, v),
        ))
    };
    let v_g = newton_bisect(g, 0.0, edge, 0.5 * edge, opts)?;
    Ok(v_g.copysign(i_m))
}

/// Finite-difference `di/dv_g`; NaN when the stencil leaves the validity
/// window, which sends the root finder to bisection.
fn gap_conductance(p: &PickettParams, w_nm: f64, v: f64) -> f64 {
    let h = 1e-7 * v.abs().max(1e-3);
    match (p.gap_current(w_nm, v + h), p.gap_current(w_nm, v - h)) {
        (Ok(up), Ok(down)) => (up - down) / (2.0 * h),
        (Err(_), Ok(down)) => p
            .gap_current(w_nm, v)
            .map(|mid| (mid - down) / h)
            .unwrap_or(f64::NAN),
        _ => f64::NAN,
    }
}

/// Terminal voltage at which the nonlinear port relation carries `i_m`.
fn yang_voltage_for_current(
    p: &YangParams,
    x: f64,
    i_m: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if i_m == 0.0 {
        return Ok(0.0);
    }
    let current = |v: f64| p.current_and_slope(x, v);
    // grow a bracket outward from zero
    let mut edge = 1.0f64.copysign(i_m);
    loop {
        let (i, _) = current(edge)?;
        if (i_m > 0.0 && i >= i_m) || (i_m < 0.0 && i <= i_m) {
            break;
        }
        edge *= 2.0;
        if !edge.is_finite() {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    }
    let (lo, hi) = if i_m > 0.0 { (0.0, edge) } else { (edge, 0.0) };
    let opts = RootOptions {
        tol: tol * i_m.abs(),
        max_iter,
    };
    newton_bisect(
        |v| current(v).map(|(i, slope)| (i - i_m, slope)),
        lo,
        hi,
        0.5 * (lo + hi),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StrukovParams;

    fn strukov() -> ModelParams {
        ModelParams::Strukov(StrukovParams::new(1e-14, 100.0, 16e3, 10e-9).unwrap())
    }

    fn yang() -> YangParams {
        YangParams {
            alpha: 4.0,
            m: 11,
            beta: 9e-6,
            delta: 2.0,
            chi: 1e-8,
            gamma: 4.0,
            n: 14,
            overflow_cap: 700.0,
        }
    }

    fn pickett() -> PickettParams {
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
    fn strukov_midpoint_voltage() {
        let (v, i) = port_solve(&strukov(), 0.5, 1e-3, DriveKind::Current, 1e-12, 50).unwrap();
        assert_eq!(i, 1e-3);
        assert!((v - 8.05).abs() < 1e-12);
        let (v, i) = port_solve(&strukov(), 0.5, 8.05, DriveKind::Voltage, 1e-12, 50).unwrap();
        assert_eq!(v, 8.05);
        assert!((i - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn zero_drive_is_the_origin() {
        let models = [
            strukov(),
            ModelParams::Yang(yang()),
            ModelParams::Pickett(pickett()),
        ];
        let ws = [0.4, 0.4, 1.1];
        for (m, w) in models.iter().zip(ws) {
            for kind in [DriveKind::Current, DriveKind::Voltage] {
                let (v, i) = port_solve(m, w, 0.0, kind, 1e-12, 50).unwrap();
                assert_eq!((v, i), (0.0, 0.0), "{:?} {:?}", m.kind(), kind);
            }
        }
    }

    #[test]
    fn yang_current_round_trip() {
        let p = yang();
        for &x in &[0.3, 0.8, 1.0] {
            for &i in &[1e-7, -1e-7, 3e-6, -2.5e-5, 1e-3] {
                let v = yang_voltage_for_current(&p, x, i, 1e-12, 200).unwrap();
                let back = p.current(x, v).unwrap();
                assert!(
                    (back - i).abs() <= 1e-12 * i.abs(),
                    "x={x} i={i} back={back}"
                );
            }
        }
    }

    #[test]
    fn closed_device_cannot_sink_large_reverse_current() {
        // with x = 0 only the rectifying term conducts and it saturates at -chi
        let p = yang();
        assert!(yang_voltage_for_current(&p, 0.0, 1e-3, 1e-12, 200).is_ok());
        assert!(yang_voltage_for_current(&p, 0.0, -2.0 * p.chi, 1e-12, 200).is_err());
    }

    #[test]
    fn gap_voltage_without_series_resistance() {
        let p = PickettParams {
            r_s: 0.0,
            ..pickett()
        };
        assert_eq!(solve_gap_voltage(&p, 1.1, 0.3, 1e-12, 50).unwrap(), 0.3);
    }

    #[test]
    fn gap_voltage_residual() {
        let p = pickett();
        for &w in &[0.9, 1.1, 1.3] {
            for &v_m in &[0.05, -0.2, 0.3, -0.4] {
                let v_g = solve_gap_voltage(&p, w, v_m, 1e-12, 100).unwrap();
                let r = v_m - v_g - p.gap_current(w, v_g).unwrap() * p.r_s;
                assert!(
                    r.abs() <= 1e-12 * v_m.abs().max(1.0),
                    "w={w} v_m={v_m} r={r}"
                );
                assert_eq!(v_g.signum(), v_m.signum());
            }
        }
    }

    #[test]
    fn current_beyond_window_is_out_of_range() {
        let p = pickett();
        assert!(matches!(
            gap_voltage_for_current(&p, 1.3, 10.0, 1e-12, 200),
            Err(Error::OutOfValidityRange(_))
        ));
    }

    #[test]
    fn pickett_current_round_trip() {
        let p = pickett();
        let w = 1.1;
        let edge = p.validity_edge(w, 1e-12).unwrap();
        let i_max = p.gap_current(w, edge).unwrap();
        for frac in [1e-6, 0.01, 0.3, 0.99] {
            for sign in [1.0, -1.0] {
                let i = sign * frac * i_max;
                let v_g = gap_voltage_for_current(&p, w, i, 1e-12, 200).unwrap();
                let back = p.gap_current(w, v_g).unwrap();
                assert!((back - i).abs() <= 1e-12 * i.abs(), "{i} {back}");
            }
        }
    }
}
