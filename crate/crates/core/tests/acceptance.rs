//! Acceptance gate. Runs every criterion in sequence and prints one
//! PASS/FAIL line for each; exits non-zero if any fails.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use memsim::analysis::{build_summary_table, Linearity, Symmetry};
use memsim::drive::{DriveKind, DriveSignal};
use memsim::models::{DeviceState, ModelParams, PickettParams, StrukovParams, YangParams};
use memsim::scenario::Scenario;
use memsim::solver::{integrate, solve_gap_voltage, SolverConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Switching-time ratio of `pickett_fig6c`, frozen from the first passing run.
const PICKETT_RATIO_BASELINE: f64 = 29.099860658231734;

const PAPER_SCENARIOS: [&str; 3] = ["strukov_fig6a", "yang_fig6b", "pickett_fig6c"];

const SHIPPED: [&str; 7] = [
    "strukov_fig2",
    "strukov_fig6a",
    "yang_fig4",
    "yang_m1_reduction",
    "yang_fig6b",
    "pickett_fig7",
    "pickett_fig6c",
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    Scenario::from_path(&scenario_dir().join(format!("{name}.toml")))
        .expect("shipped scenario loads")
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn strukov() -> StrukovParams {
    StrukovParams::new(1e-14, 100.0, 16e3, 10e-9).unwrap()
}

/// Closed-form normalized state under `i = i0 sin(ωt)`.
fn strukov_exact(p: &StrukovParams, x0: f64, i0: f64, f: f64, t: f64) -> f64 {
    let omega = TAU * f;
    x0 + p.mu_v * p.r_on / (p.d * p.d) * i0 / omega * (1.0 - (omega * t).cos())
}

fn strukov_final(dt: f64, t_end: f64) -> f64 {
    let p = strukov();
    let drive = DriveSignal::sine(DriveKind::Current, 5e-4, 3.0);
    let s0 = DeviceState::new(0.1, 0.0, 1.0).unwrap();
    let trace = integrate(
        &ModelParams::Strukov(p),
        &drive,
        s0,
        &SolverConfig::rk4(dt, t_end),
    )
    .unwrap();
    trace.samples.last().unwrap().w
}

fn c1_strukov_oracle() -> Outcome {
    let start = Instant::now();
    let p = strukov();
    let (x0, i0, f) = (0.1, 5e-4, 3.0);
    let period = 1.0 / f;
    let drive = DriveSignal::sine(DriveKind::Current, i0, f);
    let s0 = DeviceState::new(x0, 0.0, 1.0).unwrap();
    let trace = integrate(
        &ModelParams::Strukov(p),
        &drive,
        s0,
        &SolverConfig::rk4(period / 1e4, period),
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for s in &trace.samples {
        let exact = strukov_exact(&p, x0, i0, f, s.t);
        worst = worst.max(((s.w - exact) / exact).abs());
    }
    let end = trace.samples.last().unwrap();
    let end_err = ((end.w - strukov_exact(&p, x0, i0, f, period))
        / strukov_exact(&p, x0, i0, f, period))
    .abs();

    // order from the error at a third of a period on halving grids
    let t_end = period / 3.0;
    let errs: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|n| (strukov_final(t_end / n, t_end) - strukov_exact(&p, x0, i0, f, t_end)).abs())
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    check(
        end_err < 1e-8 && worst < 1e-8 && orders.iter().all(|o| (3.7..=4.3).contains(o)) && elapsed < 1.0,
        format!("rel err at T {end_err:.2e}, max over trace {worst:.2e}, order {orders:.3?}, {elapsed:.3} s"),
    )
}

fn c2_pinched() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for name in PAPER_SCENARIOS {
        let (trace, report) = load(name).simulate().map_err(|e| e.to_string())?;
        let peak = trace.samples.iter().map(|s| s.i.abs()).fold(0.0, f64::max);
        let rel = report.pinched_residual / peak;
        ok &= rel < 1e-9;
        parts.push(format!("{name} {rel:.1e}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        ok && elapsed < 5.0,
        format!("|i|/peak at v=0: {}; {elapsed:.2} s", parts.join(", ")),
    )
}

fn c3_yang_reduction() -> Outcome {
    let (_, report) = load("yang_m1_reduction")
        .simulate()
        .map_err(|e| e.to_string())?;
    let gap = 1.0 - report.linearity_r2;
    check(gap < 1e-9, format!("1 - r2 = {gap:.2e}"))
}

fn c4_yang_threshold() -> Outcome {
    let s = load("yang_fig4");
    let amplitude = s.drive.peak();
    let (_, report) = s.simulate().map_err(|e| e.to_string())?;
    let (pos, neg) = (
        report.threshold_pos.ok_or("no positive threshold")?,
        report.threshold_neg.ok_or("no negative threshold")?,
    );
    check(
        (2.0 * amplitude - 2.2).abs() < 1e-12
            && (0.55..=0.85).contains(&pos)
            && (0.55..=0.85).contains(&-neg)
            && report.options.threshold_fraction == 0.05,
        format!("{:.1} V p-p: +{pos:.4} V / {neg:.4} V", 2.0 * amplitude),
    )
}

fn c5_summary_table() -> Outcome {
    let mut reports = Vec::new();
    for name in PAPER_SCENARIOS {
        reports.push((name, load(name).simulate().map_err(|e| e.to_string())?.1));
    }
    let table = build_summary_table(reports.iter().map(|(n, r)| (*n, r)));
    let expected = [
        (Linearity::Linear, Some(Symmetry::Symmetric)),
        (Linearity::Nonlinear, Some(Symmetry::Symmetric)),
        (Linearity::Nonlinear, Some(Symmetry::Asymmetric)),
    ];
    let got: Vec<_> = table
        .rows
        .iter()
        .map(|r| (r.classification.linearity, r.classification.symmetry))
        .collect();
    check(got == expected, format!("{got:?}"))
}

fn c6_pickett_asymmetry() -> Outcome {
    let (_, report) = load("pickett_fig6c")
        .simulate()
        .map_err(|e| e.to_string())?;
    let ratio = report.symmetry_ratio.ok_or("switching times undefined")?;
    let drift = (ratio - PICKETT_RATIO_BASELINE).abs() / PICKETT_RATIO_BASELINE;
    check(
        !(0.5..=2.0).contains(&ratio) && drift < 1e-6,
        format!("t_on_to_off / t_off_to_on = {ratio:.6} (baseline {PICKETT_RATIO_BASELINE:.6}, drift {drift:.1e})"),
    )
}

fn published_pickett() -> PickettParams {
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

/// Plain bisection on `v_g + i(v_g) R_S = |v_m|` over `[0, edge]`.
fn bisect_gap_voltage(p: &PickettParams, w: f64, v_m: f64, edge: f64) -> f64 {
    let target = v_m.abs();
    let (mut lo, mut hi) = (0.0, edge);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + p.r_s * p.gap_current(w, mid).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).copysign(v_m)
}

fn c7_gap_solve() -> Outcome {
    let p = published_pickett();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_res, mut worst_diff): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let w = rng.gen_range(0.9..1.5);
        let edge = p.validity_edge(w, 1e-12).unwrap();
        let reach = edge + p.r_s * p.gap_current(w, edge).unwrap();
        let v_m = rng.gen_range(-reach..reach);
        let v_g = solve_gap_voltage(&p, w, v_m, 1e-12, 100)
            .map_err(|e| format!("w={w} v_m={v_m}: {e}"))?;
        let res = (v_m - v_g - p.gap_current(w, v_g).unwrap() * p.r_s).abs() / v_m.abs().max(1.0);
        worst_res = worst_res.max(res);
        worst_diff = worst_diff.max((v_g - bisect_gap_voltage(&p, w, v_m, edge)).abs());
    }
    check(
        worst_res <= 1e-10 && worst_diff <= 1e-9,
        format!(
            "worst scaled residual {worst_res:.1e}, worst |newton - bisection| {worst_diff:.1e} V"
        ),
    )
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn yang(m: u32, chi: f64) -> YangParams {
    YangParams {
        alpha: 4.0,
        m,
        beta: 9e-6,
        delta: 2.0,
        chi,
        gamma: 4.0,
        n: 14,
        overflow_cap: 700.0,
    }
}

fn c8_parity() -> Outcome {
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    let p = strukov();
    record(
        "linear drift is linear in i",
        runner()
            .run(
                &(-1e-2f64..1e-2, -1e-2f64..1e-2, -10.0f64..10.0),
                |(a, b, k)| {
                    let lhs = p.dwdt(k * a + b);
                    let rhs = k * p.dwdt(a) + p.dwdt(b);
                    prop_assert!(
                        (lhs - rhs).abs()
                            <= 1e-12
                                * (k.abs() * p.dwdt(a).abs() + p.dwdt(b).abs())
                                    .max(f64::MIN_POSITIVE)
                    );
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );
    record(
        "power-law drift is odd in v",
        runner()
            .run(
                &(
                    prop::sample::select(vec![1u32, 3, 5, 7, 9, 11, 13]),
                    -2.0f64..2.0,
                ),
                |(m, v)| {
                    let y = yang(m, 1e-8);
                    prop_assert_eq!(y.dwdt(-v), -y.dwdt(v));
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );
    record(
        "port current is odd in v without the rectifying term",
        runner()
            .run(&(0.0f64..=1.0, -3.0f64..3.0), |(x, v)| {
                let y = yang(11, 0.0);
                prop_assert_eq!(y.current(x, -v).unwrap(), -y.current(x, v).unwrap());
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let pk = published_pickett();
    record(
        "gap velocity follows the sign of i",
        runner()
            .run(&(0.8e-9f64..1.6e-9, -5e-4f64..5e-4), |(w, i)| {
                let r = pk.dwdt(w, i).unwrap();
                let same_sign = if i == 0.0 {
                    r == 0.0
                } else {
                    r != 0.0 && r.signum() == i.signum()
                };
                prop_assert!(same_sign, "w={} i={} r={}", w, i, r);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    record(
        "gap current vanishes at zero bias",
        runner()
            .run(&(0.6f64..3.0), |w| {
                prop_assert_eq!(pk.gap_current(w, 0.0).unwrap(), 0.0);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    if failures.is_empty() {
        Ok("5 properties x 1000 cases".into())
    } else {
        Err(failures.join("; "))
    }
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in SHIPPED {
        let s = load(name);
        let mut bytes = Vec::new();
        for run in 0..2 {
            let (trace, _) = s.simulate().map_err(|e| e.to_string())?;
            let path = dir.path().join(format!("{name}.{run}.csv"));
            trace.write_csv(&path).map_err(|e| e.to_string())?;
            bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("{name}: traces differ"));
        }
    }
    Ok(format!(
        "{} shipped scenarios byte-identical across two runs",
        SHIPPED.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 linear-drift closed form and RK4 order",
            c1_strukov_oracle,
        ),
        ("2 pinched hysteresis", c2_pinched),
        ("3 power-law drift m=1 reduction", c3_yang_reduction),
        ("4 power-law drift threshold", c4_yang_threshold),
        ("5 summary table classification", c5_summary_table),
        ("6 tunnel-gap switching asymmetry", c6_pickett_asymmetry),
        ("7 gap-voltage solve residuals", c7_gap_solve),
        ("8 model parity properties", c8_parity),
        ("9 deterministic traces", c9_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(msg) => println!("PASS  criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
