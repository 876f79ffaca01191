//! Metrics extracted from traces and the per-model classification table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, OnSide};
use crate::trace::{Sample, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    fn holds(&self, v: f64) -> bool {
        match self {
            Polarity::Positive => v >= 0.0,
            Polarity::Negative => v <= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub threshold_fraction: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub linear_r2_min: f64,
    pub symmetric_ratio_min: f64,
    pub symmetric_ratio_max: f64,
    /// Absolute tolerance for the pinch test, A. `None` scales with the peak
    /// current (1e-9 of it).
    pub pinch_tol: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            threshold_fraction: 0.05,
            band_lo: 0.1,
            band_hi: 0.9,
            linear_r2_min: 0.99,
            symmetric_ratio_min: 0.9,
            symmetric_ratio_max: 1.11,
            pinch_tol: None,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return bad(
                "threshold_fraction",
                format!("must lie in (0, 1), got {}", self.threshold_fraction),
            );
        }
        if !(0.0 < self.band_lo && self.band_lo < self.band_hi && self.band_hi < 1.0) {
            return bad(
                "band",
                format!(
                    "need 0 < lo < hi < 1, got {} / {}",
                    self.band_lo, self.band_hi
                ),
            );
        }
        if !(0.0..=1.0).contains(&self.linear_r2_min) {
            return bad(
                "linear_r2_min",
                format!("must lie in [0, 1], got {}", self.linear_r2_min),
            );
        }
        if !(0.0 < self.symmetric_ratio_min
            && self.symmetric_ratio_min <= 1.0
            && self.symmetric_ratio_max >= 1.0)
        {
            return bad(
                "symmetric_ratio",
                format!(
                    "need 0 < min <= 1 <= max, got {} / {}",
                    self.symmetric_ratio_min, self.symmetric_ratio_max
                ),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linearity {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub linearity: Linearity,
    /// Absent when the trace never completes a transition in both directions.
    pub symmetry: Option<Symmetry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelKind,
    pub threshold_pos: Option<f64>,
    pub threshold_neg: Option<f64>,
    pub t_on_to_off: Option<f64>,
    pub t_off_to_on: Option<f64>,
    pub symmetry_ratio: Option<f64>,
    pub linearity_r2: f64,
    pub pinched_residual: f64,
    pub pinched: bool,
    pub classification: Classification,
    pub options: AnalysisOptions,
}

/// Largest |i| at the zero crossings of v, each located by linear
/// interpolation between neighbouring samples.
pub fn pinched_check(samples: &[Sample]) -> Result<f64> {
    let mut residual: Option<f64> = None;
    let mut note = |i: f64| {
        let r = i.abs();
        residual = Some(residual.map_or(r, |m: f64| m.max(r)));
    };
    for (k, s) in samples.iter().enumerate() {
        if s.v == 0.0 {
            note(s.i);
        }
        if let Some(n) = samples.get(k + 1) {
            if (s.v < 0.0 && n.v > 0.0) || (s.v > 0.0 && n.v < 0.0) {
                let frac = s.v / (s.v - n.v);
                note(s.i + frac * (n.i - s.i));
            }
        }
    }
    residual.ok_or_else(|| Error::InsufficientData("voltage never crosses zero".into()))
}

/// Smallest |v| of the given polarity at which |dw/dt| rises through
/// `fraction` of its trace maximum, interpolated within the crossing segment.
/// Returned with the sign of the polarity.
pub fn estimate_threshold(samples: &[Sample], fraction: f64, polarity: Polarity) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction",
            reason: format!("must lie in (0, 1), got {fraction}"),
        });
    }
    let peak = samples.iter().map(|s| s.dwdt.abs()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::InsufficientData(
            "state rate is zero throughout".into(),
        ));
    }
    let level = fraction * peak;
    let mut best: Option<f64> = None;
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if !(polarity.holds(a.v) && polarity.holds(b.v)) {
            continue;
        }
        let (ra, rb) = (a.dwdt.abs(), b.dwdt.abs());
        if ra <= level && rb > level {
            let frac = (level - ra) / (rb - ra);
            let v = (a.v + frac * (b.v - a.v)).abs();
            best = Some(best.map_or(v, |m| m.min(v)));
        }
    }
    let v = best.ok_or_else(|| {
        Error::InsufficientData(format!(
            "|dw/dt| never rises through {fraction} of its peak at {polarity:?} drive"
        ))
    })?;
    Ok(match polarity {
        Polarity::Positive => v,
        Polarity::Negative => -v,
    })
}

/// Time of the first crossing of `level` in direction `rising` at or after
/// sample `from`, with the index of the sample just past it.
fn next_crossing(
    samples: &[Sample],
    from: usize,
    level: f64,
    rising: bool,
) -> Option<(f64, usize)> {
    for k in from..samples.len().saturating_sub(1) {
        let (a, b) = (&samples[k], &samples[k + 1]);
        let crosses = if rising {
            a.w < level && b.w >= level
        } else {
            a.w > level && b.w <= level
        };
        if crosses {
            let frac = (level - a.w) / (b.w - a.w);
            return Some((a.t + frac * (b.t - a.t), k + 1));
        }
    }
    None
}

/// Duration of the first complete traversal of the band in one direction.
fn traversal_time(samples: &[Sample], start: f64, end: f64, rising: bool) -> Option<f64> {
    let mut from = 0;
    while let Some((t0, k)) = next_crossing(samples, from, start, rising) {
        // the band must be left through `end` before coming back through `start`
        let back = next_crossing(samples, k, start, !rising).map(|(t, _)| t);
        match next_crossing(samples, k, end, rising) {
            Some((t1, _)) if back.is_none_or(|tb| t1 <= tb) => return Some(t1 - t0),
            Some(_) => from = k,
            None => return None,
        }
    }
    None
}

/// `(t_on_to_off, t_off_to_on)`: band traversal times between the `lo` and
/// `hi` fractions of `[w_min, w_max]`.
pub fn extract_switching_times(trace: &Trace, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let (w_min, w_max) = (trace.meta.w_min, trace.meta.w_max);
    let lo_level = w_min + lo * (w_max - w_min);
    let hi_level = w_min + hi * (w_max - w_min);
    let rise = traversal_time(&trace.samples, lo_level, hi_level, true);
    let fall = traversal_time(&trace.samples, hi_level, lo_level, false);
    let (up, down) = match (rise, fall) {
        (Some(u), Some(d)) => (u, d),
        _ => {
            return Err(Error::InsufficientData(format!(
                "state does not traverse the {lo}-{hi} band in both directions"
            )))
        }
    };
    Ok(match trace.meta.on_side {
        OnSide::High => (down, up),
        OnSide::Low => (up, down),
    })
}

/// `t_on_to_off / t_off_to_on`.
pub fn symmetry_metric(trace: &Trace, lo: f64, hi: f64) -> Result<f64> {
    let (on_off, off_on) = extract_switching_times(trace, lo, hi)?;
    if !(off_on > 0.0) {
        return Err(Error::InsufficientData(
            "OFF to ON transition has zero duration".into(),
        ));
    }
    Ok(on_off / off_on)
}

/// True when a sample sits at one of the state bounds.
fn pinned(trace: &Trace, s: &Sample) -> bool {
    s.w <= trace.meta.w_min || s.w >= trace.meta.w_max
}

/// Coefficient of determination of a least-squares line of dw/dt against the
/// controlling drive quantity. Samples pinned at a state bound are excluded:
/// their rate is set by the clamp, not by the model.
pub fn linearity_metric(trace: &Trace) -> Result<f64> {
    let pts: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .filter(|s| !pinned(trace, s))
        .map(|s| (trace.controlling(s), s.dwdt))
        .filter(|(x, _)| *x != 0.0)
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} samples with nonzero drive off the bounds, need 10",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("drive has zero variance".into()));
    }
    if !(syy > 0.0) {
        return Err(Error::InsufficientData(
            "state rate has zero variance".into(),
        ));
    }
    Ok((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}

pub fn classify(r2: f64, ratio: Option<f64>, opts: &AnalysisOptions) -> Classification {
    Classification {
        linearity: if r2 >= opts.linear_r2_min {
            Linearity::Linear
        } else {
            Linearity::Nonlinear
        },
        symmetry: ratio.map(|r| {
            if (opts.symmetric_ratio_min..=opts.symmetric_ratio_max).contains(&r) {
                Symmetry::Symmetric
            } else {
                Symmetry::Asymmetric
            }
        }),
    }
}

/// Runs every metric on a trace. Threshold and switching-time metrics that
/// the trace cannot support are reported as absent.
pub fn analyze(trace: &Trace, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    opts.validate()?;
    let pinched_residual = pinched_check(&trace.samples)?;
    let peak_i = trace.samples.iter().map(|s| s.i.abs()).fold(0.0, f64::max);
    let pinch_tol = opts.pinch_tol.unwrap_or(1e-9 * peak_i);
    let linearity_r2 = linearity_metric(trace)?;
    let threshold = |p| estimate_threshold(&trace.samples, opts.threshold_fraction, p).ok();
    let times = extract_switching_times(trace, opts.band_lo, opts.band_hi).ok();
    let symmetry_ratio = times.and_then(|(a, b)| (b > 0.0).then(|| a / b));
    Ok(AnalysisReport {
        model: trace.meta.model,
        threshold_pos: threshold(Polarity::Positive),
        threshold_neg: threshold(Polarity::Negative),
        t_on_to_off: times.map(|t| t.0),
        t_off_to_on: times.map(|t| t.1),
        symmetry_ratio,
        linearity_r2,
        pinched_residual,
        pinched: pinched_residual <= pinch_tol,
        classification: classify(linearity_r2, symmetry_ratio, opts),
        options: *opts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub model: ModelKind,
    pub linearity_r2: f64,
    pub symmetry_ratio: Option<f64>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// One row per report, classified with the cutoffs the report was made with.
pub fn build_summary_table<'a, I>(reports: I) -> SummaryTable
where
    I: IntoIterator<Item = (&'a str, &'a AnalysisReport)>,
{
    let rows = reports
        .into_iter()
        .map(|(name, r)| SummaryRow {
            name: name.to_string(),
            model: r.model,
            linearity_r2: r.linearity_r2,
            symmetry_ratio: r.symmetry_ratio,
            classification: classify(r.linearity_r2, r.symmetry_ratio, &r.options),
        })
        .collect();
    SummaryTable { rows }
}

fn linearity_label(c: &Classification) -> &'static str {
    match c.linearity {
        Linearity::Linear => "linear",
        Linearity::Nonlinear => "nonlinear",
    }
}

fn symmetry_label(c: &Classification) -> &'static str {
    match c.symmetry {
        Some(Symmetry::Symmetric) => "symmetric",
        Some(Symmetry::Asymmetric) => "asymmetric",
        None => "n/a",
    }
}

impl SummaryTable {
    pub fn to_text(&self) -> String {
        let name_w = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<name_w$}  {:<8}  {:>12}  {:>12}  {:<10}  {:<10}",
            "scenario", "model", "r2", "t_ratio", "linearity", "symmetry"
        );
        for r in &self.rows {
            let ratio = r
                .symmetry_ratio
                .map_or("n/a".to_string(), |x| format!("{x:.4e}"));
            let _ = writeln!(
                out,
                "{:<name_w$}  {:<8}  {:>12.6}  {:>12}  {:<10}  {:<10}",
                r.name,
                r.model.as_str(),
                r.linearity_r2,
                ratio,
                linearity_label(&r.classification),
                symmetry_label(&r.classification)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("scenario,model,linearity_r2,symmetry_ratio,linearity,symmetry\n");
        for r in &self.rows {
            let ratio = r.symmetry_ratio.map_or(String::new(), |x| format!("{x:?}"));
            let _ = writeln!(
                out,
                "{},{},{:?},{},{},{}",
                r.name,
                r.model,
                r.linearity_r2,
                ratio,
                linearity_label(&r.classification),
                symmetry_label(&r.classification)
            );
        }
        out
    }
}
