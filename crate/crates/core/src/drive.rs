//! Time-domain drive waveforms, tagged as current or voltage sources.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Current,
    Voltage,
}

impl DriveKind {
    pub fn unit(&self) -> &'static str {
        match self {
            DriveKind::Current => "A",
            DriveKind::Voltage => "V",
        }
    }
}

/// Waveform shapes. Amplitudes are peak values in A or V depending on the
/// drive kind; phases in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Waveform {
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Unit-slope triangle in phase with a sine of the same frequency:
    /// rises through zero at phase 0, peaks at a quarter period.
    Triangle {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Ideal square pulses: `high` for `t_high`, then `low` for `t_low`.
    PulseTrain {
        high: f64,
        low: f64,
        t_high: f64,
        t_low: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    pub kind: DriveKind,
    #[serde(flatten)]
    pub waveform: Waveform,
}

impl DriveSignal {
    pub fn sine(kind: DriveKind, amplitude: f64, frequency: f64) -> Self {
        Self {
            kind,
            waveform: Waveform::Sine {
                amplitude,
                frequency,
                phase: 0.0,
                offset: 0.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        match self.waveform {
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            }
            | Waveform::Triangle {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                if !(frequency > 0.0 && frequency.is_finite()) {
                    return bad("frequency", format!("must be positive, got {frequency}"));
                }
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad(
                        "amplitude",
                        format!("must be non-negative, got {amplitude}"),
                    );
                }
                if !(phase.is_finite() && offset.is_finite()) {
                    return bad("phase/offset", "must be finite".into());
                }
            }
            Waveform::PulseTrain {
                high,
                low,
                t_high,
                t_low,
            } => {
                if !(t_high > 0.0 && t_low > 0.0 && (t_high + t_low).is_finite()) {
                    return bad(
                        "t_high/t_low",
                        format!("must be positive, got {t_high}/{t_low}"),
                    );
                }
                if !(high.is_finite() && low.is_finite()) {
                    return bad("high/low", "must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency()
    }

    pub fn frequency(&self) -> f64 {
        match self.waveform {
            Waveform::Sine { frequency, .. } | Waveform::Triangle { frequency, .. } => frequency,
            Waveform::PulseTrain { t_high, t_low, .. } => 1.0 / (t_high + t_low),
        }
    }

    /// Largest absolute value the waveform reaches.
    pub fn peak(&self) -> f64 {
        match self.waveform {
            Waveform::Sine {
                amplitude, offset, ..
            }
            | Waveform::Triangle {
                amplitude, offset, ..
            } => offset.abs() + amplitude,
            Waveform::PulseTrain { high, low, .. } => high.abs().max(low.abs()),
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self.waveform {
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * (TAU * frequency * t + phase).sin(),
            Waveform::Triangle {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                // cycle position in [0, 1), with 0 at the rising zero crossing
                let u = (frequency * t + phase / TAU).rem_euclid(1.0);
                let shape = if u < 0.25 {
                    4.0 * u
                } else if u < 0.75 {
                    2.0 - 4.0 * u
                } else {
                    4.0 * u - 4.0
                };
                offset + amplitude * shape
            }
            Waveform::PulseTrain {
                high,
                low,
                t_high,
                t_low,
            } => {
                let pos = t.rem_euclid(t_high + t_low);
                if pos < t_high {
                    high
                } else {
                    low
                }
            }
        }
    }

    /// Times in `(0, t_end)` where the waveform passes through zero or jumps,
    /// ascending. Step-size control uses them as mandatory stops.
    pub fn breakpoints(&self, t_end: f64) -> Vec<f64> {
        // (cycle positions within one period, period, cycle position at t = 0)
        let (marks, period, start): (Vec<f64>, f64, f64) = match self.waveform {
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                if amplitude == 0.0 || offset.abs() > amplitude {
                    return Vec::new();
                }
                let theta = (-offset / amplitude).asin() / TAU;
                (
                    vec![theta.rem_euclid(1.0), (0.5 - theta).rem_euclid(1.0)],
                    1.0 / frequency,
                    phase / TAU,
                )
            }
            Waveform::Triangle {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                if amplitude == 0.0 || offset.abs() > amplitude {
                    return Vec::new();
                }
                let level = -offset / amplitude;
                let rising = if level >= 0.0 {
                    level / 4.0
                } else {
                    1.0 + level / 4.0
                };
                (
                    vec![rising, (2.0 - level) / 4.0],
                    1.0 / frequency,
                    phase / TAU,
                )
            }
            Waveform::PulseTrain { t_high, t_low, .. } => {
                let period = t_high + t_low;
                (vec![0.0, t_high / period], period, 0.0)
            }
        };
        let mut out = Vec::new();
        let mut k = 0.0f64;
        loop {
            let mut any_before_end = false;
            for &m in &marks {
                let t = (k + m - start.rem_euclid(1.0)) * period;
                if t < t_end {
                    any_before_end = true;
                    if t > 0.0 {
                        out.push(t);
                    }
                }
            }
            if !any_before_end && k > 0.0 {
                break;
            }
            k += 1.0;
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn describe(&self) -> String {
        let unit = self.kind.unit();
        match self.waveform {
            Waveform::Sine { amplitude, frequency, phase, offset } => format!(
                "{:?} sine {amplitude} {unit} peak, {frequency} Hz, phase {phase} rad, offset {offset} {unit}",
                self.kind
            ),
            Waveform::Triangle { amplitude, frequency, phase, offset } => format!(
                "{:?} triangle {amplitude} {unit} peak, {frequency} Hz, phase {phase} rad, offset {offset} {unit}",
                self.kind
            ),
            Waveform::PulseTrain { high, low, t_high, t_low } => format!(
                "{:?} pulse train {high}/{low} {unit}, {t_high}/{t_low} s",
                self.kind
            ),
        }
    }
}
