//! Amplitude-parametrized pulses, reset-interleaved input schedules and time
//! transformations.
//!
//! Operators only see extrema-complete sample sequences: because the
//! Preisach operator is rate independent, a pulse is fully described by its
//! start, peak and end samples.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the control amplitudes. Positive polarity uses negative reset
/// pulses and positive control pulses; negative polarity the reverse.
/// Serializes as `1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    /// Amplitude of the reset pulse for this polarity.
    pub fn reset_amplitude(self, a_max: f64) -> f64 {
        -self.sign() * a_max
    }
}

impl TryFrom<i8> for Polarity {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Polarity::Positive),
            -1 => Ok(Polarity::Negative),
            other => Err(format!("polarity must be 1 or -1, got {other}")),
        }
    }
}

impl From<Polarity> for i8 {
    fn from(p: Polarity) -> i8 {
        match p {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub value: f64,
}

impl Sample {
    pub fn new(time: f64, value: f64) -> Self {
        Self { time, value }
    }
}

pub fn values(samples: &[Sample]) -> Vec<f64> {
    samples.iter().map(|s| s.value).collect()
}

#[derive(Clone)]
pub enum PulseShape {
    /// Piecewise linear through `(0, 0)`, `(T1, A)`, `(T2, 0)`.
    Triangle,
    /// `A sin(pi t / T2)` with the peak at `T1 = T2 / 2`.
    HalfSine,
    /// `A` for every time; violates R1 and exists for validation tests.
    Constant,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseShape::Triangle => f.write_str("Triangle"),
            PulseShape::HalfSine => f.write_str("HalfSine"),
            PulseShape::Constant => f.write_str("Constant"),
            PulseShape::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A pulse `v(A, t)` rising to its peak at `rise_end` and back to zero at
/// `settle_end`.
#[derive(Debug, Clone)]
pub struct PulseSignal {
    amplitude: f64,
    rise_end: f64,
    settle_end: f64,
    shape: PulseShape,
}

/// Symmetric triangle of duration `period` peaking at `period / 2`.
pub fn make_triangle_pulse(amplitude: f64, period: f64) -> Result<PulseSignal> {
    PulseSignal::triangle(amplitude, 0.5 * period, period)
}

impl PulseSignal {
    fn checked(amplitude: f64, rise_end: f64, settle_end: f64, shape: PulseShape) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "amplitude {amplitude} is not finite"
            )));
        }
        if !(rise_end > 0.0 && settle_end > rise_end && settle_end.is_finite()) {
            return Err(Error::InvalidPulse(format!(
                "need 0 < T1 < T2, got T1 = {rise_end}, T2 = {settle_end}"
            )));
        }
        Ok(Self {
            amplitude,
            rise_end,
            settle_end,
            shape,
        })
    }

    /// Triangle with an arbitrary peak time (asymmetric when `rise_end != settle_end / 2`).
    pub fn triangle(amplitude: f64, rise_end: f64, settle_end: f64) -> Result<Self> {
        Self::checked(amplitude, rise_end, settle_end, PulseShape::Triangle)
    }

    pub fn half_sine(amplitude: f64, period: f64) -> Result<Self> {
        Self::checked(amplitude, 0.5 * period, period, PulseShape::HalfSine)
    }

    pub fn constant(amplitude: f64, period: f64) -> Result<Self> {
        Self::checked(amplitude, 0.5 * period, period, PulseShape::Constant)
    }

    pub fn custom(
        amplitude: f64,
        rise_end: f64,
        settle_end: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::checked(
            amplitude,
            rise_end,
            settle_end,
            PulseShape::Custom(Arc::new(f)),
        )
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn rise_end(&self) -> f64 {
        self.rise_end
    }

    pub fn settle_end(&self) -> f64 {
        self.settle_end
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn value(&self, t: f64) -> f64 {
        let a = self.amplitude;
        match &self.shape {
            PulseShape::Constant => a,
            PulseShape::Custom(f) => f(t),
            _ if t <= 0.0 || t >= self.settle_end => 0.0,
            PulseShape::Triangle => {
                if t == self.rise_end {
                    a
                } else if t < self.rise_end {
                    a * t / self.rise_end
                } else {
                    a * (self.settle_end - t) / (self.settle_end - self.rise_end)
                }
            }
            PulseShape::HalfSine => {
                if t == self.rise_end {
                    a
                } else {
                    a * (PI * t / self.settle_end).sin()
                }
            }
        }
    }

    /// Start, peak and end samples.
    pub fn extrema_samples(&self) -> Vec<Sample> {
        vec![
            Sample::new(0.0, self.value(0.0)),
            Sample::new(self.rise_end, self.value(self.rise_end)),
            Sample::new(self.settle_end, self.value(self.settle_end)),
        ]
    }

    /// `n + 1` equally spaced samples over `[0, T2]` plus the peak time.
    pub fn sample(&self, n: usize) -> Vec<Sample> {
        let n = n.max(1);
        let mut times: Vec<f64> = (0..=n)
            .map(|k| self.settle_end * k as f64 / n as f64)
            .collect();
        times.push(self.rise_end);
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup();
        times
            .into_iter()
            .map(|t| Sample::new(t, self.value(t)))
            .collect()
    }
}

/// Outcome of checking conditions R1–R4 on a sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct R1R4Report {
    /// Zero at the start and from `T2` on.
    pub r1: bool,
    /// Monotone on `(0, T1)` and on `(T1, T2)`.
    pub r2: bool,
    /// Strictly opposite slopes on the two intervals.
    pub r3: bool,
    /// Rising slope has the sign of the amplitude.
    pub r4: bool,
}

impl R1R4Report {
    pub fn all_pass(&self) -> bool {
        self.r1 && self.r2 && self.r3 && self.r4
    }
}

/// Checks R1–R4 on `samples` points per interval (at least 3).
pub fn validate_r1_r4(pulse: &PulseSignal, samples: usize) -> R1R4Report {
    let m = samples.max(3);
    let (t1, t2) = (pulse.rise_end, pulse.settle_end);
    let eps = 1e-12 * pulse.amplitude.abs().max(1.0);
    let grid = |a: f64, b: f64| -> Vec<f64> {
        (0..=m)
            .map(|k| pulse.value(a + (b - a) * k as f64 / m as f64))
            .collect()
    };

    let tail = grid(t2, 2.0 * t2);
    let r1 = pulse.value(0.0).abs() <= eps && tail.iter().all(|v| v.abs() <= eps);

    let rise: Vec<f64> = grid(0.0, t1).windows(2).map(|w| w[1] - w[0]).collect();
    let fall: Vec<f64> = grid(t1, t2).windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = |d: &[f64]| d.iter().all(|&x| x >= -eps) || d.iter().all(|&x| x <= eps);
    let r2 = monotone(&rise) && monotone(&fall);

    let strict_sign = |d: &[f64]| -> f64 {
        if d.iter().all(|&x| x > 0.0) {
            1.0
        } else if d.iter().all(|&x| x < 0.0) {
            -1.0
        } else {
            0.0
        }
    };
    let (s_rise, s_fall) = (strict_sign(&rise), strict_sign(&fall));
    let r3 = s_rise * s_fall < 0.0;

    let amp_sign = if pulse.amplitude > 0.0 {
        1.0
    } else if pulse.amplitude < 0.0 {
        -1.0
    } else {
        0.0
    };
    let r4 = s_rise == amp_sign;

    R1R4Report { r1, r2, r3, r4 }
}

/// Extrema-complete samples of the reset-interleaved iterative input: an
/// initial reset pulse, then for each amplitude a control pulse followed by
/// a reset pulse, each lasting `period`.
pub fn compose_schedule(
    amplitudes: &[f64],
    a_max: f64,
    period: f64,
    polarity: Polarity,
) -> Result<Vec<Sample>> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidPulse(format!(
            "period must be positive, got {period}"
        )));
    }
    if !(a_max > 0.0 && a_max.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "A_max must be positive, got {a_max}"
        )));
    }
    for (index, &a) in amplitudes.iter().enumerate() {
        if !(a.abs() <= a_max) {
            return Err(Error::AmplitudeExceedsMax {
                index,
                amplitude: a,
                a_max,
            });
        }
    }
    let reset = polarity.reset_amplitude(a_max);
    let mut out = vec![Sample::new(0.0, 0.0)];
    let mut push_pulse = |start: f64, peak: f64| {
        out.push(Sample::new(start + 0.5 * period, peak));
        out.push(Sample::new(start + period, 0.0));
    };
    push_pulse(0.0, reset);
    for (k, &a) in amplitudes.iter().enumerate() {
        let k = (k + 1) as f64;
        push_pulse((2.0 * k - 1.0) * period, a);
        push_pulse(2.0 * k * period, reset);
    }
    Ok(out)
}

/// Writes samples as CSV with header `time,value`.
pub fn write_samples_csv<W: Write>(writer: W, samples: &[Sample]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in samples {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Re-times `samples` through the non-decreasing map `f`.
pub fn time_transform(samples: &[Sample], f: impl Fn(f64) -> f64) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = f64::NEG_INFINITY;
    for (index, s) in samples.iter().enumerate() {
        let t = f(s.time);
        if !(t >= prev) {
            return Err(Error::NonMonotoneTransform { index });
        }
        prev = t;
        out.push(Sample::new(t, s.value));
    }
    Ok(out)
}

/// Inserts linearly interpolated samples at `times`, keeping every original
/// sample (and so every extremum).
pub fn resample_at(samples: &[Sample], times: &[f64]) -> Vec<Sample> {
    let mut extra: Vec<f64> = times.to_vec();
    extra.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::with_capacity(samples.len() + extra.len());
    let mut pending = extra.into_iter().peekable();
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        while let Some(&t) = pending.peek() {
            if t >= b.time {
                break;
            }
            pending.next();
            if t > a.time {
                let frac = (t - a.time) / (b.time - a.time);
                out.push(Sample::new(t, a.value + frac * (b.value - a.value)));
            }
        }
    }
    if let Some(&last) = samples.last() {
        out.push(last);
    }
    out
}
