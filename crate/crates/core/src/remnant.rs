//! Remnant curves: the output left behind by one pulse of amplitude `A`
//! applied to an operator at rest.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscretePreisach;
use crate::interface::{output_from_interface, InterfaceLine};
use crate::plane::Rect;
use crate::signals::{Polarity, PulseSignal};
use crate::weight::WeightField;

/// Region of relays flipped by one pulse, as a union of α-contiguous
/// rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaRegion {
    pub rects: Vec<Rect>,
    /// `+1` when relays switch up (positive pulse), `-1` when they switch down.
    pub sign: i8,
}

impl OmegaRegion {
    pub fn is_empty(&self) -> bool {
        self.rects.iter().all(Rect::is_empty)
    }

    pub fn area(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }

    pub fn mass(&self, weight: &WeightField) -> f64 {
        self.rects
            .iter()
            .map(|r| weight.rect_mass(r.alpha.0, r.alpha.1, r.beta.0, r.beta.1))
            .sum()
    }

    /// Boundary of the region, counter-clockwise, without repeated or
    /// collinear vertices. Empty for an empty region.
    pub fn polygon(&self) -> Vec<(f64, f64)> {
        let mut rects: Vec<&Rect> = self.rects.iter().filter(|r| !r.is_empty()).collect();
        if rects.is_empty() {
            return Vec::new();
        }
        rects.sort_by(|a, b| a.alpha.0.total_cmp(&b.alpha.0));
        let mut pts = Vec::with_capacity(4 * rects.len());
        for r in &rects {
            pts.push((r.alpha.0, r.beta.0));
            pts.push((r.alpha.1, r.beta.0));
        }
        for r in rects.iter().rev() {
            pts.push((r.alpha.1, r.beta.1));
            pts.push((r.alpha.0, r.beta.1));
        }
        simplify_ring(pts)
    }
}

fn simplify_ring(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.dedup();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let idx = (0..n).find(|&i| {
            let (a, b, c) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
            (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) == 0.0
        });
        match idx {
            Some(i) => {
                pts.remove(i);
            }
            None => return pts,
        }
    }
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    0.5 * twice.abs()
}

/// Region enclosed between `line` and its wiping-out update by a pulse of
/// amplitude `amplitude`.
pub fn omega_region(line: &InterfaceLine, amplitude: f64) -> Result<OmegaRegion> {
    let next = line.wipe_update(amplitude)?;
    let sign = if amplitude < 0.0 { -1 } else { 1 };
    let rects = line
        .switched_regions(&next)
        .into_iter()
        .map(|(r, _)| r)
        .collect();
    Ok(OmegaRegion { rects, sign })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Analytic,
    Grid { levels: usize },
}

/// One row of a sampled remnant curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub rho: f64,
    #[serde(rename = "drho_dA")]
    pub slope: f64,
}

#[derive(Debug, Clone)]
pub struct RemnantCurve {
    base: InterfaceLine,
    weight: WeightField,
    backend: Backend,
    initial: f64,
    template: Option<DiscretePreisach>,
}

impl RemnantCurve {
    /// `base` must be at rest (current input zero).
    pub fn new(base: InterfaceLine, weight: WeightField, backend: Backend) -> Result<Self> {
        base.require_rest()?;
        if weight.bounds() != base.bounds() {
            return Err(Error::InvalidWeight(
                "weight field bounds differ from the interface bounds".into(),
            ));
        }
        let template = match backend {
            Backend::Analytic => None,
            Backend::Grid { levels } => {
                Some(DiscretePreisach::from_interface(&base, &weight, levels)?)
            }
        };
        let initial = match &template {
            Some(op) => op.output(),
            None => output_from_interface(&base, &weight),
        };
        Ok(Self {
            base,
            weight,
            backend,
            initial,
            template,
        })
    }

    pub fn base(&self) -> &InterfaceLine {
        &self.base
    }

    pub fn weight(&self) -> &WeightField {
        &self.weight
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Remnant at zero amplitude: the output of the base interface.
    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// `2 (u_max - u_min) sup w`.
    pub fn lipschitz_bound(&self) -> f64 {
        2.0 * self.base.bounds().span() * self.weight.sup()
    }

    pub fn value(&self, amplitude: f64) -> Result<f64> {
        match &self.template {
            Some(template) => {
                self.base.bounds().check_amplitude(amplitude)?;
                let mut op = template.clone();
                op.drive(&[amplitude, 0.0])?;
                Ok(op.output())
            }
            None => {
                let omega = omega_region(&self.base, amplitude)?;
                Ok(self.initial + 2.0 * f64::from(omega.sign) * omega.mass(&self.weight))
            }
        }
    }

    /// Remnant after driving the base state through `samples` points of
    /// `pulse` (plus its peak).
    pub fn value_with_pulse(&self, pulse: &PulseSignal, samples: usize) -> Result<f64> {
        let input: Vec<f64> = pulse.sample(samples).iter().map(|s| s.value).collect();
        match &self.template {
            Some(template) => {
                let mut op = template.clone();
                op.drive(&input)?;
                Ok(op.output())
            }
            None => {
                let line = self.base.drive_through(&input)?;
                Ok(output_from_interface(&line, &self.weight))
            }
        }
    }

    /// Upper-right derivative of the analytic curve.
    pub fn derivative(&self, amplitude: f64) -> Result<f64> {
        self.one_sided_derivative(amplitude, Polarity::Positive)
    }

    /// Derivative of the analytic curve taken from the side `direction`
    /// points to: upper-right for positive, lower-left for negative.
    pub fn one_sided_derivative(&self, amplitude: f64, direction: Polarity) -> Result<f64> {
        self.base.bounds().check_amplitude(amplitude)?;
        let up = direction == Polarity::Positive;
        if amplitude > 0.0 || (amplitude == 0.0 && up) {
            let level = if up {
                self.base.level_at(amplitude)
            } else {
                self.base
                    .steps()
                    .find(|&(from, to, _)| amplitude > from && amplitude <= to)
                    .map_or(amplitude, |(_, _, level)| level)
            };
            return Ok(2.0 * self.weight.beta_line(amplitude, level, 0.0));
        }
        // columns whose level lies above the amplitude get cut
        let reach = self
            .base
            .steps()
            .take_while(|&(_, _, level)| level > amplitude || (!up && level == amplitude))
            .last()
            .map_or(0.0, |(_, to, _)| to);
        Ok(2.0 * self.weight.alpha_line(amplitude, 0.0, reach))
    }

    /// Rows `(A, rho, rho')` for an ascending amplitude grid.
    pub fn sample_curve(&self, amplitudes: &[f64]) -> Result<Vec<CurvePoint>> {
        if let Some(i) = amplitudes.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::UnsortedGrid { index: i + 1 });
        }
        amplitudes
            .iter()
            .map(|&a| {
                Ok(CurvePoint {
                    amplitude: a,
                    rho: self.value(a)?,
                    slope: self.derivative(a)?,
                })
            })
            .collect()
    }
}

/// Writes curve rows as CSV with header `A,rho,drho_dA`.
pub fn write_curve_csv<W: Write>(writer: W, rows: &[CurvePoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}
