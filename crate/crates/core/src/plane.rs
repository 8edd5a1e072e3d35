//! The Preisach half-plane `{(alpha, beta) : u_min <= beta <= alpha <= u_max}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input range of the operator. Serializes as `[u_min, u_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct PlaneBounds {
    u_min: f64,
    u_max: f64,
}

impl PlaneBounds {
    pub fn new(u_min: f64, u_max: f64) -> Result<Self> {
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(Error::InvalidBounds { u_min, u_max });
        }
        Ok(Self { u_min, u_max })
    }

    /// Symmetric bounds `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn span(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.u_min && u <= self.u_max
    }

    /// Whether `(alpha, beta)` lies in the closed triangular domain.
    pub fn contains_point(&self, alpha: f64, beta: f64) -> bool {
        beta <= alpha && self.contains(alpha) && self.contains(beta)
    }

    /// Largest reset amplitude usable in both directions from rest.
    pub fn max_symmetric_amplitude(&self) -> f64 {
        self.u_max.min(-self.u_min).max(0.0)
    }

    pub(crate) fn check_amplitude(&self, amplitude: f64) -> Result<()> {
        if self.contains(amplitude) {
            Ok(())
        } else {
            Err(Error::AmplitudeOutOfRange {
                amplitude,
                u_min: self.u_min,
                u_max: self.u_max,
            })
        }
    }

    /// Area of the triangular domain.
    pub fn area(&self) -> f64 {
        0.5 * self.span() * self.span()
    }
}

impl TryFrom<[f64; 2]> for PlaneBounds {
    type Error = Error;

    fn try_from(value: [f64; 2]) -> Result<Self> {
        Self::new(value[0], value[1])
    }
}

impl From<PlaneBounds> for [f64; 2] {
    fn from(b: PlaneBounds) -> Self {
        [b.u_min, b.u_max]
    }
}

/// Axis-aligned rectangle `[alpha.0, alpha.1] x [beta.0, beta.1]` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl Rect {
    pub fn new(alpha: (f64, f64), beta: (f64, f64)) -> Self {
        Self { alpha, beta }
    }

    pub fn area(&self) -> f64 {
        (self.alpha.1 - self.alpha.0).max(0.0) * (self.beta.1 - self.beta.0).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.1 <= self.alpha.0 || self.beta.1 <= self.beta.0
    }

    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        alpha >= self.alpha.0 && alpha <= self.alpha.1 && beta >= self.beta.0 && beta <= self.beta.1
    }
}

/// Area of `[a1, a2] x [b1, b2]` restricted to the half-plane `beta <= alpha`.
pub(crate) fn area_below_diagonal(a1: f64, a2: f64, b1: f64, b2: f64) -> f64 {
    if a2 <= a1 || b2 <= b1 {
        return 0.0;
    }
    if b2 <= a1 {
        return (a2 - a1) * (b2 - b1);
    }
    let h = b2 - b1;
    // antiderivative of clamp(x - b1, 0, h)
    let g = |x: f64| {
        if x <= b1 {
            0.0
        } else if x <= b2 {
            0.5 * (x - b1) * (x - b1)
        } else {
            0.5 * h * h + h * (x - b2)
        }
    };
    g(a2) - g(a1)
}
