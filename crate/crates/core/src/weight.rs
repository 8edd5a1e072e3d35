//! Nonnegative weight densities over the Preisach half-plane.
//!
//! Every field answers three kinds of queries: point density, mass of an
//! axis-aligned rectangle clipped to the domain, and line integrals along a
//! fixed `alpha` or fixed `beta`. Uniform fields are closed form, gaussian
//! fields use separable error-function products plus one-dimensional
//! adaptive quadrature on diagonal-crossing pieces, gridded fields sum cells.

use std::f64::consts::{PI, SQRT_2};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::plane::{area_below_diagonal, PlaneBounds};

/// Header line of the gridded weight CSV format.
pub const GRID_CSV_HEADER: [&str; 2] = ["alpha_spacing", "beta_spacing"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Constant density `density` per unit area.
    Uniform { density: f64 },
    /// Isotropic gaussian bump; `mass` is its integral over the whole plane.
    Gaussian {
        center: [f64; 2],
        sigma: f64,
        mass: f64,
    },
    /// Piecewise-constant density on a cell grid covering the bounding
    /// square. Row `i` holds alpha cell `i`, column `j` beta cell `j`.
    Grid {
        alpha_spacing: f64,
        beta_spacing: f64,
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawWeightField {
    bounds: PlaneBounds,
    kind: WeightKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeightField", into = "RawWeightField")]
pub struct WeightField {
    bounds: PlaneBounds,
    kind: WeightKind,
    strictly_positive: bool,
}

impl TryFrom<RawWeightField> for WeightField {
    type Error = Error;

    fn try_from(raw: RawWeightField) -> Result<Self> {
        Self::new(raw.bounds, raw.kind)
    }
}

impl From<WeightField> for RawWeightField {
    fn from(w: WeightField) -> Self {
        RawWeightField {
            bounds: w.bounds,
            kind: w.kind,
        }
    }
}

impl WeightField {
    pub fn new(bounds: PlaneBounds, kind: WeightKind) -> Result<Self> {
        let strictly_positive = match &kind {
            WeightKind::Uniform { density } => {
                if !(density.is_finite() && *density >= 0.0) {
                    return Err(Error::InvalidWeight(format!(
                        "uniform density must be finite and nonnegative, got {density}"
                    )));
                }
                *density > 0.0
            }
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            } => {
                if !(center.iter().all(|c| c.is_finite())
                    && sigma.is_finite()
                    && *sigma > 0.0
                    && mass.is_finite()
                    && *mass >= 0.0)
                {
                    return Err(Error::InvalidWeight(format!(
                        "gaussian needs finite center, sigma > 0 and mass >= 0 (sigma = {sigma}, mass = {mass})"
                    )));
                }
                *mass > 0.0
            }
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => check_grid(&bounds, *alpha_spacing, *beta_spacing, values)?,
        };
        Ok(Self {
            bounds,
            kind,
            strictly_positive,
        })
    }

    pub fn uniform(bounds: PlaneBounds, density: f64) -> Result<Self> {
        Self::new(bounds, WeightKind::Uniform { density })
    }

    /// Uniform field whose mass over the triangular domain equals `mass`.
    pub fn uniform_with_mass(bounds: PlaneBounds, mass: f64) -> Result<Self> {
        Self::uniform(bounds, mass / bounds.area())
    }

    pub fn gaussian(bounds: PlaneBounds, center: [f64; 2], sigma: f64, mass: f64) -> Result<Self> {
        Self::new(
            bounds,
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            },
        )
    }

    pub fn grid(
        bounds: PlaneBounds,
        alpha_spacing: f64,
        beta_spacing: f64,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::new(
            bounds,
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            },
        )
    }

    /// Reads a gridded field: header `alpha_spacing,beta_spacing`, one row
    /// with the two spacings, then the density rows (row-major, alpha-major).
    pub fn from_grid_csv<R: Read>(bounds: PlaneBounds, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() != 2
            || header.get(0) != Some(GRID_CSV_HEADER[0])
            || header.get(1) != Some(GRID_CSV_HEADER[1])
        {
            return Err(Error::InvalidWeight(format!(
                "weight grid CSV must start with header \"alpha_spacing,beta_spacing\", found {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let mut records = rdr.records();
        let spacing = records
            .next()
            .ok_or_else(|| Error::InvalidWeight("weight grid CSV has no spacing row".into()))??;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidWeight(format!("bad number {s:?}: {e}")))
        };
        if spacing.len() != 2 {
            return Err(Error::InvalidWeight(
                "spacing row must hold two values".into(),
            ));
        }
        let alpha_spacing = parse(&spacing[0])?;
        let beta_spacing = parse(&spacing[1])?;
        let mut values = Vec::new();
        for record in records {
            let record = record?;
            values.push(record.iter().map(parse).collect::<Result<Vec<_>>>()?);
        }
        Self::grid(bounds, alpha_spacing, beta_spacing, values)
    }

    /// Writes a gridded field in the format read by [`Self::from_grid_csv`].
    pub fn write_grid_csv<W: Write>(&self, writer: W) -> Result<()> {
        let WeightKind::Grid {
            alpha_spacing,
            beta_spacing,
            values,
        } = &self.kind
        else {
            return Err(Error::InvalidWeight(
                "only gridded fields export to CSV".into(),
            ));
        };
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        wtr.write_record(GRID_CSV_HEADER)?;
        wtr.write_record([alpha_spacing.to_string(), beta_spacing.to_string()])?;
        for row in values {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn bounds(&self) -> PlaneBounds {
        self.bounds
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Whether the density is strictly positive on the whole domain.
    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// Density at `(alpha, beta)`; zero outside the domain.
    pub fn density(&self, alpha: f64, beta: f64) -> f64 {
        if !self.bounds.contains_point(alpha, beta) {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Uniform { density } => *density,
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            } => {
                let da = alpha - center[0];
                let db = beta - center[1];
                mass / (2.0 * PI * sigma * sigma)
                    * (-(da * da + db * db) / (2.0 * sigma * sigma)).exp()
            }
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => {
                let i = cell_index(alpha - self.bounds.u_min(), *alpha_spacing, values.len());
                let j = cell_index(beta - self.bounds.u_min(), *beta_spacing, values[i].len());
                values[i][j]
            }
        }
    }

    /// Supremum of the density over the domain.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            WeightKind::Uniform { density } => *density,
            WeightKind::Gaussian { sigma, mass, .. } => mass / (2.0 * PI * sigma * sigma),
            WeightKind::Grid { values, .. } => values.iter().flatten().copied().fold(0.0, f64::max),
        }
    }

    /// Mass of the whole triangular domain.
    pub fn total_mass(&self) -> f64 {
        let (lo, hi) = (self.bounds.u_min(), self.bounds.u_max());
        self.rect_mass(lo, hi, lo, hi)
    }

    /// Mass of `[a1, a2] x [b1, b2]` intersected with the domain.
    pub fn rect_mass(&self, a1: f64, a2: f64, b1: f64, b2: f64) -> f64 {
        let (lo, hi) = (self.bounds.u_min(), self.bounds.u_max());
        let (a1, a2) = (a1.max(lo), a2.min(hi));
        let (b1, b2) = (b1.max(lo), b2.min(hi));
        if a2 <= a1 || b2 <= b1 {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Uniform { density } => density * area_below_diagonal(a1, a2, b1, b2),
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            } => gaussian_rect_mass(*center, *sigma, *mass, a1, a2, b1, b2),
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => {
                let i0 = cell_index(a1 - lo, *alpha_spacing, values.len());
                let i1 = cell_index_upper(a2 - lo, *alpha_spacing, values.len());
                let mut total = 0.0;
                for (i, row) in values.iter().enumerate().take(i1 + 1).skip(i0) {
                    let ca1 = (lo + i as f64 * alpha_spacing).max(a1);
                    let ca2 = (lo + (i + 1) as f64 * alpha_spacing).min(a2);
                    if ca2 <= ca1 {
                        continue;
                    }
                    let j0 = cell_index(b1 - lo, *beta_spacing, row.len());
                    let j1 = cell_index_upper(b2.min(ca2) - lo, *beta_spacing, row.len());
                    for (j, v) in row.iter().enumerate().take(j1 + 1).skip(j0) {
                        let cb1 = (lo + j as f64 * beta_spacing).max(b1);
                        let cb2 = (lo + (j + 1) as f64 * beta_spacing).min(b2);
                        total += v * area_below_diagonal(ca1, ca2, cb1, cb2);
                    }
                }
                total
            }
        }
    }

    /// `integral_{b1}^{b2} w(alpha, beta) d beta`, restricted to the domain.
    pub fn beta_line(&self, alpha: f64, b1: f64, b2: f64) -> f64 {
        if !self.bounds.contains(alpha) {
            return 0.0;
        }
        let b1 = b1.max(self.bounds.u_min());
        let b2 = b2.min(alpha).min(self.bounds.u_max());
        if b2 <= b1 {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Uniform { density } => density * (b2 - b1),
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            } => {
                mass * gauss_pdf(alpha - center[0], *sigma)
                    * interval_prob(b1 - center[1], b2 - center[1], *sigma)
            }
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => {
                let lo = self.bounds.u_min();
                let row = &values[cell_index(alpha - lo, *alpha_spacing, values.len())];
                line_sum(row, lo, *beta_spacing, b1, b2)
            }
        }
    }

    /// `integral_{a1}^{a2} w(alpha, beta) d alpha`, restricted to the domain.
    pub fn alpha_line(&self, beta: f64, a1: f64, a2: f64) -> f64 {
        if !self.bounds.contains(beta) {
            return 0.0;
        }
        let a1 = a1.max(beta).max(self.bounds.u_min());
        let a2 = a2.min(self.bounds.u_max());
        if a2 <= a1 {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Uniform { density } => density * (a2 - a1),
            WeightKind::Gaussian {
                center,
                sigma,
                mass,
            } => {
                mass * gauss_pdf(beta - center[1], *sigma)
                    * interval_prob(a1 - center[0], a2 - center[0], *sigma)
            }
            WeightKind::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => {
                let lo = self.bounds.u_min();
                let column: Vec<f64> = values
                    .iter()
                    .map(|row| row[cell_index(beta - lo, *beta_spacing, row.len())])
                    .collect();
                line_sum(&column, lo, *alpha_spacing, a1, a2)
            }
        }
    }
}

fn check_grid(bounds: &PlaneBounds, da: f64, db: f64, values: &[Vec<f64>]) -> Result<bool> {
    if !(da.is_finite() && da > 0.0 && db.is_finite() && db > 0.0) {
        return Err(Error::InvalidWeight(format!(
            "grid spacings must be positive, got ({da}, {db})"
        )));
    }
    let na = bounds.span() / da;
    let nb = bounds.span() / db;
    let rows = na.round();
    let cols = nb.round();
    if (na - rows).abs() > 1e-9 * na || (nb - cols).abs() > 1e-9 * nb {
        return Err(Error::InvalidWeight(format!(
            "grid spacings ({da}, {db}) do not divide the input span {}",
            bounds.span()
        )));
    }
    if values.len() != rows as usize {
        return Err(Error::InvalidWeight(format!(
            "expected {rows} alpha rows, found {}",
            values.len()
        )));
    }
    let mut strictly_positive = true;
    for (i, row) in values.iter().enumerate() {
        if row.len() != cols as usize {
            return Err(Error::InvalidWeight(format!(
                "row {i} has {} values, expected {cols}",
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidWeight(format!(
                    "cell ({i}, {j}) has invalid density {v}"
                )));
            }
            // cells whose lower-left beta edge sits below the right alpha edge touch the domain
            let touches_domain = (j as f64) * db < ((i + 1) as f64) * da;
            if touches_domain && *v <= 0.0 {
                strictly_positive = false;
            }
        }
    }
    Ok(strictly_positive)
}

fn cell_index(offset: f64, spacing: f64, n: usize) -> usize {
    ((offset / spacing).floor().max(0.0) as usize).min(n - 1)
}

fn cell_index_upper(offset: f64, spacing: f64, n: usize) -> usize {
    let k = (offset / spacing).ceil().max(1.0) as usize;
    (k - 1).min(n - 1)
}

fn line_sum(cells: &[f64], lo: f64, spacing: f64, x1: f64, x2: f64) -> f64 {
    let i0 = cell_index(x1 - lo, spacing, cells.len());
    let i1 = cell_index_upper(x2 - lo, spacing, cells.len());
    (i0..=i1)
        .map(|i| {
            let c1 = (lo + i as f64 * spacing).max(x1);
            let c2 = (lo + (i + 1) as f64 * spacing).min(x2);
            cells[i] * (c2 - c1).max(0.0)
        })
        .sum()
}

fn gauss_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `P(lo <= X <= hi)` for `X ~ N(0, sigma^2)`, evaluated on the tail side
/// that avoids cancellation.
fn interval_prob(lo: f64, hi: f64, sigma: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let z1 = lo / (sigma * SQRT_2);
    let z2 = hi / (sigma * SQRT_2);
    let p = if z1 >= 0.0 {
        0.5 * (erfc(z1) - erfc(z2))
    } else if z2 <= 0.0 {
        0.5 * (erfc(-z2) - erfc(-z1))
    } else {
        0.5 * (erf(z2) - erf(z1))
    };
    p.max(0.0)
}

fn gaussian_rect_mass(
    center: [f64; 2],
    sigma: f64,
    mass: f64,
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
) -> f64 {
    let [ca, cb] = center;
    let mut total = 0.0;
    // alpha in [b2, a2]: the whole beta range lies below the diagonal
    let full_lo = a1.max(b2);
    if a2 > full_lo {
        total += mass
            * interval_prob(full_lo - ca, a2 - ca, sigma)
            * interval_prob(b1 - cb, b2 - cb, sigma);
    }
    // alpha in [b1, b2]: beta runs from b1 up to the diagonal
    let (d1, d2) = (a1.max(b1), a2.min(b2));
    if d2 > d1 {
        let f =
            |alpha: f64| gauss_pdf(alpha - ca, sigma) * interval_prob(b1 - cb, alpha - cb, sigma);
        let out = quadrature::double_exponential::integrate(f, d1, d2, 1e-13);
        total += mass * out.integral;
    }
    total
}
