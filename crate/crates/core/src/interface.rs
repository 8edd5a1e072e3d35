//! Staircase interface lines: the complete memory state of a Preisach
//! operator.
//!
//! An interface starting at the diagonal point `(s, s)`, where `s` is the
//! current input, splits the domain into relays at `+1` (below and to the
//! left) and relays at `-1` (above and to the right). It is stored as a
//! step function: every relay with `alpha < s` is `+1`, and for `alpha >= s`
//! the relay is `+1` iff `beta < level(alpha)`, with levels non-increasing
//! and never above `s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{PlaneBounds, Rect};
use crate::signals::Polarity;
use crate::weight::WeightField;

/// One step of the staircase: relays with `alpha` in `[previous end, end)`
/// are `+1` below `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub end: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InterfaceJson", into = "InterfaceJson")]
pub struct InterfaceLine {
    bounds: PlaneBounds,
    start: f64,
    columns: Vec<Column>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InterfaceJson {
    bounds: PlaneBounds,
    vertices: Vec<[f64; 2]>,
}

impl TryFrom<InterfaceJson> for InterfaceLine {
    type Error = Error;

    fn try_from(raw: InterfaceJson) -> Result<Self> {
        let vertices: Vec<(f64, f64)> = raw.vertices.iter().map(|v| (v[0], v[1])).collect();
        Self::from_vertices(raw.bounds, &vertices)
    }
}

impl From<InterfaceLine> for InterfaceJson {
    fn from(line: InterfaceLine) -> Self {
        InterfaceJson {
            bounds: line.bounds,
            vertices: line.vertices().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl InterfaceLine {
    /// Every relay at `-1`: the state after the input reached `u_min`.
    pub fn negative_saturation(bounds: PlaneBounds) -> Self {
        Self {
            bounds,
            start: bounds.u_min(),
            columns: vec![Column {
                end: bounds.u_max(),
                level: bounds.u_min(),
            }],
        }
    }

    /// Every relay at `+1`: the state after the input reached `u_max`.
    pub fn positive_saturation(bounds: PlaneBounds) -> Self {
        Self {
            bounds,
            start: bounds.u_max(),
            columns: Vec::new(),
        }
    }

    /// Interface at rest after a full-range reset pulse. Positive control
    /// polarity uses a reset towards `u_min`, negative polarity towards `u_max`.
    pub fn after_reset(bounds: PlaneBounds, polarity: Polarity) -> Result<Self> {
        let line = match polarity {
            Polarity::Positive => Self::negative_saturation(bounds),
            Polarity::Negative => Self::positive_saturation(bounds),
        };
        line.drive(0.0)
    }

    /// Builds an interface from its corner list.
    ///
    /// The first vertex must lie on the diagonal; each following vertex moves
    /// either right (same beta) or down (same alpha). An open staircase is
    /// closed by continuing the alternation to the domain boundary: after a
    /// vertical move it runs right to `u_max`, after a horizontal move that
    /// stops short of `u_max` it drops to `u_min`.
    pub fn from_vertices(bounds: PlaneBounds, vertices: &[(f64, f64)]) -> Result<Self> {
        let Some(&(a0, b0)) = vertices.first() else {
            return Err(Error::InvalidInterface("no vertices".into()));
        };
        if a0 != b0 || !bounds.contains(a0) {
            return Err(Error::InvalidInterface(format!(
                "first vertex ({a0}, {b0}) must lie on the diagonal inside the bounds"
            )));
        }
        #[derive(PartialEq, Clone, Copy)]
        enum Move {
            None,
            Right,
            Down,
        }
        let mut columns: Vec<Column> = Vec::new();
        let (mut x, mut y) = (a0, b0);
        let mut last = Move::None;
        for (idx, &(a, b)) in vertices.iter().enumerate().skip(1) {
            if !bounds.contains_point(a, b) {
                return Err(Error::InvalidInterface(format!(
                    "vertex {idx} ({a}, {b}) lies outside the domain"
                )));
            }
            if a == x && b == y {
                continue;
            }
            if b == y && a > x {
                columns.push(Column { end: a, level: y });
                x = a;
                last = Move::Right;
            } else if a == x && b < y {
                y = b;
                last = Move::Down;
            } else {
                return Err(Error::InvalidInterface(format!(
                    "vertex {idx} ({a}, {b}) is not a right or down move from ({x}, {y})"
                )));
            }
        }
        if x < bounds.u_max() {
            if last == Move::Right {
                y = bounds.u_min();
            }
            columns.push(Column {
                end: bounds.u_max(),
                level: y,
            });
        }
        let mut line = Self {
            bounds,
            start: a0,
            columns,
        };
        line.normalize();
        Ok(line)
    }

    /// Builds an interface directly from its step function.
    pub fn from_columns(bounds: PlaneBounds, start: f64, columns: Vec<Column>) -> Result<Self> {
        if !bounds.contains(start) {
            return Err(Error::InvalidInterface(format!(
                "start {start} outside bounds"
            )));
        }
        let mut prev_end = start;
        let mut prev_level = start;
        for (i, c) in columns.iter().enumerate() {
            if !(c.end > prev_end && c.level <= prev_level && c.level >= bounds.u_min()) {
                return Err(Error::InvalidInterface(format!(
                    "column {i} (end {}, level {}) breaks the staircase",
                    c.end, c.level
                )));
            }
            prev_end = c.end;
            prev_level = c.level;
        }
        if start < bounds.u_max() && prev_end != bounds.u_max() {
            return Err(Error::InvalidInterface(format!(
                "columns end at {prev_end}, expected {}",
                bounds.u_max()
            )));
        }
        let mut line = Self {
            bounds,
            start,
            columns,
        };
        line.normalize();
        Ok(line)
    }

    fn normalize(&mut self) {
        let mut merged: Vec<Column> = Vec::with_capacity(self.columns.len());
        for c in self.columns.drain(..) {
            match merged.last_mut() {
                Some(last) if last.level == c.level => last.end = c.end,
                _ => merged.push(c),
            }
        }
        self.columns = merged;
    }

    pub fn bounds(&self) -> PlaneBounds {
        self.bounds
    }

    /// Input value the interface currently rests at.
    pub fn current_input(&self) -> f64 {
        self.start
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Iterates `(alpha_from, alpha_to, level)` over the staircase steps.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let mut prev = self.start;
        self.columns.iter().map(move |c| {
            let from = prev;
            prev = c.end;
            (from, c.end, c.level)
        })
    }

    /// Corner list from `(s, s)` to the boundary.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(self.start, self.start)];
        let (mut x, mut y) = (self.start, self.start);
        for c in &self.columns {
            if c.level < y {
                y = c.level;
                out.push((x, y));
            }
            x = c.end;
            out.push((x, y));
        }
        out
    }

    /// Upper edge of the `+1` region above `alpha` (upper-right convention at
    /// step boundaries). Returns `alpha` itself where the whole column is `+1`.
    pub fn level_at(&self, alpha: f64) -> f64 {
        if alpha < self.start {
            return alpha;
        }
        self.steps()
            .find(|&(from, to, _)| alpha >= from && alpha < to)
            .map(|(_, _, level)| level)
            .unwrap_or_else(|| self.columns.last().map_or(alpha, |c| c.level))
    }

    /// State of relay `(alpha, beta)` as encoded by the interface.
    pub fn relay_state(&self, alpha: f64, beta: f64) -> i8 {
        if alpha < self.start || beta < self.level_at(alpha) {
            1
        } else {
            -1
        }
    }

    /// Interface after the input moves monotonically from its current value to `u`.
    pub fn drive(&self, u: f64) -> Result<Self> {
        self.bounds.check_amplitude(u)?;
        let mut next = if u >= self.start {
            // every relay with alpha < u switches up
            let columns = self.columns.iter().filter(|c| c.end > u).copied().collect();
            Self {
                bounds: self.bounds,
                start: u,
                columns,
            }
        } else {
            // every relay with beta > u switches down
            let mut columns = Vec::with_capacity(self.columns.len() + 1);
            columns.push(Column {
                end: self.start,
                level: u,
            });
            columns.extend(self.columns.iter().map(|c| Column {
                end: c.end,
                level: c.level.min(u),
            }));
            Self {
                bounds: self.bounds,
                start: u,
                columns,
            }
        };
        if next.start >= self.bounds.u_max() {
            next.columns.clear();
        }
        next.normalize();
        Ok(next)
    }

    /// Interface after a sequence of monotone moves through `samples`.
    pub fn drive_through(&self, samples: &[f64]) -> Result<Self> {
        samples
            .iter()
            .try_fold(self.clone(), |line, &u| line.drive(u))
    }

    /// Wiping-out update: the interface after one pulse of amplitude `amplitude`
    /// applied from rest.
    pub fn wipe_update(&self, amplitude: f64) -> Result<Self> {
        self.require_rest()?;
        self.drive(amplitude)?.drive(0.0)
    }

    pub(crate) fn require_rest(&self) -> Result<()> {
        if self.start != 0.0 {
            return Err(Error::NotAtRest { input: self.start });
        }
        Ok(())
    }

    /// Weight mass of the `+1` region.
    pub fn positive_mass(&self, weight: &WeightField) -> f64 {
        let lo = self.bounds.u_min();
        let mut mass = weight.rect_mass(lo, self.start, lo, self.start);
        for (from, to, level) in self.steps() {
            mass += weight.rect_mass(from, to, lo, level);
        }
        mass
    }

    /// Rectangles where `self` and `other` disagree, tagged with the sign of
    /// the relay change going from `self` to `other`.
    pub fn switched_regions(&self, other: &InterfaceLine) -> Vec<(Rect, i8)> {
        let lo = self.bounds.u_min();
        let hi = self.bounds.u_max();
        let mut cuts: Vec<f64> = vec![lo, hi, self.start, other.start];
        cuts.extend(self.columns.iter().map(|c| c.end));
        cuts.extend(other.columns.iter().map(|c| c.end));
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (a1, a2) = (w[0], w[1]);
            if a2 <= a1 {
                continue;
            }
            let mid = 0.5 * (a1 + a2);
            let h0 = self.level_at(mid);
            let h1 = other.level_at(mid);
            if h0 == h1 {
                continue;
            }
            // a full column (level == alpha) is bounded by the diagonal, which
            // caps the region at the column's right edge
            let cap = |h: f64, full: bool| if full { a2 } else { h };
            let top0 = cap(h0, mid < self.start);
            let top1 = cap(h1, mid < other.start);
            let (b1, b2, sign) = if top1 > top0 {
                (top0, top1, 1)
            } else {
                (top1, top0, -1)
            };
            out.push((Rect::new((a1, a2), (b1, b2)), sign));
        }
        out
    }
}

/// Operator output encoded by an interface: mass of the `+1` region minus
/// mass of the `-1` region.
pub fn output_from_interface(line: &InterfaceLine, weight: &WeightField) -> f64 {
    2.0 * line.positive_mass(weight) - weight.total_mass()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> PlaneBounds {
        PlaneBounds::symmetric(400.0).unwrap()
    }

    fn uniform() -> WeightField {
        WeightField::uniform_with_mass(bounds(), 1.0).unwrap()
    }

    #[test]
    fn saturated_outputs() {
        let w = uniform();
        let neg = InterfaceLine::negative_saturation(bounds());
        let pos = InterfaceLine::positive_saturation(bounds());
        assert!((output_from_interface(&neg, &w) + 1.0).abs() < 1e-15);
        assert!((output_from_interface(&pos, &w) - 1.0).abs() < 1e-15);
        assert_eq!(pos.vertices(), vec![(400.0, 400.0)]);
    }

    #[test]
    fn post_reset_interface_matches_closed_form() {
        let w = uniform();
        let reset = InterfaceLine::after_reset(bounds(), Polarity::Positive).unwrap();
        assert_eq!(
            reset.vertices(),
            vec![(0.0, 0.0), (0.0, -400.0), (400.0, -400.0)]
        );
        assert!((output_from_interface(&reset, &w) + 0.5).abs() < 1e-15);
        let reset = InterfaceLine::after_reset(bounds(), Polarity::Negative).unwrap();
        assert_eq!(reset.vertices(), vec![(0.0, 0.0), (400.0, 0.0)]);
        assert!((output_from_interface(&reset, &w) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wipe_update_zero_is_identity() {
        let l0 = InterfaceLine::from_vertices(
            bounds(),
            &[
                (0.0, 0.0),
                (100.0, 0.0),
                (100.0, -150.0),
                (250.0, -150.0),
                (250.0, -300.0),
            ],
        )
        .unwrap();
        assert_eq!(l0.wipe_update(0.0).unwrap(), l0);
    }

    #[test]
    fn wipe_update_maximal_pulse_erases_memory() {
        let l0 = InterfaceLine::from_vertices(
            bounds(),
            &[
                (0.0, 0.0),
                (100.0, 0.0),
                (100.0, -150.0),
                (250.0, -150.0),
                (250.0, -300.0),
            ],
        )
        .unwrap();
        let l1 = l0.wipe_update(400.0).unwrap();
        assert_eq!(l1.vertices(), vec![(0.0, 0.0), (400.0, 0.0)]);
    }

    #[test]
    fn wipe_update_dominated_corner() {
        let l0 = InterfaceLine::from_vertices(
            bounds(),
            &[
                (0.0, 0.0),
                (100.0, 0.0),
                (100.0, -150.0),
                (250.0, -150.0),
                (250.0, -300.0),
            ],
        )
        .unwrap();
        let l1 = l0.wipe_update(180.0).unwrap();
        assert_eq!(
            l1.vertices(),
            vec![
                (0.0, 0.0),
                (180.0, 0.0),
                (180.0, -150.0),
                (250.0, -150.0),
                (250.0, -300.0),
                (400.0, -300.0)
            ]
        );
        // negative pulse below the second beta corner wipes the first step
        let l2 = l0.wipe_update(-200.0).unwrap();
        assert_eq!(
            l2.vertices(),
            vec![
                (0.0, 0.0),
                (0.0, -200.0),
                (250.0, -200.0),
                (250.0, -300.0),
                (400.0, -300.0)
            ]
        );
    }

    #[test]
    fn wipe_update_requires_rest_and_range() {
        let line = InterfaceLine::negative_saturation(bounds());
        assert!(matches!(
            line.wipe_update(10.0),
            Err(Error::NotAtRest { .. })
        ));
        let rest = line.drive(0.0).unwrap();
        assert!(rest.wipe_update(401.0).is_err());
    }

    #[test]
    fn vertices_reject_non_staircase() {
        let b = bounds();
        assert!(InterfaceLine::from_vertices(b, &[(0.0, 1.0)]).is_err());
        assert!(InterfaceLine::from_vertices(b, &[(0.0, 0.0), (10.0, -10.0)]).is_err());
        assert!(InterfaceLine::from_vertices(b, &[(0.0, 0.0), (0.0, 10.0)]).is_err());
        assert!(InterfaceLine::from_vertices(b, &[(0.0, 0.0), (-10.0, 0.0)]).is_err());
        // horizontal end short of the boundary drops to u_min
        let l = InterfaceLine::from_vertices(b, &[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        assert_eq!(
            l.vertices(),
            vec![(0.0, 0.0), (100.0, 0.0), (100.0, -400.0), (400.0, -400.0)]
        );
    }

    #[test]
    fn json_round_trip() {
        let l = InterfaceLine::from_vertices(
            bounds(),
            &[(0.0, 0.0), (100.0, 0.0), (100.0, -150.0), (400.0, -150.0)],
        )
        .unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(
            s,
            r#"{"bounds":[-400.0,400.0],"vertices":[[0.0,0.0],[100.0,0.0],[100.0,-150.0],[400.0,-150.0]]}"#
        );
        let back: InterfaceLine = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn switched_regions_of_positive_pulse() {
        let reset = InterfaceLine::after_reset(bounds(), Polarity::Positive).unwrap();
        let after = reset.wipe_update(240.0).unwrap();
        let regions = reset.switched_regions(&after);
        assert_eq!(regions, vec![(Rect::new((0.0, 240.0), (-400.0, 0.0)), 1)]);
    }

    #[test]
    fn drive_tracks_current_input() {
        let l = InterfaceLine::negative_saturation(bounds())
            .drive_through(&[300.0, -100.0, 50.0])
            .unwrap();
        assert_eq!(l.current_input(), 50.0);
        assert_eq!(l.relay_state(40.0, 30.0), 1);
        assert_eq!(l.relay_state(200.0, -50.0), -1);
        assert_eq!(l.relay_state(200.0, -150.0), 1);
        assert_eq!(l.relay_state(350.0, -350.0), -1);
    }
}
