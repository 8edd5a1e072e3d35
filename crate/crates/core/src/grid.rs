//! Discretized Preisach operator on a triangular grid of relays.
//!
//! Relays sit at cell centers `x_i = u_min + (i + 1/2) * span / n` for
//! `i < n`, one relay per pair `(alpha_i, beta_j)` with `j <= i`, so a grid
//! with `n` levels holds `n (n + 1) / 2` relays. Each relay carries the
//! weight mass of its cell clipped to the domain (diagonal relays own half a
//! cell). Relays are stored column by column: column `i` (fixed `alpha_i`)
//! holds `beta_0 ..= beta_i`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interface::{Column, InterfaceLine};
use crate::plane::PlaneBounds;
use crate::weight::WeightField;

/// Relay hysteron: `+1` above `alpha`, `-1` below `beta`, unchanged in between.
pub fn relay_update(state: i8, u: f64, alpha: f64, beta: f64) -> Result<i8> {
    if alpha < beta {
        return Err(Error::MalformedRelay { alpha, beta });
    }
    Ok(if u > alpha {
        1
    } else if u < beta {
        -1
    } else {
        state
    })
}

#[derive(Debug, Clone)]
pub struct DiscretePreisach {
    bounds: PlaneBounds,
    positions: Arc<[f64]>,
    weights: Arc<[f64]>,
    states: Vec<i8>,
    current_input: f64,
}

fn column_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl DiscretePreisach {
    /// Negatively saturated operator (every relay at `-1`, input at `u_min`).
    pub fn new(bounds: PlaneBounds, levels: usize, weight: &WeightField) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidConfig(
                "a relay grid needs at least one level".into(),
            ));
        }
        if weight.bounds() != bounds {
            return Err(Error::InvalidWeight(
                "weight field bounds differ from the operator bounds".into(),
            ));
        }
        let positions: Arc<[f64]> = (0..levels)
            .map(|i| cell_center(&bounds, levels, i))
            .collect();
        let mut weights = Vec::with_capacity(column_start(levels));
        for i in 0..levels {
            let (a1, a2) = (
                cell_edge(&bounds, levels, i),
                cell_edge(&bounds, levels, i + 1),
            );
            for j in 0..=i {
                let (b1, b2) = (
                    cell_edge(&bounds, levels, j),
                    cell_edge(&bounds, levels, j + 1),
                );
                weights.push(weight.rect_mass(a1, a2, b1, b2));
            }
        }
        Ok(Self {
            bounds,
            positions,
            weights: weights.into(),
            states: vec![-1; column_start(levels)],
            current_input: bounds.u_min(),
        })
    }

    /// Operator whose relays start in the states encoded by `line`.
    pub fn from_interface(
        line: &InterfaceLine,
        weight: &WeightField,
        levels: usize,
    ) -> Result<Self> {
        let mut op = Self::new(line.bounds(), levels, weight)?;
        op.load_interface(line);
        Ok(op)
    }

    /// Overwrites every relay state with the ones encoded by `line`.
    pub fn load_interface(&mut self, line: &InterfaceLine) {
        let start = line.current_input();
        for i in 0..self.levels() {
            let alpha = self.positions[i];
            let col = &mut self.states[column_start(i)..column_start(i + 1)];
            if alpha < start {
                col.fill(1);
                continue;
            }
            let cutoff = line.level_at(alpha);
            for (j, s) in col.iter_mut().enumerate() {
                *s = if self.positions[j] < cutoff { 1 } else { -1 };
            }
        }
        self.current_input = start;
    }

    pub fn bounds(&self) -> PlaneBounds {
        self.bounds
    }

    pub fn levels(&self) -> usize {
        self.positions.len()
    }

    pub fn relay_count(&self) -> usize {
        self.states.len()
    }

    /// Threshold value of grid level `i`.
    pub fn position(&self, i: usize) -> f64 {
        self.positions[i]
    }

    /// Distance between adjacent grid levels.
    pub fn level_spacing(&self) -> f64 {
        self.bounds.span() / self.levels() as f64
    }

    pub fn current_input(&self) -> f64 {
        self.current_input
    }

    pub fn state(&self, i: usize, j: usize) -> i8 {
        assert!(j <= i, "relay ({i}, {j}) lies outside the half-plane");
        self.states[column_start(i) + j]
    }

    pub fn set_state(&mut self, i: usize, j: usize, state: i8) {
        assert!(j <= i, "relay ({i}, {j}) lies outside the half-plane");
        self.states[column_start(i) + j] = if state >= 0 { 1 } else { -1 };
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[column_start(i) + j]
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest weight mass held by a single alpha column.
    pub fn max_column_mass(&self) -> f64 {
        (0..self.levels())
            .map(|i| {
                self.weights[column_start(i)..column_start(i + 1)]
                    .iter()
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Weighted sum of relay states.
    pub fn output(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(w, &s)| if s > 0 { *w } else { -*w })
            .sum()
    }

    fn check_samples(&self, samples: &[f64]) -> Result<()> {
        for (index, &value) in samples.iter().enumerate() {
            if !self.bounds.contains(value) {
                return Err(Error::InputOutOfRange {
                    index,
                    value,
                    u_min: self.bounds.u_min(),
                    u_max: self.bounds.u_max(),
                });
            }
        }
        Ok(())
    }

    /// Drives the input through `samples` and returns the output after each one.
    ///
    /// Every sample is validated before any relay changes.
    pub fn apply_input(&mut self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("input sample list is empty".into()));
        }
        self.check_samples(samples)?;
        Ok(samples
            .iter()
            .map(|&u| {
                self.step(u);
                self.output()
            })
            .collect())
    }

    /// Like [`Self::apply_input`] without computing intermediate outputs.
    pub fn drive(&mut self, samples: &[f64]) -> Result<()> {
        self.check_samples(samples)?;
        for &u in samples {
            self.step(u);
        }
        Ok(())
    }

    fn step(&mut self, u: f64) {
        let n = self.levels();
        // relays with alpha < u switch up, relays with beta > u switch down
        let below = self.positions.partition_point(|&x| x < u);
        let at_or_below = self.positions.partition_point(|&x| x <= u);
        for i in 0..below {
            self.states[column_start(i)..column_start(i + 1)].fill(1);
        }
        for i in below..n {
            if at_or_below <= i {
                self.states[column_start(i) + at_or_below..column_start(i + 1)].fill(-1);
            }
        }
        self.current_input = u;
    }

    /// Extracts the staircase separating `+1` from `-1` relays, quantized to
    /// cell edges.
    pub fn interface(&self) -> Result<InterfaceLine> {
        let n = self.levels();
        let mut counts = Vec::with_capacity(n);
        for i in 0..n {
            let col = &self.states[column_start(i)..column_start(i + 1)];
            let ones = col.iter().take_while(|&&s| s > 0).count();
            if col[ones..].iter().any(|&s| s > 0) {
                return Err(Error::NotStaircase { column: i });
            }
            counts.push(ones);
        }
        let full = counts
            .iter()
            .enumerate()
            .take_while(|&(i, &c)| c == i + 1)
            .count();
        let mut prev = full;
        for (i, &c) in counts.iter().enumerate().skip(full) {
            if c > prev || c == i + 1 {
                return Err(Error::NotStaircase { column: i });
            }
            prev = c;
        }
        let start = cell_edge(&self.bounds, n, full);
        let columns = (full..n)
            .map(|i| Column {
                end: cell_edge(&self.bounds, n, i + 1),
                level: cell_edge(&self.bounds, n, counts[i]),
            })
            .collect();
        InterfaceLine::from_columns(self.bounds, start, columns)
    }
}

fn cell_edge(bounds: &PlaneBounds, n: usize, i: usize) -> f64 {
    if i == n {
        return bounds.u_max();
    }
    bounds.u_min() + bounds.span() * i as f64 / n as f64
}

fn cell_center(bounds: &PlaneBounds, n: usize, i: usize) -> f64 {
    bounds.u_min() + bounds.span() * (2 * i + 1) as f64 / (2 * n) as f64
}
