#![allow(dead_code)]

use proptest::prelude::*;
use remnant_core::{InterfaceLine, PlaneBounds, WeightField};

pub const HALF: f64 = 400.0;

pub fn bounds() -> PlaneBounds {
    PlaneBounds::symmetric(HALF).unwrap()
}

/// Input histories that leave the operator somewhere in the plane.
pub fn history() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-HALF..=HALF, 0..8)
}

/// Interface reached from negative saturation by `history` followed by a
/// return to zero.
pub fn rest_interface(history: &[f64]) -> InterfaceLine {
    let mut input = history.to_vec();
    input.push(0.0);
    InterfaceLine::negative_saturation(bounds())
        .drive_through(&input)
        .unwrap()
}

pub fn gaussian() -> impl Strategy<Value = WeightField> {
    (
        -200.0..300.0f64,
        -300.0..200.0f64,
        60.0..300.0f64,
        0.2..3.0f64,
    )
        .prop_map(|(a, b, s, m)| WeightField::gaussian(bounds(), [a, b], s, m).unwrap())
}

/// Piecewise constant, strictly positive weights on an 8 x 8 cell grid.
pub fn positive_grid() -> impl Strategy<Value = WeightField> {
    prop::collection::vec(prop::collection::vec(0.05..2.0f64, 8), 8).prop_map(|values| {
        let h = 2.0 * HALF / 8.0;
        WeightField::grid(bounds(), h, h, values).unwrap()
    })
}

/// Scaled so the total mass is one.
pub fn normalized(w: WeightField) -> WeightField {
    let m = w.total_mass();
    match w.kind().clone() {
        remnant_core::WeightKind::Grid {
            alpha_spacing,
            beta_spacing,
            values,
        } => {
            let scaled = values
                .into_iter()
                .map(|row| row.into_iter().map(|v| v / m).collect())
                .collect();
            WeightField::grid(w.bounds(), alpha_spacing, beta_spacing, scaled).unwrap()
        }
        _ => w,
    }
}
