//! Preisach hysteresis operators and iterative remnant control.
//!
//! The crate is organised bottom-up:
//!
//! - [`plane`], [`weight`], [`interface`] and [`grid`] model the Preisach
//!   half-plane, weight densities, the staircase memory of the operator and a
//!   discretized relay-grid operator.
//! - [`signals`] builds amplitude-parametrized pulses, reset-interleaved
//!   iterative input schedules and time transformations.
//! - [`remnant`] evaluates remnant curves, switched regions and their slopes.
//! - [`control`] implements the proportional, Newton and secant amplitude
//!   update laws and the reset-scheduled controller loop.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod grid;
pub mod interface;
pub mod plane;
pub mod remnant;
pub mod signals;
pub mod weight;

pub use control::{
    choose_polarity, run_controller, run_with_plant, step_newton, step_proportional, step_secant,
    AmplitudeLimit, ControllerConfig, CurvePlant, GridPlant, IterationRow, IterationTrace, Method,
    Plant, Termination,
};
pub use error::{Error, Result};
pub use grid::{relay_update, DiscretePreisach};
pub use interface::{output_from_interface, InterfaceLine};
pub use plane::{PlaneBounds, Rect};
pub use remnant::{omega_region, Backend, CurvePoint, OmegaRegion, RemnantCurve};
pub use signals::{
    compose_schedule, make_triangle_pulse, time_transform, validate_r1_r4, Polarity, PulseSignal,
    R1R4Report, Sample,
};
pub use weight::{WeightField, WeightKind};
