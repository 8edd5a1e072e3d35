//! Iterative remnant control: amplitude update laws and the reset-interleaved
//! controller loop.
//!
//! The controller works with amplitude magnitudes `a >= 0`; the pulse actually
//! applied is `polarity * a`, preceded by a reset pulse of `-polarity * A_max`.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscretePreisach;
use crate::interface::{output_from_interface, InterfaceLine};
use crate::plane::PlaneBounds;
use crate::remnant::{Backend, RemnantCurve};
use crate::signals::{make_triangle_pulse, Polarity};
use crate::weight::WeightField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Proportional { lambda: f64 },
    Newton,
    Secant { a0: f64, a1: f64 },
}

impl Method {
    /// Short label used in output files, e.g. `proportional_100`.
    pub fn label(&self) -> String {
        match self {
            Method::Proportional { lambda } => format!("proportional_{lambda}"),
            Method::Newton => "newton".into(),
            Method::Secant { .. } => "secant".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn default_tolerance() -> f64 {
    0.005
}

fn default_max_iterations() -> usize {
    50
}

/// Amplitudes are magnitudes; the polarity chosen at run time gives their sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub method: Method,
    #[serde(rename = "y_d")]
    pub target: f64,
    pub a_max: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// First amplitude for the proportional and Newton laws; unused by the
    /// secant law, which starts from its two seeds.
    #[serde(default)]
    pub initial_amplitude: f64,
}

impl ControllerConfig {
    pub fn new(method: Method, target: f64, a_max: f64, initial_amplitude: f64) -> Self {
        Self {
            method,
            target,
            a_max,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            initial_amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.target.is_finite() {
            return bad(format!("target {} is not finite", self.target));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return bad(format!("A_max must be positive, got {}", self.a_max));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.initial_amplitude.abs() <= self.a_max) {
            return bad(format!(
                "initial amplitude {} exceeds A_max {}",
                self.initial_amplitude, self.a_max
            ));
        }
        match self.method {
            Method::Proportional { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("proportional gain must be positive, got {lambda}"))
            }
            Method::Secant { a0, a1 } if !(a0.abs() <= self.a_max && a1.abs() <= self.a_max) => {
                bad(format!(
                    "secant seeds ({a0}, {a1}) exceed A_max {}",
                    self.a_max
                ))
            }
            Method::Secant { a0, a1 } if a0 == a1 => bad("secant seeds must differ".into()),
            _ => Ok(()),
        }
    }
}

/// Amplitude box `[0, a_max]` plus the amplitude resolution of the plant
/// (zero for a continuous plant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeLimit {
    pub a_max: f64,
    pub resolution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub amplitude: f64,
    pub clamped: bool,
}

impl AmplitudeLimit {
    pub fn new(a_max: f64) -> Self {
        Self {
            a_max,
            resolution: 0.0,
        }
    }

    pub fn clamp(&self, amplitude: f64) -> Step {
        let a = amplitude.clamp(0.0, self.a_max);
        Step {
            amplitude: a,
            clamped: a != amplitude,
        }
    }
}

/// `A - lambda e`, clamped.
pub fn step_proportional(a_k: f64, e_k: f64, lambda: f64, limit: AmplitudeLimit) -> Step {
    limit.clamp(a_k - lambda * e_k)
}

/// `A - e / slope`, clamped. Slopes below `slope_floor` in magnitude are rejected.
pub fn step_newton(
    a_k: f64,
    e_k: f64,
    slope: f64,
    slope_floor: f64,
    limit: AmplitudeLimit,
) -> Result<Step> {
    if e_k == 0.0 {
        return Ok(limit.clamp(a_k));
    }
    if !(slope.abs() >= slope_floor) || slope == 0.0 {
        return Err(Error::DegenerateSlope {
            slope,
            floor: slope_floor,
        });
    }
    Ok(limit.clamp(a_k - e_k / slope))
}

/// `A_k - e_k (A_k - A_{k-1}) / (y_k - y_{k-1})`, clamped.
pub fn step_secant(
    a_k: f64,
    a_km1: f64,
    y_k: f64,
    y_km1: f64,
    e_k: f64,
    limit: AmplitudeLimit,
) -> Result<Step> {
    if e_k == 0.0 {
        return Ok(limit.clamp(a_k));
    }
    if a_k == a_km1 || y_k == y_km1 {
        return Err(Error::StalledSecant {
            amplitude: a_k,
            hint_step: limit.resolution,
        });
    }
    Ok(limit.clamp(a_k - e_k * (a_k - a_km1) / (y_k - y_km1)))
}

/// Something that can be driven by input samples and measured.
pub trait Plant {
    fn bounds(&self) -> PlaneBounds;
    fn weight(&self) -> &WeightField;
    /// Smallest amplitude change that can alter the output (zero if continuous).
    fn resolution(&self) -> f64;
    fn drive(&mut self, samples: &[f64]) -> Result<()>;
    fn output(&self) -> f64;
    fn interface(&self) -> Result<InterfaceLine>;
}

/// The relay-grid operator as a plant.
#[derive(Debug, Clone)]
pub struct GridPlant {
    op: DiscretePreisach,
    weight: WeightField,
}

impl GridPlant {
    pub fn new(op: DiscretePreisach, weight: WeightField) -> Result<Self> {
        if op.bounds() != weight.bounds() {
            return Err(Error::InvalidWeight(
                "weight field bounds differ from the operator bounds".into(),
            ));
        }
        Ok(Self { op, weight })
    }

    pub fn operator(&self) -> &DiscretePreisach {
        &self.op
    }
}

impl Plant for GridPlant {
    fn bounds(&self) -> PlaneBounds {
        self.op.bounds()
    }

    fn weight(&self) -> &WeightField {
        &self.weight
    }

    fn resolution(&self) -> f64 {
        self.op.level_spacing()
    }

    fn drive(&mut self, samples: &[f64]) -> Result<()> {
        self.op.drive(samples)
    }

    fn output(&self) -> f64 {
        self.op.output()
    }

    fn interface(&self) -> Result<InterfaceLine> {
        self.op.interface()
    }
}

/// The continuous operator, evolved through its interface.
#[derive(Debug, Clone)]
pub struct CurvePlant {
    line: InterfaceLine,
    weight: WeightField,
}

impl CurvePlant {
    pub fn new(line: InterfaceLine, weight: WeightField) -> Result<Self> {
        if line.bounds() != weight.bounds() {
            return Err(Error::InvalidWeight(
                "weight field bounds differ from the interface bounds".into(),
            ));
        }
        Ok(Self { line, weight })
    }
}

impl Plant for CurvePlant {
    fn bounds(&self) -> PlaneBounds {
        self.line.bounds()
    }

    fn weight(&self) -> &WeightField {
        &self.weight
    }

    fn resolution(&self) -> f64 {
        0.0
    }

    fn drive(&mut self, samples: &[f64]) -> Result<()> {
        self.line = self.line.drive_through(samples)?;
        Ok(())
    }

    fn output(&self) -> f64 {
        output_from_interface(&self.line, &self.weight)
    }

    fn interface(&self) -> Result<InterfaceLine> {
        Ok(self.line.clone())
    }
}

fn check_target<P: Plant>(plant: &P, target: f64) -> Result<()> {
    let mass = plant.weight().total_mass();
    if !(target.abs() <= mass) {
        return Err(Error::InfeasibleTarget {
            target,
            low: -mass,
            high: mass,
        });
    }
    Ok(())
}

/// Applies a trial negative reset to a copy of `plant` and picks positive
/// polarity when the target lies above the resulting remnant.
pub fn choose_polarity<P: Plant + Clone>(plant: &P, target: f64, a_max: f64) -> Result<Polarity> {
    check_target(plant, target)?;
    let mut trial = plant.clone();
    trial.drive(&[Polarity::Positive.reset_amplitude(a_max), 0.0])?;
    Ok(if target > trial.output() {
        Polarity::Positive
    } else {
        Polarity::Negative
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    ClampedRepeatedly,
    DegenerateSlope,
    StalledSecant,
}

/// One plant interaction: control pulse `amplitude` (signed) and the remnant
/// measured after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRow {
    pub k: usize,
    #[serde(rename = "A_k")]
    pub amplitude: f64,
    #[serde(rename = "y_k")]
    pub output: f64,
    #[serde(rename = "e_k")]
    pub error: f64,
    /// Slope used to compute the next amplitude (Newton only).
    pub slope: Option<f64>,
    /// Whether `amplitude` was clamped to the admissible box.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub rows: Vec<IterationRow>,
    pub converged: bool,
    pub polarity: Polarity,
    pub termination: Termination,
    pub target: f64,
    pub tolerance: f64,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn last(&self) -> Option<&IterationRow> {
        self.rows.last()
    }

    pub fn final_amplitude(&self) -> Option<f64> {
        self.last().map(|r| r.amplitude)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.last().map(|r| r.error)
    }

    /// CSV with header `k,A_k,y_k,e_k,slope,clamped`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs the controller on the relay-grid operator `op`. `period` is the
/// duration of each control and reset pulse.
pub fn run_controller(
    op: DiscretePreisach,
    weight: &WeightField,
    cfg: &ControllerConfig,
    period: f64,
) -> Result<IterationTrace> {
    let mut plant = GridPlant::new(op, weight.clone())?;
    run_with_plant(&mut plant, cfg, period)
}

struct Session<'a, P> {
    plant: &'a mut P,
    polarity: Polarity,
    cfg: &'a ControllerConfig,
    period: f64,
    reference: InterfaceLine,
    rows: Vec<IterationRow>,
}

impl<P: Plant> Session<'_, P> {
    fn pulse(&mut self, amplitude: f64) -> Result<()> {
        let input: Vec<f64> = make_triangle_pulse(amplitude, self.period)?
            .extrema_samples()
            .iter()
            .map(|s| s.value)
            .collect();
        self.plant.drive(&input)
    }

    fn reset(&mut self) -> Result<InterfaceLine> {
        self.pulse(self.polarity.reset_amplitude(self.cfg.a_max))?;
        self.plant.interface()
    }

    /// Control pulse, measurement and the following reset. Returns the error.
    fn measure(&mut self, step: Step) -> Result<f64> {
        let amplitude = self.polarity.sign() * step.amplitude;
        self.pulse(amplitude)?;
        let output = self.plant.output();
        let error = output - self.cfg.target;
        self.rows.push(IterationRow {
            k: self.rows.len() + 1,
            amplitude,
            output,
            error,
            slope: None,
            clamped: step.clamped,
        });
        if self.reset()? != self.reference {
            return Err(Error::InvalidInterface(
                "post-reset interface changed between iterations".into(),
            ));
        }
        Ok(error)
    }

    fn done(&self, error: f64) -> Option<Termination> {
        if error.abs() <= self.cfg.tolerance {
            Some(Termination::Converged)
        } else if self.rows.len() >= self.cfg.max_iterations {
            Some(Termination::MaxIterations)
        } else {
            None
        }
    }
}

/// Runs the reset-interleaved controller loop on any plant.
///
/// Plant and configuration errors are returned as `Err`; a run that stops
/// without converging (iteration cap, repeated clamping, degenerate slope,
/// stalled secant) is reported through [`IterationTrace::termination`].
pub fn run_with_plant<P: Plant + Clone>(
    plant: &mut P,
    cfg: &ControllerConfig,
    period: f64,
) -> Result<IterationTrace> {
    cfg.validate()?;
    if !(period > 0.0) {
        return Err(Error::InvalidPulse(format!(
            "period must be positive, got {period}"
        )));
    }
    let bounds = plant.bounds();
    if cfg.a_max > bounds.max_symmetric_amplitude() {
        return Err(Error::InvalidConfig(format!(
            "A_max {} exceeds the symmetric input range {}",
            cfg.a_max,
            bounds.max_symmetric_amplitude()
        )));
    }
    let polarity = choose_polarity(&*plant, cfg.target, cfg.a_max)?;
    let limit = AmplitudeLimit {
        a_max: cfg.a_max,
        resolution: plant.resolution(),
    };
    let mass = plant.weight().total_mass();
    let slope_floor = 1e-12 * mass / cfg.a_max;
    let sign = polarity.sign();

    let mut session = Session {
        plant,
        polarity,
        cfg,
        period,
        reference: InterfaceLine::negative_saturation(bounds),
        rows: Vec::new(),
    };
    session.reference = session.reset()?;

    let slope_model = match cfg.method {
        Method::Newton => Some(RemnantCurve::new(
            session.reference.clone(),
            session.plant.weight().clone(),
            Backend::Analytic,
        )?),
        _ => None,
    };

    let mut clamp_run = 0usize;
    let mut note_clamp = |step: &Step| {
        clamp_run = if step.clamped { clamp_run + 1 } else { 0 };
        clamp_run >= 3
    };

    let termination = match cfg.method {
        Method::Proportional { .. } | Method::Newton => {
            let mut step = limit.clamp(cfg.initial_amplitude);
            note_clamp(&step);
            loop {
                let e = session.measure(step)?;
                if let Some(t) = session.done(e) {
                    break t;
                }
                let a = step.amplitude;
                let next = match (cfg.method, &slope_model) {
                    (Method::Proportional { lambda }, _) => {
                        step_proportional(a, sign * e, lambda, limit)
                    }
                    (_, Some(curve)) => {
                        let slope = curve.one_sided_derivative(sign * a, polarity)?;
                        session.rows.last_mut().expect("row recorded").slope = Some(slope);
                        match step_newton(a, sign * e, slope, slope_floor, limit) {
                            Ok(s) => s,
                            Err(Error::DegenerateSlope { .. }) => {
                                break Termination::DegenerateSlope
                            }
                            Err(other) => return Err(other),
                        }
                    }
                    _ => unreachable!("Newton always has a slope model"),
                };
                if note_clamp(&next) {
                    break Termination::ClampedRepeatedly;
                }
                step = next;
            }
        }
        Method::Secant { a0, a1 } => {
            let mut prev = limit.clamp(a0);
            note_clamp(&prev);
            let mut e_prev = session.measure(prev)?;
            match session.done(e_prev) {
                Some(t) => t,
                None => {
                    let mut step = limit.clamp(a1);
                    note_clamp(&step);
                    loop {
                        let e = session.measure(step)?;
                        if let Some(t) = session.done(e) {
                            break t;
                        }
                        // error and output differ by a constant, so the secant
                        // ratio can use either
                        let next = match step_secant(
                            step.amplitude,
                            prev.amplitude,
                            sign * e,
                            sign * e_prev,
                            sign * e,
                            limit,
                        ) {
                            Ok(s) => s,
                            Err(Error::StalledSecant { .. }) => break Termination::StalledSecant,
                            Err(other) => return Err(other),
                        };
                        if note_clamp(&next) {
                            break Termination::ClampedRepeatedly;
                        }
                        prev = step;
                        e_prev = e;
                        step = next;
                    }
                }
            }
        }
    };

    Ok(IterationTrace {
        converged: termination == Termination::Converged,
        rows: session.rows,
        polarity,
        termination,
        target: cfg.target,
        tolerance: cfg.tolerance,
    })
}
