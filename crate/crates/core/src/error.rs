use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid plane bounds: u_min = {u_min} must be below u_max = {u_max}")]
    InvalidBounds { u_min: f64, u_max: f64 },

    #[error("malformed relay: alpha = {alpha} is below beta = {beta}")]
    MalformedRelay { alpha: f64, beta: f64 },

    #[error("input sample {index} = {value} lies outside [{u_min}, {u_max}]")]
    InputOutOfRange {
        index: usize,
        value: f64,
        u_min: f64,
        u_max: f64,
    },

    #[error("amplitude {amplitude} lies outside [{u_min}, {u_max}]")]
    AmplitudeOutOfRange {
        amplitude: f64,
        u_min: f64,
        u_max: f64,
    },

    #[error("amplitude {amplitude} at index {index} exceeds A_max = {a_max}")]
    AmplitudeExceedsMax {
        index: usize,
        amplitude: f64,
        a_max: f64,
    },

    #[error("invalid interface line: {0}")]
    InvalidInterface(String),

    #[error("interface is not at rest: current input is {input}, expected 0")]
    NotAtRest { input: f64 },

    #[error("relay states are not staircase-representable (column {column})")]
    NotStaircase { column: usize },

    #[error("invalid weight field: {0}")]
    InvalidWeight(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("time transformation is not non-decreasing at sample {index}")]
    NonMonotoneTransform { index: usize },

    #[error("amplitude grid is not sorted ascending at index {index}")]
    UnsortedGrid { index: usize },

    #[error("target remnant {target} is infeasible: admissible range is [{low}, {high}]")]
    InfeasibleTarget { target: f64, low: f64, high: f64 },

    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate slope {slope} (floor {floor})")]
    DegenerateSlope { slope: f64, floor: f64 },

    #[error(
        "secant stalled at amplitude {amplitude}: zero denominator; perturb the amplitude by one grid step ({hint_step})"
    )]
    StalledSecant { amplitude: f64, hint_step: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
