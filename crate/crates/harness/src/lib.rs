//! Configuration, Monte Carlo runner and output files behind the `remnant`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod tools;

pub use config::{
    ControlConfig, CurveConfig, ExperimentConfig, MethodConfig, PlantConfig, SimulateConfig,
    WeightSpec,
};
pub use error::{HarnessError, Result};
pub use experiment::{run_monte_carlo, Admissible, ExperimentResult, RunRecord};
pub use output::{emit_outputs, summarize, Summary};
