//! JSON configuration documents for the command-line tools.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use remnant_core::{
    ControllerConfig, DiscretePreisach, GridPlant, InterfaceLine, Method, PlaneBounds, Polarity,
    WeightField, WeightKind,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{csv_at, io_at, HarnessError, Result};

/// Weight density given independently of the plane bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// Constant density with the given total mass.
    Uniform { mass: f64 },
    Gaussian {
        center: [f64; 2],
        sigma: f64,
        mass: f64,
    },
    Grid {
        alpha_spacing: f64,
        beta_spacing: f64,
        values: Vec<Vec<f64>>,
    },
    /// Grid weights read from a CSV file.
    GridCsv { path: PathBuf },
}

impl WeightSpec {
    pub fn build(&self, bounds: PlaneBounds) -> Result<WeightField> {
        Ok(match self {
            WeightSpec::Uniform { mass } => WeightField::uniform_with_mass(bounds, *mass)?,
            WeightSpec::Gaussian {
                center,
                sigma,
                mass,
            } => WeightField::gaussian(bounds, *center, *sigma, *mass)?,
            WeightSpec::Grid {
                alpha_spacing,
                beta_spacing,
                values,
            } => WeightField::new(
                bounds,
                WeightKind::Grid {
                    alpha_spacing: *alpha_spacing,
                    beta_spacing: *beta_spacing,
                    values: values.clone(),
                },
            )?,
            WeightSpec::GridCsv { path } => {
                let file = File::open(path).map_err(io_at(path))?;
                WeightField::from_grid_csv(bounds, BufReader::new(file)).map_err(|e| match e {
                    remnant_core::Error::Csv(source) => csv_at(path)(source),
                    other => other.into(),
                })?
            }
        })
    }
}

fn default_levels() -> usize {
    1000
}

fn default_period() -> f64 {
    2.0
}

/// Plane, weight and grid resolution of the simulated operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub bounds: PlaneBounds,
    pub weight: WeightSpec,
    #[serde(default = "default_levels")]
    pub grid_levels: usize,
}

impl PlantConfig {
    pub fn uniform(half_width: f64, mass: f64, grid_levels: usize) -> Result<Self> {
        Ok(Self {
            bounds: PlaneBounds::symmetric(half_width)?,
            weight: WeightSpec::Uniform { mass },
            grid_levels,
        })
    }

    pub fn weight_field(&self) -> Result<WeightField> {
        self.weight.build(self.bounds)
    }

    /// Negatively saturated relay grid.
    pub fn grid_plant(&self) -> Result<GridPlant> {
        let w = self.weight_field()?;
        let op = DiscretePreisach::new(self.bounds, self.grid_levels, &w)?;
        Ok(GridPlant::new(op, w)?)
    }
}

/// One controller of a Monte Carlo comparison. The target comes from the
/// sampled distribution and the limits from the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    #[serde(default)]
    pub initial_amplitude: f64,
}

fn default_tolerance() -> f64 {
    0.005
}

fn default_max_iterations() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub samples: usize,
    pub target_mean: f64,
    pub target_std: f64,
    pub seed: u64,
    pub methods: Vec<MethodConfig>,
    #[serde(flatten)]
    pub plant: PlantConfig,
    pub a_max: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_period")]
    pub period: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.target_mean.is_finite() && self.target_std.is_finite() && self.target_std >= 0.0)
        {
            return bad(format!(
                "target distribution needs a finite mean and std >= 0, got ({}, {})",
                self.target_mean, self.target_std
            ));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        for m in &self.methods {
            self.controller(m, self.target_mean).validate()?;
        }
        Ok(())
    }

    /// Full controller configuration for `method` aimed at `target`.
    pub fn controller(&self, method: &MethodConfig, target: f64) -> ControllerConfig {
        ControllerConfig {
            method: method.method,
            target,
            a_max: self.a_max,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            initial_amplitude: method.initial_amplitude,
        }
    }
}

/// Remnant-curve sweep: `points` amplitudes from zero to `polarity * a_max`
/// after a reset of the given polarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    #[serde(flatten)]
    pub plant: PlantConfig,
    pub a_max: f64,
    #[serde(default = "positive")]
    pub polarity: Polarity,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Evaluate with the relay grid instead of the closed-form areas.
    #[serde(default)]
    pub grid_backend: bool,
}

fn positive() -> Polarity {
    Polarity::Positive
}

fn default_points() -> usize {
    101
}

impl CurveConfig {
    pub fn base_interface(&self) -> Result<InterfaceLine> {
        let reset = self.polarity.reset_amplitude(self.a_max);
        Ok(InterfaceLine::negative_saturation(self.plant.bounds).drive_through(&[reset, 0.0])?)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let n = self.points.max(2) - 1;
        let mut a: Vec<f64> = (0..=n)
            .map(|i| self.polarity.sign() * self.a_max * i as f64 / n as f64)
            .collect();
        a.sort_by(|x, y| x.total_cmp(y));
        a
    }
}

/// Single controller run on a negatively saturated relay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    #[serde(flatten)]
    pub plant: PlantConfig,
    pub controller: ControllerConfig,
    #[serde(default = "default_period")]
    pub period: f64,
}

/// Raw input through the relay grid, starting from negative saturation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    #[serde(flatten)]
    pub plant: PlantConfig,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_at(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPERIMENT: &str = r#"{
        "samples": 100,
        "target_mean": 0.1,
        "target_std": 0.0878,
        "seed": 7,
        "bounds": [-400, 400],
        "weight": {"kind": "uniform", "mass": 1},
        "grid_levels": 1000,
        "a_max": 400,
        "methods": [
            {"method": {"kind": "secant", "a0": 50, "a1": 100}},
            {"method": {"kind": "proportional", "lambda": 100}, "initial_amplitude": 50}
        ]
    }"#;

    #[test]
    fn experiment_json() {
        let cfg: ExperimentConfig = serde_json::from_str(EXPERIMENT).unwrap();
        assert_eq!(cfg.samples, 100);
        assert_eq!(cfg.tolerance, 0.005);
        assert_eq!(cfg.period, 2.0);
        assert_eq!(cfg.plant.weight, WeightSpec::Uniform { mass: 1.0 });
        cfg.validate().unwrap();
        let bad = ExperimentConfig {
            samples: 0,
            ..cfg.clone()
        };
        assert!(matches!(bad.validate(), Err(HarnessError::Config(_))));
        let bad = ExperimentConfig {
            target_std: f64::NAN,
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { a_max: -1.0, ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn curve_amplitudes_are_sorted() {
        let cfg = CurveConfig {
            plant: PlantConfig::uniform(400.0, 1.0, 10).unwrap(),
            a_max: 400.0,
            polarity: Polarity::Negative,
            points: 5,
            grid_backend: false,
        };
        assert_eq!(cfg.amplitudes(), vec![-400.0, -300.0, -200.0, -100.0, 0.0]);
        assert_eq!(
            cfg.base_interface().unwrap().vertices(),
            vec![(0.0, 0.0), (400.0, 0.0)]
        );
    }
}
