//! Monte Carlo comparison of update laws over random remnant targets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use remnant_core::{run_with_plant, GridPlant, IterationRow, Plant, Polarity, Termination};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const MAX_DRAWS: usize = 100;

/// Remnant values a controller can reach from the reset states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissible {
    /// Remnant right after a negative reset.
    pub pivot: f64,
    /// Highest remnant reachable with positive polarity.
    pub high: f64,
    /// Lowest remnant reachable with negative polarity.
    pub low: f64,
}

impl Admissible {
    pub fn measure(plant: &GridPlant, a_max: f64) -> Result<Self> {
        let remnant = |samples: &[f64]| -> Result<f64> {
            let mut p = plant.clone();
            p.drive(samples)?;
            Ok(p.output())
        };
        let neg = Polarity::Positive.reset_amplitude(a_max);
        Ok(Self {
            pivot: remnant(&[neg, 0.0])?,
            high: remnant(&[neg, 0.0, a_max, 0.0])?,
            low: remnant(&[-neg, 0.0, -a_max, 0.0])?,
        })
    }

    /// Whether the polarity rule picks a branch that can reach `target`.
    pub fn contains(&self, target: f64) -> bool {
        if target > self.pivot {
            target <= self.high
        } else {
            target >= self.low
        }
    }
}

/// Deterministic per-sample stream: the experiment seed picks the key, the
/// sample index picks the stream.
pub fn sample_rng(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

/// Draws a feasible target, returning it with the number of rejected draws.
pub fn draw_target(
    cfg: &ExperimentConfig,
    admissible: &Admissible,
    sample: usize,
) -> Result<(f64, usize)> {
    let normal = Normal::new(cfg.target_mean, cfg.target_std)
        .map_err(|e| HarnessError::Config(format!("target distribution: {e}")))?;
    let mut rng = sample_rng(cfg.seed, sample);
    for rejected in 0..MAX_DRAWS {
        let y = normal.sample(&mut rng);
        if admissible.contains(y) {
            return Ok((y, rejected));
        }
    }
    Err(HarnessError::ResampleCap {
        sample,
        attempts: MAX_DRAWS,
        low: admissible.low,
        high: admissible.high,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub sample: usize,
    pub target: f64,
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_error: f64,
    pub final_amplitude: f64,
    pub termination: Termination,
    #[serde(skip)]
    pub rows: Vec<IterationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub methods: Vec<String>,
    pub admissible: Admissible,
    /// Rejected draws per sample.
    pub resamples: Vec<usize>,
    /// Sample-major, then in method order.
    pub runs: Vec<RunRecord>,
}

impl ExperimentResult {
    pub fn empty(methods: Vec<String>, seed: u64, admissible: Admissible) -> Self {
        Self {
            seed,
            methods,
            admissible,
            resamples: Vec::new(),
            runs: Vec::new(),
        }
    }

    pub fn runs_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.method == method)
    }

    /// Iteration-count distribution per method, in method order.
    pub fn histogram(&self) -> Vec<(String, Vec<(usize, usize)>)> {
        self.methods
            .iter()
            .map(|m| {
                let mut counts = std::collections::BTreeMap::new();
                for r in self.runs_for(m) {
                    *counts.entry(r.iterations).or_insert(0usize) += 1;
                }
                (m.clone(), counts.into_iter().collect())
            })
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

/// Runs every configured method on every sample, `threads` workers at a time
/// (zero picks the machine default). The result does not depend on `threads`.
pub fn run_monte_carlo(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let template = cfg.plant.grid_plant()?;
    let admissible = Admissible::measure(&template, cfg.a_max)?;
    if !admissible.contains(cfg.target_mean) {
        return Err(HarnessError::Config(format!(
            "target mean {} lies outside the admissible remnant range [{}, {}]",
            cfg.target_mean, admissible.low, admissible.high
        )));
    }
    let labels: Vec<String> = cfg.methods.iter().map(|m| m.method.label()).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let per_sample: Vec<(usize, Vec<RunRecord>)> = pool.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let (target, rejected) = draw_target(cfg, &admissible, i)?;
                let runs = cfg
                    .methods
                    .iter()
                    .zip(&labels)
                    .map(|(m, label)| {
                        let mut plant = template.clone();
                        let trace =
                            run_with_plant(&mut plant, &cfg.controller(m, target), cfg.period)?;
                        let last = trace.last().copied();
                        Ok(RunRecord {
                            sample: i,
                            target,
                            method: label.clone(),
                            iterations: trace.iterations(),
                            converged: trace.converged,
                            final_error: last.map_or(f64::NAN, |r| r.error),
                            final_amplitude: last.map_or(f64::NAN, |r| r.amplitude),
                            termination: trace.termination,
                            rows: trace.rows,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((rejected, runs))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut result = ExperimentResult::empty(labels, cfg.seed, admissible);
    for (rejected, runs) in per_sample {
        result.resamples.push(rejected);
        result.runs.extend(runs);
    }
    Ok(result)
}
