//! Output files of a Monte Carlo experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{csv_at, io_at, HarnessError, Result};
use crate::experiment::{ExperimentResult, MAX_DRAWS};

pub const HISTOGRAM: &str = "histogram.csv";
pub const TRANSIENTS: &str = "transients.csv";
pub const SUMMARY: &str = "summary.json";

pub const RNG_GENERATOR: &str = "ChaCha8Rng";
pub const RNG_SEEDING: &str = "seed_from_u64(seed) then set_stream(sample index)";
pub const NORMAL_ALGORITHM: &str = "ziggurat (rand_distr::Normal)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    pub mean_iterations: Option<f64>,
    pub median_iterations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RngInfo {
    pub generator: &'static str,
    pub seeding: &'static str,
    pub normal: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub samples: usize,
    pub rng: RngInfo,
    pub max_draws_per_sample: usize,
    pub total_resamples: usize,
    pub methods: Vec<MethodSummary>,
}

fn median(sorted: &[usize]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2] as f64),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) as f64),
    }
}

pub fn summarize(result: &ExperimentResult) -> Summary {
    let methods = result
        .methods
        .iter()
        .map(|m| {
            let mut iters: Vec<usize> = result.runs_for(m).map(|r| r.iterations).collect();
            iters.sort_unstable();
            let runs = iters.len();
            let converged = result.runs_for(m).filter(|r| r.converged).count();
            MethodSummary {
                method: m.clone(),
                runs,
                converged,
                convergence_rate: if runs == 0 {
                    0.0
                } else {
                    converged as f64 / runs as f64
                },
                mean_iterations: (runs > 0)
                    .then(|| iters.iter().sum::<usize>() as f64 / runs as f64),
                median_iterations: median(&iters),
            }
        })
        .collect();
    Summary {
        seed: result.seed,
        samples: result.resamples.len(),
        rng: RngInfo {
            generator: RNG_GENERATOR,
            seeding: RNG_SEEDING,
            normal: NORMAL_ALGORITHM,
        },
        max_draws_per_sample: MAX_DRAWS,
        total_resamples: result.resamples.iter().sum(),
        methods,
    }
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    method: &'a str,
    iterations: usize,
    count: usize,
}

#[derive(Serialize)]
struct TransientRow<'a> {
    sample: usize,
    method: &'a str,
    k: usize,
    #[serde(rename = "A_k")]
    amplitude: f64,
    #[serde(rename = "y_k")]
    output: f64,
    #[serde(rename = "e_k")]
    error: f64,
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_at(path))?;
    wtr.write_record(header).map_err(csv_at(path))?;
    Ok(wtr)
}

/// Writes histogram.csv, transients.csv and summary.json into `out_dir`.
pub fn emit_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;

    let hist_path = out_dir.join(HISTOGRAM);
    let mut wtr = csv_writer(&hist_path, &["method", "iterations", "count"])?;
    for (method, counts) in result.histogram() {
        for (iterations, count) in counts {
            wtr.serialize(HistogramRow {
                method: &method,
                iterations,
                count,
            })
            .map_err(csv_at(&hist_path))?;
        }
    }
    wtr.flush().map_err(io_at(&hist_path))?;

    let trans_path = out_dir.join(TRANSIENTS);
    let mut wtr = csv_writer(&trans_path, &["sample", "method", "k", "A_k", "y_k", "e_k"])?;
    for run in &result.runs {
        for row in &run.rows {
            wtr.serialize(TransientRow {
                sample: run.sample,
                method: &run.method,
                k: row.k,
                amplitude: row.amplitude,
                output: row.output,
                error: row.error,
            })
            .map_err(csv_at(&trans_path))?;
        }
    }
    wtr.flush().map_err(io_at(&trans_path))?;

    let summary_path = out_dir.join(SUMMARY);
    let mut text =
        serde_json::to_string_pretty(&summarize(result)).map_err(|source| HarnessError::Json {
            path: summary_path.clone(),
            source,
        })?;
    text.push('\n');
    fs::write(&summary_path, text).map_err(io_at(&summary_path))?;

    Ok(vec![hist_path, trans_path, summary_path])
}
