//! The `curve`, `control` and `simulate` subcommands as library calls.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use remnant_core::remnant::write_curve_csv;
use remnant_core::{run_with_plant, Backend, IterationTrace, Plant, RemnantCurve, Sample};
use serde::Serialize;

use crate::config::{ControlConfig, CurveConfig, SimulateConfig};
use crate::error::{csv_at, io_at, Result};

fn create(out_dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;
    let path = out_dir.join(name);
    let file = File::create(&path).map_err(io_at(&path))?;
    Ok((path, BufWriter::new(file)))
}

fn core_at(path: &Path) -> impl FnOnce(remnant_core::Error) -> crate::HarnessError + '_ {
    move |e| match e {
        remnant_core::Error::Csv(source) => csv_at(path)(source),
        remnant_core::Error::Io(source) => io_at(path)(source),
        other => other.into(),
    }
}

/// Writes `curve.csv` with columns `A,rho,drho_dA`.
pub fn run_curve(cfg: &CurveConfig, out_dir: &Path) -> Result<PathBuf> {
    let backend = if cfg.grid_backend {
        Backend::Grid {
            levels: cfg.plant.grid_levels,
        }
    } else {
        Backend::Analytic
    };
    let curve = RemnantCurve::new(cfg.base_interface()?, cfg.plant.weight_field()?, backend)?;
    let rows = curve.sample_curve(&cfg.amplitudes())?;
    let (path, file) = create(out_dir, "curve.csv")?;
    write_curve_csv(file, &rows).map_err(core_at(&path))?;
    Ok(path)
}

/// Runs one controller and writes `trace.csv`.
pub fn run_control(cfg: &ControlConfig, out_dir: &Path) -> Result<(IterationTrace, PathBuf)> {
    let mut plant = cfg.plant.grid_plant()?;
    let trace = run_with_plant(&mut plant, &cfg.controller, cfg.period)?;
    let (path, file) = create(out_dir, "trace.csv")?;
    trace.write_csv(file).map_err(core_at(&path))?;
    Ok((trace, path))
}

#[derive(Serialize)]
struct SimRow {
    time: f64,
    input: f64,
    output: f64,
}

/// Reads `time,value` samples from `input`, drives the negatively saturated
/// relay grid through them and writes `output.csv` (`time,input,output`).
pub fn run_simulate(cfg: &SimulateConfig, input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let mut rdr = csv::Reader::from_path(input).map_err(csv_at(input))?;
    let samples: Vec<Sample> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_at(input))?;
    let mut plant = cfg.plant.grid_plant()?;
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    // reject out-of-range input before creating any output
    plant.clone().drive(&values)?;
    let (path, file) = create(out_dir, "output.csv")?;
    let mut wtr = csv::Writer::from_writer(file);
    for s in &samples {
        plant.drive(&[s.value])?;
        wtr.serialize(SimRow {
            time: s.time,
            input: s.value,
            output: plant.output(),
        })
        .map_err(csv_at(&path))?;
    }
    wtr.flush().map_err(io_at(&path))?;
    Ok(path)
}
