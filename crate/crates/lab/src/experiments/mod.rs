//! The experiment catalog. Each experiment fills a [`Payload`]; errors in one
//! cell are recorded and the remaining cells still run.

mod global;
mod kacrice;
mod local;
mod scans;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::report::{ExperimentReport, Payload, SCHEMA_VERSION};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for nodal-set and critical-point dumps of replica 0.
    pub dump_geometry: Option<PathBuf>,
}

/// Runs `config` on the current rayon pool.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut payload = Payload::new(config.clone());
    let seed = config.seed;
    match &config.experiment {
        Experiment::LocalZeros(p) => local::zeros(p, seed, &mut payload, options)?,
        Experiment::LocalCrits(p) => local::crits(p, seed, &mut payload, options)?,
        Experiment::TorusGlobalZeros(p) => {
            global::torus(p, seed, "torus-global-zeros", &mut payload, options)?
        }
        Experiment::TorusGlobalCrits(p) => {
            global::torus(p, seed, "torus-global-crits", &mut payload, options)?
        }
        Experiment::SrcScan(p) => scans::src(p, seed, &mut payload),
        Experiment::LocalLimitScan(p) => scans::local_limit(p, &mut payload),
        Experiment::L2Identity(p) => scans::l2_identity(p, &mut payload),
        Experiment::GramSuite(p) => kacrice::gram(p, seed, &mut payload),
        Experiment::ExponentSuite(p) => kacrice::exponents(p, seed, &mut payload),
        Experiment::TwoPointSuite(p) => kacrice::two_point(p, seed, &mut payload),
    }
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        payload,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        workers: rayon::current_num_threads(),
    })
}

/// Runs `config` on a dedicated pool of `workers` threads.
pub fn run_with_workers(
    config: &ExperimentConfig,
    workers: usize,
    options: &RunOptions,
) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    pool.install(|| run(config, options))
}

fn dump(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let path = dir.join(name);
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| LabError::io(&path, e))?;
    fs::write(&path, buf).map_err(|e| LabError::io(&path, e))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

/// One-sided `value ≤ C·λ^{-1/2}` with `C` fixed by the first entry; returns
/// the largest ratio to the envelope.
fn envelope_ratio(lambdas: &[f64], values: &[f64]) -> f64 {
    let c = values[0] * lambdas[0].sqrt();
    lambdas
        .iter()
        .zip(values)
        .map(|(l, v)| v / (c / l.sqrt()))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn fmt_lambda(l: f64) -> String {
    format!("{l}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_is_calibrated_at_the_first_point() {
        let l = [100.0, 400.0];
        assert!((envelope_ratio(&l, &[1.0, 0.5]) - 1.0).abs() < 1e-12);
        assert!(envelope_ratio(&l, &[1.0, 0.6]) > 1.0);
        assert!(envelope_ratio(&l, &[1.0, 0.1]) <= 1.0);
    }

    #[test]
    fn monotonicity_helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        assert!(non_increasing(&[3.0, 3.0, 1.0]));
    }
}
