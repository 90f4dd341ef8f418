use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use wavekac_core::ensembles::{
    sample_rwm, sample_sphere, sample_torus, DirectionMode, TorusSpectrum,
};
use wavekac_core::kernel::{IsotropicKernel, Normalization};
use wavekac_core::rng::stream_rng;
use wavekac_lab::{
    run_with_workers, Experiment, ExperimentConfig, LabError, RunOptions, EXPERIMENT_IDS,
};

/// Monochromatic random wave experiments.
///
/// Experiments are invoked as `wavekac <experiment> [options]`; run
/// `wavekac list` for the catalog.
#[derive(Debug, Parser)]
#[command(name = "wavekac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel analytics.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Draw one random wave and print its coefficients as JSON.
    Sample(SampleArgs),
    /// Print the experiment ids.
    List,
    #[command(external_subcommand)]
    Experiment(Vec<String>),
}

#[derive(Debug, Subcommand)]
enum KernelAction {
    /// Evaluate a displacement derivative of the kernel, printing JSON.
    Eval {
        #[arg(long)]
        dim: usize,
        /// Multi-index of the derivative, comma separated; defaults to zero.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<usize>>,
        /// Displacement, comma separated; repeat for several points.
        #[arg(long = "d", value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append, required = true)]
        displacement: Vec<f64>,
        #[arg(long, value_enum, default_value_t = NormalizationArg::Unit)]
        normalization: NormalizationArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Unit,
    SphereArea,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(subcommand)]
    ensemble: SampleEnsemble,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum SampleEnsemble {
    /// Superposition of unit plane waves in R^n.
    Plane {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 256)]
        waves: usize,
        #[arg(long, default_value_t = false)]
        equispaced: bool,
    },
    /// Torus eigenfunction combination in the window [lambda, lambda+1].
    Torus {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
    },
    /// Degree-ell spherical harmonic.
    Sphere {
        #[arg(long)]
        ell: usize,
    },
}

/// Options for `wavekac <experiment>`.
#[derive(Debug, Parser)]
struct ExperimentArgs {
    /// JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "wavekac-out")]
    out: PathBuf,
    /// Exit 2 if any acceptance check fails.
    #[arg(long)]
    check: bool,
    /// Also write nodal sets and critical points of replica 0.
    #[arg(long)]
    dump_geometry: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json value serializes")
    );
}

fn kernel_eval(
    dim: usize,
    gamma: Option<Vec<usize>>,
    displacement: Vec<f64>,
    normalization: NormalizationArg,
) -> Result<(), LabError> {
    let norm = match normalization {
        NormalizationArg::Unit => Normalization::Unit,
        NormalizationArg::SphereArea => Normalization::SphereArea,
    };
    let kernel = IsotropicKernel::<f64>::new(dim, norm)?;
    let gamma = gamma.unwrap_or_else(|| vec![0; dim]);
    if !displacement.len().is_multiple_of(dim) {
        return Err(LabError::Config(format!(
            "displacements must have {dim} components each"
        )));
    }
    let values = displacement
        .chunks(dim)
        .map(|d| Ok(json!({ "d": d, "value": kernel.displacement_derivative(&gamma, d)? })))
        .collect::<Result<Vec<_>, LabError>>()?;
    print_json(&json!({
        "dim": dim,
        "normalization": norm,
        "gamma": gamma,
        "values": values,
    }));
    Ok(())
}

fn sample(args: SampleArgs) -> Result<(), LabError> {
    let mut rng = stream_rng(args.seed, "sample", 0, 0);
    let value = match args.ensemble {
        SampleEnsemble::Plane {
            dim,
            waves,
            equispaced,
        } => {
            let mode = if equispaced {
                DirectionMode::Equispaced
            } else {
                DirectionMode::IidUniform
            };
            let f = sample_rwm(dim, waves, mode, &mut rng)?;
            let directions: Vec<&[f64]> = (0..f.waves()).map(|j| f.direction(j)).collect();
            json!({
                "ensemble": "plane",
                "dim": dim,
                "mode": mode,
                "directions": directions,
                "cos": f.cos_coefficients(),
                "sin": f.sin_coefficients(),
            })
        }
        SampleEnsemble::Torus { lambda, side } => {
            let spectrum = TorusSpectrum::with_side(lambda, side)?;
            let f = sample_torus(&spectrum, &mut rng);
            json!({
                "ensemble": "torus",
                "lambda": lambda,
                "side": side,
                "dimension": spectrum.dimension(),
                "lattice": spectrum.half_lattice(),
                "cos": f.cos_coefficients(),
                "sin": f.sin_coefficients(),
            })
        }
        SampleEnsemble::Sphere { ell } => {
            let f = sample_sphere(ell, &mut rng)?;
            json!({
                "ensemble": "sphere",
                "ell": ell,
                "coefficients": f.coefficients(),
            })
        }
    };
    print_json(&value);
    Ok(())
}

enum Outcome {
    Passed,
    Failed,
}

fn experiment(words: Vec<String>) -> Result<Outcome, LabError> {
    let id = words.first().cloned().unwrap_or_default();
    let defaults = Experiment::default_for(&id).ok_or_else(|| {
        LabError::Config(format!(
            "unknown experiment '{id}'; known: {}",
            EXPERIMENT_IDS.join(", ")
        ))
    })?;
    let args = ExperimentArgs::try_parse_from(&words).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp => {
            let _ = e.print();
            std::process::exit(0)
        }
        _ => LabError::Config(e.to_string()),
    })?;
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(defaults, 0),
    };
    if config.experiment.id() != id {
        return Err(LabError::Config(format!(
            "config describes '{}' but '{id}' was requested",
            config.experiment.id()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let options = RunOptions {
        dump_geometry: args.dump_geometry.then(|| args.out.join("geometry")),
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_with_workers(&config, workers, &options)?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    for path in report.write(&args.out)? {
        eprintln!("wrote {}", path.display());
    }
    if !report.payload.errors.is_empty() {
        return Err(LabError::Config(format!(
            "{} cell(s) failed",
            report.payload.errors.len()
        )));
    }
    if args.check && !report.all_passed() {
        return Ok(Outcome::Failed);
    }
    Ok(Outcome::Passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Kernel {
            action:
                KernelAction::Eval {
                    dim,
                    gamma,
                    displacement,
                    normalization,
                },
        } => kernel_eval(dim, gamma, displacement, normalization).map(|_| Outcome::Passed),
        Command::Sample(args) => sample(args).map(|_| Outcome::Passed),
        Command::List => {
            EXPERIMENT_IDS.iter().for_each(|id| println!("{id}"));
            Ok(Outcome::Passed)
        }
        Command::Experiment(words) => experiment(words),
    };
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
