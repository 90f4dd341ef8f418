//! Experiment configuration, loaded from and saved to JSON.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wavekac_core::ensembles::DirectionMode;
use wavekac_core::geometry::{CellSpec, JetWeight, LocalEnsemble};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self { seed, experiment }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Catalog of experiments with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    LocalZeros(LocalZeros),
    LocalCrits(LocalCrits),
    TorusGlobalZeros(TorusGlobal),
    TorusGlobalCrits(TorusGlobal),
    SrcScan(SrcScan),
    LocalLimitScan(LocalLimitScan),
    L2Identity(L2Identity),
    GramSuite(GramSuite),
    ExponentSuite(ExponentSuite),
    TwoPointSuite(TwoPointSuite),
}

pub const EXPERIMENT_IDS: [&str; 10] = [
    "local-zeros",
    "local-crits",
    "torus-global-zeros",
    "torus-global-crits",
    "src-scan",
    "local-limit-scan",
    "l2-identity",
    "gram-suite",
    "exponent-suite",
    "two-point-suite",
];

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::LocalZeros(_) => "local-zeros",
            Experiment::LocalCrits(_) => "local-crits",
            Experiment::TorusGlobalZeros(_) => "torus-global-zeros",
            Experiment::TorusGlobalCrits(_) => "torus-global-crits",
            Experiment::SrcScan(_) => "src-scan",
            Experiment::LocalLimitScan(_) => "local-limit-scan",
            Experiment::L2Identity(_) => "l2-identity",
            Experiment::GramSuite(_) => "gram-suite",
            Experiment::ExponentSuite(_) => "exponent-suite",
            Experiment::TwoPointSuite(_) => "two-point-suite",
        }
    }

    /// Default parameters for an experiment id.
    pub fn default_for(id: &str) -> Option<Self> {
        Some(match id {
            "local-zeros" => Experiment::LocalZeros(LocalZeros::default()),
            "local-crits" => Experiment::LocalCrits(LocalCrits::default()),
            "torus-global-zeros" => Experiment::TorusGlobalZeros(TorusGlobal::zeros()),
            "torus-global-crits" => Experiment::TorusGlobalCrits(TorusGlobal::crits()),
            "src-scan" => Experiment::SrcScan(SrcScan::default()),
            "local-limit-scan" => Experiment::LocalLimitScan(LocalLimitScan::default()),
            "l2-identity" => Experiment::L2Identity(L2Identity::default()),
            "gram-suite" => Experiment::GramSuite(GramSuite::default()),
            "exponent-suite" => Experiment::ExponentSuite(ExponentSuite::default()),
            "two-point-suite" => Experiment::TwoPointSuite(TwoPointSuite::default()),
            _ => return None,
        })
    }
}

fn plane_waves(dim: usize) -> LocalEnsemble {
    LocalEnsemble::PlaneWaves {
        dim,
        waves: 256,
        mode: DirectionMode::IidUniform,
    }
}

/// Nodal measure in balls against the closed-form intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalZeros {
    pub ensemble: LocalEnsemble,
    /// Strictly increasing radii; variances must decrease along them.
    pub cells: Vec<CellSpec>,
    pub replicas: usize,
    /// Relative tolerance on each cell mean.
    pub tolerance: f64,
    pub weight: JetWeight,
}

impl Default for LocalZeros {
    fn default() -> Self {
        Self {
            ensemble: plane_waves(2),
            cells: vec![CellSpec {
                radius: 15.0,
                spacing: 0.02,
            }],
            replicas: 200,
            tolerance: 0.02,
            weight: JetWeight::One,
        }
    }
}

/// Critical-point density: field simulation against the Kac-Rice estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalCrits {
    pub ensemble: LocalEnsemble,
    pub cells: Vec<CellSpec>,
    pub replicas: usize,
    /// Pairwise relative tolerance between the estimators.
    pub tolerance: f64,
    pub mc_samples: usize,
    pub refine: bool,
}

impl Default for LocalCrits {
    fn default() -> Self {
        Self {
            ensemble: plane_waves(2),
            cells: vec![CellSpec {
                radius: 20.0,
                spacing: 0.15,
            }],
            replicas: 200,
            tolerance: 0.03,
            mc_samples: 10_000_000,
            refine: false,
        }
    }
}

/// Whole-torus nodal length and critical counts along a frequency schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TorusGlobal {
    pub lambdas: Vec<f64>,
    /// Side of the square torus.
    pub side: f64,
    pub replicas: usize,
    /// Grid cells per wavelength `2π/λ`.
    pub cells_per_wavelength: f64,
    pub zeros: bool,
    pub crits: bool,
    /// Relative tolerance on the normalized means.
    pub tolerance: f64,
    /// Draws for the critical intensity reference.
    pub mc_samples: usize,
}

impl TorusGlobal {
    pub fn zeros() -> Self {
        Self {
            zeros: true,
            crits: false,
            ..Self::default()
        }
    }

    pub fn crits() -> Self {
        Self {
            zeros: false,
            crits: true,
            ..Self::default()
        }
    }

    /// Grid spacing resolving each wavelength with at least the configured
    /// number of cells and dividing the side evenly.
    pub fn spacing(&self, lambda: f64) -> f64 {
        let nodes = (self.cells_per_wavelength * lambda * self.side / (2.0 * PI)).ceil();
        self.side / nodes
    }
}

impl Default for TorusGlobal {
    fn default() -> Self {
        Self {
            lambdas: vec![100.0, 200.0, 400.0],
            side: 1.0,
            replicas: 100,
            cells_per_wavelength: 25.0,
            zeros: true,
            crits: true,
            tolerance: 0.05,
            mc_samples: 1_000_000,
        }
    }
}

/// Off-diagonal decay of the torus and sphere projectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SrcScan {
    pub lambdas: Vec<f64>,
    pub side: f64,
    pub eps: f64,
    pub max_order: usize,
    pub pair_budget: usize,
    /// Torus sup must fall below this at `at_lambda`.
    pub threshold: f64,
    pub at_lambda: f64,
    pub sphere_degrees: Vec<usize>,
    /// Extra torus sides reported without a pass/fail verdict.
    pub informational_sides: Vec<f64>,
}

impl Default for SrcScan {
    fn default() -> Self {
        Self {
            lambdas: vec![100.0, 200.0, 400.0, 800.0],
            side: 1.0,
            eps: 0.5,
            max_order: 0,
            pair_budget: 20_000,
            threshold: 0.1,
            at_lambda: 400.0,
            sphere_degrees: vec![50, 100, 200],
            informational_sides: vec![2.0 * PI],
        }
    }
}

/// Uniform distance of rescaled torus covariances from the Bessel limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalLimitScan {
    pub lambdas: Vec<f64>,
    pub side: f64,
    pub radius: f64,
    pub max_order: usize,
    pub resolution: usize,
    pub threshold: f64,
    pub at_lambda: f64,
    pub informational_sides: Vec<f64>,
}

impl Default for LocalLimitScan {
    fn default() -> Self {
        Self {
            lambdas: vec![100.0, 200.0, 400.0, 800.0],
            side: 1.0,
            radius: 5.0,
            max_order: 0,
            resolution: 80,
            threshold: 0.05,
            at_lambda: 400.0,
            informational_sides: vec![2.0 * PI],
        }
    }
}

/// `‖Π_λ‖²` on the torus by Parseval and by quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct L2Identity {
    pub lambdas: Vec<f64>,
    pub side: f64,
    pub tolerance: f64,
    /// Known `(lambda, 1/dim)` pairs.
    pub expected: Vec<(f64, f64)>,
}

impl Default for L2Identity {
    fn default() -> Self {
        Self {
            lambdas: vec![50.0, 100.0],
            side: 1.0,
            tolerance: 1e-10,
            expected: vec![(50.0, 0.05)],
        }
    }
}

/// Positivity of Gram matrices of values and gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GramSuite {
    pub configurations: usize,
    pub max_points: usize,
    pub radius: f64,
    pub dims: Vec<usize>,
}

impl Default for GramSuite {
    fn default() -> Self {
        Self {
            configurations: 1000,
            max_points: 6,
            radius: 10.0,
            dims: vec![2, 3],
        }
    }
}

/// Log-log slopes of the two-point density factors near the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExponentSuite {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub samples: usize,
    pub den_slope: f64,
    pub den_tolerance: f64,
    pub y_slope: f64,
    pub y_tolerance: f64,
}

impl Default for ExponentSuite {
    fn default() -> Self {
        Self {
            r_min: 1e-2,
            r_max: 1e-1,
            points: 10,
            samples: 400_000,
            den_slope: -2.0,
            den_tolerance: 0.15,
            y_slope: 2.0,
            y_tolerance: 0.2,
        }
    }
}

impl ExponentSuite {
    pub fn radii(&self) -> Vec<f64> {
        let ratio = (self.r_max / self.r_min).ln();
        let last = self.points.saturating_sub(1).max(1) as f64;
        (0..self.points)
            .map(|k| self.r_min * (ratio * k as f64 / last).exp())
            .collect()
    }
}

/// Two-point critical correlation across separations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoPointSuite {
    pub radii: Vec<f64>,
    pub samples: usize,
    /// Separation where `K2` must be close to the squared intensity.
    pub far_radius: f64,
    pub tolerance: f64,
}

impl Default for TwoPointSuite {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            samples: 4_000_000,
            far_radius: 50.0,
            tolerance: 0.05,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_has_defaults_and_round_trips() {
        for id in EXPERIMENT_IDS {
            let exp = Experiment::default_for(id).unwrap();
            assert_eq!(exp.id(), id);
            let config = ExperimentConfig::new(exp, 17);
            let back: ExperimentConfig = serde_json::from_str(&config.to_json()).unwrap();
            assert_eq!(back, config);
        }
        assert!(Experiment::default_for("nope").is_none());
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"experiment": {"kind": "torus-global-zeros", "replicas": 7}}"#,
        )
        .unwrap();
        let Experiment::TorusGlobalZeros(t) = c.experiment else {
            panic!("wrong kind")
        };
        assert_eq!(t.replicas, 7);
        assert_eq!(t.lambdas, vec![100.0, 200.0, 400.0]);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn torus_spacing_resolves_the_wavelength() {
        let t = TorusGlobal::default();
        for lambda in [100.0, 400.0] {
            let h = t.spacing(lambda);
            assert!(h <= 2.0 * PI / (25.0 * lambda));
            assert!(((1.0 / h).round() - 1.0 / h).abs() < 1e-9);
        }
    }
}
