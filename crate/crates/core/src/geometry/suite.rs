use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    critical_points, critical_points_checked, nodal_measure, CritResult, JetWeight, NodalResult,
    Region,
};
use crate::ensembles::{
    rescale_at, sample_rwm, sample_sphere, sample_torus, DirectionMode, TorusSpectrum, WaveField,
};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::Summary;

/// Ensemble sampled by [`local_statistic_suite`], in frequency-1 coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LocalEnsemble {
    PlaneWaves {
        dim: usize,
        waves: usize,
        #[serde(default)]
        mode: DirectionMode,
    },
    /// Unit torus window at `lambda`, pulled back around `center`.
    Torus { lambda: f64, center: Vec<f64> },
    /// Degree-`ell` harmonic pulled back around `center` at scale `sqrt(ℓ(ℓ+1))`.
    Sphere { ell: usize, center: Vec<f64> },
}

impl LocalEnsemble {
    pub fn dim(&self) -> usize {
        match self {
            LocalEnsemble::PlaneWaves { dim, .. } => *dim,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub zeros: bool,
    pub crits: bool,
}

/// One ball radius with its grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub radius: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSuiteConfig {
    pub ensemble: LocalEnsemble,
    pub cells: Vec<CellSpec>,
    pub replicas: usize,
    pub statistics: Statistics,
    #[serde(default)]
    pub zero_weight: JetWeight,
    #[serde(default)]
    pub crit_weight: JetWeight,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Re-run critical-point searches at `h/2` (and `h/4` on disagreement).
    #[serde(default)]
    pub refine_crits: bool,
}

fn default_newton_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    30
}

/// Minimum replica count of a suite.
pub const MIN_REPLICAS: usize = 50;

/// Per-radius estimates across replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCell {
    pub radius: f64,
    pub spacing: f64,
    pub zeros: Option<Summary>,
    pub crits: Option<Summary>,
    /// `Z_r(ψ)` per replica.
    pub zero_values: Vec<f64>,
    /// `C_r(ψ)` per replica.
    pub crit_values: Vec<f64>,
    /// Non-degenerate critical counts per replica.
    pub crit_counts: Vec<usize>,
    /// Mean count per Hessian index.
    pub signature_means: Vec<f64>,
    /// Replicas whose critical counts changed under refinement.
    pub refinements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSuite {
    pub cells: Vec<LocalCell>,
}

struct ReplicaCell {
    zero: f64,
    crit: f64,
    count: usize,
    signatures: Vec<usize>,
    refined: bool,
}

fn measure<F: WaveField>(field: &F, config: &LocalSuiteConfig) -> Result<Vec<ReplicaCell>> {
    let dim = config.ensemble.dim();
    let center = vec![0.0; dim];
    config
        .cells
        .iter()
        .map(|cell| {
            let region = Region::ball(&center, cell.radius);
            let zero = if config.statistics.zeros {
                nodal_measure(field, &region, cell.spacing, config.zero_weight)?.normalized()
            } else {
                f64::NAN
            };
            let (crit, count, signatures, refined) = if config.statistics.crits {
                if config.refine_crits {
                    let checked = critical_points_checked(
                        field,
                        &region,
                        cell.spacing,
                        config.newton_tol,
                        config.max_iter,
                        config.crit_weight,
                    )?;
                    let r = checked.result;
                    (
                        r.normalized(),
                        r.count(),
                        r.signature_counts,
                        !checked.agreed,
                    )
                } else {
                    let r = critical_points(
                        field,
                        &region,
                        cell.spacing,
                        config.newton_tol,
                        config.max_iter,
                        config.crit_weight,
                    )?;
                    (r.normalized(), r.count(), r.signature_counts, false)
                }
            } else {
                (f64::NAN, 0, vec![0; dim + 1], false)
            };
            Ok(ReplicaCell {
                zero,
                crit,
                count,
                signatures,
                refined,
            })
        })
        .collect()
}

/// Work done on one sampled replica field.
trait Visit {
    type Out;
    fn visit<F: WaveField>(&self, field: &F, config: &LocalSuiteConfig) -> Result<Self::Out>;
}

struct Measure;

impl Visit for Measure {
    type Out = Vec<ReplicaCell>;
    fn visit<F: WaveField>(&self, field: &F, config: &LocalSuiteConfig) -> Result<Self::Out> {
        measure(field, config)
    }
}

struct Geometry;

impl Visit for Geometry {
    type Out = Vec<ReplicaGeometry>;
    fn visit<F: WaveField>(&self, field: &F, config: &LocalSuiteConfig) -> Result<Self::Out> {
        let center = vec![0.0; config.ensemble.dim()];
        config
            .cells
            .iter()
            .map(|cell| {
                let region = Region::ball(&center, cell.radius);
                let nodal = config
                    .statistics
                    .zeros
                    .then(|| nodal_measure(field, &region, cell.spacing, config.zero_weight))
                    .transpose()?;
                let crits = config
                    .statistics
                    .crits
                    .then(|| {
                        critical_points(
                            field,
                            &region,
                            cell.spacing,
                            config.newton_tol,
                            config.max_iter,
                            config.crit_weight,
                        )
                    })
                    .transpose()?;
                Ok(ReplicaGeometry {
                    radius: cell.radius,
                    nodal,
                    crits,
                })
            })
            .collect()
    }
}

fn with_replica<V: Visit>(
    config: &LocalSuiteConfig,
    seed: u64,
    label: &str,
    index: usize,
    visitor: &V,
) -> Result<V::Out> {
    let mut rng = stream_rng(seed, label, 0, index as u64);
    match &config.ensemble {
        LocalEnsemble::PlaneWaves { dim, waves, mode } => {
            let field = sample_rwm(*dim, *waves, *mode, &mut rng)?;
            visitor.visit(&field, config)
        }
        LocalEnsemble::Torus { lambda, center } => {
            let spectrum = TorusSpectrum::new(*lambda)?;
            let field = sample_torus(&spectrum, &mut rng);
            visitor.visit(&rescale_at(&field, center, *lambda)?, config)
        }
        LocalEnsemble::Sphere { ell, center } => {
            let field = sample_sphere(*ell, &mut rng)?;
            let scale = field.frequency();
            visitor.visit(&rescale_at(&field, center, scale)?, config)
        }
    }
}

/// Nodal set and critical points of one replica, per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaGeometry {
    pub radius: f64,
    pub nodal: Option<NodalResult>,
    pub crits: Option<CritResult>,
}

/// Geometry of replica `index`, drawn from the same stream the suite uses.
pub fn replica_geometry(
    config: &LocalSuiteConfig,
    seed: u64,
    label: &str,
    index: usize,
) -> Result<Vec<ReplicaGeometry>> {
    with_replica(config, seed, label, index, &Geometry)
}

/// Means and variances of `Z_r(ψ)` and `C_r(ψ)` over seeded replicas.
///
/// Replica `i` draws from stream `(label, 0, i)` under `seed`; results are
/// reduced in replica order.
pub fn local_statistic_suite(
    config: &LocalSuiteConfig,
    seed: u64,
    label: &str,
) -> Result<LocalSuite> {
    if config.replicas < MIN_REPLICAS {
        return Err(Error::invalid(format!(
            "at least {MIN_REPLICAS} replicas are required"
        )));
    }
    if config.cells.is_empty() || config.cells.windows(2).any(|w| w[1].radius <= w[0].radius) {
        return Err(Error::invalid(
            "radii must be non-empty and strictly increasing",
        ));
    }
    let per_replica: Vec<Vec<ReplicaCell>> = (0..config.replicas)
        .into_par_iter()
        .map(|i| with_replica(config, seed, label, i, &Measure))
        .collect::<Result<_>>()?;
    let dim = config.ensemble.dim();
    let cells = config
        .cells
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let zero_values: Vec<f64> = per_replica.iter().map(|r| r[c].zero).collect();
            let crit_values: Vec<f64> = per_replica.iter().map(|r| r[c].crit).collect();
            let crit_counts: Vec<usize> = per_replica.iter().map(|r| r[c].count).collect();
            let signature_means = (0..=dim)
                .map(|q| {
                    per_replica
                        .iter()
                        .map(|r| r[c].signatures[q] as f64)
                        .sum::<f64>()
                        / config.replicas as f64
                })
                .collect();
            LocalCell {
                radius: spec.radius,
                spacing: spec.spacing,
                zeros: config.statistics.zeros.then(|| Summary::of(&zero_values)),
                crits: config.statistics.crits.then(|| Summary::of(&crit_values)),
                zero_values: if config.statistics.zeros {
                    zero_values
                } else {
                    vec![]
                },
                crit_values: if config.statistics.crits {
                    crit_values
                } else {
                    vec![]
                },
                crit_counts: if config.statistics.crits {
                    crit_counts
                } else {
                    vec![]
                },
                signature_means,
                refinements: per_replica.iter().filter(|r| r[c].refined).count(),
            }
        })
        .collect();
    Ok(LocalSuite { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(ensemble: LocalEnsemble) -> LocalSuiteConfig {
        LocalSuiteConfig {
            ensemble,
            cells: vec![
                CellSpec {
                    radius: 2.0,
                    spacing: 0.1,
                },
                CellSpec {
                    radius: 4.0,
                    spacing: 0.1,
                },
            ],
            replicas: 50,
            statistics: Statistics {
                zeros: true,
                crits: true,
            },
            zero_weight: JetWeight::One,
            crit_weight: JetWeight::One,
            newton_tol: 1e-10,
            max_iter: 30,
            refine_crits: false,
        }
    }

    #[test]
    fn deterministic_and_plausible() {
        let cfg = small(LocalEnsemble::PlaneWaves {
            dim: 2,
            waves: 64,
            mode: DirectionMode::Equispaced,
        });
        let a = local_statistic_suite(&cfg, 17, "test").unwrap();
        let b = local_statistic_suite(&cfg, 17, "test").unwrap();
        assert_eq!(a, b);
        let z = a.cells[1].zeros.unwrap();
        assert!((z.mean - 0.3536).abs() < 0.05, "{z:?}");
        assert_eq!(a.cells[1].zero_values.len(), 50);
    }

    #[test]
    fn torus_and_sphere_pullbacks_run() {
        let mut cfg = small(LocalEnsemble::Torus {
            lambda: 400.0,
            center: vec![0.1, 0.2],
        });
        cfg.statistics.crits = false;
        let t = local_statistic_suite(&cfg, 1, "torus").unwrap();
        assert!(t.cells[0].zeros.unwrap().mean > 0.2);
        cfg.ensemble = LocalEnsemble::Sphere {
            ell: 20,
            center: vec![0.0, 0.6, 0.8],
        };
        let s = local_statistic_suite(&cfg, 1, "sphere").unwrap();
        assert!(s.cells[0].zeros.unwrap().mean > 0.2);
    }

    #[test]
    fn validates_schedule() {
        let mut cfg = small(LocalEnsemble::PlaneWaves {
            dim: 2,
            waves: 8,
            mode: DirectionMode::IidUniform,
        });
        cfg.cells.reverse();
        assert!(local_statistic_suite(&cfg, 0, "x").is_err());
        cfg.cells.reverse();
        cfg.replicas = 10;
        assert!(local_statistic_suite(&cfg, 0, "x").is_err());
    }
}
