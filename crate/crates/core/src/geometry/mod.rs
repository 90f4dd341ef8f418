//! Nodal sets and critical points of realized fields on grids.

mod crits;
mod nodal;
mod suite;

pub use crits::{
    critical_points, critical_points_checked, CheckedCrits, CritDiagnostics, CritResult,
    CriticalPoint,
};
pub use nodal::{nodal_measure, NodalResult};
pub use suite::{
    local_statistic_suite, replica_geometry, CellSpec, LocalCell, LocalEnsemble, LocalSuite,
    LocalSuiteConfig, ReplicaGeometry, Statistics, MIN_REPLICAS,
};

use serde::{Deserialize, Serialize};

use crate::ensembles::{Grid, Jet};
use crate::error::{Error, Result};
use crate::kernel::special::gamma;

/// Domain over which a statistic is accumulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Region {
    /// Cells (or refined points) within `radius` of `center`.
    Ball { center: Vec<f64>, radius: f64 },
    /// The whole square torus `[0, side)^2`, periodic grid.
    Torus { side: f64 },
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Region::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Torus { .. } => 2,
        }
    }

    /// Lebesgue measure of the region.
    pub fn volume(&self) -> f64 {
        match self {
            Region::Ball { center, radius } => ball_volume(center.len(), *radius),
            Region::Torus { side } => side * side,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Region::Torus { .. })
    }

    /// Grid covering the region. Torus grids have `ceil(side/h)` nodes per
    /// axis and wrap around.
    pub(crate) fn grid(&self, h: f64) -> Result<Grid> {
        match self {
            Region::Ball { center, radius } => Grid::cube(center, radius + h, h),
            Region::Torus { side } => {
                let nodes = (side / h).ceil() as usize;
                Grid::new(vec![0.0, 0.0], side / nodes as f64, vec![nodes, nodes])
            }
        }
    }

    pub(crate) fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => {
                center
                    .iter()
                    .zip(x)
                    .map(|(c, y)| (c - y).powi(2))
                    .sum::<f64>()
                    <= radius * radius
            }
            Region::Torus { .. } => true,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Region::Ball { center, radius } => {
                if !(*radius > 0.0) || center.is_empty() {
                    return Err(Error::invalid("ball needs a positive radius and a center"));
                }
            }
            Region::Torus { side } => {
                if !(*side > 0.0) {
                    return Err(Error::invalid("torus side must be positive"));
                }
            }
        }
        Ok(())
    }
}

pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    let half = dim as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0) * radius.powi(dim as i32)
}

/// Test function `ψ(u, jet)` applied to nodal elements or critical points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "threshold")]
pub enum JetWeight {
    #[default]
    One,
    /// `1{‖∇φ‖ > t}`.
    GradientNormAbove(f64),
    /// `1{φ > t}` (critical values above a level).
    ValueAbove(f64),
    /// `1{index = q}` for critical points.
    Index(usize),
}

impl JetWeight {
    pub fn needs_jet(&self) -> bool {
        !matches!(self, JetWeight::One)
    }

    pub fn eval(&self, jet: Option<&Jet>, index: Option<usize>) -> f64 {
        let indicator = |b: bool| if b { 1.0 } else { 0.0 };
        match (self, jet) {
            (JetWeight::One, _) => 1.0,
            (JetWeight::GradientNormAbove(t), Some(j)) => indicator(j.gradient.norm() > *t),
            (JetWeight::ValueAbove(t), Some(j)) => indicator(j.value > *t),
            (JetWeight::Index(q), _) => indicator(index == Some(*q)),
            (_, None) => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        assert!((ball_volume(2, 2.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((ball_volume(3, 1.0) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(Region::Torus { side: 2.0 }.volume(), 4.0);
    }
}
