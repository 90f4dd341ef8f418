use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{jet_covariance_matrix, min_eigenvalue, JetOrders, JetSpec};
use crate::kernel::{IsotropicKernel, Normalization};

/// Positivity threshold relative to the trace.
pub const GRAM_RELATIVE_FLOOR: f64 = 1e-12;
/// Closest admissible pair of points for a configuration Gram matrix.
pub const MIN_SEPARATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub positive: bool,
}

impl GramCertificate {
    fn of(m: &DMatrix<f64>) -> Self {
        let min = min_eigenvalue(m);
        let trace = m.trace();
        Self {
            size: m.nrows(),
            min_eigenvalue: min,
            trace,
            positive: min > GRAM_RELATIVE_FLOOR * trace,
        }
    }
}

fn configuration(points: &[Vec<f64>], orders: JetOrders) -> Result<GramCertificate> {
    let n = points.first().map_or(0, Vec::len);
    let kernel = IsotropicKernel::<f64>::new(n, Normalization::SphereArea)?;
    let spec = JetSpec::uniform(points.to_vec(), orders)?;
    if points.len() > 1 && spec.min_separation() <= MIN_SEPARATION {
        let mut closest = (0, 1, f64::INFINITY);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if d < closest.2 {
                    closest = (i, j, d);
                }
            }
        }
        return Err(Error::DuplicatePoints {
            first: closest.0,
            second: closest.1,
            separation: closest.2,
        });
    }
    Ok(GramCertificate::of(&jet_covariance_matrix(&kernel, &spec)?))
}

/// Covariance of the values at distinct points.
pub fn gram_zeros(points: &[Vec<f64>]) -> Result<GramCertificate> {
    configuration(points, JetOrders::VALUE)
}

/// Covariance of the gradients at distinct points.
pub fn gram_crits(points: &[Vec<f64>]) -> Result<GramCertificate> {
    configuration(points, JetOrders::GRADIENT)
}

/// Covariance of a jet at a single point.
pub fn gram_one_point(n: usize, orders: JetOrders) -> Result<GramCertificate> {
    configuration(&[vec![0.0; n]], orders)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_structure() {
        for n in [2, 3] {
            assert!(
                gram_one_point(n, JetOrders::GRADIENT_HESSIAN)
                    .unwrap()
                    .positive
            );
            assert!(
                gram_one_point(n, JetOrders::VALUE_GRADIENT)
                    .unwrap()
                    .positive
            );
            // φ + Δφ = 0 ties the value to the Hessian trace
            let full = gram_one_point(n, JetOrders::FULL).unwrap();
            assert!(!full.positive, "{full:?}");
            assert!(full.min_eigenvalue.abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_points_error() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1e-9, 0.0]];
        assert!(matches!(
            gram_zeros(&pts),
            Err(Error::DuplicatePoints {
                first: 0,
                second: 2,
                ..
            })
        ));
    }

    #[test]
    fn bessel_zero_separation_gives_identity() {
        let g = gram_zeros(&[vec![0.0, 0.0], vec![2.404825557695773, 0.0]]).unwrap();
        assert!((g.min_eigenvalue - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn sphere_area_normalization_scales_trace() {
        let g = gram_zeros(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!((g.trace - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(g.positive);
    }
}
