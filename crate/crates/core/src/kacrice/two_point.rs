use serde::{Deserialize, Serialize};

use super::{chunked_mean, packed_det};
use crate::error::{Error, Result};
use crate::gaussian::{assemble_jet_covariance, JetOrders, JetSpec};
use crate::kernel::IsotropicKernel;
use crate::stats::fit_line;

/// Two-point critical-point correlation at separation `r`.
///
/// `den` is the joint gradient density at zero, `y` the conditional mean of
/// `|det Hess(u)|·|det Hess(v)|`, and `k2 = den·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointPoint {
    pub r: f64,
    pub den: f64,
    pub y: f64,
    pub y_standard_error: f64,
    pub k2: f64,
    pub k2_standard_error: f64,
}

/// Two-point function for the unit-normalized wave at points `u` and `v`.
pub fn crit_two_point_at(
    u: &[f64],
    v: &[f64],
    samples: usize,
    seed: u64,
    cell: u64,
) -> Result<TwoPointPoint> {
    let n = u.len();
    if n != v.len() || !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension {
            n,
            context: "two-point critical correlation (n = 2, 3)",
        });
    }
    let kernel = IsotropicKernel::<f64>::unit(n)?;
    let spec = JetSpec::uniform(vec![u.to_vec(), v.to_vec()], JetOrders::GRADIENT_HESSIAN)?;
    let law = assemble_jet_covariance(&kernel, &spec)?;
    let block = JetOrders::GRADIENT_HESSIAN.len(n);
    let hess_len = block - n;
    let gradients: Vec<usize> = (0..n).chain(block..block + n).collect();
    let den = law.marginal(&gradients)?.density_at_zero()?;
    let hessians = law
        .condition(&gradients, &vec![0.0; 2 * n])?
        .eigen_factored()?;

    let r = u
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let s = chunked_mean(samples, seed, "crit-two-point", cell, |rng| {
        let mut z = [0.0; 12];
        let mut h = [0.0; 12];
        hessians.sample_into(rng, &mut z[..2 * hess_len], &mut h[..2 * hess_len]);
        (packed_det(n, &h[..hess_len]) * packed_det(n, &h[hess_len..2 * hess_len])).abs()
    });
    Ok(TwoPointPoint {
        r,
        den,
        y: s.mean,
        y_standard_error: s.standard_error,
        k2: den * s.mean,
        k2_standard_error: den * s.standard_error,
    })
}

/// Two-point function in the plane at `u = 0`, `v = r·e₁`.
pub fn crit_two_point(r: f64, samples: usize, seed: u64) -> Result<TwoPointPoint> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "separation",
            value: r,
        });
    }
    crit_two_point_at(&[0.0, 0.0], &[r, 0.0], samples, seed, r.to_bits())
}

/// Log-log slopes of `den` and `y` against `r` near the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub points: Vec<TwoPointPoint>,
    /// Radii where conditioning failed, with the reason.
    pub dropped: Vec<(f64, String)>,
    pub den_slope: f64,
    pub den_slope_se: f64,
    pub y_slope: f64,
    pub y_slope_se: f64,
}

pub fn near_diagonal_exponents(radii: &[f64], samples: usize, seed: u64) -> Result<ExponentFit> {
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &r in radii {
        match crit_two_point(r, samples, seed) {
            Ok(p) => points.push(p),
            Err(e @ (Error::SingularConditioning { .. } | Error::Degenerate { .. })) => {
                dropped.push((r, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    if points.len() < 3 {
        return Err(Error::invalid(
            "need at least three usable radii for an exponent fit",
        ));
    }
    let log_r: Vec<f64> = points.iter().map(|p| p.r.ln()).collect();
    let log_den: Vec<f64> = points.iter().map(|p| p.den.ln()).collect();
    let log_y: Vec<f64> = points.iter().map(|p| p.y.ln()).collect();
    let too_few = || Error::invalid("degenerate exponent fit");
    let den = fit_line(&log_r, &log_den).ok_or_else(too_few)?;
    let y = fit_line(&log_r, &log_y).ok_or_else(too_few)?;
    Ok(ExponentFit {
        points,
        dropped,
        den_slope: den.slope,
        den_slope_se: den.slope_standard_error,
        y_slope: y.slope,
        y_slope_se: y.slope_standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn den_depends_only_on_distance() {
        let a = crit_two_point_at(&[0.0, 0.0], &[1.3, 0.0], 10, 1, 0).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let b =
            crit_two_point_at(&[0.5, -1.0], &[0.5 + 1.3 * c, -1.0 + 1.3 * s], 10, 1, 0).unwrap();
        assert!((a.den / b.den - 1.0).abs() < 1e-10);
    }

    #[test]
    fn near_diagonal_scaling() {
        let radii: Vec<f64> = (0..8).map(|k| 0.01 * 10f64.powf(k as f64 / 7.0)).collect();
        let fit = near_diagonal_exponents(&radii, 20_000, 4).unwrap();
        assert!(fit.dropped.is_empty());
        assert!((fit.den_slope + 2.0).abs() < 0.05, "{}", fit.den_slope);
        assert!((fit.y_slope - 2.0).abs() < 0.1, "{}", fit.y_slope);
    }

    #[test]
    fn coincident_points_are_rejected() {
        assert!(crit_two_point_at(&[0.0, 0.0], &[0.0, 0.0], 10, 1, 0).is_err());
        assert!(crit_two_point(0.0, 10, 1).is_err());
    }
}
