use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{cross_block, jet_components, JetOrders};
use crate::kernel::IsotropicKernel;
use crate::stats::fit_line;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationPoint {
    pub r: f64,
    pub norm: f64,
}

/// Spectral norm of `Cov(jet(0), jet(r·e₁))` for the full second-order jet
/// of the unit-normalized wave.
pub fn decorrelation_profile(n: usize, radii: &[f64]) -> Result<Vec<DecorrelationPoint>> {
    let kernel = IsotropicKernel::<f64>::unit(n)?;
    let comps = jet_components(n, JetOrders::FULL);
    let origin = vec![0.0; n];
    radii
        .iter()
        .map(|&r| {
            if !(r >= 0.0) {
                return Err(Error::Domain {
                    what: "separation",
                    value: r,
                });
            }
            let mut v = origin.clone();
            v[0] = r;
            let block = cross_block(&kernel, &origin, &v, &comps, &comps)?;
            let norm = block.singular_values().max();
            Ok(DecorrelationPoint { r, norm })
        })
        .collect()
}

/// Power-law envelope `norm ≲ constant·r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    /// Log-log slope through the per-period maxima.
    pub exponent: f64,
    pub exponent_se: f64,
    /// Smallest `C` with `norm ≤ C·r^(−(n−1)/2)` on the profile.
    pub constant: f64,
    pub reference_exponent: f64,
}

/// Fits the envelope on a profile sampled densely enough to resolve one
/// oscillation period `2π`.
pub fn fit_envelope(n: usize, profile: &[DecorrelationPoint]) -> Result<EnvelopeFit> {
    let reference_exponent = -((n as f64) - 1.0) / 2.0;
    let positive: Vec<_> = profile.iter().filter(|p| p.r > 0.0).copied().collect();
    let constant = positive
        .iter()
        .map(|p| p.norm * p.r.powf(-reference_exponent))
        .fold(0.0, f64::max);
    let (lo, hi) = positive
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p.r), hi.max(p.r))
        });
    let windows = ((hi - lo) / (2.0 * PI)).floor() as usize;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for w in 0..windows {
        let (a, b) = (lo + 2.0 * PI * w as f64, lo + 2.0 * PI * (w + 1) as f64);
        let peak = positive
            .iter()
            .filter(|p| p.r >= a && p.r < b)
            .max_by(|x, y| x.norm.total_cmp(&y.norm));
        if let Some(p) = peak {
            xs.push(p.r.ln());
            ys.push(p.norm.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::invalid(
            "profile spans fewer than three oscillation periods",
        ));
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::invalid("degenerate envelope fit"))?;
    Ok(EnvelopeFit {
        exponent: fit.slope,
        exponent_se: fit.slope_standard_error,
        constant,
        reference_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{jet_covariance_matrix, JetSpec};

    fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        (0..=((hi - lo) / step).round() as usize)
            .map(|k| lo + step * k as f64)
            .collect()
    }

    #[test]
    fn zero_separation_is_the_one_point_covariance() {
        for n in [2, 3] {
            let p = decorrelation_profile(n, &[0.0]).unwrap();
            let spec = JetSpec::uniform(vec![vec![0.0; n]], JetOrders::FULL).unwrap();
            let cov = jet_covariance_matrix(&IsotropicKernel::unit(n).unwrap(), &spec).unwrap();
            let top = nalgebra::SymmetricEigen::new(cov).eigenvalues.max();
            assert!((p[0].norm - top).abs() < 1e-13);
        }
    }

    #[test]
    fn envelopes_follow_the_dimension() {
        for (n, tol) in [(2, 0.08), (3, 0.08)] {
            let profile = decorrelation_profile(n, &grid(5.0, 100.0, 0.05)).unwrap();
            let fit = fit_envelope(n, &profile).unwrap();
            assert!(
                (fit.exponent - fit.reference_exponent).abs() < tol,
                "{n}: {fit:?}"
            );
            let last = profile.last().unwrap();
            assert!(last.norm <= fit.constant * last.r.powf(fit.reference_exponent));
        }
    }

    #[test]
    fn negative_radius_is_rejected() {
        assert!(decorrelation_profile(2, &[-1.0]).is_err());
    }
}
