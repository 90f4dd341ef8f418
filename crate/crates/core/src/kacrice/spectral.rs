use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{chunked_mean, packed_det, IntensityKind, IntensityResult, Method};
use crate::error::{Error, Result};
use crate::gaussian::GaussianLaw;

/// Gradient and Hessian covariances of a stationary field whose spectral
/// measure is uniform on `frequencies`, a set closed under negation.
fn spectral_laws(frequencies: &[Vec<f64>]) -> Result<(GaussianLaw, GaussianLaw)> {
    let n = frequencies.first().map_or(0, Vec::len);
    if !(2..=3).contains(&n) || frequencies.iter().any(|w| w.len() != n) {
        return Err(Error::UnsupportedDimension {
            n,
            context: "spectral Kac-Rice densities (n = 2, 3)",
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let weight = 1.0 / frequencies.len() as f64;
    let mut gradient = DMatrix::zeros(n, n);
    let mut hessian = DMatrix::zeros(pairs.len(), pairs.len());
    for w in frequencies {
        for i in 0..n {
            for j in 0..n {
                gradient[(i, j)] += weight * w[i] * w[j];
            }
        }
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for (b, &(k, l)) in pairs.iter().enumerate() {
                hessian[(a, b)] += weight * w[i] * w[j] * w[k] * w[l];
            }
        }
    }
    // gradient and Hessian are uncorrelated: their cross moments are odd
    Ok((GaussianLaw::new(gradient)?, GaussianLaw::new(hessian)?))
}

/// Critical points per unit volume for a discrete symmetric spectrum.
pub fn spectral_crit_intensity(
    frequencies: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<IntensityResult> {
    let (gradient, hessian) = spectral_laws(frequencies)?;
    let n = gradient.dim();
    let dim = hessian.dim();
    let den = gradient.density_at_zero()?;
    let s = chunked_mean(samples, seed, "spectral-crit-intensity", n as u64, |rng| {
        let mut z = [0.0; 6];
        let mut h = [0.0; 6];
        hessian.sample_into(rng, &mut z[..dim], &mut h[..dim]);
        packed_det(n, &h[..dim]).abs()
    });
    Ok(IntensityResult {
        n,
        kind: IntensityKind::Crit,
        value: den * s.mean,
        method: Method::ConditionalMc,
        mc_samples: samples,
        standard_error: den * s.standard_error,
    })
}

/// Nodal measure per unit volume for a discrete symmetric spectrum,
/// `E‖∇φ‖ / √(2π)`.
pub fn spectral_zero_intensity(
    frequencies: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<IntensityResult> {
    let (gradient, _) = spectral_laws(frequencies)?;
    let n = gradient.dim();
    let s = chunked_mean(samples, seed, "spectral-zero-intensity", n as u64, |rng| {
        let mut z = [0.0; 3];
        let mut g = [0.0; 3];
        gradient.sample_into(rng, &mut z[..n], &mut g[..n]);
        g[..n].iter().map(|x| x * x).sum::<f64>().sqrt()
    });
    let norm = (2.0 * PI).sqrt().recip();
    Ok(IntensityResult {
        n,
        kind: IntensityKind::Zero,
        value: s.mean * norm,
        method: Method::ConditionalMc,
        mc_samples: samples,
        standard_error: s.standard_error * norm,
    })
}
