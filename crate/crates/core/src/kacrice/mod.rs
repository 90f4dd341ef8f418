//! Kac-Rice densities for zeros and critical points of the frequency-1
//! wave, with Monte Carlo cross-checks and non-degeneracy certificates.

mod decorrelation;
mod gram;
mod mc;
mod spectral;
mod two_point;

pub use decorrelation::{decorrelation_profile, fit_envelope, DecorrelationPoint, EnvelopeFit};
pub use gram::{gram_crits, gram_one_point, gram_zeros, GramCertificate, GRAM_RELATIVE_FLOOR};
pub use mc::{chunked_mean, CHUNK};
pub use spectral::{spectral_crit_intensity, spectral_zero_intensity};
pub use two_point::{
    crit_two_point, crit_two_point_at, near_diagonal_exponents, ExponentFit, TwoPointPoint,
};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{assemble_jet_covariance, GaussianLaw, JetOrders, JetSpec};
use crate::kernel::special::gamma;
use crate::kernel::IsotropicKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityKind {
    Zero,
    Crit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    /// The published constant `1/(4π√6)` for critical points in the plane.
    ReferenceConstant,
    /// Planar reduction to a one-dimensional integral.
    SemiAnalytic,
    ConditionalMc,
}

/// Expected count per unit volume of zeros (measure) or critical points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityResult {
    pub n: usize,
    pub kind: IntensityKind,
    pub value: f64,
    pub method: Method,
    pub mc_samples: usize,
    pub standard_error: f64,
}

impl IntensityResult {
    fn exact(n: usize, kind: IntensityKind, value: f64, method: Method) -> Self {
        Self {
            n,
            kind,
            value,
            method,
            mc_samples: 0,
            standard_error: 0.0,
        }
    }

    /// Whether two estimates agree within `k` combined standard errors.
    pub fn agrees_within_se(&self, other: &IntensityResult, k: f64) -> bool {
        let se = self.standard_error.hypot(other.standard_error);
        (self.value - other.value).abs() <= k * se
    }

    pub fn relative_gap(&self, other: &IntensityResult) -> f64 {
        (self.value / other.value - 1.0).abs()
    }
}

/// Nodal measure per unit volume, `Γ((n+1)/2) / (√(πn) Γ(n/2))`.
pub fn zero_intensity(n: usize) -> Result<IntensityResult> {
    if n < 2 {
        return Err(Error::UnsupportedDimension {
            n,
            context: "zero intensity (n >= 2)",
        });
    }
    let nf = n as f64;
    let value = gamma((nf + 1.0) / 2.0) / ((PI * nf).sqrt() * gamma(nf / 2.0));
    Ok(IntensityResult::exact(
        n,
        IntensityKind::Zero,
        value,
        Method::ClosedForm,
    ))
}

/// `E‖∇φ‖ / √(2π)` with `∇φ ~ N(0, Id/n)`, by Monte Carlo.
pub fn zero_intensity_mc(n: usize, samples: usize, seed: u64) -> Result<IntensityResult> {
    zero_intensity(n)?;
    let sd = (n as f64).recip().sqrt();
    let s = chunked_mean(samples, seed, "zero-intensity", n as u64, |rng| {
        (0..n)
            .map(|_| (sd * rng.sample::<f64, _>(StandardNormal)).powi(2))
            .sum::<f64>()
            .sqrt()
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

/// Gradient law and conditional Hessian law (given `∇φ = 0`) at one point,
/// unit normalization.
pub fn one_point_crit_laws(n: usize) -> Result<(GaussianLaw, GaussianLaw)> {
    let kernel = IsotropicKernel::<f64>::unit(n)?;
    let spec = JetSpec::uniform(vec![vec![0.0; n]], JetOrders::GRADIENT_HESSIAN)?;
    let law = assemble_jet_covariance(&kernel, &spec)?;
    let grad: Vec<usize> = (0..n).collect();
    let gradient = law.marginal(&grad)?;
    let hessian = law.condition(&grad, &vec![0.0; n])?;
    Ok((gradient, hessian))
}

/// Determinant of a symmetric matrix stored as its upper triangle,
/// row by row.
pub(crate) fn packed_det(n: usize, h: &[f64]) -> f64 {
    match n {
        2 => h[0] * h[2] - h[1] * h[1],
        3 => {
            let (a, b, c, d, e, f) = (h[0], h[1], h[2], h[3], h[4], h[5]);
            // [[a b c] [b d e] [c e f]]
            a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
        }
        _ => {
            let mut m = nalgebra::DMatrix::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    m[(i, j)] = h[k];
                    m[(j, i)] = h[k];
                    k += 1;
                }
            }
            m.determinant()
        }
    }
}

/// `E|x|` over `x` uniform on `[lo, hi]` for `x ↦ |3x² − 1|`, split at the
/// root and integrated by composite Simpson (exact for quadratics).
fn mean_abs_quadratic() -> f64 {
    let root = 3f64.sqrt().recip();
    let simpson = |a: f64, b: f64| {
        let f = |x: f64| (3.0 * x * x - 1.0).abs();
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    };
    // U uniform on [-1, 1]; by symmetry average over [0, 1]
    simpson(0.0, root) + simpson(root, 1.0)
}

/// Critical points per unit volume of the frequency-1 wave.
///
/// `ConditionalMc` averages `|det Hess|` over the Hessian law given a
/// vanishing gradient and multiplies by the gradient density at 0.
/// `SemiAnalytic` (plane only) writes `det Hess = (2Y₁² − Y₂² − Y₃²)/8` for
/// i.i.d. standard normals and uses `E|2Y₁² − Y₂² − Y₃²| = E[χ²₃]·E|3U² − 1|`
/// with `U` uniform on `[−1, 1]`.
pub fn crit_intensity(
    n: usize,
    method: Method,
    mc_samples: usize,
    seed: u64,
) -> Result<IntensityResult> {
    let unsupported = || Error::UnsupportedDimension {
        n,
        context: "this critical-intensity method",
    };
    match method {
        Method::ReferenceConstant => {
            if n != 2 {
                return Err(unsupported());
            }
            Ok(IntensityResult::exact(
                2,
                IntensityKind::Crit,
                1.0 / (4.0 * PI * 6f64.sqrt()),
                method,
            ))
        }
        Method::SemiAnalytic => {
            if n != 2 {
                return Err(unsupported());
            }
            let (gradient, _) = one_point_crit_laws(2)?;
            let chi_sq_mean = 3.0;
            let expected_abs_det = chi_sq_mean * mean_abs_quadratic() / 8.0;
            let value = gradient.density_at_zero()? * expected_abs_det;
            Ok(IntensityResult::exact(
                2,
                IntensityKind::Crit,
                value,
                method,
            ))
        }
        Method::ConditionalMc => {
            if n != 2 && n != 3 {
                return Err(unsupported());
            }
            let (gradient, hessian) = one_point_crit_laws(n)?;
            let dim = hessian.dim();
            let s = chunked_mean(mc_samples, seed, "crit-intensity", n as u64, |rng| {
                let mut z = [0.0; 6];
                let mut h = [0.0; 6];
                hessian.sample_into(rng, &mut z[..dim], &mut h[..dim]);
                packed_det(n, &h[..dim]).abs()
            });
            let den = gradient.density_at_zero()?;
            Ok(IntensityResult {
                n,
                kind: IntensityKind::Crit,
                value: den * s.mean,
                method,
                mc_samples,
                standard_error: den * s.standard_error,
            })
        }
        Method::ClosedForm => Err(Error::invalid(
            "no closed form is available for critical points",
        )),
    }
}

/// `Var N = E[N(N−1)] + E[N] − E[N]²`.
pub fn variance_from_factorial_moments(mean: f64, second_factorial: f64) -> f64 {
    second_factorial + mean - mean * mean
}
