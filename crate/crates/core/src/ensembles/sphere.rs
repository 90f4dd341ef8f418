use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Jet, Manifold, WaveField};
use crate::error::{Error, Result};
use crate::kernel::special::legendre;

/// Largest degree supported by the harmonic recurrences.
pub const MAX_DEGREE: usize = 200;

/// `sqrt(4π/(2ℓ+1)) Σ_m c_m Y_ℓm` for a real orthonormal basis `Y_ℓm`,
/// so that the covariance is `P_ℓ(cos d(x, y))`.
///
/// Coefficients are ordered `m = 0`, then `(cos m, sin m)` for `m = 1..=ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereWave {
    ell: usize,
    coeffs: Vec<f64>,
}

impl SphereWave {
    pub fn from_coefficients(ell: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_degree(ell)?;
        if coeffs.len() != 2 * ell + 1 {
            return Err(Error::invalid(
                "a degree-l harmonic needs 2l+1 coefficients",
            ));
        }
        Ok(Self { ell, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.ell
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Laplace frequency `sqrt(ℓ(ℓ+1))`.
    pub fn frequency(&self) -> f64 {
        ((self.ell * (self.ell + 1)) as f64).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ell: self.ell,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    fn evaluate(&self, x: &[f64], with_derivatives: bool) -> Jet {
        let ell = self.ell;
        let q = associated_q(ell, x[2]);
        let ratio = |m: usize| -> f64 {
            if m >= ell {
                0.0
            } else if m == 0 {
                ((ell * (ell + 1)) as f64 / 2.0).sqrt()
            } else {
                (((ell + m + 1) * (ell - m)) as f64).sqrt()
            }
        };
        let at = |m: usize| q.get(m).copied().unwrap_or(0.0);
        let w = Complex64::new(x[0], x[1]);
        let mut jet = Jet::zeros(3);
        // w^{m-2}, w^{m-1}, w^m
        let mut pow_m2 = Complex64::new(0.0, 0.0);
        let mut pow_m1 = Complex64::new(0.0, 0.0);
        let mut pow_m = Complex64::new(1.0, 0.0);
        for m in 0..=ell {
            if m > 0 {
                pow_m2 = pow_m1;
                pow_m1 = pow_m;
                pow_m *= w;
            }
            let (c, s) = if m == 0 {
                (self.coeffs[0], 0.0)
            } else {
                (self.coeffs[2 * m - 1], self.coeffs[2 * m])
            };
            let lin = |u: Complex64| c * u.re + s * u.im;
            let q0 = at(m);
            jet.value += q0 * lin(pow_m);
            if !with_derivatives {
                continue;
            }
            let q1 = ratio(m) * at(m + 1);
            let q2 = ratio(m) * ratio(m + 1) * at(m + 2);
            let mf = m as f64;
            let i = Complex64::i();
            let d1 = pow_m1 * mf;
            let d2 = pow_m2 * (mf * (mf - 1.0));
            jet.gradient[0] += q0 * lin(d1);
            jet.gradient[1] += q0 * lin(i * d1);
            jet.gradient[2] += q1 * lin(pow_m);
            jet.hessian[(0, 0)] += q0 * lin(d2);
            jet.hessian[(0, 1)] += q0 * lin(i * d2);
            jet.hessian[(1, 1)] -= q0 * lin(d2);
            jet.hessian[(0, 2)] += q1 * lin(d1);
            jet.hessian[(1, 2)] += q1 * lin(i * d1);
            jet.hessian[(2, 2)] += q2 * lin(pow_m);
        }
        jet.hessian[(1, 0)] = jet.hessian[(0, 1)];
        jet.hessian[(2, 0)] = jet.hessian[(0, 2)];
        jet.hessian[(2, 1)] = jet.hessian[(1, 2)];
        let norm = (4.0 * PI / (2 * ell + 1) as f64).sqrt();
        jet.value *= norm;
        jet.gradient *= norm;
        jet.hessian *= norm;
        jet
    }
}

fn check_degree(ell: usize) -> Result<()> {
    if ell == 0 || ell > MAX_DEGREE {
        return Err(Error::Domain {
            what: "harmonic degree",
            value: ell as f64,
        });
    }
    Ok(())
}

/// `Q_ℓ^m(z)` for `m = 0..=ℓ`: the polynomial part of the orthonormal real
/// harmonic, `Y_ℓm = Q_ℓ^m(z)·Re/Im (x+iy)^m` on the sphere.
fn associated_q(ell: usize, z: f64) -> Vec<f64> {
    (0..=ell)
        .map(|m| {
            let mf = m as f64;
            let mut seed = ((2.0 * mf + 1.0) / (4.0 * PI)).sqrt();
            if m > 0 {
                let prod: f64 = (1..=m)
                    .map(|k| (2 * k - 1) as f64 / (2 * k) as f64)
                    .product();
                seed *= (2.0 * prod).sqrt();
            }
            let mut prev = 0.0;
            let mut cur = seed;
            for l in m + 1..=ell {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = if l >= m + 2 {
                    let lm = lf - 1.0;
                    ((lm * lm - mf * mf) / (4.0 * lm * lm - 1.0)).sqrt()
                } else {
                    0.0
                };
                let next = a * (z * cur - b * prev);
                prev = cur;
                cur = next;
            }
            cur
        })
        .collect()
}

/// Random degree-`ℓ` spherical harmonic with i.i.d. standard coefficients.
pub fn sample_sphere<R: Rng + ?Sized>(ell: usize, rng: &mut R) -> Result<SphereWave> {
    check_degree(ell)?;
    let coeffs = (0..2 * ell + 1)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    SphereWave::from_coefficients(ell, coeffs)
}

/// Unit-normalized covariance `P_ℓ(cos θ)`.
pub fn sphere_kernel(ell: usize, theta: f64) -> f64 {
    legendre(ell, theta.cos())
}

impl WaveField for SphereWave {
    fn dim(&self) -> usize {
        3
    }
    fn manifold(&self) -> Manifold {
        Manifold::Sphere
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x, false).value
    }
    fn jet(&self, x: &[f64]) -> Jet {
        self.evaluate(x, true)
    }
}

/// Values of every real basis harmonic at `x` (coefficient order).
#[cfg(test)]
fn basis_values(ell: usize, x: &[f64]) -> nalgebra::DVector<f64> {
    let n = 2 * ell + 1;
    let mut out = nalgebra::DVector::zeros(n);
    let mut unit = vec![0.0; n];
    for k in 0..n {
        unit[k] = 1.0;
        out[k] = SphereWave {
            ell,
            coeffs: unit.clone(),
        }
        .evaluate(x, false)
        .value;
        unit[k] = 0.0;
    }
    out
}
