use num_complex::Complex;

use super::special::{bessel_j_normalized, chebyshev, legendre};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Zonal harmonic of degree `k` normalized to 1 on its axis, as a function
/// of `cos θ = ⟨û, ω⟩`. Implemented for `n ∈ {2, 3}`.
pub fn zonal_harmonic<T: Real>(n: usize, k: usize, cos_theta: T) -> Result<T> {
    match n {
        2 => Ok(chebyshev(k, cos_theta)),
        3 => Ok(legendre(k, cos_theta)),
        _ => Err(Error::UnsupportedDimension {
            n,
            context: "zonal harmonics (n in {2, 3})",
        }),
    }
}

/// Dimension of the degree-`k` spherical harmonics on `S^{n-1}`.
fn harmonic_dimension(n: usize, k: usize) -> usize {
    match (n, k) {
        (_, 0) => 1,
        (2, _) => 2,
        _ => 2 * k + 1,
    }
}

/// Truncated plane-wave expansion
/// `Σ_{k≤K} C_k (i|u|/2)^k j_{k+α}(|u|) Z_k(û, w)` with `C_k = c_k d_k`,
/// `c_k = Γ(α+1)/Γ(α+k+1)` and `d_k` the harmonic dimension.
pub fn plane_wave_partial_sum<T: Real>(
    n: usize,
    u: &[T],
    w: &[T],
    order: usize,
) -> Result<Complex<T>> {
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedDimension {
            n,
            context: "plane-wave expansion (n in {2, 3})",
        });
    }
    if u.len() != n || w.len() != n {
        return Err(Error::invalid("point and direction must have length n"));
    }
    let w_norm = w.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    if (w_norm - T::one()).abs() > tol {
        return Err(Error::Domain {
            what: "direction norm",
            value: w_norm.to_f64_lossy(),
        });
    }
    let radius = u.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    let cos_theta = if radius > T::zero() {
        u.iter().zip(w).fold(T::zero(), |a, (&x, &y)| a + x * y) / radius
    } else {
        T::zero()
    };
    let alpha = T::from_usize_lossy(n - 2) / T::lit(2.0);
    let half_r = radius / T::lit(2.0);

    let mut total = Complex::new(T::zero(), T::zero());
    let mut c_k = T::one();
    let mut power = T::one(); // (|u|/2)^k
    for k in 0..=order {
        if k > 0 {
            let kf = T::from_usize_lossy(k);
            c_k = c_k / (alpha + kf);
            power = power * half_r;
            if power == T::zero() {
                break;
            }
        }
        let d_k = T::from_usize_lossy(harmonic_dimension(n, k));
        let radial =
            c_k * d_k * power * bessel_j_normalized(alpha + T::from_usize_lossy(k), radius);
        let zonal = zonal_harmonic(n, k, cos_theta)?;
        let mag = radial * zonal;
        // i^k
        let term = match k % 4 {
            0 => Complex::new(mag, T::zero()),
            1 => Complex::new(T::zero(), mag),
            2 => Complex::new(-mag, T::zero()),
            _ => Complex::new(T::zero(), -mag),
        };
        total = total + term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(u: &[f64], w: &[f64]) -> Complex<f64> {
        let phase: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
        Complex::new(phase.cos(), phase.sin())
    }

    #[test]
    fn origin_gives_one() {
        let z = plane_wave_partial_sum(2, &[0.0, 0.0], &[0.6, 0.8], 0).unwrap();
        assert_eq!(z, Complex::new(1.0, 0.0));
        let z = plane_wave_partial_sum(3, &[0.0; 3], &[0.0, 0.0, 1.0], 12).unwrap();
        assert_eq!(z, Complex::new(1.0, 0.0));
    }

    #[test]
    fn matches_direct_exponential() {
        let t = 0.9_f64;
        let u2 = [5.0 * t.cos(), 5.0 * t.sin()];
        let w2 = [1.0, 0.0];
        let err = (plane_wave_partial_sum(2, &u2, &w2, 40).unwrap() - direct(&u2, &w2)).norm();
        assert!(err < 1e-8, "{err}");

        let u3 = [1.0, 2.0, 2.0]; // |u| = 3
        let w3 = [0.0, 0.6, 0.8];
        let err = (plane_wave_partial_sum(3, &u3, &w3, 30).unwrap() - direct(&u3, &w3)).norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn truncation_error_decreases_past_radius() {
        let u = [3.0, -1.5];
        let w = [0.8, -0.6];
        let target = direct(&u, &w);
        let mut last = f64::INFINITY;
        for order in 5..30 {
            let err = (plane_wave_partial_sum(2, &u, &w, order).unwrap() - target).norm();
            if err < 1e-14 {
                break;
            }
            assert!(err < last, "order {order}: {err} >= {last}");
            last = err;
        }
    }

    #[test]
    fn rejects_unsupported_input() {
        assert!(plane_wave_partial_sum(4, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 3).is_err());
        assert!(matches!(
            plane_wave_partial_sum(2, &[1.0, 0.0], &[1.0, 1.0], 3),
            Err(Error::Domain { .. })
        ));
        assert!(zonal_harmonic::<f64>(5, 2, 0.3).is_err());
    }
}
