use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest total degree accepted by [`spectral_moment`].
pub const MAX_MOMENT_DEGREE: usize = 8;

/// Moment `∫ ω^g dμ(ω)` of the uniform probability measure on `S^{n-1}`.
///
/// Zero unless every exponent is even; otherwise
/// `Γ(n/2)/Γ((n+|g|)/2) · Π Γ((g_i+1)/2)/Γ(1/2)`, evaluated as exact
/// products.
pub fn spectral_moment<T: Real>(n: usize, g: &[usize]) -> Result<T> {
    if n < 2 {
        return Err(Error::UnsupportedDimension {
            n,
            context: "spectral moments (n >= 2)",
        });
    }
    if g.len() != n {
        return Err(Error::invalid(
            "moment exponent length must equal the dimension",
        ));
    }
    let total: usize = g.iter().sum();
    if total > MAX_MOMENT_DEGREE {
        return Err(Error::UnsupportedOrder {
            order: total,
            max: MAX_MOMENT_DEGREE,
        });
    }
    if g.iter().any(|&e| e % 2 == 1) {
        return Ok(T::zero());
    }
    // Γ((e+1)/2)/Γ(1/2) = (e-1)!! / 2^{e/2}
    let mut num = T::one();
    for &e in g {
        let mut k = 1;
        while k < e {
            num = num * T::from_usize_lossy(k) / T::lit(2.0);
            k += 2;
        }
    }
    // Γ(n/2) / Γ(n/2 + |g|/2)
    let half_n = T::from_usize_lossy(n) / T::lit(2.0);
    let den = (0..total / 2).fold(T::one(), |acc, k| acc * (half_n + T::from_usize_lossy(k)));
    Ok(num / den)
}
