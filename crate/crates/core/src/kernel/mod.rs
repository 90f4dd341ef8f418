//! The frequency-1 isotropic covariance kernel on `ℝⁿ` and its analytics.
//!
//! The kernel is `Π∞(u, v) = ∫_{S^{n-1}} e^{i⟨u-v, ω⟩} dω`, i.e.
//! `(2π)^{n/2} J_α(r) / r^α` with `α = (n-2)/2` and `r = |u - v|`. In unit
//! normalization it is divided by `vol(S^{n-1})` and equals the normalized
//! Bessel function `j_α(r)`.
//!
//! Derivatives are taken through the profile `F(s) = j_α(√s)`, `s = |u-v|²`,
//! whose `s`-derivatives are again normalized Bessel functions:
//! `F^{(m)}(s) = (-1/4)^m / (α+1)_m · j_{α+m}(√s)`. No division by `r`
//! appears, so the coincident limit needs no special treatment.

mod moments;
mod plane_wave;
pub mod special;

pub use moments::spectral_moment;
pub use plane_wave::{plane_wave_partial_sum, zonal_harmonic};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest total derivative order `|a| + |b|` supported.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Value `vol(S^{n-1})` at coincidence.
    SphereArea,
    /// Value 1 at coincidence.
    #[default]
    Unit,
}

/// `vol(S^{n-1}) = 2π^{n/2} / Γ(n/2)`.
pub fn sphere_surface_area<T: Real>(n: usize) -> T {
    let half = T::from_usize_lossy(n) / T::lit(2.0);
    T::lit(2.0) * T::PI().powf(half) / special::gamma(half)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicKernel<T> {
    dim: usize,
    normalization: Normalization,
    scale: T,
}

impl<T: Real> IsotropicKernel<T> {
    pub fn new(dim: usize, normalization: Normalization) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension {
                n: dim,
                context: "isotropic kernel (n >= 2)",
            });
        }
        let scale = match normalization {
            Normalization::SphereArea => sphere_surface_area(dim),
            Normalization::Unit => T::one(),
        };
        Ok(Self {
            dim,
            normalization,
            scale,
        })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, Normalization::Unit)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Bessel index `α = (n-2)/2`.
    pub fn alpha(&self) -> T {
        T::from_usize_lossy(self.dim - 2) / T::lit(2.0)
    }

    /// Value at coincidence: `vol(S^{n-1})` or 1.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Radial profile `ρ(r)`.
    pub fn rho(&self, r: T) -> Result<T> {
        check_separation(r)?;
        Ok(self.scale * special::bessel_j_normalized(self.alpha(), r))
    }

    /// `F^{(m)}(s)` for the profile `F(s) = j_α(√s)` (unscaled).
    pub fn profile_derivative(&self, m: usize, s: T) -> T {
        let alpha = self.alpha();
        let mf = T::from_usize_lossy(m);
        let coeff = T::lit(-0.25).powi(m as i32) / special::pochhammer(alpha + T::one(), m);
        coeff * special::bessel_j_normalized(alpha + mf, s.max(T::zero()).sqrt())
    }

    /// `(ρ(r), ρ'(r), ρ''(r))` for `r ≥ 0`.
    pub fn radial(&self, r: T) -> Result<[T; 3]> {
        check_separation(r)?;
        let s = r * r;
        let f0 = self.profile_derivative(0, s);
        let f1 = self.profile_derivative(1, s);
        let f2 = self.profile_derivative(2, s);
        let two = T::lit(2.0);
        Ok([
            self.scale * f0,
            self.scale * two * r * f1,
            self.scale * (two * f1 + T::lit(4.0) * s * f2),
        ])
    }

    /// Mixed partial `∂_u^a ∂_v^b Π∞(u, v)`.
    pub fn derivative(&self, a: &[usize], b: &[usize], u: &[T], v: &[T]) -> Result<T> {
        self.check_point(u)?;
        self.check_point(v)?;
        if a.len() != self.dim || b.len() != self.dim {
            return Err(Error::invalid(
                "multi-index length must equal the dimension",
            ));
        }
        let gamma: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let d: Vec<T> = u.iter().zip(v).map(|(&x, &y)| x - y).collect();
        let sign = if b.iter().sum::<usize>() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        Ok(sign * self.displacement_derivative(&gamma, &d)?)
    }

    /// `∂^γ` of `d ↦ Π∞(d, 0)`.
    pub fn displacement_derivative(&self, gamma: &[usize], d: &[T]) -> Result<T> {
        Ok(DerivativeStencil::new(self.dim, gamma)?.eval(self, d))
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point of length {} for a dimension-{} kernel",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

fn check_separation<T: Real>(r: T) -> Result<()> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(Error::Domain {
            what: "separation",
            value: r.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Chain-rule expansion of `∂^γ F(|d|²)` as `Σ c · F^{(m)}(|d|²) · d^p`.
///
/// Built once per multi-index and evaluated at many displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStencil {
    dim: usize,
    order: usize,
    terms: Vec<StencilTerm>,
}

#[derive(Debug, Clone, PartialEq)]
struct StencilTerm {
    coeff: i64,
    profile_order: usize,
    powers: Vec<u32>,
}

impl DerivativeStencil {
    pub fn new(dim: usize, gamma: &[usize]) -> Result<Self> {
        if gamma.len() != dim {
            return Err(Error::invalid(
                "multi-index length must equal the dimension",
            ));
        }
        let order: usize = gamma.iter().sum();
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let mut terms = vec![StencilTerm {
            coeff: 1,
            profile_order: 0,
            powers: vec![0; dim],
        }];
        for (axis, &times) in gamma.iter().enumerate() {
            for _ in 0..times {
                terms = differentiate(&terms, axis);
            }
        }
        Ok(Self { dim, order, terms })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval<T: Real>(&self, kernel: &IsotropicKernel<T>, d: &[T]) -> T {
        debug_assert_eq!(d.len(), self.dim);
        let s = d.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let max_m = self
            .terms
            .iter()
            .map(|t| t.profile_order)
            .max()
            .unwrap_or(0);
        let profile: Vec<T> = (0..=max_m)
            .map(|m| kernel.profile_derivative(m, s))
            .collect();
        let mut acc = T::zero();
        for term in &self.terms {
            let mono = term
                .powers
                .iter()
                .zip(d)
                .fold(T::one(), |m, (&p, &x)| m * x.powi(p as i32));
            acc = acc + T::lit(term.coeff as f64) * profile[term.profile_order] * mono;
        }
        kernel.scale() * acc
    }
}

fn differentiate(terms: &[StencilTerm], axis: usize) -> Vec<StencilTerm> {
    let mut out: Vec<StencilTerm> = Vec::with_capacity(terms.len() * 2);
    let mut push = |t: StencilTerm| {
        if let Some(existing) = out
            .iter_mut()
            .find(|e| e.profile_order == t.profile_order && e.powers == t.powers)
        {
            existing.coeff += t.coeff;
        } else {
            out.push(t);
        }
    };
    for t in terms {
        // d/dx_k F^{(m)}(|d|²) = 2 x_k F^{(m+1)}
        let mut powers = t.powers.clone();
        powers[axis] += 1;
        push(StencilTerm {
            coeff: 2 * t.coeff,
            profile_order: t.profile_order + 1,
            powers,
        });
        if t.powers[axis] > 0 {
            let mut powers = t.powers.clone();
            powers[axis] -= 1;
            push(StencilTerm {
                coeff: t.coeff * i64::from(t.powers[axis]),
                profile_order: t.profile_order,
                powers,
            });
        }
    }
    out.retain(|t| t.coeff != 0);
    out
}

/// All multi-indices of length `dim` with total order `≤ max_order`.
pub fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; dim];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, max_order, &mut current, &mut out);
    out.sort_by_key(|g| g.iter().sum::<usize>());
    out
}
