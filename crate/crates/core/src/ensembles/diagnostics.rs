use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{random_unit_vector, rescale_at, sphere::SphereWave, sphere_kernel, TorusSpectrum};
use crate::error::{Error, Result};
use crate::kernel::{multi_indices, special::legendre, DerivativeStencil, IsotropicKernel};

/// Exact covariance structure of an ensemble (no sampling noise).
#[derive(Debug, Clone, PartialEq)]
pub enum ExactKernel {
    /// `M⁻¹ Σ_j cos⟨d, ω_j⟩` for fixed unit directions.
    Planar {
        directions: Vec<Vec<f64>>,
    },
    Torus(TorusSpectrum),
    /// `P_ℓ(cos θ)`.
    Sphere {
        ell: usize,
    },
}

impl ExactKernel {
    /// Frequencies and common weight after rescaling by `lambda`, for the
    /// stationary kinds.
    fn stationary(&self, lambda: f64) -> Option<(Vec<Vec<f64>>, f64)> {
        match self {
            ExactKernel::Planar { directions } => {
                Some((directions.clone(), 1.0 / directions.len() as f64))
            }
            ExactKernel::Torus(s) => Some((
                s.lattice()
                    .iter()
                    .map(|&k| s.frequency(k).iter().map(|w| w / lambda).collect())
                    .collect(),
                1.0 / s.dimension() as f64,
            )),
            ExactKernel::Sphere { .. } => None,
        }
    }

    fn dim(&self) -> usize {
        match self {
            ExactKernel::Planar { directions } => directions.first().map_or(0, Vec::len),
            ExactKernel::Torus(_) => 2,
            ExactKernel::Sphere { .. } => 2,
        }
    }
}

/// `∂^γ` of `d ↦ w Σ_j cos⟨ω_j, d⟩`.
fn stationary_derivative(freqs: &[Vec<f64>], weight: f64, gamma: &[usize], d: &[f64]) -> f64 {
    let order: usize = gamma.iter().sum();
    freqs
        .iter()
        .map(|w| {
            let mono: f64 = w
                .iter()
                .zip(gamma)
                .map(|(x, &g)| x.powi(g as i32))
                .product();
            let t: f64 = w.iter().zip(d).map(|(x, y)| x * y).sum();
            let trig = match order % 4 {
                0 => t.cos(),
                1 => -t.sin(),
                2 => -t.cos(),
                _ => t.sin(),
            };
            mono * trig
        })
        .sum::<f64>()
        * weight
}

/// Nodes of spacing `step` inside the closed ball of radius `radius` about 0.
fn ball_nodes(dim: usize, radius: f64, step: f64) -> Vec<Vec<f64>> {
    let reach = (radius / step).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-reach; dim];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius * (1.0 + 1e-12) {
            out.push(p);
        }
        let mut axis = 0;
        loop {
            if axis == dim {
                return out;
            }
            idx[axis] += 1;
            if idx[axis] <= reach {
                break;
            }
            idx[axis] = -reach;
            axis += 1;
        }
    }
}

/// Largest deviation `|∂_u^a ∂_v^b (Π̂_λ − Π∞)(u, v)|` over `u, v ∈ B_R` and
/// `|a|, |b| ≤ max_order`, with `Π∞` in unit normalization.
///
/// Stationary kinds sweep displacements `u − v ∈ B_{2R}` on a grid with
/// `resolution` steps per diameter; the sphere sweeps a product grid of
/// `(u, v)` and supports order 0 only.
pub fn covariance_convergence_sup(
    kernel: &ExactKernel,
    lambda: f64,
    center: &[f64],
    radius: f64,
    max_order: usize,
    resolution: usize,
) -> Result<f64> {
    if max_order > 2 {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            max: 2,
        });
    }
    if resolution == 0 || !(radius > 0.0) {
        return Err(Error::invalid("radius and resolution must be positive"));
    }
    let dim = kernel.dim();
    let limit = IsotropicKernel::<f64>::unit(dim)?;
    if let Some((freqs, weight)) = kernel.stationary(lambda) {
        let step = 4.0 * radius / resolution as f64;
        let gammas: Vec<Vec<usize>> = multi_indices(dim, 2 * max_order);
        let stencils: Vec<DerivativeStencil> = gammas
            .iter()
            .map(|g| DerivativeStencil::new(dim, g))
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for d in ball_nodes(dim, 2.0 * radius, step) {
            for (g, st) in gammas.iter().zip(&stencils) {
                let diff = stationary_derivative(&freqs, weight, g, &d) - st.eval(&limit, &d);
                worst = worst.max(diff.abs());
            }
        }
        return Ok(worst);
    }
    let ExactKernel::Sphere { ell } = kernel else {
        unreachable!("only the sphere is non-stationary")
    };
    if max_order > 0 {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            max: 0,
        });
    }
    let probe = SphereWave::from_coefficients(*ell, vec![0.0; 2 * ell + 1])?;
    let chart = rescale_at(&probe, center, lambda)?;
    let step = 2.0 * radius / resolution as f64;
    let nodes = ball_nodes(2, radius, step);
    let pulled: Vec<Vec<f64>> = nodes.iter().map(|u| chart.pull(u)).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (i, u) in nodes.iter().enumerate() {
        for (j, v) in nodes.iter().enumerate().skip(i) {
            let cos: f64 = pulled[i].iter().zip(&pulled[j]).map(|(a, b)| a * b).sum();
            let r = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)).sqrt();
            worst = worst.max((legendre(*ell, cos.clamp(-1.0, 1.0)) - limit.rho(r)?).abs());
        }
    }
    Ok(worst)
}

/// Outcome of [`src_sup`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrcResult {
    pub sup: f64,
    /// Minimum separation `λ^{-1+ε}` of the scanned pairs.
    pub threshold: f64,
    /// Torus: the displacement attaining the sup. Sphere: the two points.
    pub witness: Vec<Vec<f64>>,
    pub pairs: usize,
}

/// Largest `λ^{-|a|-|b|} |∇_x^a ∇_y^b Π_λ(x, y)|` over sampled pairs at
/// distance at least `λ^{-1+ε}`, orders up to `max_order`.
pub fn src_sup<R: Rng + ?Sized>(
    kernel: &ExactKernel,
    lambda: f64,
    eps: f64,
    max_order: usize,
    pair_budget: usize,
    rng: &mut R,
) -> Result<SrcResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: eps,
        });
    }
    if max_order > 2 {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            max: 2,
        });
    }
    let threshold = lambda.powf(eps - 1.0);
    match kernel {
        ExactKernel::Planar { .. } => Err(Error::invalid(
            "short-range correlations are defined for compact ensembles only",
        )),
        ExactKernel::Torus(spectrum) => {
            let (freqs, weight) = kernel.stationary(lambda).unwrap_or_default();
            // derivatives are taken in physical units, so undo the rescaling
            // inside the phase while keeping λ^{-|γ|} on the monomials
            let phase_scale = lambda;
            let gammas = multi_indices(2, 2 * max_order);
            let half = spectrum.side() / 2.0;
            let mut best = SrcResult {
                sup: 0.0,
                threshold,
                witness: vec![],
                pairs: 0,
            };
            let consider = |d: [f64; 2], best: &mut SrcResult| {
                let scaled = [d[0] * phase_scale, d[1] * phase_scale];
                for g in &gammas {
                    let v = stationary_derivative(&freqs, weight, g, &scaled).abs();
                    if v > best.sup {
                        best.sup = v;
                        best.witness = vec![d.to_vec()];
                    }
                }
                best.pairs += 1;
            };
            let ring = pair_budget / 2;
            for _ in 0..ring {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                consider([threshold * t.cos(), threshold * t.sin()], &mut best);
            }
            let mut drawn = 0;
            while drawn < pair_budget - ring {
                let d = [rng.random_range(-half..half), rng.random_range(-half..half)];
                if d[0].hypot(d[1]) >= threshold {
                    consider(d, &mut best);
                    drawn += 1;
                }
            }
            Ok(best)
        }
        ExactKernel::Sphere { ell } => {
            if max_order > 0 {
                return Err(Error::UnsupportedOrder {
                    order: max_order,
                    max: 0,
                });
            }
            let north = vec![0.0, 0.0, 1.0];
            let south = vec![0.0, 0.0, -1.0];
            let mut best = SrcResult {
                sup: sphere_kernel(*ell, std::f64::consts::PI).abs(),
                threshold,
                witness: vec![north, south],
                pairs: 1,
            };
            while best.pairs < pair_budget.max(1) {
                let x = random_unit_vector(rng, 3);
                let y = random_unit_vector(rng, 3);
                let cos: f64 = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .clamp(-1.0, 1.0);
                if cos.acos() < threshold {
                    continue;
                }
                let v = legendre(*ell, cos).abs();
                if v > best.sup {
                    best.sup = v;
                    best.witness = vec![x, y];
                }
                best.pairs += 1;
            }
            Ok(best)
        }
    }
}
