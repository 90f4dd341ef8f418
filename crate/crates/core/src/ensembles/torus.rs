use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Grid, GridQuantity, Jet, Manifold, TrigField, WaveField};
use crate::error::{Error, Result};

/// Lattice frequencies of the window `[λ, λ+1]` on the square torus
/// `ℝ²/(side·ℤ)²`, where mode `k` has frequency `2π|k|/side`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpectrum {
    lambda: f64,
    side: f64,
    points: Vec<[i64; 2]>,
    half: Vec<[i64; 2]>,
}

impl TorusSpectrum {
    /// Window on the unit torus.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_side(lambda, 1.0)
    }

    pub fn with_side(lambda: f64, side: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain {
                what: "lambda",
                value: lambda,
            });
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Domain {
                what: "torus side",
                value: side,
            });
        }
        let lo = (lambda * side / TAU).powi(2);
        let hi = ((lambda + 1.0) * side / TAU).powi(2);
        let reach = hi.sqrt().ceil() as i64;
        let mut points = Vec::new();
        for k1 in -reach..=reach {
            for k2 in -reach..=reach {
                let norm2 = (k1 * k1 + k2 * k2) as f64;
                if norm2 >= lo && norm2 <= hi && norm2 > 0.0 {
                    points.push([k1, k2]);
                }
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyAnnulus {
                lambda,
                nearest: nearest_admissible(lambda, side),
            });
        }
        let half = points
            .iter()
            .copied()
            .filter(|k| k[0] > 0 || (k[0] == 0 && k[1] > 0))
            .collect();
        Ok(Self {
            lambda,
            side,
            points,
            half,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side * self.side
    }

    /// `dim H_λ`, the number of lattice points in the window.
    pub fn dimension(&self) -> usize {
        self.points.len()
    }

    pub fn lattice(&self) -> &[[i64; 2]] {
        &self.points
    }

    /// One representative per `±k` pair.
    pub fn half_lattice(&self) -> &[[i64; 2]] {
        &self.half
    }

    /// Physical frequency vector `2πk/side`.
    pub fn frequency(&self, k: [i64; 2]) -> [f64; 2] {
        let s = TAU / self.side;
        [s * k[0] as f64, s * k[1] as f64]
    }

    /// Laplace eigenvalue of each half-lattice mode.
    pub fn mode_eigenvalues(&self) -> Vec<f64> {
        self.half
            .iter()
            .map(|&k| {
                let w = self.frequency(k);
                w[0] * w[0] + w[1] * w[1]
            })
            .collect()
    }

    /// `Π_λ(x, x + d) = dim⁻¹ Σ_k cos⟨ω_k, d⟩`, normalized to 1 on the diagonal.
    pub fn kernel(&self, d: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|&k| {
                let w = self.frequency(k);
                (w[0] * d[0] + w[1] * d[1]).cos()
            })
            .sum::<f64>()
            / self.dimension() as f64
    }

    /// `‖Π_λ‖²` in `L²(M×M)` for the unit-trace projector, by Parseval.
    pub fn projector_l2_parseval(&self) -> f64 {
        // dim modes, each with eigenvalue 1/dim
        1.0 / self.dimension() as f64
    }

    /// Same quantity by the uniform-grid rule, exact for the trigonometric
    /// polynomial `Π_λ²` up to rounding.
    pub fn projector_l2_quadrature(&self) -> f64 {
        let reach = self
            .points
            .iter()
            .flat_map(|k| k.iter().map(|c| c.unsigned_abs()))
            .max()
            .unwrap_or(0) as usize;
        let nodes = 4 * reach + 8;
        let step = self.side / nodes as f64;
        let mut total = 0.0;
        for i in 0..nodes {
            for j in 0..nodes {
                let v = self.kernel(&[step * i as f64, step * j as f64]);
                total += v * v;
            }
        }
        total / (nodes * nodes) as f64
    }
}

fn nearest_admissible(lambda: f64, side: f64) -> f64 {
    let reach = (((lambda + 1.0) * side / TAU).ceil() as i64) + 2;
    let mut best = f64::INFINITY;
    for k1 in 0..=reach {
        for k2 in 0..=k1 {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let t = TAU * ((k1 * k1 + k2 * k2) as f64).sqrt() / side;
            let candidate = if t < lambda { t } else { (t - 1.0).max(lambda) };
            if (candidate - lambda).abs() < (best - lambda).abs() {
                best = candidate;
            }
        }
    }
    best
}

/// `Π_λ(x, x + d)` on the unit torus.
pub fn torus_kernel(lambda: f64, d: &[f64]) -> Result<f64> {
    Ok(TorusSpectrum::new(lambda)?.kernel(d))
}

/// A random eigenfunction combination: `sqrt(2/dim) Σ_{half} a_k cos + b_k sin`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusWave {
    spectrum: TorusSpectrum,
    inner: TrigField,
}

impl TorusWave {
    pub fn spectrum(&self) -> &TorusSpectrum {
        &self.spectrum
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        self.inner.cos_coefficients()
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        self.inner.sin_coefficients()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            spectrum: self.spectrum.clone(),
            inner: self.inner.scaled(factor),
        }
    }
}

pub fn sample_torus<R: Rng + ?Sized>(spectrum: &TorusSpectrum, rng: &mut R) -> TorusWave {
    let half = spectrum.half_lattice();
    let scale = (2.0 / spectrum.dimension() as f64).sqrt();
    let freqs = half.iter().flat_map(|&k| spectrum.frequency(k)).collect();
    let mut cos = Vec::with_capacity(half.len());
    let mut sin = Vec::with_capacity(half.len());
    for _ in half {
        cos.push(scale * rng.sample::<f64, _>(StandardNormal));
        sin.push(scale * rng.sample::<f64, _>(StandardNormal));
    }
    TorusWave {
        spectrum: spectrum.clone(),
        inner: TrigField::new(2, freqs, cos, sin, Manifold::Torus),
    }
}

impl WaveField for TorusWave {
    fn dim(&self) -> usize {
        2
    }
    fn manifold(&self) -> Manifold {
        Manifold::Torus
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        self.inner.jet(x)
    }
    fn sample_grid(&self, grid: &Grid, quantity: GridQuantity) -> Vec<f64> {
        self.inner.sample_grid(grid, quantity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn window_at_fifty() {
        let s = TorusSpectrum::new(50.0).unwrap();
        assert_eq!(s.dimension(), 20);
        assert_eq!(s.half_lattice().len(), 10);
        let mut norms: Vec<i64> = s
            .lattice()
            .iter()
            .map(|k| k[0] * k[0] + k[1] * k[1])
            .collect();
        norms.sort_unstable();
        norms.dedup();
        assert_eq!(norms, vec![64, 65]);
    }

    #[test]
    fn kernel_is_one_on_diagonal_and_matches_direct_sum() {
        let s = TorusSpectrum::new(50.0).unwrap();
        assert!((s.kernel(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
        let direct: f64 = s
            .lattice()
            .iter()
            .map(|k| (TAU * 0.5 * k[0] as f64).cos())
            .sum::<f64>()
            / 20.0;
        assert!((s.kernel(&[0.5, 0.0]) - direct).abs() < 1e-14);
        assert!((torus_kernel(50.0, &[0.5, 0.0]).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn empty_window_names_a_nonempty_neighbour() {
        match TorusSpectrum::new(1.0) {
            Err(Error::EmptyAnnulus { nearest, .. }) => {
                assert!(TorusSpectrum::new(nearest).is_ok(), "{nearest}");
            }
            other => panic!("expected empty window, got {other:?}"),
        }
    }

    #[test]
    fn l2_identity() {
        let s = TorusSpectrum::new(50.0).unwrap();
        assert_eq!(s.projector_l2_parseval(), 0.05);
        assert!((s.projector_l2_quadrature() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn modes_lie_in_the_band_and_laplacian_is_spectral() {
        let s = TorusSpectrum::new(100.0).unwrap();
        for e in s.mode_eigenvalues() {
            assert!((100.0f64.powi(2)..=101.0f64.powi(2)).contains(&e));
        }
        let f = sample_torus(&s, &mut ChaCha8Rng::seed_from_u64(4));
        let x = [0.123, 0.456];
        let lap = f.jet(&x).hessian.trace();
        let spectral: f64 = s
            .half_lattice()
            .iter()
            .zip(s.mode_eigenvalues())
            .enumerate()
            .map(|(j, (&k, e))| {
                let w = s.frequency(k);
                let t = w[0] * x[0] + w[1] * x[1];
                -e * (f.cos_coefficients()[j] * t.cos() + f.sin_coefficients()[j] * t.sin())
            })
            .sum();
        assert!((lap - spectral).abs() < 1e-9 * spectral.abs().max(1.0));
    }

    #[test]
    fn field_is_periodic() {
        let s = TorusSpectrum::new(100.0).unwrap();
        let f = sample_torus(&s, &mut ChaCha8Rng::seed_from_u64(9));
        assert!((f.value(&[0.2, 0.7]) - f.value(&[1.2, -0.3])).abs() < 1e-10);
    }
}
