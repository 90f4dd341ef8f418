use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{random_unit_vector, Grid, GridQuantity, Jet, Manifold, TrigField, WaveField};
use crate::error::{Error, Result};

/// How the `M` directions of a plane-wave superposition are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionMode {
    #[default]
    IidUniform,
    /// Angles `πj/M`, `j = 0..M` (planar only). Together with the implicit
    /// antipodes this is the `2M`-point trapezoid rule on the circle.
    Equispaced,
}

/// `M^{-1/2} Σ_j a_j cos⟨ω_j, x⟩ + b_j sin⟨ω_j, x⟩` with unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveField {
    mode: DirectionMode,
    inner: TrigField,
}

impl PlaneWaveField {
    /// Field from explicit unit directions and already-scaled amplitudes.
    pub fn from_parts(
        dim: usize,
        directions: Vec<Vec<f64>>,
        cos: Vec<f64>,
        sin: Vec<f64>,
    ) -> Result<Self> {
        if directions.len() != cos.len() || cos.len() != sin.len() || directions.is_empty() {
            return Err(Error::invalid(
                "one direction and two amplitudes per wave are required",
            ));
        }
        for d in &directions {
            if d.len() != dim {
                return Err(Error::invalid("direction of the wrong dimension"));
            }
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Domain {
                    what: "direction norm",
                    value: norm,
                });
            }
        }
        let freqs = directions.into_iter().flatten().collect();
        Ok(Self {
            mode: DirectionMode::IidUniform,
            inner: TrigField::new(dim, freqs, cos, sin, Manifold::Euclidean),
        })
    }

    pub fn mode(&self) -> DirectionMode {
        self.mode
    }

    pub fn waves(&self) -> usize {
        self.inner.terms()
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        self.inner.frequency(j)
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        self.inner.cos_coefficients()
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        self.inner.sin_coefficients()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mode: self.mode,
            inner: self.inner.scaled(factor),
        }
    }

    /// Conditional covariance `M^{-1} Σ_j cos⟨x − y, ω_j⟩` given the directions.
    pub fn conditional_covariance(&self, d: &[f64]) -> f64 {
        let m = self.waves();
        (0..m)
            .map(|j| {
                self.direction(j)
                    .iter()
                    .zip(d)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    .cos()
            })
            .sum::<f64>()
            / m as f64
    }
}

/// Directions used by [`sample_rwm`].
pub fn plane_wave_directions<R: Rng + ?Sized>(
    dim: usize,
    waves: usize,
    mode: DirectionMode,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if waves == 0 {
        return Err(Error::invalid("at least one plane wave is required"));
    }
    match mode {
        DirectionMode::Equispaced if dim != 2 => Err(Error::UnsupportedDimension {
            n: dim,
            context: "equispaced directions (n = 2)",
        }),
        DirectionMode::Equispaced => Ok((0..waves)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / waves as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        DirectionMode::IidUniform => Ok((0..waves).map(|_| random_unit_vector(rng, dim)).collect()),
    }
}

/// Random superposition of `waves` unit-frequency plane waves in `ℝⁿ`.
pub fn sample_rwm<R: Rng + ?Sized>(
    dim: usize,
    waves: usize,
    mode: DirectionMode,
    rng: &mut R,
) -> Result<PlaneWaveField> {
    if dim < 1 {
        return Err(Error::UnsupportedDimension {
            n: dim,
            context: "plane waves",
        });
    }
    let directions = plane_wave_directions(dim, waves, mode, rng)?;
    let scale = (waves as f64).sqrt().recip();
    let mut cos = Vec::with_capacity(waves);
    let mut sin = Vec::with_capacity(waves);
    for _ in 0..waves {
        cos.push(scale * rng.sample::<f64, _>(StandardNormal));
        sin.push(scale * rng.sample::<f64, _>(StandardNormal));
    }
    let mut field = PlaneWaveField::from_parts(dim, directions, cos, sin)?;
    field.mode = mode;
    Ok(field)
}

impl WaveField for PlaneWaveField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn manifold(&self) -> Manifold {
        Manifold::Euclidean
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
    use crate::kernel::special::bessel_j;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_wave() {
        let f = PlaneWaveField::from_parts(2, vec![vec![1.0, 0.0]], vec![1.0], vec![0.0]).unwrap();
        let jet = f.jet(&[0.0, 0.0]);
        assert_eq!(jet.value, 1.0);
        assert_eq!(jet.gradient.as_slice(), &[0.0, 0.0]);
        assert_eq!(jet.hessian[(0, 0)], -1.0);
        assert_eq!(jet.hessian[(1, 1)], 0.0);
        // zero set is a union of vertical lines
        assert!(f.value(&[std::f64::consts::FRAC_PI_2, 3.7]).abs() < 1e-15);
    }

    #[test]
    fn three_equispaced_waves_have_a_maximum_at_origin() {
        let dirs = plane_wave_directions(
            2,
            3,
            DirectionMode::Equispaced,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        let f = PlaneWaveField::from_parts(2, dirs, vec![1.0; 3], vec![0.0; 3]).unwrap();
        let jet = f.jet(&[0.0, 0.0]);
        assert!(jet.gradient.amax() < 1e-15);
        for p in 0..2 {
            for q in 0..2 {
                let expected = if p == q { -1.5 } else { 0.0 };
                assert!((jet.hessian[(p, q)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equispaced_requires_the_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_rwm(3, 8, DirectionMode::Equispaced, &mut rng),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn equispaced_covariance_tracks_bessel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = sample_rwm(2, 64, DirectionMode::Equispaced, &mut rng).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            for j in 0..100 {
                let d = [0.1 * i as f64, 0.05 * j as f64];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                worst = worst.max((f.conditional_covariance(&d) - bessel_j(0.0, r)).abs());
            }
        }
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = sample_rwm(
            3,
            16,
            DirectionMode::IidUniform,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        let b = sample_rwm(
            3,
            16,
            DirectionMode::IidUniform,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
