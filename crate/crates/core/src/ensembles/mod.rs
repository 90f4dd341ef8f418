//! Wave ensembles: frequency-1 plane waves, flat-torus windows and
//! spherical harmonics, plus the rescaled pullback and exact-kernel
//! diagnostics.

mod diagnostics;
mod grid;
mod plane;
mod rescale;
mod sphere;
mod torus;
mod trig;

pub use diagnostics::{covariance_convergence_sup, src_sup, ExactKernel, SrcResult};
pub use grid::{Grid, GridQuantity};
pub use plane::{sample_rwm, DirectionMode, PlaneWaveField};
pub use rescale::{rescale_at, Chart, RescaledField};
pub use sphere::{sample_sphere, sphere_kernel, SphereWave};
pub use torus::{sample_torus, torus_kernel, TorusSpectrum, TorusWave};
pub use trig::TrigField;

use nalgebra::{DMatrix, DVector};

/// Value, gradient and Hessian of a field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet {
    pub fn zeros(dim: usize) -> Self {
        Self {
            value: 0.0,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }
}

/// Space on which a field lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    Euclidean,
    /// Square torus `ℝ²/(side·ℤ)²`; the side length is carried by the field.
    Torus,
    /// Unit sphere in `ℝ³`, evaluated through a polynomial extension.
    Sphere,
}

/// An evaluatable realization of a random wave.
pub trait WaveField: Send + Sync {
    /// Number of coordinates a point has.
    fn dim(&self) -> usize;

    fn manifold(&self) -> Manifold;

    fn value(&self, x: &[f64]) -> f64;

    /// Analytic jet. On the sphere the derivatives are ambient ones of the
    /// polynomial extension; intrinsic jets come from [`rescale_at`].
    fn jet(&self, x: &[f64]) -> Jet;

    /// Values of `quantity` at every grid node, first axis fastest.
    fn sample_grid(&self, grid: &Grid, quantity: GridQuantity) -> Vec<f64> {
        grid.map_points(|x| match quantity {
            GridQuantity::Value => self.value(x),
            GridQuantity::Derivative(axis) => self.jet(x).gradient[axis],
        })
    }
}

impl<F: WaveField + ?Sized> WaveField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn manifold(&self) -> Manifold {
        (**self).manifold()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        (**self).jet(x)
    }
    fn sample_grid(&self, grid: &Grid, quantity: GridQuantity) -> Vec<f64> {
        (**self).sample_grid(grid, quantity)
    }
}

/// Draws a uniformly distributed unit vector in `ℝⁿ`.
pub(crate) fn random_unit_vector<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
