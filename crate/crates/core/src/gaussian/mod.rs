//! Finite-dimensional centered (or mean-shifted) Gaussian laws.

mod jet;

pub use jet::{
    assemble_jet_covariance, cross_block, jet_components, jet_covariance_matrix, JetOrders,
    JetSpec, MAX_JET_DIMENSION,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative floor below which a covariance counts as singular.
pub const SINGULAR_RELATIVE: f64 = 1e-12;
/// Largest jitter tried before falling back to an eigenvalue clamp.
pub const MAX_JITTER_RELATIVE: f64 = 1e-8;
/// Negative eigenvalues down to `-NEGATIVE_SLACK * λ_max` are tolerated as rounding.
pub const NEGATIVE_SLACK: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// How the sampling factor was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Cholesky,
    /// Cholesky after adding `jitter_used` to the diagonal.
    JitteredCholesky,
    /// `V·sqrt(max(D, 0))` from a symmetric eigendecomposition.
    ClampedEigen,
}

#[derive(Debug, Clone)]
pub struct GaussianLaw {
    cov: DMatrix<f64>,
    mean: DVector<f64>,
    factor: DMatrix<f64>,
    factor_kind: FactorKind,
    jitter_used: f64,
}

impl GaussianLaw {
    /// Centered law with covariance `cov`.
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        Self::with_mean(cov, DVector::zeros(dim))
    }

    pub fn with_mean(cov: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        if cov.nrows() == 0 || cov.nrows() != cov.ncols() {
            return Err(Error::invalid(
                "covariance must be a non-empty square matrix",
            ));
        }
        if mean.len() != cov.nrows() {
            return Err(Error::invalid("mean length must match the covariance"));
        }
        if cov.iter().any(|x| !x.is_finite()) || mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance and mean must be finite"));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "covariance asymmetric by {asym:e} (scale {scale:e})"
            )));
        }
        let cov = symmetrize(cov);
        let (factor, factor_kind, jitter_used) = factorize(&cov)?;
        Ok(Self {
            cov,
            mean,
            factor,
            factor_kind,
            jitter_used,
        })
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn factor_kind(&self) -> FactorKind {
        self.factor_kind
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn trace(&self) -> f64 {
        self.cov.trace()
    }

    /// Smallest eigenvalue of the covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.cov)
    }

    /// Marginal law of the listed coordinates, in the given order.
    pub fn marginal(&self, indices: &[usize]) -> Result<GaussianLaw> {
        self.check_indices(indices)?;
        let cov = self.cov.select_rows(indices).select_columns(indices);
        let mean = self.mean.select_rows(indices);
        GaussianLaw::with_mean(cov, mean)
    }

    /// Law of the unobserved coordinates given `x[observed] = values`.
    ///
    /// The result lists the remaining coordinates in increasing index order.
    pub fn condition(&self, observed: &[usize], values: &[f64]) -> Result<GaussianLaw> {
        self.check_indices(observed)?;
        if observed.len() != values.len() {
            return Err(Error::invalid("one value per observed index is required"));
        }
        let mut is_obs = vec![false; self.dim()];
        for &i in observed {
            if is_obs[i] {
                return Err(Error::invalid(format!("index {i} observed twice")));
            }
            is_obs[i] = true;
        }
        let free: Vec<usize> = (0..self.dim()).filter(|&i| !is_obs[i]).collect();
        if free.is_empty() {
            return Err(Error::invalid(
                "conditioning on every coordinate leaves no law",
            ));
        }
        let s_oo = self.cov.select_rows(observed).select_columns(observed);
        let s_fo = self.cov.select_rows(&free).select_columns(observed);
        let s_ff = self.cov.select_rows(&free).select_columns(&free);

        let threshold = SINGULAR_RELATIVE * s_oo.trace().abs().max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(s_oo.clone());
        let lowest = eig.eigenvalues.min();
        if lowest < threshold {
            return Err(Error::SingularConditioning {
                eigenvalue: lowest,
                threshold,
            });
        }
        // Σ_oo^{-1} via the eigendecomposition: stable for the near-singular
        // blocks that arise close to the diagonal.
        let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
        let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
        let gain = &s_fo * inv;

        let resid = DVector::from_iterator(
            observed.len(),
            observed.iter().zip(values).map(|(&i, &v)| v - self.mean[i]),
        );
        let mean = self.mean.select_rows(&free) + &gain * resid;
        let cov = symmetrize(s_ff - &gain * s_fo.transpose());
        GaussianLaw::from_trusted(cov, mean)
    }

    /// Density of the law evaluated at the origin.
    ///
    /// Refuses singular or near-singular covariances instead of regularizing.
    pub fn density_at_zero(&self) -> Result<f64> {
        let threshold = SINGULAR_RELATIVE * self.trace().abs().max(f64::MIN_POSITIVE);
        let lowest = self.min_eigenvalue();
        if lowest < threshold {
            return Err(Error::Degenerate {
                eigenvalue: lowest,
                threshold,
            });
        }
        let chol = self.cov.clone().cholesky().ok_or(Error::Degenerate {
            eigenvalue: lowest,
            threshold,
        })?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let quad = self.mean.dot(&chol.solve(&self.mean));
        let dim = self.dim() as f64;
        Ok((-0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + log_det + quad)).exp())
    }

    /// `count` draws, one per row.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(count, dim);
        let mut z = vec![0.0; dim];
        let mut draw = vec![0.0; dim];
        for row in 0..count {
            self.sample_into(rng, &mut z, &mut draw);
            for (j, &x) in draw.iter().enumerate() {
                out[(row, j)] = x;
            }
        }
        out
    }

    /// One draw written into `out`; `scratch` holds the standard normals.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut [f64], out: &mut [f64]) {
        let dim = self.dim();
        debug_assert!(scratch.len() >= dim && out.len() >= dim);
        for z in scratch.iter_mut().take(dim) {
            *z = rng.sample(StandardNormal);
        }
        for (i, o) in out.iter_mut().take(dim).enumerate() {
            let row_len = match self.factor_kind {
                FactorKind::ClampedEigen => dim,
                _ => i + 1,
            };
            *o = (0..row_len)
                .zip(scratch.iter())
                .fold(self.mean[i], |acc, (k, z)| acc + self.factor[(i, k)] * z);
        }
    }

    /// Same law with the sampling factor taken from a clamped
    /// eigendecomposition, so no jitter enters the draws.
    pub fn eigen_factored(mut self) -> Result<Self> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let largest = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
        let lowest = eig.eigenvalues.min();
        if lowest < -NEGATIVE_SLACK * largest {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: lowest });
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        self.factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        self.factor_kind = FactorKind::ClampedEigen;
        self.jitter_used = 0.0;
        Ok(self)
    }

    /// Construction for matrices produced internally (already symmetric);
    /// rounding-level negative eigenvalues are accepted.
    fn from_trusted(cov: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        let (factor, factor_kind, jitter_used) = factorize(&cov)?;
        Ok(Self {
            cov,
            mean,
            factor,
            factor_kind,
            jitter_used,
        })
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::invalid(format!(
                "index {bad} out of range for dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn factorize(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, FactorKind, f64)> {
    if let Some(chol) = cov.clone().cholesky() {
        return Ok((chol.unpack(), FactorKind::Cholesky, 0.0));
    }
    let trace = cov.trace().abs().max(f64::MIN_POSITIVE);
    let mut jitter = SINGULAR_RELATIVE * trace;
    while jitter <= MAX_JITTER_RELATIVE * trace * (1.0 + 1e-9) {
        let mut shifted = cov.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = shifted.cholesky() {
            return Ok((chol.unpack(), FactorKind::JitteredCholesky, jitter));
        }
        jitter *= 10.0;
    }
    let eig = SymmetricEigen::new(cov.clone());
    let largest = eig.eigenvalues.max().max(0.0);
    let lowest = eig.eigenvalues.min();
    if lowest < -NEGATIVE_SLACK * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: lowest });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
    Ok((factor, FactorKind::ClampedEigen, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn law(rows: &[&[f64]]) -> GaussianLaw {
        let n = rows.len();
        GaussianLaw::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn scalar_schur_complement() {
        let g = law(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let c = g.condition(&[1], &[0.0]).unwrap();
        assert!((c.cov()[(0, 0)] - 0.75).abs() < 1e-15);
        assert_eq!(c.mean()[0], 0.0);
        let c = g.condition(&[1], &[2.0]).unwrap();
        assert!((c.mean()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_blocks_condition_trivially() {
        let g = law(&[&[2.0, 0.3, 0.0], &[0.3, 1.0, 0.0], &[0.0, 0.0, 4.0]]);
        let c = g.condition(&[2], &[0.0]).unwrap();
        assert_eq!(c.cov(), &g.cov().view((0, 0), (2, 2)).into_owned());
    }

    #[test]
    fn singular_observed_block_is_reported() {
        let g = law(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        match g.condition(&[0, 1], &[0.0, 0.0]) {
            Err(Error::SingularConditioning { eigenvalue, .. }) => {
                assert!(eigenvalue.abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn densities() {
        let g = law(&[&[1.0]]);
        assert!((g.density_at_zero().unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let g = law(&[&[0.5, 0.0], &[0.0, 0.5]]);
        assert!((g.density_at_zero().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
        let g = law(&[&[2.0, 0.0], &[0.0, 2.0]]);
        assert!((g.density_at_zero().unwrap() - 0.25 * std::f64::consts::FRAC_1_PI).abs() < 1e-15);
        let shifted =
            GaussianLaw::with_mean(DMatrix::identity(1, 1), DVector::from_element(1, 1.0)).unwrap();
        let expected = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((shifted.density_at_zero().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn degenerate_density_is_refused() {
        let g = law(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(g.density_at_zero(), Err(Error::Degenerate { .. })));
        assert!(g.min_eigenvalue().abs() < 1e-12);
        // still usable for sampling
        assert_ne!(g.factor_kind(), FactorKind::Cholesky);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = g.sample(&mut rng, 4);
        for r in 0..4 {
            assert!((s[(r, 0)] - s[(r, 1)]).abs() < 1e-4);
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_eq!(
            GaussianLaw::new(DMatrix::identity(3, 3))
                .unwrap()
                .min_eigenvalue(),
            1.0
        );
        let g = law(&[&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 0.5]]);
        assert!((g.min_eigenvalue() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianLaw::new(bad),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GaussianLaw::new(asym).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_reproduces_covariance() {
        let g = law(&[&[1.0, 0.3], &[0.3, 0.5]]);
        let a = g.sample(&mut ChaCha8Rng::seed_from_u64(11), 100_000);
        let b = g.sample(&mut ChaCha8Rng::seed_from_u64(11), 100_000);
        assert_eq!(a, b);
        let n = a.nrows() as f64;
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let prods: Vec<f64> = (0..a.nrows()).map(|r| a[(r, i)] * a[(r, j)]).collect();
            let mean = prods.iter().sum::<f64>() / n;
            let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            assert!(
                (mean - g.cov()[(i, j)]).abs() < 5.0 * se,
                "({i},{j}) {mean}"
            );
        }
    }
}
