use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Grid, GridQuantity, Jet, Manifold, WaveField};

/// Real trigonometric sum `Σ_j a_j cos⟨ω_j, x⟩ + b_j sin⟨ω_j, x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField {
    dim: usize,
    /// Row-major `terms × dim`.
    frequencies: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    manifold: Manifold,
}

impl TrigField {
    pub(crate) fn new(
        dim: usize,
        frequencies: Vec<f64>,
        cos: Vec<f64>,
        sin: Vec<f64>,
        manifold: Manifold,
    ) -> Self {
        debug_assert_eq!(frequencies.len(), dim * cos.len());
        debug_assert_eq!(cos.len(), sin.len());
        Self {
            dim,
            frequencies,
            cos,
            sin,
            manifold,
        }
    }

    pub fn terms(&self) -> usize {
        self.cos.len()
    }

    pub fn frequency(&self, j: usize) -> &[f64] {
        &self.frequencies[j * self.dim..(j + 1) * self.dim]
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    /// Same frequencies with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.cos
            .iter_mut()
            .chain(out.sin.iter_mut())
            .for_each(|c| *c *= factor);
        out
    }

    fn phase(&self, j: usize, x: &[f64]) -> f64 {
        self.frequency(j).iter().zip(x).map(|(w, y)| w * y).sum()
    }

    /// Complex amplitudes `c_j` with `field = Re Σ c_j e^{i⟨ω_j, x⟩}`,
    /// already differentiated as requested and shifted to `origin`.
    fn grid_amplitudes(&self, quantity: GridQuantity, origin: &[f64]) -> Vec<Complex64> {
        (0..self.terms())
            .map(|j| {
                let mut c = Complex64::new(self.cos[j], -self.sin[j]);
                if let GridQuantity::Derivative(axis) = quantity {
                    c *= Complex64::new(0.0, self.frequency(j)[axis]);
                }
                c * Complex64::cis(self.phase(j, origin))
            })
            .collect()
    }

    /// Separable evaluation on a 2-D slab: `Re Σ_j c_j e^{iω_j0 h i} e^{iω_j1 h l}`
    /// as one real matrix product.
    fn slab(
        &self,
        amplitudes: &[Complex64],
        h: f64,
        n0: usize,
        right: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let m = self.terms();
        let mut left = DMatrix::zeros(n0, 2 * m);
        for (j, c) in amplitudes.iter().enumerate() {
            let w = self.frequency(j)[0] * h;
            for i in 0..n0 {
                let a = c * Complex64::cis(w * i as f64);
                left[(i, j)] = a.re;
                left[(i, m + j)] = -a.im;
            }
        }
        left * right
    }

    fn right_factor(&self, axis: usize, h: f64, count: usize) -> DMatrix<f64> {
        let m = self.terms();
        let mut right = DMatrix::zeros(2 * m, count);
        for j in 0..m {
            let w = self.frequency(j)[axis] * h;
            for l in 0..count {
                let (s, c) = (w * l as f64).sin_cos();
                right[(j, l)] = c;
                right[(m + j, l)] = s;
            }
        }
        right
    }
}

impl WaveField for TrigField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn manifold(&self) -> Manifold {
        self.manifold
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.terms())
            .map(|j| {
                let (s, c) = self.phase(j, x).sin_cos();
                self.cos[j] * c + self.sin[j] * s
            })
            .sum()
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let mut jet = Jet::zeros(self.dim);
        for j in 0..self.terms() {
            let (s, c) = self.phase(j, x).sin_cos();
            let w = self.frequency(j);
            let val = self.cos[j] * c + self.sin[j] * s;
            let slope = self.sin[j] * c - self.cos[j] * s;
            jet.value += val;
            for p in 0..self.dim {
                jet.gradient[p] += w[p] * slope;
                for q in 0..self.dim {
                    jet.hessian[(p, q)] -= w[p] * w[q] * val;
                }
            }
        }
        jet
    }

    fn sample_grid(&self, grid: &Grid, quantity: GridQuantity) -> Vec<f64> {
        let shape = grid.shape();
        let h = grid.spacing();
        match self.dim {
            2 => {
                let amps = self.grid_amplitudes(quantity, grid.origin());
                let right = self.right_factor(1, h, shape[1]);
                self.slab(&amps, h, shape[0], &right).as_slice().to_vec()
            }
            3 => {
                let base = self.grid_amplitudes(quantity, grid.origin());
                let right = self.right_factor(1, h, shape[1]);
                let mut out = Vec::with_capacity(grid.len());
                for k in 0..shape[2] {
                    let amps: Vec<Complex64> = base
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * Complex64::cis(self.frequency(j)[2] * h * k as f64))
                        .collect();
                    out.extend_from_slice(self.slab(&amps, h, shape[0], &right).as_slice());
                }
                out
            }
            _ => grid.map_points(|x| match quantity {
                GridQuantity::Value => self.value(x),
                GridQuantity::Derivative(axis) => self.jet(x).gradient[axis],
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(dim: usize) -> TrigField {
        let freqs: Vec<f64> = (0..5 * dim)
            .map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.37)
            .collect();
        let cos = vec![0.3, -1.2, 0.8, 0.1, -0.5];
        let sin = vec![1.1, 0.4, -0.6, 0.9, 0.2];
        TrigField::new(dim, freqs, cos, sin, Manifold::Euclidean)
    }

    #[test]
    fn grid_matches_pointwise() {
        for dim in [2, 3] {
            let f = field(dim);
            let grid = Grid::new(vec![-0.7; dim], 0.13, (0..dim).map(|k| 6 + k).collect()).unwrap();
            let quantities =
                std::iter::once(GridQuantity::Value).chain((0..dim).map(GridQuantity::Derivative));
            for q in quantities {
                let fast = f.sample_grid(&grid, q);
                for (k, &v) in fast.iter().enumerate() {
                    let x = grid.point(&grid.unravel(k));
                    let direct = match q {
                        GridQuantity::Value => f.value(&x),
                        GridQuantity::Derivative(a) => f.jet(&x).gradient[a],
                    };
                    assert!(
                        (v - direct).abs() < 1e-12,
                        "{dim} {q:?} {k}: {v} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let f = field(2);
        let x = [0.31, -0.42];
        let jet = f.jet(&x);
        let h = 1e-5;
        for p in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[p] += h;
            xm[p] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((fd - jet.gradient[p]).abs() < 1e-6 * jet.gradient[p].abs().max(1.0));
            let gp = f.jet(&xp).gradient;
            let gm = f.jet(&xm).gradient;
            for q in 0..2 {
                let fd = (gp[q] - gm[q]) / (2.0 * h);
                assert!(
                    (fd - jet.hessian[(p, q)]).abs() < 1e-6 * jet.hessian[(p, q)].abs().max(1.0)
                );
            }
        }
    }
}
