use std::collections::HashMap;

use nalgebra::DMatrix;

use super::GaussianLaw;
use crate::error::{Error, Result};
use crate::kernel::{DerivativeStencil, IsotropicKernel};

/// Largest total jet dimension accepted by [`assemble_jet_covariance`].
pub const MAX_JET_DIMENSION: usize = 10_000;
/// Points closer than this are treated as coincident.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Which derivative orders of the field are observed at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JetOrders {
    pub value: bool,
    pub gradient: bool,
    pub hessian: bool,
}

impl JetOrders {
    pub const VALUE: Self = Self {
        value: true,
        gradient: false,
        hessian: false,
    };
    pub const GRADIENT: Self = Self {
        value: false,
        gradient: true,
        hessian: false,
    };
    pub const HESSIAN: Self = Self {
        value: false,
        gradient: false,
        hessian: true,
    };
    pub const GRADIENT_HESSIAN: Self = Self {
        value: false,
        gradient: true,
        hessian: true,
    };
    pub const VALUE_GRADIENT: Self = Self {
        value: true,
        gradient: true,
        hessian: false,
    };
    pub const FULL: Self = Self {
        value: true,
        gradient: true,
        hessian: true,
    };

    pub fn len(&self, dim: usize) -> usize {
        usize::from(self.value)
            + if self.gradient { dim } else { 0 }
            + if self.hessian { dim * (dim + 1) / 2 } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        !(self.value || self.gradient || self.hessian)
    }
}

/// Derivative multi-indices of one point's jet, in storage order:
/// value, gradient `e_1..e_n`, Hessian `(1,1),(1,2),…,(1,n),(2,2),…`.
pub fn jet_components(dim: usize, orders: JetOrders) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(orders.len(dim));
    if orders.value {
        out.push(vec![0; dim]);
    }
    if orders.gradient {
        for i in 0..dim {
            let mut g = vec![0; dim];
            g[i] = 1;
            out.push(g);
        }
    }
    if orders.hessian {
        for i in 0..dim {
            for j in i..dim {
                let mut g = vec![0; dim];
                g[i] += 1;
                g[j] += 1;
                out.push(g);
            }
        }
    }
    out
}

/// Points with their observed jet orders.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSpec {
    dim: usize,
    points: Vec<Vec<f64>>,
    orders: Vec<JetOrders>,
    min_separation: f64,
}

impl JetSpec {
    pub fn new(points: Vec<Vec<f64>>, orders: Vec<JetOrders>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("no points"))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points have inconsistent dimensions"));
        }
        if orders.len() != points.len() {
            return Err(Error::invalid("one jet order set per point is required"));
        }
        if orders.iter().any(JetOrders::is_empty) {
            return Err(Error::invalid(
                "every point must observe at least one order",
            ));
        }
        let mut min_separation = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let sep = distance(&points[i], &points[j]);
                if sep <= DUPLICATE_TOLERANCE {
                    return Err(Error::DuplicatePoints {
                        first: i,
                        second: j,
                        separation: sep,
                    });
                }
                min_separation = min_separation.min(sep);
            }
        }
        Ok(Self {
            dim,
            points,
            orders,
            min_separation,
        })
    }

    /// Same orders at every point.
    pub fn uniform(points: Vec<Vec<f64>>, orders: JetOrders) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![orders; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn orders(&self) -> &[JetOrders] {
        &self.orders
    }

    /// Smallest pairwise distance (infinite for one point).
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn total_len(&self) -> usize {
        self.orders.iter().map(|o| o.len(self.dim)).sum()
    }

    /// Start offset of each point's block.
    pub fn offsets(&self) -> Vec<usize> {
        self.orders
            .iter()
            .scan(0, |acc, o| {
                let start = *acc;
                *acc += o.len(self.dim);
                Some(start)
            })
            .collect()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Caches chain-rule stencils by multi-index.
#[derive(Default)]
struct StencilCache(HashMap<Vec<usize>, DerivativeStencil>);

impl StencilCache {
    fn get(&mut self, dim: usize, gamma: Vec<usize>) -> Result<&DerivativeStencil> {
        use std::collections::hash_map::Entry;
        match self.0.entry(gamma) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => {
                let stencil = DerivativeStencil::new(dim, e.key())?;
                Ok(e.insert(stencil))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_block(
    kernel: &IsotropicKernel<f64>,
    cache: &mut StencilCache,
    u: &[f64],
    v: &[f64],
    rows: &[Vec<usize>],
    cols: &[Vec<usize>],
    out: &mut DMatrix<f64>,
    at: (usize, usize),
) -> Result<()> {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            let gamma: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let sign = if b.iter().sum::<usize>() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[(at.0 + i, at.1 + j)] = sign * cache.get(kernel.dim(), gamma)?.eval(kernel, &d);
        }
    }
    Ok(())
}

/// `Cov(∂^a φ(u), ∂^b φ(v))` for `a` in `rows`, `b` in `cols`.
pub fn cross_block(
    kernel: &IsotropicKernel<f64>,
    u: &[f64],
    v: &[f64],
    rows: &[Vec<usize>],
    cols: &[Vec<usize>],
) -> Result<DMatrix<f64>> {
    if u.len() != kernel.dim() || v.len() != kernel.dim() {
        return Err(Error::invalid(
            "point dimension differs from the kernel dimension",
        ));
    }
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    fill_block(
        kernel,
        &mut StencilCache::default(),
        u,
        v,
        rows,
        cols,
        &mut out,
        (0, 0),
    )?;
    Ok(out)
}

/// Joint covariance matrix of the jets described by `spec`.
pub fn jet_covariance_matrix(
    kernel: &IsotropicKernel<f64>,
    spec: &JetSpec,
) -> Result<DMatrix<f64>> {
    if spec.dim() != kernel.dim() {
        return Err(Error::invalid(
            "jet dimension differs from the kernel dimension",
        ));
    }
    let total = spec.total_len();
    if total > MAX_JET_DIMENSION {
        return Err(Error::invalid(format!(
            "jet dimension {total} exceeds {MAX_JET_DIMENSION}"
        )));
    }
    let comps: Vec<Vec<Vec<usize>>> = spec
        .orders()
        .iter()
        .map(|&o| jet_components(spec.dim(), o))
        .collect();
    let offsets = spec.offsets();
    let mut cov = DMatrix::zeros(total, total);
    let mut cache = StencilCache::default();
    let pts = spec.points();
    for p in 0..pts.len() {
        for q in p..pts.len() {
            fill_block(
                kernel,
                &mut cache,
                &pts[p],
                &pts[q],
                &comps[p],
                &comps[q],
                &mut cov,
                (offsets[p], offsets[q]),
            )?;
        }
    }
    for i in 0..total {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    Ok(cov)
}

/// Gaussian law of the jets described by `spec` under `kernel`.
pub fn assemble_jet_covariance(
    kernel: &IsotropicKernel<f64>,
    spec: &JetSpec,
) -> Result<GaussianLaw> {
    GaussianLaw::new(jet_covariance_matrix(kernel, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> IsotropicKernel<f64> {
        IsotropicKernel::unit(2).unwrap()
    }

    #[test]
    fn one_point_value_gradient() {
        let spec = JetSpec::uniform(vec![vec![0.3, -1.0]], JetOrders::VALUE_GRADIENT).unwrap();
        let law = assemble_jet_covariance(&unit2(), &spec).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.5]));
        assert!((law.cov() - expected).amax() < 1e-15);
        assert!((law.min_eigenvalue() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_hessian_parity() {
        let spec = JetSpec::uniform(vec![vec![0.0, 0.0]], JetOrders::GRADIENT_HESSIAN).unwrap();
        let law = assemble_jet_covariance(&unit2(), &spec).unwrap();
        let c = law.cov();
        for i in 0..2 {
            for j in 2..5 {
                assert_eq!(c[(i, j)], 0.0);
            }
        }
        let hess = c.view((2, 2), (3, 3));
        let expected = [[0.375, 0.0, 0.125], [0.0, 0.125, 0.0], [0.125, 0.0, 0.375]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((hess[(i, j)] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditioned_hessian_law() {
        let spec = JetSpec::uniform(vec![vec![0.0, 0.0]], JetOrders::GRADIENT_HESSIAN).unwrap();
        let law = assemble_jet_covariance(&unit2(), &spec).unwrap();
        let cond = law.condition(&[0, 1], &[0.0, 0.0]).unwrap();
        assert!((cond.cov() - law.cov().view((2, 2), (3, 3))).amax() < 1e-15);
        let grad = law.marginal(&[0, 1]).unwrap();
        assert!((grad.density_at_zero().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
    }

    #[test]
    fn two_points_at_bessel_zero() {
        let spec = JetSpec::uniform(
            vec![vec![0.0, 0.0], vec![2.404_825_557_695_773, 0.0]],
            JetOrders::VALUE,
        )
        .unwrap();
        let law = assemble_jet_covariance(&unit2(), &spec).unwrap();
        assert!((law.cov() - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn duplicates_are_rejected() {
        let err =
            JetSpec::uniform(vec![vec![1.0, 1.0], vec![1.0, 1.0]], JetOrders::VALUE).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicatePoints {
                first: 0,
                second: 1,
                ..
            }
        ));
    }

    #[test]
    fn component_layout() {
        let c = jet_components(3, JetOrders::HESSIAN);
        assert_eq!(
            c,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(JetOrders::FULL.len(2), 6);
    }

    #[test]
    fn cross_block_matches_kernel_derivative() {
        let k = unit2();
        let u = [0.4, 1.1];
        let v = [-0.7, 0.2];
        let rows = jet_components(2, JetOrders::GRADIENT);
        let cols = jet_components(2, JetOrders::HESSIAN);
        let block = cross_block(&k, &u, &v, &rows, &cols).unwrap();
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                let direct = k.derivative(a, b, &u, &v).unwrap();
                assert!((block[(i, j)] - direct).abs() < 1e-15);
            }
        }
    }
}
