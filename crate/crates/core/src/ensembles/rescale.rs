use nalgebra::{DMatrix, DVector, Vector3};

use super::{Grid, GridQuantity, Jet, Manifold, WaveField};
use crate::error::{Error, Result};

/// Coordinates `u ↦ exp_x(u/λ)` around a center.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// `x + u/λ` (Euclidean space and flat tori).
    Flat { center: Vec<f64>, lambda: f64 },
    /// Geodesic exponential on the unit sphere with an orthonormal tangent frame.
    Sphere {
        center: Vector3<f64>,
        frame: [Vector3<f64>; 2],
        lambda: f64,
    },
}

impl Chart {
    pub fn lambda(&self) -> f64 {
        match self {
            Chart::Flat { lambda, .. } | Chart::Sphere { lambda, .. } => *lambda,
        }
    }
}

/// `u ↦ f(exp_x(u/λ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledField<F> {
    base: F,
    chart: Chart,
}

/// Rescaled pullback of `field` at `center` by `lambda`.
pub fn rescale_at<F: WaveField>(field: F, center: &[f64], lambda: f64) -> Result<RescaledField<F>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
        });
    }
    if center.len() != field.dim() {
        return Err(Error::invalid("center has the wrong dimension"));
    }
    let chart = match field.manifold() {
        Manifold::Euclidean | Manifold::Torus => Chart::Flat {
            center: center.to_vec(),
            lambda,
        },
        Manifold::Sphere => {
            let c = Vector3::new(center[0], center[1], center[2]);
            if (c.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain {
                    what: "sphere center norm",
                    value: c.norm(),
                });
            }
            let axis = (0..3)
                .min_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()))
                .unwrap_or(0);
            let mut e = Vector3::zeros();
            e[axis] = 1.0;
            let a1 = (e - c * c.dot(&e)).normalize();
            let a2 = c.cross(&a1);
            Chart::Sphere {
                center: c,
                frame: [a1, a2],
                lambda,
            }
        }
    };
    Ok(RescaledField { base: field, chart })
}

const SERIES_TERMS: usize = 30;

/// `(C, C', C'', S, S', S'')` for `C(s) = cos√s`, `S(s) = sin√s/√s`.
fn trig_profiles(s: f64) -> [f64; 6] {
    let mut out = [0.0; 6];
    let mut fact_even = 1.0; // (2k)!
    let mut fact_odd = 1.0; // (2k+1)!
    for k in 0..SERIES_TERMS {
        if k > 0 {
            fact_even = fact_odd * (2 * k) as f64;
        }
        fact_odd = fact_even * (2 * k + 1) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        let p0 = s.powi(k as i32);
        let p1 = if k >= 1 {
            kf * s.powi(k as i32 - 1)
        } else {
            0.0
        };
        let p2 = if k >= 2 {
            kf * (kf - 1.0) * s.powi(k as i32 - 2)
        } else {
            0.0
        };
        out[0] += sign * p0 / fact_even;
        out[1] += sign * p1 / fact_even;
        out[2] += sign * p2 / fact_even;
        out[3] += sign * p0 / fact_odd;
        out[4] += sign * p1 / fact_odd;
        out[5] += sign * p2 / fact_odd;
    }
    out
}

impl<F: WaveField> RescaledField<F> {
    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Point of the base manifold that `u` maps to.
    pub fn pull(&self, u: &[f64]) -> Result<Vec<f64>> {
        match &self.chart {
            Chart::Flat { center, lambda } => {
                Ok(center.iter().zip(u).map(|(c, x)| c + x / lambda).collect())
            }
            Chart::Sphere {
                center,
                frame,
                lambda,
            } => {
                let w = [u[0] / lambda, u[1] / lambda];
                let len = (w[0] * w[0] + w[1] * w[1]).sqrt();
                if len >= std::f64::consts::PI {
                    return Err(Error::OutOfChart { length: len });
                }
                let prof = trig_profiles(len * len);
                let p = center * prof[0] + (frame[0] * w[0] + frame[1] * w[1]) * prof[3];
                Ok(p.as_slice().to_vec())
            }
        }
    }

    pub fn try_value(&self, u: &[f64]) -> Result<f64> {
        Ok(self.base.value(&self.pull(u)?))
    }

    pub fn try_jet(&self, u: &[f64]) -> Result<Jet> {
        match &self.chart {
            Chart::Flat { lambda, .. } => {
                let mut jet = self.base.jet(&self.pull(u)?);
                jet.gradient /= *lambda;
                jet.hessian /= lambda * lambda;
                Ok(jet)
            }
            Chart::Sphere {
                center,
                frame,
                lambda,
            } => {
                let p = self.pull(u)?;
                let ambient = self.base.jet(&p);
                let w = [u[0] / lambda, u[1] / lambda];
                let [_, c1, c2, s0, s1, s2] = trig_profiles(w[0] * w[0] + w[1] * w[1]);
                let aw = frame[0] * w[0] + frame[1] * w[1];
                let first: Vec<Vector3<f64>> = (0..2)
                    .map(|i| center * (2.0 * w[i] * c1) + aw * (2.0 * w[i] * s1) + frame[i] * s0)
                    .collect();
                let grad3 = Vector3::new(
                    ambient.gradient[0],
                    ambient.gradient[1],
                    ambient.gradient[2],
                );
                let hess3 = ambient.hessian.fixed_view::<3, 3>(0, 0).into_owned();
                let mut jet = Jet {
                    value: ambient.value,
                    gradient: DVector::zeros(2),
                    hessian: DMatrix::zeros(2, 2),
                };
                for i in 0..2 {
                    jet.gradient[i] = grad3.dot(&first[i]) / lambda;
                    for j in 0..2 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        let second = center * (2.0 * delta * c1 + 4.0 * w[i] * w[j] * c2)
                            + aw * (2.0 * delta * s1 + 4.0 * w[i] * w[j] * s2)
                            + (frame[j] * w[i] + frame[i] * w[j]) * (2.0 * s1);
                        let curv = first[i].dot(&(hess3 * first[j]));
                        jet.hessian[(i, j)] = (curv + grad3.dot(&second)) / (lambda * lambda);
                    }
                }
                Ok(jet)
            }
        }
    }
}

impl<F: WaveField> WaveField for RescaledField<F> {
    fn dim(&self) -> usize {
        match self.chart {
            Chart::Flat { ref center, .. } => center.len(),
            Chart::Sphere { .. } => 2,
        }
    }

    fn manifold(&self) -> Manifold {
        Manifold::Euclidean
    }

    /// NaN outside the chart.
    fn value(&self, u: &[f64]) -> f64 {
        self.try_value(u).unwrap_or(f64::NAN)
    }

    /// All-NaN outside the chart.
    fn jet(&self, u: &[f64]) -> Jet {
        self.try_jet(u).unwrap_or_else(|_| {
            let n = self.dim();
            Jet {
                value: f64::NAN,
                gradient: DVector::from_element(n, f64::NAN),
                hessian: DMatrix::from_element(n, n, f64::NAN),
            }
        })
    }

    fn sample_grid(&self, grid: &Grid, quantity: GridQuantity) -> Vec<f64> {
        match &self.chart {
            Chart::Flat { center, lambda } => {
                let origin = center
                    .iter()
                    .zip(grid.origin())
                    .map(|(c, o)| c + o / lambda)
                    .collect();
                let Ok(mapped) = Grid::new(origin, grid.spacing() / lambda, grid.shape().to_vec())
                else {
                    return vec![f64::NAN; grid.len()];
                };
                let mut values = self.base.sample_grid(&mapped, quantity);
                if let GridQuantity::Derivative(_) = quantity {
                    values.iter_mut().for_each(|v| *v /= lambda);
                }
                values
            }
            Chart::Sphere { .. } => grid.map_points(|u| match quantity {
                GridQuantity::Value => self.value(u),
                GridQuantity::Derivative(axis) => self.jet(u).gradient[axis],
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_rwm, sample_sphere, sample_torus, DirectionMode, TorusSpectrum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_chain_rule<F: WaveField>(f: &F, u: [f64; 2]) {
        let jet = f.jet(&u);
        let h = 1e-5;
        for p in 0..2 {
            let mut up = u;
            let mut um = u;
            up[p] += h;
            um[p] -= h;
            let fd = (f.value(&up) - f.value(&um)) / (2.0 * h);
            let scale = jet.gradient.amax().max(1e-3);
            assert!(
                (fd - jet.gradient[p]).abs() < 1e-5 * scale,
                "grad {p}: {fd} vs {}",
                jet.gradient[p]
            );
            let gp = f.jet(&up).gradient;
            let gm = f.jet(&um).gradient;
            let hscale = jet.hessian.amax().max(1e-3);
            for q in 0..2 {
                let fd = (gp[q] - gm[q]) / (2.0 * h);
                assert!(
                    (fd - jet.hessian[(p, q)]).abs() < 1e-5 * hscale,
                    "hess {p}{q}"
                );
            }
        }
    }

    #[test]
    fn unit_scale_is_identity() {
        let f = sample_rwm(
            2,
            16,
            DirectionMode::IidUniform,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let g = rescale_at(&f, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(g.value(&[0.3, 0.4]), f.value(&[0.3, 0.4]));
        assert_eq!(g.jet(&[0.3, 0.4]), f.jet(&[0.3, 0.4]));
    }

    #[test]
    fn chain_rule_on_torus_and_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spectrum = TorusSpectrum::new(100.0).unwrap();
        let torus = sample_torus(&spectrum, &mut rng);
        check_chain_rule(
            &rescale_at(&torus, &[0.3, 0.8], 100.0).unwrap(),
            [0.7, -1.3],
        );
        let sphere = sample_sphere(30, &mut rng).unwrap();
        let c = [0.48, -0.6, 0.64];
        let g = rescale_at(&sphere, &c, 30.0).unwrap();
        check_chain_rule(&g, [0.7, -1.3]);
        check_chain_rule(&g, [0.0, 0.0]);
        check_chain_rule(&g, [40.0, 30.0]);
    }

    #[test]
    fn sphere_chart_stays_on_the_sphere_and_rejects_far_points() {
        let sphere = sample_sphere(5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let g = rescale_at(&sphere, &[0.0, 0.0, 1.0], 2.0).unwrap();
        let p = g.pull(&[3.0, 4.0]).unwrap();
        let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-14);
        // geodesic distance equals |u|/λ
        assert!((p[2].acos() - 2.5).abs() < 1e-12);
        assert!(matches!(
            g.try_value(&[2.0 * std::f64::consts::PI, 0.0]),
            Err(Error::OutOfChart { .. })
        ));
        assert!(g.value(&[7.0, 0.0]).is_nan());
    }

    #[test]
    fn flat_grid_matches_pointwise() {
        let spectrum = TorusSpectrum::new(100.0).unwrap();
        let torus = sample_torus(&spectrum, &mut ChaCha8Rng::seed_from_u64(4));
        let g = rescale_at(&torus, &[0.25, 0.5], 100.0).unwrap();
        let grid = Grid::cube(&[0.0, 0.0], 2.0, 0.5).unwrap();
        let fast = g.sample_grid(&grid, GridQuantity::Derivative(1));
        for (k, v) in fast.iter().enumerate() {
            let u = grid.point(&grid.unravel(k));
            assert!((v - g.jet(&u).gradient[1]).abs() < 1e-10);
        }
    }
}
