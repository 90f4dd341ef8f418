use std::collections::HashMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{JetWeight, Region};
use crate::ensembles::{Grid, GridQuantity, Jet, WaveField};
use crate::error::{Error, Result};

/// Largest grid spacing accepted for critical-point search.
pub const MAX_SPACING: f64 = 0.25;
/// Converged points closer than this many grid spacings are one point.
const MERGE_RADIUS: f64 = 1e-3;
/// Hessians with `|det| < DEGENERATE_DET` are flagged instead of classified.
pub const DEGENERATE_DET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    /// Number of negative Hessian eigenvalues.
    pub index: usize,
    pub grad_norm: f64,
    pub degenerate: bool,
    pub weight: f64,
}

/// Why Newton starts did not produce a new point (five starts per candidate
/// cell in 2D, nine in 3D).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritDiagnostics {
    pub candidates: usize,
    pub diverged: usize,
    pub left_basin: usize,
    pub duplicates: usize,
    pub outside_region: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CritResult {
    pub dim: usize,
    pub points: Vec<CriticalPoint>,
    /// Non-degenerate points by index `q = 0..=n`.
    pub signature_counts: Vec<usize>,
    pub degenerate: usize,
    /// `Σ ψ` over non-degenerate points.
    pub weighted_total: f64,
    pub region: Region,
    pub h: f64,
    pub diagnostics: CritDiagnostics,
}

impl CritResult {
    /// Non-degenerate critical points.
    pub fn count(&self) -> usize {
        self.signature_counts.iter().sum()
    }

    /// `C(ψ)` divided by the region volume.
    pub fn normalized(&self) -> f64 {
        self.weighted_total / self.region.volume()
    }

    /// Columns `x, y[, z], value, q, grad_norm, degenerate`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let coords = ["x", "y", "z"];
        writeln!(
            out,
            "{},value,q,grad_norm,degenerate",
            coords[..self.dim].join(",")
        )?;
        for p in &self.points {
            let loc: Vec<String> = p.location.iter().map(f64::to_string).collect();
            writeln!(
                out,
                "{},{},{},{:e},{}",
                loc.join(","),
                p.value,
                p.index,
                p.grad_norm,
                p.degenerate
            )?;
        }
        Ok(())
    }
}

enum Outcome {
    Found(Vec<f64>, Jet),
    Diverged,
    LeftBasin,
}

/// Newton iteration on `∇φ` with a pseudo-inverse step, so that degenerate
/// directions are left alone rather than amplified.
fn newton<F: WaveField>(field: &F, start: &[f64], h: f64, tol: f64, max_iter: usize) -> Outcome {
    let n = start.len();
    let mut x = DVector::from_column_slice(start);
    let origin = x.clone();
    for _ in 0..=max_iter {
        let jet = field.jet(x.as_slice());
        if jet.gradient.norm() < tol {
            return Outcome::Found(x.as_slice().to_vec(), jet);
        }
        let eig = SymmetricEigen::new(jet.hessian.clone());
        let cutoff = 1e-12 * eig.eigenvalues.amax();
        let mut step = DVector::zeros(n);
        for k in 0..n {
            let l = eig.eigenvalues[k];
            if l.abs() > cutoff {
                let v = eig.eigenvectors.column(k);
                step -= v * (v.dot(&jet.gradient) / l);
            }
        }
        x += step;
        if (&x - &origin).amax() > 1.5 * h {
            return Outcome::LeftBasin;
        }
    }
    Outcome::Diverged
}

fn classify(hessian: &DMatrix<f64>) -> (usize, bool) {
    let eig = SymmetricEigen::new(hessian.clone());
    let det: f64 = eig.eigenvalues.iter().product();
    (
        eig.eigenvalues.iter().filter(|&&l| l < 0.0).count(),
        det.abs() < DEGENERATE_DET,
    )
}

/// Cells where every gradient component changes sign (zero counts as both).
fn candidate_cells(region: &Region, grid: &Grid, gradients: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dim = grid.dim();
    let shape = grid.shape();
    let cells: Vec<usize> = (0..dim)
        .map(|a| {
            if region.is_periodic() {
                shape[a]
            } else {
                shape[a] - 1
            }
        })
        .collect();
    let total: usize = cells.iter().product();
    (0..total)
        .into_par_iter()
        .filter_map(|linear| {
            let mut rest = linear;
            let cell: Vec<usize> = cells
                .iter()
                .map(|&c| {
                    let i = rest % c;
                    rest /= c;
                    i
                })
                .collect();
            let corners: Vec<usize> = (0..1usize << dim)
                .map(|mask| {
                    let idx: Vec<usize> = (0..dim)
                        .map(|a| (cell[a] + ((mask >> a) & 1)) % shape[a])
                        .collect();
                    grid.linear_index(&idx)
                })
                .collect();
            let changes = gradients.iter().all(|g| {
                let lo = corners.iter().map(|&k| g[k]).fold(f64::INFINITY, f64::min);
                let hi = corners
                    .iter()
                    .map(|&k| g[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            });
            changes.then_some(cell)
        })
        .collect()
}

/// Critical points of `field` over `region` by sign scan plus Newton.
pub fn critical_points<F: WaveField>(
    field: &F,
    region: &Region,
    h: f64,
    newton_tol: f64,
    max_iter: usize,
    weight: JetWeight,
) -> Result<CritResult> {
    region.validate()?;
    let dim = region.dim();
    if field.dim() != dim {
        return Err(Error::invalid("field and region dimensions differ"));
    }
    if !(h > 0.0) || h > MAX_SPACING {
        return Err(Error::GridTooCoarse {
            h,
            limit: MAX_SPACING,
        });
    }
    if !(newton_tol > 0.0) || newton_tol > 1e-8 {
        return Err(Error::invalid("Newton tolerance must lie in (0, 1e-8]"));
    }
    let grid = region.grid(h)?;
    let h = grid.spacing();
    let gradients: Vec<Vec<f64>> = (0..dim)
        .map(|a| field.sample_grid(&grid, GridQuantity::Derivative(a)))
        .collect();
    let cells = candidate_cells(region, &grid, &gradients);
    // Centre plus corners pulled a quarter cell inward, so both members of a
    // close pair inside one cell get a start.
    let offsets: Vec<Vec<f64>> = std::iter::once(vec![0.5; dim])
        .chain((0..1usize << dim).map(|mask| {
            (0..dim)
                .map(|a| if (mask >> a) & 1 == 1 { 0.75 } else { 0.25 })
                .collect()
        }))
        .collect();
    let origin = grid.origin();
    let outcomes: Vec<Outcome> = cells
        .par_iter()
        .flat_map_iter(|cell| {
            offsets.iter().map(move |offset| {
                let start: Vec<f64> = cell
                    .iter()
                    .zip(origin)
                    .zip(offset)
                    .map(|((&i, &o), &t)| o + h * (i as f64 + t))
                    .collect();
                newton(field, &start, h, newton_tol, max_iter)
            })
        })
        .collect();

    let mut diagnostics = CritDiagnostics {
        candidates: cells.len(),
        ..Default::default()
    };
    let period = match region {
        Region::Torus { side } => Some(*side),
        Region::Ball { .. } => None,
    };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut points: Vec<CriticalPoint> = Vec::new();
    for outcome in outcomes {
        let (mut loc, jet) = match outcome {
            Outcome::Found(loc, jet) => (loc, jet),
            Outcome::Diverged => {
                diagnostics.diverged += 1;
                continue;
            }
            Outcome::LeftBasin => {
                diagnostics.left_basin += 1;
                continue;
            }
        };
        if let Some(side) = period {
            loc.iter_mut().for_each(|x| *x = x.rem_euclid(side));
        }
        if !region.contains(&loc) {
            diagnostics.outside_region += 1;
            continue;
        }
        let key: Vec<i64> = loc.iter().map(|x| (x / h).floor() as i64).collect();
        let wraps = period.map(|side| (side / h).round() as i64);
        let is_duplicate = neighbour_keys(&key, wraps).iter().any(|k| {
            buckets.get(k).is_some_and(|ids| {
                ids.iter()
                    .any(|&id| distance(&points[id].location, &loc, period) < MERGE_RADIUS * h)
            })
        });
        if is_duplicate {
            diagnostics.duplicates += 1;
            continue;
        }
        let (index, degenerate) = classify(&jet.hessian);
        let w = if degenerate {
            0.0
        } else {
            weight.eval(Some(&jet), Some(index))
        };
        buckets.entry(key).or_default().push(points.len());
        points.push(CriticalPoint {
            location: loc,
            value: jet.value,
            index,
            grad_norm: jet.gradient.norm(),
            degenerate,
            weight: w,
        });
    }
    let mut signature_counts = vec![0; dim + 1];
    let mut degenerate = 0;
    for p in &points {
        if p.degenerate {
            degenerate += 1;
        } else {
            signature_counts[p.index] += 1;
        }
    }
    let weighted_total = points.iter().map(|p| p.weight).sum();
    Ok(CritResult {
        dim,
        points,
        signature_counts,
        degenerate,
        weighted_total,
        region: region.clone(),
        h,
        diagnostics,
    })
}

fn neighbour_keys(key: &[i64], wrap: Option<i64>) -> Vec<Vec<i64>> {
    let dim = key.len();
    (0..3usize.pow(dim as u32))
        .map(|mut code| {
            key.iter()
                .map(|&k| {
                    let off = (code % 3) as i64 - 1;
                    code /= 3;
                    match wrap {
                        Some(n) => (k + off).rem_euclid(n),
                        None => k + off,
                    }
                })
                .collect()
        })
        .collect()
}

fn distance(a: &[f64], b: &[f64], period: Option<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut d = (x - y).abs();
            if let Some(p) = period {
                d = d.min(p - d);
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Critical points at `h` and `h/2`, refined to `h/4` when the two
/// non-degenerate counts disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedCrits {
    pub result: CritResult,
    pub agreed: bool,
    pub spacings: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn critical_points_checked<F: WaveField>(
    field: &F,
    region: &Region,
    h: f64,
    newton_tol: f64,
    max_iter: usize,
    weight: JetWeight,
) -> Result<CheckedCrits> {
    let coarse = critical_points(field, region, h, newton_tol, max_iter, weight)?;
    let fine = critical_points(field, region, h / 2.0, newton_tol, max_iter, weight)?;
    if coarse.count() == fine.count() {
        return Ok(CheckedCrits {
            counts: vec![coarse.count(), fine.count()],
            spacings: vec![coarse.h, fine.h],
            result: fine,
            agreed: true,
        });
    }
    let finest = critical_points(field, region, h / 4.0, newton_tol, max_iter, weight)?;
    Ok(CheckedCrits {
        counts: vec![coarse.count(), fine.count(), finest.count()],
        spacings: vec![coarse.h, fine.h, finest.h],
        result: finest,
        agreed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_rwm, DirectionMode, PlaneWaveField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_maximum() {
        let dirs: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / 3.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let f = PlaneWaveField::from_parts(2, dirs, vec![1.0; 3], vec![0.0; 3]).unwrap();
        let r = critical_points(
            &f,
            &Region::ball(&[0.0, 0.0], 1.0),
            0.1,
            1e-10,
            30,
            JetWeight::One,
        )
        .unwrap();
        let origin = r
            .points
            .iter()
            .find(|p| p.location.iter().all(|x| x.abs() < 1e-9))
            .unwrap();
        assert_eq!(origin.index, 2);
        assert!((origin.value - 3.0).abs() < 1e-12);
        assert!(!origin.degenerate);
    }

    #[test]
    fn degenerate_lines_are_flagged() {
        let f = PlaneWaveField::from_parts(2, vec![vec![1.0, 0.0]], vec![1.0], vec![0.0]).unwrap();
        let region = Region::ball(&[0.0, 0.0], 2.0);
        let a = critical_points(&f, &region, 0.1, 1e-10, 30, JetWeight::One).unwrap();
        let b = critical_points(&f, &region, 0.05, 1e-10, 30, JetWeight::One).unwrap();
        assert_eq!(a.count(), 0);
        assert_eq!(b.count(), 0);
        assert!(a.degenerate > 0 && b.degenerate > a.degenerate);
        assert!(a.points.iter().all(|p| p.location[0].abs() < 1e-9
            || (p.location[0].abs() - std::f64::consts::PI).abs() < 1e-9));
    }

    #[test]
    fn random_fields_are_stable_under_refinement_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let region = Region::ball(&[0.0, 0.0], 6.0);
        let mut agreed = 0;
        for _ in 0..10 {
            let f = sample_rwm(2, 64, DirectionMode::IidUniform, &mut rng).unwrap();
            let checked =
                critical_points_checked(&f, &region, 0.15, 1e-10, 30, JetWeight::One).unwrap();
            agreed += usize::from(checked.agreed);
            for p in &checked.result.points {
                assert!(p.grad_norm < 1e-10);
            }
            let scaled = f.scaled(3.0);
            let a = critical_points(&f, &region, 0.15, 1e-10, 30, JetWeight::One).unwrap();
            let b = critical_points(&scaled, &region, 0.15, 1e-10, 30, JetWeight::One).unwrap();
            assert_eq!(a.signature_counts, b.signature_counts);
        }
        assert!(agreed >= 9, "{agreed}");
    }

    #[test]
    fn rejects_loose_tolerance() {
        let f = PlaneWaveField::from_parts(2, vec![vec![1.0, 0.0]], vec![1.0], vec![0.0]).unwrap();
        assert!(critical_points(
            &f,
            &Region::ball(&[0.0, 0.0], 1.0),
            0.1,
            1e-6,
            30,
            JetWeight::One
        )
        .is_err());
        assert!(critical_points(
            &f,
            &Region::ball(&[0.0, 0.0], 1.0),
            0.3,
            1e-10,
            30,
            JetWeight::One
        )
        .is_err());
    }
}
