use std::io::{self, Write};

use rayon::prelude::*;

use super::{JetWeight, Region};
use crate::ensembles::{Grid, GridQuantity, WaveField};
use crate::error::{Error, Result};

/// Zero set of a field over a region, as line segments (plane) or
/// triangles (space).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalResult {
    pub dim: usize,
    pub segments: Vec<[[f64; 2]; 2]>,
    pub triangles: Vec<[[f64; 3]; 3]>,
    /// Length or area of the zero set.
    pub total_measure: f64,
    /// `Σ ψ(midpoint)·measure` over elements.
    pub weighted_total: f64,
    pub region: Region,
    pub h: f64,
    /// Grid nodes where the field was exactly zero and got nudged.
    pub nudged: usize,
}

impl NodalResult {
    /// `Z(ψ)` divided by the region volume.
    pub fn normalized(&self) -> f64 {
        self.weighted_total / self.region.volume()
    }

    pub fn element_count(&self) -> usize {
        self.segments.len() + self.triangles.len()
    }

    /// One row per element: `x0,y0,x1,y1` or `x0,y0,z0,…,z2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.dim == 2 {
            writeln!(out, "x0,y0,x1,y1")?;
            for [a, b] in &self.segments {
                writeln!(out, "{},{},{},{}", a[0], a[1], b[0], b[1])?;
            }
        } else {
            writeln!(out, "x0,y0,z0,x1,y1,z1,x2,y2,z2")?;
            for t in &self.triangles {
                let row: Vec<String> = t.iter().flatten().map(f64::to_string).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

/// Replaces exact zeros by `1e-14` times the largest neighbouring magnitude.
fn nudge_zeros(values: &mut [f64], grid: &Grid) -> usize {
    let zeros: Vec<usize> = (0..values.len()).filter(|&k| values[k] == 0.0).collect();
    for &k in &zeros {
        let idx = grid.unravel(k);
        let mut amp: f64 = 0.0;
        for axis in 0..idx.len() {
            for step in [-1i64, 1] {
                let j = idx[axis] as i64 + step;
                if j >= 0 && (j as usize) < grid.shape()[axis] {
                    let mut nb = idx.clone();
                    nb[axis] = j as usize;
                    amp = amp.max(values[grid.linear_index(&nb)].abs());
                }
            }
        }
        values[k] = 1e-14 * if amp > 0.0 { amp } else { 1.0 };
    }
    zeros.len()
}

fn crossing<const N: usize>(pa: [f64; N], va: f64, pb: [f64; N], vb: f64) -> [f64; N] {
    let t = va / (va - vb);
    std::array::from_fn(|k| pa[k] + t * (pb[k] - pa[k]))
}

fn length(s: &[[f64; 2]; 2]) -> f64 {
    (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1])
}

fn area(t: &[[f64; 3]; 3]) -> f64 {
    let u: [f64; 3] = std::array::from_fn(|k| t[1][k] - t[0][k]);
    let v: [f64; 3] = std::array::from_fn(|k| t[2][k] - t[0][k]);
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// Nodal length (`n = 2`, marching squares) or area (`n = 3`, marching
/// tetrahedra on the six-simplex split of each cube) over `region`.
///
/// Planar segments are clipped exactly to a ball; in space a cell counts
/// when its center lies in the ball.
pub fn nodal_measure<F: WaveField>(
    field: &F,
    region: &Region,
    h: f64,
    weight: JetWeight,
) -> Result<NodalResult> {
    region.validate()?;
    let dim = region.dim();
    if field.dim() != dim {
        return Err(Error::invalid("field and region dimensions differ"));
    }
    let scale = match region {
        Region::Ball { radius, .. } => *radius,
        Region::Torus { side } => *side,
    };
    if !(h > 0.0) || h > scale / 10.0 {
        return Err(Error::GridTooCoarse {
            h,
            limit: scale / 10.0,
        });
    }
    let grid = region.grid(h)?;
    let mut values = field.sample_grid(&grid, GridQuantity::Value);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("field is not finite on the grid"));
    }
    let nudged = nudge_zeros(&mut values, &grid);
    let (segments, triangles) = match dim {
        2 => (march_squares(field, region, &grid, &values), Vec::new()),
        3 if !region.is_periodic() => (Vec::new(), march_tetrahedra(region, &grid, &values)),
        _ => {
            return Err(Error::UnsupportedDimension {
                n: dim,
                context: "nodal geometry",
            })
        }
    };
    let lengths: Vec<(f64, Vec<f64>)> = segments
        .iter()
        .map(|s| {
            (
                length(s),
                vec![0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])],
            )
        })
        .chain(triangles.iter().map(|t| {
            (
                area(t),
                (0..3)
                    .map(|k| (t[0][k] + t[1][k] + t[2][k]) / 3.0)
                    .collect(),
            )
        }))
        .collect();
    let total_measure = lengths.iter().map(|(m, _)| m).sum();
    let weighted_total = if weight.needs_jet() {
        lengths
            .par_iter()
            .map(|(m, mid)| m * weight.eval(Some(&field.jet(mid)), None))
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    } else {
        total_measure
    };
    Ok(NodalResult {
        dim,
        segments,
        triangles,
        total_measure,
        weighted_total,
        region: region.clone(),
        h: grid.spacing(),
        nudged,
    })
}

fn cell_range(region: &Region, grid: &Grid, axis: usize) -> usize {
    if region.is_periodic() {
        grid.shape()[axis]
    } else {
        grid.shape()[axis] - 1
    }
}

fn march_squares<F: WaveField>(
    field: &F,
    region: &Region,
    grid: &Grid,
    values: &[f64],
) -> Vec<[[f64; 2]; 2]> {
    let (nx, ny) = (grid.shape()[0], grid.shape()[1]);
    let (cx, cy) = (cell_range(region, grid, 0), cell_range(region, grid, 1));
    let h = grid.spacing();
    let o = grid.origin();
    let rows: Vec<Vec<[[f64; 2]; 2]>> = (0..cy)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            let j1 = (j + 1) % ny;
            for i in 0..cx {
                let i1 = (i + 1) % nx;
                let x0 = o[0] + h * i as f64;
                let y0 = o[1] + h * j as f64;
                let center = [x0 + 0.5 * h, y0 + 0.5 * h];
                if !touches(region, &center, h) {
                    continue;
                }
                let mut emit = |s: [[f64; 2]; 2]| {
                    if let Some(s) = clip(region, s) {
                        out.push(s);
                    }
                };
                // corners counter-clockwise from (i, j)
                let v = [
                    values[i + nx * j],
                    values[i1 + nx * j],
                    values[i1 + nx * j1],
                    values[i + nx * j1],
                ];
                let p = [[x0, y0], [x0 + h, y0], [x0 + h, y0 + h], [x0, y0 + h]];
                let pos: Vec<bool> = v.iter().map(|&x| x > 0.0).collect();
                // edge k joins corner k and k+1
                let cut = |k: usize| crossing(p[k], v[k], p[(k + 1) % 4], v[(k + 1) % 4]);
                let crossed: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
                match crossed.len() {
                    2 => emit([cut(crossed[0]), cut(crossed[1])]),
                    4 => {
                        let mid_positive = field.value(&center) >= 0.0;
                        if mid_positive == pos[0] {
                            // corners 0 and 2 join through the middle: isolate 1 and 3
                            emit([cut(0), cut(1)]);
                            emit([cut(2), cut(3)]);
                        } else {
                            emit([cut(3), cut(0)]);
                            emit([cut(1), cut(2)]);
                        }
                    }
                    _ => {}
                }
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// Whether a square cell of side `h` may meet the region.
fn touches(region: &Region, center: &[f64; 2], h: f64) -> bool {
    match region {
        Region::Ball { center: c, radius } => {
            (center[0] - c[0]).hypot(center[1] - c[1])
                <= radius + h * std::f64::consts::FRAC_1_SQRT_2
        }
        Region::Torus { .. } => true,
    }
}

/// Part of a segment inside the region.
fn clip(region: &Region, s: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let Region::Ball { center: c, radius } = region else {
        return Some(s);
    };
    let a = [s[0][0] - c[0], s[0][1] - c[1]];
    let d = [s[1][0] - s[0][0], s[1][1] - s[0][1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - radius * radius;
    if qa == 0.0 {
        return None;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let t0 = ((-qb - root) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + root) / (2.0 * qa)).min(1.0);
    if t1 <= t0 {
        return None;
    }
    if t0 == 0.0 && t1 == 1.0 {
        return Some(s);
    }
    let at = |t: f64| [s[0][0] + t * d[0], s[0][1] + t * d[1]];
    Some([at(t0), at(t1)])
}

/// Six tetrahedra sharing the main diagonal of the unit cube, as corner
/// bitmasks `x | y<<1 | z<<2`.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn march_tetrahedra(region: &Region, grid: &Grid, values: &[f64]) -> Vec<[[f64; 3]; 3]> {
    let shape = grid.shape();
    let (cx, cy, cz) = (shape[0] - 1, shape[1] - 1, shape[2] - 1);
    let h = grid.spacing();
    let o = grid.origin();
    let slabs: Vec<Vec<[[f64; 3]; 3]>> = (0..cz)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for j in 0..cy {
                for i in 0..cx {
                    let base = [
                        o[0] + h * i as f64,
                        o[1] + h * j as f64,
                        o[2] + h * k as f64,
                    ];
                    let center = [base[0] + 0.5 * h, base[1] + 0.5 * h, base[2] + 0.5 * h];
                    if !region.contains(&center) {
                        continue;
                    }
                    let corner_value = |c: usize| {
                        values[grid.linear_index(&[
                            i + (c & 1),
                            j + ((c >> 1) & 1),
                            k + ((c >> 2) & 1),
                        ])]
                    };
                    let corner_point = |c: usize| -> [f64; 3] {
                        std::array::from_fn(|a| base[a] + h * ((c >> a) & 1) as f64)
                    };
                    let cv: [f64; 8] = std::array::from_fn(corner_value);
                    if cv.iter().all(|&x| x > 0.0) || cv.iter().all(|&x| x <= 0.0) {
                        continue;
                    }
                    let cp: [[f64; 3]; 8] = std::array::from_fn(corner_point);
                    for tet in &KUHN {
                        let cut = |a: usize, b: usize| {
                            crossing(cp[tet[a]], cv[tet[a]], cp[tet[b]], cv[tet[b]])
                        };
                        let pos: Vec<usize> = (0..4).filter(|&t| cv[tet[t]] > 0.0).collect();
                        let neg: Vec<usize> = (0..4).filter(|&t| cv[tet[t]] <= 0.0).collect();
                        match pos.len() {
                            1 | 3 => {
                                let (lone, rest) = if pos.len() == 1 {
                                    (pos[0], &neg)
                                } else {
                                    (neg[0], &pos)
                                };
                                out.push([
                                    cut(lone, rest[0]),
                                    cut(lone, rest[1]),
                                    cut(lone, rest[2]),
                                ]);
                            }
                            2 => {
                                let (a, b, c, d) = (pos[0], pos[1], neg[0], neg[1]);
                                let q = [cut(a, c), cut(a, d), cut(b, d), cut(b, c)];
                                out.push([q[0], q[1], q[2]]);
                                out.push([q[0], q[2], q[3]]);
                            }
                            _ => {}
                        }
                    }
                }
            }
            out
        })
        .collect();
    slabs.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::PlaneWaveField;

    fn cosine(dim: usize) -> PlaneWaveField {
        let mut d = vec![0.0; dim];
        d[0] = 1.0;
        PlaneWaveField::from_parts(dim, vec![d], vec![1.0], vec![0.0]).unwrap()
    }

    fn chords() -> f64 {
        2.0 * 2.0 * (4.0 - std::f64::consts::FRAC_PI_2.powi(2)).sqrt()
    }

    #[test]
    fn cosine_chords() {
        let f = cosine(2);
        let r = nodal_measure(&f, &Region::ball(&[0.0, 0.0], 2.0), 0.01, JetWeight::One).unwrap();
        assert!(
            (r.total_measure / chords() - 1.0).abs() < 0.01,
            "{}",
            r.total_measure
        );
        for [a, b] in &r.segments {
            assert!((a[0].abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
            assert!((b[0].abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
        }
        let sum: f64 = r.segments.iter().map(length).sum();
        assert!((sum - r.total_measure).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_gives_empty_result() {
        let f = PlaneWaveField::from_parts(2, vec![vec![1.0, 0.0]], vec![1.0], vec![0.0]).unwrap();
        let r = nodal_measure(&f, &Region::ball(&[0.0, 0.0], 1.0), 0.05, JetWeight::One).unwrap();
        assert_eq!(r.element_count(), 0);
        assert_eq!(r.total_measure, 0.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let f = cosine(2);
        assert!(matches!(
            nodal_measure(&f, &Region::ball(&[0.0, 0.0], 1.0), 0.2, JetWeight::One),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn exact_zeros_are_nudged() {
        // cos(x) vanishes exactly on no float grid, so use sin(x) through the origin
        let f = PlaneWaveField::from_parts(2, vec![vec![1.0, 0.0]], vec![0.0], vec![1.0]).unwrap();
        let r = nodal_measure(&f, &Region::ball(&[0.0, 0.0], 1.0), 0.05, JetWeight::One).unwrap();
        assert!(r.nudged > 0);
        assert!((r.total_measure - 2.0).abs() < 0.06, "{}", r.total_measure);
    }

    #[test]
    fn planes_in_space() {
        // zero set of cos(x) in the ball of radius 2: two discs of radius sqrt(4 - (π/2)²)
        let f = cosine(3);
        let r = nodal_measure(&f, &Region::ball(&[0.0; 3], 2.0), 0.05, JetWeight::One).unwrap();
        let exact = 2.0 * std::f64::consts::PI * (4.0 - std::f64::consts::FRAC_PI_2.powi(2));
        assert!(
            (r.total_measure / exact - 1.0).abs() < 0.03,
            "{} vs {exact}",
            r.total_measure
        );
    }

    #[test]
    fn sign_structure_is_scale_invariant() {
        let f = cosine(2);
        let g = f.scaled(3.0);
        let region = Region::ball(&[0.3, -0.2], 3.0);
        let a = nodal_measure(&f, &region, 0.05, JetWeight::One).unwrap();
        let b = nodal_measure(&g, &region, 0.05, JetWeight::One).unwrap();
        assert_eq!(a.segments.len(), b.segments.len());
        assert!((a.total_measure - b.total_measure).abs() < 1e-9);
    }
}
