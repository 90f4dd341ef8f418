use rayon::prelude::*;
use wavekac_core::ensembles::{sample_torus, TorusSpectrum};
use wavekac_core::geometry::{critical_points, nodal_measure, JetWeight, Region};
use wavekac_core::kacrice::{
    crit_intensity, spectral_crit_intensity, spectral_zero_intensity,
    variance_from_factorial_moments, zero_intensity, Method,
};
use wavekac_core::rng::stream_rng;
use wavekac_core::stats::Summary;

use super::{dump, envelope_ratio, fmt_lambda, relative_gap, strictly_decreasing, RunOptions};
use crate::config::TorusGlobal;
use crate::error::Result;
use crate::report::{Payload, Table};

struct Replica {
    length: Option<f64>,
    count: Option<usize>,
    /// `#min − #saddle + #max`, zero on the torus.
    euler: Option<i64>,
}

struct Cell {
    lambda: f64,
    /// Kac-Rice densities for the exact lattice spectrum at this `lambda`.
    lattice_zero: Option<f64>,
    lattice_crit: Option<f64>,
    zeros: Option<Summary>,
    crits: Option<Summary>,
    crit_factorial_variance: Option<f64>,
}

/// Sample variance of counts through factorial moments, matching the
/// Kac-Rice bookkeeping: `E[N(N−1)] + E[N] − E[N]²`, with Bessel's correction.
fn count_variance(counts: &[usize]) -> f64 {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let factorial = counts
        .iter()
        .map(|&c| c as f64 * (c as f64 - 1.0))
        .sum::<f64>()
        / n;
    variance_from_factorial_moments(mean, factorial) * n / (n - 1.0)
}

pub(super) fn torus(
    p: &TorusGlobal,
    seed: u64,
    label: &str,
    payload: &mut Payload,
    options: &RunOptions,
) -> Result<()> {
    let volume = p.side * p.side;
    if p.zeros {
        payload.push_target(
            "zero-intensity",
            zero_intensity(2)?.value,
            "closed-form Gamma ratio, per unit area",
        );
    }
    let crit_target = if p.crits {
        let c = crit_intensity(2, Method::SemiAnalytic, 0, 0)?.value;
        payload.push_target(
            "crit-intensity",
            c,
            "spherical decomposition, per unit area",
        );
        Some(c)
    } else {
        None
    };

    let mut replicas = Table::new(
        "replicas",
        &["lambda", "replica", "length", "count", "euler"],
    );
    let mut cells = Vec::new();
    for (c, &lambda) in p.lambdas.iter().enumerate() {
        let cell_name = format!("lambda={}", fmt_lambda(lambda));
        let spectrum = match TorusSpectrum::with_side(lambda, p.side) {
            Ok(s) => s,
            Err(e) => {
                payload.push_error(&cell_name, e);
                continue;
            }
        };
        let frequencies: Vec<Vec<f64>> = spectrum
            .lattice()
            .iter()
            .map(|&k| spectrum.frequency(k).iter().map(|w| w / lambda).collect())
            .collect();
        let lattice = |zeros: bool| {
            let r = if zeros {
                spectral_zero_intensity(&frequencies, p.mc_samples, seed)
            } else {
                spectral_crit_intensity(&frequencies, p.mc_samples, seed)
            };
            r.map(|r| r.value)
        };
        let lattice_zero = p.zeros.then(|| lattice(true)).transpose();
        let lattice_crit = p.crits.then(|| lattice(false)).transpose();
        let (lattice_zero, lattice_crit) = match (lattice_zero, lattice_crit) {
            (Ok(z), Ok(c)) => (z, c),
            (Err(e), _) | (_, Err(e)) => {
                payload.push_error(&cell_name, e);
                continue;
            }
        };
        if let Some(v) = lattice_zero {
            payload.push_target(
                format!("lattice-zero-intensity {cell_name}"),
                v,
                "Kac-Rice with the exact lattice spectrum",
            );
        }
        if let Some(v) = lattice_crit {
            payload.push_target(
                format!("lattice-crit-intensity {cell_name}"),
                v,
                "Kac-Rice with the exact lattice spectrum",
            );
        }
        let h = p.spacing(lambda);
        let region = Region::Torus { side: p.side };
        let results: Vec<wavekac_core::Result<Replica>> = (0..p.replicas)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, label, c as u64, i as u64);
                let field = sample_torus(&spectrum, &mut rng);
                let length = p
                    .zeros
                    .then(|| {
                        nodal_measure(&field, &region, h, JetWeight::One).map(|n| n.total_measure)
                    })
                    .transpose()?;
                let crits = p
                    .crits
                    .then(|| critical_points(&field, &region, h, 1e-10, 30, JetWeight::One))
                    .transpose()?;
                Ok(Replica {
                    length,
                    count: crits.as_ref().map(|r| r.count()),
                    euler: crits.as_ref().map(|r| {
                        r.signature_counts
                            .iter()
                            .enumerate()
                            .map(|(q, &c)| if q % 2 == 0 { c as i64 } else { -(c as i64) })
                            .sum()
                    }),
                })
            })
            .collect();
        let results: Vec<Replica> = match results.into_iter().collect() {
            Ok(r) => r,
            Err(e) => {
                payload.push_error(&cell_name, e);
                continue;
            }
        };
        for (i, r) in results.iter().enumerate() {
            replicas.push(vec![
                Some(lambda),
                Some(i as f64),
                r.length,
                r.count.map(|n| n as f64),
                r.euler.map(|e| e as f64),
            ]);
        }
        let zeros = p.zeros.then(|| {
            let v: Vec<f64> = results
                .iter()
                .map(|r| r.length.unwrap_or(f64::NAN) / (lambda * volume))
                .collect();
            Summary::of(&v)
        });
        let counts: Vec<usize> = results.iter().filter_map(|r| r.count).collect();
        let crits = p.crits.then(|| {
            let v: Vec<f64> = counts
                .iter()
                .map(|&n| n as f64 / (lambda * lambda * volume))
                .collect();
            Summary::of(&v)
        });
        let crit_factorial_variance = (p.crits && counts.len() > 1)
            .then(|| count_variance(&counts) / (lambda * lambda * volume).powi(2));
        if p.crits {
            let bad = results.iter().filter(|r| r.euler != Some(0)).count();
            payload.push_check(
                format!("crit-euler {cell_name}"),
                bad == 0,
                bad as f64,
                "replicas violating #min - #saddle + #max = 0",
            );
        }
        cells.push(Cell {
            lambda,
            lattice_zero,
            lattice_crit,
            zeros,
            crits,
            crit_factorial_variance,
        });

        if let Some(dir) = &options.dump_geometry {
            let mut rng = stream_rng(seed, label, c as u64, 0);
            let field = sample_torus(&spectrum, &mut rng);
            if p.zeros {
                let n = nodal_measure(&field, &region, h, JetWeight::One)?;
                dump(dir, &format!("{label}.{cell_name}.nodal.csv"), |w| {
                    n.write_csv(w)
                })?;
            }
            if p.crits {
                let r = critical_points(&field, &region, h, 1e-10, 30, JetWeight::One)?;
                dump(dir, &format!("{label}.{cell_name}.crits.csv"), |w| {
                    r.write_csv(w)
                })?;
            }
        }
    }

    let mut table = Table::new(
        "cells",
        &[
            "lambda",
            "zero_mean",
            "zero_standard_error",
            "zero_variance",
            "crit_mean",
            "crit_standard_error",
            "crit_variance",
            "crit_variance_factorial",
        ],
    );
    for cell in &cells {
        table.push(vec![
            Some(cell.lambda),
            cell.zeros.map(|s| s.mean),
            cell.zeros.map(|s| s.standard_error),
            cell.zeros.map(|s| s.variance),
            cell.crits.map(|s| s.mean),
            cell.crits.map(|s| s.standard_error),
            cell.crits.map(|s| s.variance),
            cell.crit_factorial_variance,
        ]);
    }
    payload.tables.push(table);
    payload.tables.push(replicas);

    let lambdas: Vec<f64> = cells.iter().map(|c| c.lambda).collect();
    let mean_check = |payload: &mut Payload, name: String, mean: f64, target: f64| {
        let gap = relative_gap(mean, target);
        payload.push_check(
            name,
            gap <= p.tolerance,
            mean,
            format!(
                "target {target:.6}, relative gap {gap:.4} <= {}",
                p.tolerance
            ),
        );
    };
    let variance_checks = |payload: &mut Payload, name: &str, summaries: &[Summary]| {
        if summaries.len() < 2 {
            return;
        }
        let vars: Vec<f64> = summaries.iter().map(|s| s.variance).collect();
        payload.push_check(
            format!("{name}-variance-decreasing"),
            strictly_decreasing(&vars),
            vars[vars.len() - 1] / vars[0],
            format!("variances {vars:?} strictly decreasing in lambda"),
        );
        let ratio = envelope_ratio(&lambdas, &vars);
        payload.push_check(
            format!("{name}-variance-envelope"),
            ratio <= 1.0,
            ratio,
            "largest Var/(C·lambda^-1/2) with C fixed at the first lambda, must be <= 1",
        );
    };
    if p.zeros {
        let target = zero_intensity(2)?.value;
        for cell in &cells {
            let (Some(s), Some(lattice)) = (cell.zeros, cell.lattice_zero) else {
                continue;
            };
            let l = fmt_lambda(cell.lambda);
            mean_check(payload, format!("zero-mean lambda={l}"), s.mean, target);
            mean_check(
                payload,
                format!("zero-mean-lattice lambda={l}"),
                s.mean,
                lattice,
            );
        }
        let summaries: Vec<Summary> = cells.iter().filter_map(|c| c.zeros).collect();
        variance_checks(payload, "zero", &summaries);
    }
    if let Some(target) = crit_target {
        for cell in &cells {
            let (Some(s), Some(lattice)) = (cell.crits, cell.lattice_crit) else {
                continue;
            };
            mean_check(
                payload,
                format!("crit-mean-lattice lambda={}", fmt_lambda(cell.lambda)),
                s.mean,
                lattice,
            );
        }
        let summaries: Vec<Summary> = cells.iter().filter_map(|c| c.crits).collect();
        if let Some(last) = summaries.last() {
            let gaps: Vec<f64> = summaries
                .iter()
                .map(|s| relative_gap(s.mean, target))
                .collect();
            let gap = relative_gap(last.mean, target);
            payload.push_check(
                "crit-mean-converging",
                strictly_decreasing(&gaps) && gap <= p.tolerance,
                gap,
                format!(
                    "relative gaps {gaps:?} to the isotropic constant decrease and end <= {}",
                    p.tolerance
                ),
            );
        }
        variance_checks(payload, "crit", &summaries);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn factorial_route_matches_the_sample_variance() {
        let mut rng = StdRng::seed_from_u64(3);
        // Poisson-like toy: sums of rare Bernoulli events, mean ≈ variance ≈ 8
        let counts: Vec<usize> = (0..4000)
            .map(|_| (0..800).filter(|_| rng.random::<f64>() < 0.01).count())
            .collect();
        let sample = Summary::of(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        assert!((count_variance(&counts) - sample.variance).abs() < 1e-9 * sample.variance);
        assert!((sample.variance / sample.mean - 1.0).abs() < 0.1);
    }
}
