use wavekac_core::ensembles::{covariance_convergence_sup, src_sup, ExactKernel, TorusSpectrum};
use wavekac_core::rng::stream_rng;

use super::{fmt_lambda, non_increasing, strictly_decreasing};
use crate::config::{L2Identity, LocalLimitScan, SrcScan};
use crate::report::{Payload, Table};

/// Value at `at`, if `at` is on the schedule.
fn value_at(lambdas: &[f64], values: &[f64], at: f64) -> Option<f64> {
    lambdas.iter().position(|&l| l == at).map(|k| values[k])
}

pub(super) fn src(p: &SrcScan, seed: u64, payload: &mut Payload) {
    let scan =
        |side: f64, table: &mut Table, payload: &mut Payload, cell: u64| -> (Vec<f64>, Vec<f64>) {
            let (mut lambdas, mut sups) = (Vec::new(), Vec::new());
            for (c, &lambda) in p.lambdas.iter().enumerate() {
                let name = format!("torus side={side} lambda={}", fmt_lambda(lambda));
                let outcome = TorusSpectrum::with_side(lambda, side).and_then(|s| {
                    let dimension = s.dimension();
                    let mut rng = stream_rng(seed, "src-scan", cell, c as u64);
                    src_sup(
                        &ExactKernel::Torus(s),
                        lambda,
                        p.eps,
                        p.max_order,
                        p.pair_budget,
                        &mut rng,
                    )
                    .map(|r| (dimension, r))
                });
                match outcome {
                    Ok((dimension, r)) => {
                        let w = r.witness.first().cloned().unwrap_or_default();
                        table.push(vec![
                            Some(side),
                            Some(lambda),
                            Some(dimension as f64),
                            Some(r.sup),
                            Some(r.threshold),
                            w.first().copied(),
                            w.get(1).copied(),
                        ]);
                        lambdas.push(lambda);
                        sups.push(r.sup);
                    }
                    Err(e) => payload.push_error(name, e),
                }
            }
            (lambdas, sups)
        };

    let columns = [
        "side",
        "lambda",
        "dimension",
        "sup",
        "min_separation",
        "witness_x",
        "witness_y",
    ];
    let mut torus = Table::new("torus", &columns);
    let (lambdas, sups) = scan(p.side, &mut torus, payload, 0);
    match value_at(&lambdas, &sups, p.at_lambda) {
        Some(v) => payload.push_check(
            format!("torus-sup lambda={}", fmt_lambda(p.at_lambda)),
            v < p.threshold,
            v,
            format!("eps {}, side {}, must be < {}", p.eps, p.side, p.threshold),
        ),
        None => payload.push_error(
            "torus-sup",
            format!("lambda {} missing from the schedule", p.at_lambda),
        ),
    }
    if sups.len() > 1 {
        payload.push_check(
            "torus-sup-decreasing",
            strictly_decreasing(&sups),
            sups[sups.len() - 1],
            format!("sups {sups:?} strictly decreasing in lambda"),
        );
    }
    payload.tables.push(torus);

    let mut informational = Table::new("torus-informational", &columns);
    for (k, &side) in p.informational_sides.iter().enumerate() {
        scan(side, &mut informational, payload, 1 + k as u64);
    }
    if !p.informational_sides.is_empty() {
        payload
            .notes
            .push("torus-informational rows carry no verdict".into());
        payload.tables.push(informational);
    }

    let mut sphere = Table::new("sphere", &["ell", "sup", "witness_angle"]);
    for (k, &ell) in p.sphere_degrees.iter().enumerate() {
        let lambda = ((ell * (ell + 1)) as f64).sqrt();
        let mut rng = stream_rng(seed, "src-scan-sphere", k as u64, 0);
        match src_sup(
            &ExactKernel::Sphere { ell },
            lambda,
            p.eps,
            0,
            p.pair_budget,
            &mut rng,
        ) {
            Ok(r) => {
                let angle = match r.witness.as_slice() {
                    [x, y] => x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        .clamp(-1.0, 1.0)
                        .acos(),
                    _ => f64::NAN,
                };
                sphere.push(vec![Some(ell as f64), Some(r.sup), Some(angle)]);
                payload.push_check(
                    format!("sphere-antipodal ell={ell}"),
                    r.sup >= 1.0 - 1e-9,
                    r.sup,
                    "short-range correlations fail: sup >= 1 - 1e-9 via the antipodal pair",
                );
            }
            Err(e) => payload.push_error(format!("sphere ell={ell}"), e),
        }
    }
    payload.tables.push(sphere);
}

pub(super) fn local_limit(p: &LocalLimitScan, payload: &mut Payload) {
    let scan = |side: f64, table: &mut Table, payload: &mut Payload| -> (Vec<f64>, Vec<f64>) {
        let (mut lambdas, mut sups) = (Vec::new(), Vec::new());
        for &lambda in &p.lambdas {
            let outcome = TorusSpectrum::with_side(lambda, side).and_then(|s| {
                let dimension = s.dimension();
                covariance_convergence_sup(
                    &ExactKernel::Torus(s),
                    lambda,
                    &[0.0, 0.0],
                    p.radius,
                    p.max_order,
                    p.resolution,
                )
                .map(|sup| (dimension, sup))
            });
            match outcome {
                Ok((dimension, sup)) => {
                    table.push(vec![
                        Some(side),
                        Some(lambda),
                        Some(dimension as f64),
                        Some(sup),
                    ]);
                    lambdas.push(lambda);
                    sups.push(sup);
                }
                Err(e) => payload.push_error(
                    format!("torus side={side} lambda={}", fmt_lambda(lambda)),
                    e,
                ),
            }
        }
        (lambdas, sups)
    };
    let columns = ["side", "lambda", "dimension", "sup"];
    let mut torus = Table::new("torus", &columns);
    let (lambdas, sups) = scan(p.side, &mut torus, payload);
    match value_at(&lambdas, &sups, p.at_lambda) {
        Some(v) => payload.push_check(
            format!("local-limit lambda={}", fmt_lambda(p.at_lambda)),
            v < p.threshold,
            v,
            format!(
                "sup over B_{0} x B_{0}, orders <= {1}, must be < {2}",
                p.radius, p.max_order, p.threshold
            ),
        ),
        None => payload.push_error(
            "local-limit",
            format!("lambda {} missing from the schedule", p.at_lambda),
        ),
    }
    if sups.len() > 1 {
        payload.push_check(
            "local-limit-non-increasing",
            non_increasing(&sups),
            sups[sups.len() - 1],
            format!("sups {sups:?} non-increasing in lambda"),
        );
    }
    payload.tables.push(torus);
    if !p.informational_sides.is_empty() {
        let mut informational = Table::new("torus-informational", &columns);
        for &side in &p.informational_sides {
            scan(side, &mut informational, payload);
        }
        payload
            .notes
            .push("torus-informational rows carry no verdict".into());
        payload.tables.push(informational);
    }
}

pub(super) fn l2_identity(p: &L2Identity, payload: &mut Payload) {
    let mut table = Table::new(
        "identity",
        &[
            "lambda",
            "dimension",
            "parseval",
            "quadrature",
            "inverse_dimension",
        ],
    );
    for &lambda in &p.lambdas {
        let name = fmt_lambda(lambda);
        let spectrum = match TorusSpectrum::with_side(lambda, p.side) {
            Ok(s) => s,
            Err(e) => {
                payload.push_error(format!("lambda={name}"), e);
                continue;
            }
        };
        let inverse = 1.0 / spectrum.dimension() as f64;
        let parseval = spectrum.projector_l2_parseval();
        let quadrature = spectrum.projector_l2_quadrature();
        table.push(vec![
            Some(lambda),
            Some(spectrum.dimension() as f64),
            Some(parseval),
            Some(quadrature),
            Some(inverse),
        ]);
        payload.push_check(
            format!("parseval lambda={name}"),
            parseval == inverse,
            parseval,
            format!("exactly 1/dim = 1/{}", spectrum.dimension()),
        );
        let gap = (quadrature - inverse).abs();
        payload.push_check(
            format!("quadrature lambda={name}"),
            gap < p.tolerance,
            quadrature,
            format!("|quadrature - 1/dim| = {gap:.2e} < {:.0e}", p.tolerance),
        );
        if let Some(&(_, expected)) = p.expected.iter().find(|(l, _)| *l == lambda) {
            payload.push_check(
                format!("expected lambda={name}"),
                parseval == expected,
                parseval,
                format!("known value {expected}"),
            );
        }
    }
    payload.tables.push(table);
}
