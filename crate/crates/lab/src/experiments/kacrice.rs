use rand::Rng;
use wavekac_core::gaussian::JetOrders;
use wavekac_core::kacrice::{
    crit_intensity, crit_two_point, gram_crits, gram_one_point, gram_zeros,
    near_diagonal_exponents, Method,
};
use wavekac_core::rng::stream_rng;

use super::relative_gap;
use crate::config::{ExponentSuite, GramSuite, TwoPointSuite};
use crate::report::{Payload, Table};

fn point_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-radius..radius))
            .collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

pub(super) fn gram(p: &GramSuite, seed: u64, payload: &mut Payload) {
    let mut table = Table::new(
        "configurations",
        &[
            "dim",
            "points",
            "zero_min_eigenvalue",
            "zero_trace",
            "crit_min_eigenvalue",
            "crit_trace",
        ],
    );
    for &dim in &p.dims {
        let mut rng = stream_rng(seed, "gram-suite", dim as u64, 0);
        let (mut zero_ok, mut crit_ok) = (0, 0);
        let mut worst = f64::INFINITY;
        for k in 0..p.configurations {
            let m = rng.random_range(1..=p.max_points.max(1));
            let points: Vec<Vec<f64>> = (0..m)
                .map(|_| point_in_ball(&mut rng, dim, p.radius))
                .collect();
            match (gram_zeros(&points), gram_crits(&points)) {
                (Ok(z), Ok(c)) => {
                    zero_ok += usize::from(z.positive);
                    crit_ok += usize::from(c.positive);
                    worst = worst
                        .min(z.min_eigenvalue / z.trace)
                        .min(c.min_eigenvalue / c.trace);
                    table.push(vec![
                        Some(dim as f64),
                        Some(m as f64),
                        Some(z.min_eigenvalue),
                        Some(z.trace),
                        Some(c.min_eigenvalue),
                        Some(c.trace),
                    ]);
                }
                (Err(e), _) | (_, Err(e)) => {
                    payload.push_error(format!("n={dim} configuration {k}"), e)
                }
            }
        }
        payload.push_check(
            format!("zeros-positive n={dim}"),
            zero_ok == p.configurations,
            zero_ok as f64,
            format!(
                "{zero_ok}/{} value Grams with min eigenvalue > 1e-12 trace",
                p.configurations
            ),
        );
        payload.push_check(
            format!("crits-positive n={dim}"),
            crit_ok == p.configurations,
            crit_ok as f64,
            format!("{crit_ok}/{} gradient Grams with min eigenvalue > 1e-12 trace; worst ratio {worst:.3e}", p.configurations),
        );
    }
    payload.tables.push(table);

    let mut one_point = Table::new(
        "one-point",
        &[
            "dim",
            "value",
            "gradient",
            "hessian",
            "min_eigenvalue",
            "trace",
        ],
    );
    for &dim in &p.dims {
        for (name, orders) in [
            ("value+gradient+hessian", JetOrders::FULL),
            ("gradient+hessian", JetOrders::GRADIENT_HESSIAN),
            ("value+gradient", JetOrders::VALUE_GRADIENT),
        ] {
            match gram_one_point(dim, orders) {
                Ok(g) => {
                    one_point.push(vec![
                        Some(dim as f64),
                        Some(f64::from(u8::from(orders.value))),
                        Some(f64::from(u8::from(orders.gradient))),
                        Some(f64::from(u8::from(orders.hessian))),
                        Some(g.min_eigenvalue),
                        Some(g.trace),
                    ]);
                    payload.push_check(
                        format!("one-point {name} n={dim}"),
                        g.positive,
                        g.min_eigenvalue,
                        format!(
                            "positive definite: min eigenvalue > 1e-12 trace ({:.3e})",
                            1e-12 * g.trace
                        ),
                    );
                }
                Err(e) => payload.push_error(format!("one-point {name} n={dim}"), e),
            }
        }
    }
    payload.tables.push(one_point);
    payload
        .notes
        .push("the value is minus the Hessian trace for a frequency-1 wave, so the full one-point jet is rank deficient".into());
}

pub(super) fn exponents(p: &ExponentSuite, seed: u64, payload: &mut Payload) {
    let fit = match near_diagonal_exponents(&p.radii(), p.samples, seed) {
        Ok(f) => f,
        Err(e) => {
            payload.push_error("fit", e);
            return;
        }
    };
    let mut table = Table::new("two-point", &["r", "den", "y", "y_standard_error"]);
    for q in &fit.points {
        table.push(vec![
            Some(q.r),
            Some(q.den),
            Some(q.y),
            Some(q.y_standard_error),
        ]);
    }
    payload.tables.push(table);
    for (r, why) in &fit.dropped {
        payload.notes.push(format!("dropped r={r}: {why}"));
    }
    payload.push_check(
        "den-slope",
        (fit.den_slope - p.den_slope).abs() <= p.den_tolerance,
        fit.den_slope,
        format!(
            "{} ± {} (fit SE {:.2e})",
            p.den_slope, p.den_tolerance, fit.den_slope_se
        ),
    );
    payload.push_check(
        "y-slope",
        (fit.y_slope - p.y_slope).abs() <= p.y_tolerance,
        fit.y_slope,
        format!(
            "{} ± {} (fit SE {:.2e})",
            p.y_slope, p.y_tolerance, fit.y_slope_se
        ),
    );
}

pub(super) fn two_point(p: &TwoPointSuite, seed: u64, payload: &mut Payload) {
    let intensity = match crit_intensity(2, Method::SemiAnalytic, 0, 0) {
        Ok(c) => c.value,
        Err(e) => {
            payload.push_error("intensity", e);
            return;
        }
    };
    payload.push_target(
        "crit-intensity-squared",
        intensity * intensity,
        "square of the spherical-decomposition intensity",
    );
    let mut radii = p.radii.clone();
    if !radii.contains(&p.far_radius) {
        radii.push(p.far_radius);
    }
    let mut table = Table::new(
        "two-point",
        &[
            "r",
            "den",
            "y",
            "y_standard_error",
            "k2",
            "k2_standard_error",
            "k2_ratio",
        ],
    );
    for &r in &radii {
        match crit_two_point(r, p.samples, seed) {
            Ok(q) => {
                let ratio = q.k2 / (intensity * intensity);
                table.push(vec![
                    Some(r),
                    Some(q.den),
                    Some(q.y),
                    Some(q.y_standard_error),
                    Some(q.k2),
                    Some(q.k2_standard_error),
                    Some(ratio),
                ]);
                if r == p.far_radius {
                    let gap = relative_gap(q.k2, intensity * intensity);
                    payload.push_check(
                        format!("decorrelation r={r}"),
                        gap <= p.tolerance,
                        ratio,
                        format!("K2/intensity² within {} of 1", p.tolerance),
                    );
                }
            }
            Err(e) => payload.push_error(format!("r={r}"), e),
        }
    }
    payload.tables.push(table);
}
