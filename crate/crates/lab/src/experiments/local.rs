use std::f64::consts::PI;

use wavekac_core::geometry::{
    local_statistic_suite, replica_geometry, JetWeight, LocalSuite, LocalSuiteConfig, Statistics,
};
use wavekac_core::kacrice::{crit_intensity, zero_intensity, Method};

use super::{dump, relative_gap, strictly_decreasing, RunOptions};
use crate::config::{LocalCrits, LocalZeros};
use crate::error::Result;
use crate::report::{Payload, Table};

fn suite_config(
    ensemble: &wavekac_core::geometry::LocalEnsemble,
    cells: &[wavekac_core::geometry::CellSpec],
    replicas: usize,
    statistics: Statistics,
    zero_weight: JetWeight,
    refine: bool,
) -> LocalSuiteConfig {
    LocalSuiteConfig {
        ensemble: ensemble.clone(),
        cells: cells.to_vec(),
        replicas,
        statistics,
        zero_weight,
        crit_weight: JetWeight::One,
        newton_tol: 1e-10,
        max_iter: 30,
        refine_crits: refine,
    }
}

fn dump_replica(
    config: &LocalSuiteConfig,
    seed: u64,
    label: &str,
    options: &RunOptions,
    payload: &mut Payload,
) -> Result<()> {
    let Some(dir) = &options.dump_geometry else {
        return Ok(());
    };
    match replica_geometry(config, seed, label, 0) {
        Ok(cells) => {
            for cell in cells {
                if let Some(n) = &cell.nodal {
                    dump(dir, &format!("{label}.r{}.nodal.csv", cell.radius), |w| {
                        n.write_csv(w)
                    })?;
                }
                if let Some(c) = &cell.crits {
                    dump(dir, &format!("{label}.r{}.crits.csv", cell.radius), |w| {
                        c.write_csv(w)
                    })?;
                }
            }
        }
        Err(e) => payload.push_error("geometry dump", e),
    }
    Ok(())
}

fn replica_table(suite: &LocalSuite, crits: bool) -> Table {
    let mut t = Table::new("replicas", &["radius", "replica", "value", "count"]);
    for cell in &suite.cells {
        let values = if crits {
            &cell.crit_values
        } else {
            &cell.zero_values
        };
        for (i, v) in values.iter().enumerate() {
            let count = cell.crit_counts.get(i).map(|&c| c as f64);
            t.push(vec![Some(cell.radius), Some(i as f64), Some(*v), count]);
        }
    }
    t
}

pub(super) fn zeros(
    p: &LocalZeros,
    seed: u64,
    payload: &mut Payload,
    options: &RunOptions,
) -> Result<()> {
    let label = "local-zeros";
    let stats = Statistics {
        zeros: true,
        crits: false,
    };
    let config = suite_config(&p.ensemble, &p.cells, p.replicas, stats, p.weight, false);
    let dim = p.ensemble.dim();
    let target = match (p.weight, zero_intensity(dim)) {
        (JetWeight::One, Ok(t)) => {
            payload.push_target("zero-intensity", t.value, "closed-form Gamma ratio");
            Some(t.value)
        }
        _ => {
            payload
                .notes
                .push("weighted statistic: no closed-form target, means reported only".into());
            None
        }
    };
    let suite = match local_statistic_suite(&config, seed, label) {
        Ok(s) => s,
        Err(e) => {
            payload.push_error("suite", e);
            return Ok(());
        }
    };
    let mut cells = Table::new(
        "cells",
        &["radius", "spacing", "mean", "standard_error", "variance"],
    );
    let mut variances = Vec::new();
    for cell in &suite.cells {
        let s = cell.zeros.expect("zeros requested");
        cells.push(vec![
            Some(cell.radius),
            Some(cell.spacing),
            Some(s.mean),
            Some(s.standard_error),
            Some(s.variance),
        ]);
        variances.push(s.variance);
        if let Some(t) = target {
            let gap = relative_gap(s.mean, t);
            payload.push_check(
                format!("mean r={}", cell.radius),
                gap <= p.tolerance,
                s.mean,
                format!("target {t:.6}, relative gap {gap:.4} <= {}", p.tolerance),
            );
        }
    }
    if variances.len() > 1 {
        let ratio = variances[variances.len() - 1] / variances[0];
        payload.push_check(
            "variance-decreasing",
            strictly_decreasing(&variances),
            ratio,
            format!("variances {variances:?} strictly decreasing in the radius"),
        );
    }
    payload.tables.push(cells);
    payload.tables.push(replica_table(&suite, false));
    dump_replica(&config, seed, label, options, payload)
}

pub(super) fn crits(
    p: &LocalCrits,
    seed: u64,
    payload: &mut Payload,
    options: &RunOptions,
) -> Result<()> {
    let label = "local-crits";
    let stats = Statistics {
        zeros: false,
        crits: true,
    };
    let config = suite_config(
        &p.ensemble,
        &p.cells,
        p.replicas,
        stats,
        JetWeight::One,
        p.refine,
    );
    let dim = p.ensemble.dim();

    let mut estimates: Vec<(&str, f64)> = Vec::new();
    match crit_intensity(dim, Method::ConditionalMc, p.mc_samples, seed) {
        Ok(c) => {
            payload.push_target(
                "conditional-mc",
                c.value,
                format!(
                    "conditional Monte Carlo, {} draws, SE {:.2e}",
                    c.mc_samples, c.standard_error
                ),
            );
            estimates.push(("conditional-mc", c.value));
        }
        Err(e) => payload.push_error("conditional-mc", e),
    }
    if dim == 2 {
        let semi = crit_intensity(2, Method::SemiAnalytic, 0, 0)?;
        payload.push_target(
            "semi-analytic",
            semi.value,
            "spherical decomposition of the Hessian law",
        );
        estimates.push(("semi-analytic", semi.value));
    }

    let suite = match local_statistic_suite(&config, seed, label) {
        Ok(s) => Some(s),
        Err(e) => {
            payload.push_error("suite", e);
            None
        }
    };
    if let Some(suite) = &suite {
        let mut cells = Table::new(
            "cells",
            &[
                "radius",
                "spacing",
                "mean",
                "standard_error",
                "variance",
                "refined_replicas",
            ],
        );
        let mut signatures = Table::new("signatures", &["radius", "index", "mean_count"]);
        for cell in &suite.cells {
            let s = cell.crits.expect("crits requested");
            cells.push(vec![
                Some(cell.radius),
                Some(cell.spacing),
                Some(s.mean),
                Some(s.standard_error),
                Some(s.variance),
                Some(cell.refinements as f64),
            ]);
            for (q, m) in cell.signature_means.iter().enumerate() {
                signatures.push(vec![Some(cell.radius), Some(q as f64), Some(*m)]);
            }
        }
        let last = suite.cells.last().expect("non-empty schedule");
        let field = last.crits.expect("crits requested").mean;
        payload.push_target(
            "field-simulation",
            field,
            format!("{} replicas, radius {}", p.replicas, last.radius),
        );
        estimates.insert(0, ("field-simulation", field));
        payload.tables.push(cells);
        payload.tables.push(signatures);
        payload.tables.push(replica_table(suite, true));
    }

    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let (a, b) = (estimates[i], estimates[j]);
            let gap = relative_gap(a.1, b.1);
            payload.push_check(
                format!("{}-vs-{}", a.0, b.0),
                gap <= p.tolerance,
                gap,
                format!("{:.6} vs {:.6}, relative gap <= {}", a.1, b.1, p.tolerance),
            );
        }
    }

    if dim == 2 {
        let published = crit_intensity(2, Method::ReferenceConstant, 0, 0)?.value;
        let oracle = 1.0 / (2.0 * 3f64.sqrt() * PI);
        payload.push_target("published-constant", published, "1/(4π√6) as published");
        payload.push_target(
            "oracle-constant",
            oracle,
            "1/(2√3π) from the spherical decomposition",
        );
        if !estimates.is_empty() {
            let mean = estimates.iter().map(|e| e.1).sum::<f64>() / estimates.len() as f64;
            let supports_oracle = relative_gap(mean, oracle) < relative_gap(mean, published);
            payload.notes.push(format!(
                "estimators average {mean:.6}; they support {} (ratio to 1/(4π√6) is {:.4}, 2√2 = {:.4})",
                if supports_oracle { "1/(2√3π) = 0.091888" } else { "1/(4π√6) = 0.032487" },
                mean / published,
                2.0 * 2f64.sqrt()
            ));
        }
    } else {
        payload.notes.push(
            "no closed-form constant in this dimension; conditional Monte Carlo is the reference"
                .into(),
        );
    }
    dump_replica(&config, seed, label, options, payload)
}
