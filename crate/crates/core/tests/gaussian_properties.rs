use nalgebra::DMatrix;
use proptest::prelude::*;
use wavekac_core::gaussian::{
    assemble_jet_covariance, cross_block, jet_components, GaussianLaw, JetOrders, JetSpec,
};
use wavekac_core::Kernel;

fn law_for(points: &[[f64; 2]]) -> GaussianLaw {
    let kernel = Kernel::unit(2).unwrap();
    let spec = JetSpec::uniform(
        points.iter().map(|p| p.to_vec()).collect(),
        JetOrders::VALUE_GRADIENT,
    )
    .unwrap();
    assemble_jet_covariance(&kernel, &spec).unwrap()
}

fn points_strategy() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 3..=3)
        .prop_map(|v| v.into_iter().map(|(a, b)| [a, b]).collect::<Vec<_>>())
        .prop_filter("separated", |p| {
            (0..p.len()).all(|i| {
                (i + 1..p.len()).all(|j| (p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]) > 0.3)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditioning_is_projection_consistent(points in points_strategy(), vals in prop::collection::vec(-2.0f64..2.0, 6)) {
        let law = law_for(&points);
        // layout: three points × (value, ∂₁, ∂₂)
        let a = [0usize, 1, 2];
        let joint = law.condition(&[0, 1, 2, 3, 4], &vals[..5]).unwrap();
        // condition on a, then on b (which now sits at indices 0, 1)
        let step = law.condition(&a, &vals[..3]).unwrap().condition(&[0, 1], &vals[3..5]).unwrap();
        for i in 0..joint.dim() {
            prop_assert!((joint.mean()[i] - step.mean()[i]).abs() < 1e-8);
            for j in 0..joint.dim() {
                prop_assert!((joint.cov()[(i, j)] - step.cov()[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn density_factorizes(points in points_strategy()) {
        let law = law_for(&points);
        let all: Vec<usize> = (0..6).collect();
        let joint = law.marginal(&all).unwrap();
        let first = law.marginal(&all[..3]).unwrap();
        let rest = joint.condition(&[0, 1, 2], &[0.0; 3]).unwrap();
        let lhs = joint.density_at_zero().unwrap();
        let rhs = first.density_at_zero().unwrap() * rest.density_at_zero().unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-8, "{lhs} {rhs}");
    }

    #[test]
    fn conditional_covariance_is_psd(points in points_strategy()) {
        let law = law_for(&points);
        let cond = law.condition(&[0, 3, 6], &[0.0; 3]).unwrap();
        prop_assert!(cond.min_eigenvalue() > -1e-12);
        prop_assert!(cond.trace() <= law.trace());
    }
}

#[test]
fn cross_blocks_decay_with_separation() {
    let kernel = Kernel::unit(2).unwrap();
    let comps = jet_components(2, JetOrders::FULL);
    let norm = |r: f64| -> f64 {
        let block: DMatrix<f64> =
            cross_block(&kernel, &[0.0, 0.0], &[r, 0.0], &comps, &comps).unwrap();
        block.singular_values().max()
    };
    let near = (0..20)
        .map(|k| norm(5.0 + 0.3 * k as f64))
        .fold(0.0, f64::max);
    let far = (0..20)
        .map(|k| norm(500.0 + 0.3 * k as f64))
        .fold(0.0, f64::max);
    assert!(far < near / 5.0, "{near} {far}");
}
