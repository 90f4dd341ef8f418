use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavekac_core::kacrice::{crit_two_point_at, gram_crits, gram_zeros};

fn rotate(p: &[f64], angle: f64, shift: [f64; 2]) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    vec![
        c * p[0] - s * p[1] + shift[0],
        s * p[0] + c * p[1] + shift[1],
    ]
}

fn config() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..=5)
        .prop_map(|v| v.into_iter().map(|(a, b)| vec![a, b]).collect::<Vec<_>>())
        .prop_filter("distinct", |p| {
            (0..p.len()).all(|i| {
                (i + 1..p.len()).all(|j| (p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]) > 0.05)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grams_are_rigid_motion_invariant(points in config(), angle in 0.0f64..6.3, dx in -20.0f64..20.0, dy in -20.0f64..20.0, flip in any::<bool>()) {
        let moved: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                let q = if flip { vec![p[0], -p[1]] } else { p.clone() };
                rotate(&q, angle, [dx, dy])
            })
            .collect();
        let (a, b) = (gram_zeros(&points).unwrap(), gram_zeros(&moved).unwrap());
        prop_assert!((a.min_eigenvalue - b.min_eigenvalue).abs() < 1e-10);
        let (a, b) = (gram_crits(&points).unwrap(), gram_crits(&moved).unwrap());
        prop_assert!((a.min_eigenvalue - b.min_eigenvalue).abs() < 1e-10);
    }
}

#[test]
fn two_point_function_is_symmetric() {
    let u = [0.4, -1.0];
    let v = [2.1, 0.7];
    let forward = crit_two_point_at(&u, &v, 400_000, 8, 0).unwrap();
    let backward = crit_two_point_at(&v, &u, 400_000, 9, 0).unwrap();
    assert!((forward.den - backward.den).abs() < 1e-12 * forward.den);
    let se = forward.k2_standard_error.hypot(backward.k2_standard_error);
    assert!(
        (forward.k2 - backward.k2).abs() < 4.0 * se,
        "{forward:?} {backward:?}"
    );
}

#[test]
fn random_configurations_in_space_are_non_degenerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let m = rng.random_range(1..=6);
        let pts: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        assert!(gram_zeros(&pts).unwrap().positive);
        assert!(gram_crits(&pts).unwrap().positive);
    }
}
