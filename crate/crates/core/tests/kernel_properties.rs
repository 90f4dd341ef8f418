use proptest::prelude::*;
use wavekac_core::kernel::{multi_indices, spectral_moment, DerivativeStencil, IsotropicKernel};
use wavekac_core::{Kernel, KernelF32};

fn unit_vector(dim: usize, angles: &[f64]) -> Vec<f64> {
    // hyperspherical coordinates
    let mut v = vec![1.0; dim];
    for (k, &a) in angles.iter().take(dim - 1).enumerate() {
        for x in v.iter_mut().skip(k + 1) {
            *x *= a.sin();
        }
        v[k] *= a.cos();
    }
    v
}

fn with_index(gamma: &[usize], axis: usize, extra: usize) -> Vec<usize> {
    let mut g = gamma.to_vec();
    g[axis] += extra;
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn helmholtz_residual_vanishes(dim in 2usize..=4, r in 0.0f64..30.0, a0 in 0.0f64..6.3, a1 in 0.0f64..3.1, a2 in 0.0f64..3.1) {
        let kernel = Kernel::unit(dim).unwrap();
        let d: Vec<f64> = unit_vector(dim, &[a0, a1, a2]).iter().map(|x| x * r).collect();
        // check Δ∂^γ ρ + ∂^γ ρ = 0 for every γ of order ≤ 2
        for gamma in multi_indices(dim, 2) {
            let base = kernel.displacement_derivative(&gamma, &d).unwrap();
            let lap: f64 = (0..dim)
                .map(|i| kernel.displacement_derivative(&with_index(&gamma, i, 2), &d).unwrap())
                .sum();
            prop_assert!((lap + base).abs() < 1e-10, "{gamma:?} {lap} {base}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences(dim in 2usize..=3, r in 0.05f64..20.0, a0 in 0.0f64..6.3, a1 in 0.0f64..3.1) {
        let kernel = Kernel::unit(dim).unwrap();
        let d: Vec<f64> = unit_vector(dim, &[a0, a1]).iter().map(|x| x * r).collect();
        let step = 1e-4;
        for gamma in multi_indices(dim, 3) {
            for axis in 0..dim {
                let mut plus = d.clone();
                let mut minus = d.clone();
                plus[axis] += step;
                minus[axis] -= step;
                let fd = (kernel.displacement_derivative(&gamma, &plus).unwrap()
                    - kernel.displacement_derivative(&gamma, &minus).unwrap())
                    / (2.0 * step);
                let exact = kernel.displacement_derivative(&with_index(&gamma, axis, 1), &d).unwrap();
                prop_assert!((fd - exact).abs() < 1e-7, "{gamma:?}+e{axis}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn stencil_and_direct_paths_agree(dim in 2usize..=4, r in 0.0f64..15.0, a0 in 0.0f64..6.3) {
        let kernel = Kernel::unit(dim).unwrap();
        let d: Vec<f64> = unit_vector(dim, &[a0, 0.7, 1.1]).iter().map(|x| x * r).collect();
        for gamma in multi_indices(dim, 4) {
            let stencil = DerivativeStencil::new(dim, &gamma).unwrap();
            let a = stencil.eval(&kernel, &d);
            let b = kernel.displacement_derivative(&gamma, &d).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_derivatives_depend_on_the_difference(x in -5.0f64..5.0, y in -5.0f64..5.0, shift in -50.0f64..50.0) {
        let kernel = Kernel::unit(2).unwrap();
        let (u, v) = ([x, y], [0.3, -0.2]);
        let (us, vs) = ([x + shift, y - shift], [0.3 + shift, -0.2 - shift]);
        for a in multi_indices(2, 2) {
            for b in multi_indices(2, 2) {
                let p = kernel.derivative(&a, &b, &u, &v).unwrap();
                let q = kernel.derivative(&a, &b, &us, &vs).unwrap();
                prop_assert!((p - q).abs() < 1e-11);
                // symmetry of the covariance
                let t = kernel.derivative(&b, &a, &v, &u).unwrap();
                prop_assert!((p - t).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn coincident_derivatives_are_signed_spectral_moments() {
    for dim in 2..=4 {
        let kernel = Kernel::unit(dim).unwrap();
        let origin = vec![0.0; dim];
        for gamma in multi_indices(dim, 4) {
            let order: usize = gamma.iter().sum();
            let moment: f64 = spectral_moment(dim, &gamma).unwrap();
            let sign = if order.is_multiple_of(4) { 1.0 } else { -1.0 };
            let expected = if order % 2 == 1 { 0.0 } else { sign * moment };
            let got = kernel.displacement_derivative(&gamma, &origin).unwrap();
            assert!(
                (got - expected).abs() < 1e-14,
                "{dim} {gamma:?}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let k64 = Kernel::unit(3).unwrap();
    let k32 = KernelF32::unit(3).unwrap();
    for i in 0..200 {
        let r = 0.1 * i as f64;
        let a = k64.rho(r).unwrap();
        let b = k32.rho(r as f32).unwrap();
        assert!((a - b as f64).abs() < 1e-5, "{r}");
    }
    let generic: IsotropicKernel<f64> = k64;
    assert_eq!(generic.dim(), 3);
}
