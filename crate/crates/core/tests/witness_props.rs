use acnum_core::linalg::*;
use acnum_core::witness::*;
use proptest::prelude::*;

fn random_m(d: usize, seed: u64) -> CMatrix {
    gaussian_matrix(d, &mut Seed(seed).rng())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_is_a_star_automorphism(n in 1usize..=3, t in -3.0f64..3.0, s in any::<u64>()) {
        let d = 1 << (2 * n);
        let x = random_m(d, s);
        let y = random_m(d, s ^ 1);
        let tx = theta_apply(n, t, &x).unwrap();
        let ty = theta_apply(n, t, &y).unwrap();
        let scale = hs_norm(&x) * hs_norm(&y) * d as f64;
        prop_assert!(max_abs(&(theta_apply(n, t, &(&x * &y)).unwrap() - &tx * &ty)) < 1e-10 * scale);
        prop_assert!(max_abs(&(theta_apply(n, t, &x.adjoint()).unwrap() - tx.adjoint())) < 1e-10 * hs_norm(&x) * d as f64);
        prop_assert!((normalized_trace(&tx) - normalized_trace(&x)).norm() < 1e-10 * hs_norm(&x));
    }

    #[test]
    fn length_sectors_are_orthogonal(n in 1usize..=4, s in any::<u64>()) {
        let d = 1 << n;
        let fx = length_sectors(n, &random_m(d, s)).unwrap();
        let fy = length_sectors(n, &random_m(d, s ^ 7)).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    prop_assert!(hs_inner(&fx[i], &fy[j]).unwrap().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cond_expect_theta_is_a_contractive_projection(n in 1usize..=3, t in 0.01f64..1.5, s in any::<u64>()) {
        let d = 1 << n;
        let x = random_m(d, s);
        let e = cond_expect_theta(n, t, &x).unwrap();
        prop_assert!(e.norm_sq <= hs_norm(&x).powi(2) + 1e-12);
        prop_assert!((e.norm_sq - e.formula_sq).abs() < 1e-10 * (1.0 + e.norm_sq));
        // The value lies in theta(M_n ⊗ 1): undoing theta leaves y ⊗ 1, and
        // projecting y ⊗ 1 again reproduces the value.
        let back = theta_apply(n, -t, &e.value).unwrap();
        let legs = TensorLegs::qubits(2 * n);
        let keep: Vec<bool> = (0..2 * n).map(|k| k < n).collect();
        let y1 = partial_expectation(&back, &legs, &keep).unwrap();
        prop_assert!(max_abs(&(&y1 - &back)) < 1e-12);
        let y = reduce_to_legs(&back, &legs, &keep).unwrap();
        let again = theta_apply(n, t, &y.kronecker(&identity(d))).unwrap();
        prop_assert!(max_abs(&(again - &e.value)) < 1e-12);
    }

    #[test]
    fn deform_bound_for_every_l(n in 1usize..=4, t in 0.01f64..0.8, s in any::<u64>()) {
        let x = random_m(1 << n, s);
        for b in deform_bounds(n, t, &x).unwrap() {
            prop_assert!(b.lhs <= b.rhs + 1e-9);
        }
    }
}
