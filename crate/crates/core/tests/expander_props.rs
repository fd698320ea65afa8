use acnum_core::expander::*;
use acnum_core::linalg::*;
use proptest::prelude::*;

fn tuple(d: usize, k: usize, seed: u64) -> UnitaryTuple {
    UnitaryTuple::new((0..k).map(|i| haar_unitary(d, Seed(seed).derive(i as u64)).unwrap()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moment_scales_trace(d in 2usize..7, k in 1usize..5, seed in any::<u64>()) {
        let u = tuple(d, k, seed);
        let x = gaussian_matrix(d, &mut Seed(seed).derive(99).rng());
        let tx = moment_apply(&u, &x).unwrap();
        prop_assert!((normalized_trace(&tx) - normalized_trace(&x) * k as f64).norm() < 1e-12 * (1.0 + hs_norm(&x)) * k as f64);
    }

    #[test]
    fn restricted_norm_at_most_k(d in 2usize..7, k in 1usize..5, seed in any::<u64>()) {
        let r = restricted_norm(&tuple(d, k, seed), 1e-12).unwrap();
        prop_assert!(r <= k as f64 + 1e-9);
        if k <= 2 {
            prop_assert!((r - k as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn kappa_from_norm_passes_check(d in 3usize..7, seed in any::<u64>()) {
        let u = tuple(d, 2, seed);
        let (u1, u2) = (u.members()[0].clone(), u.members()[1].clone());
        let r = restricted_norm(&UnitaryTuple::new(vec![u1.clone(), u2.clone(), identity(d)]).unwrap(), 1e-12).unwrap();
        prop_assume!(r < 3.0 - 1e-6);
        let kappa = 1.0 / (3.0 - r);
        let report = gap_certificate_check(&u1, &u2, kappa, 50, Seed(seed).derive(7)).unwrap();
        prop_assert_eq!(report.violations, 0);
    }
}
