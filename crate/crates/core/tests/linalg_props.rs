use acnum_core::linalg::*;
use proptest::prelude::*;

fn positive_contraction(d: usize, seed: u64) -> CMatrix {
    let g = gaussian_matrix(d, &mut Seed(seed).rng());
    let h = &g * g.adjoint();
    let n = op_norm(&h, 1e-13).unwrap();
    h * c(1.0 / n, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_stormer(d in 1usize..=16, s in any::<u64>()) {
        let h = positive_contraction(d, s);
        let k = positive_contraction(d, s.wrapping_add(1));
        let lhs = hs_norm(&(&h - &k)).powi(2);
        let mid = trace_norm(&(&h * &h - &k * &k)).unwrap();
        let rhs = hs_norm(&(&h - &k)) * hs_norm(&(&h + &k));
        prop_assert!(lhs <= mid + 1e-9);
        prop_assert!(mid <= rhs + 1e-9);
    }

    #[test]
    fn projection_trace_gap(d in 1usize..=16, s in any::<u64>(), a in 0usize..=16, b in 0usize..=16) {
        let mut rng = Seed(s).rng();
        let p = random_projection(d, a.min(d), &mut rng).unwrap();
        let q = random_projection(d, b.min(d), &mut rng).unwrap();
        let gap = (normalized_trace(&p) - normalized_trace(&q)).re.abs();
        prop_assert!(gap <= hs_norm(&(&p - &q)).powi(2) + 1e-9);
    }

    #[test]
    fn norm_compatibility(d in 1usize..=12, s in any::<u64>()) {
        let mut rng = Seed(s).rng();
        let x = gaussian_matrix(d, &mut rng);
        let y = gaussian_matrix(d, &mut rng);
        let xy = hs_norm(&(&x * &y));
        prop_assert!(xy <= op_norm(&x, 1e-12).unwrap() * hs_norm(&y) * (1.0 + 1e-10));
        prop_assert!(xy <= hs_norm(&x) * op_norm(&y, 1e-12).unwrap() * (1.0 + 1e-10));
        prop_assert!(hs_norm(&x) <= op_norm(&x, 1e-12).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn kron_is_multiplicative(p in 1usize..=4, q in 1usize..=4, s in any::<u64>()) {
        let mut rng = Seed(s).rng();
        let a = gaussian_matrix(p, &mut rng);
        let cc = gaussian_matrix(p, &mut rng);
        let b = gaussian_matrix(q, &mut rng);
        let d = gaussian_matrix(q, &mut rng);
        let lhs = kron(&a, &b) * kron(&cc, &d);
        let rhs = kron(&(&a * &cc), &(&b * &d));
        prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-12 * (1.0 + max_abs(&rhs)));
    }

    #[test]
    fn hs_inner_is_conjugate_symmetric(d in 1usize..=8, s in any::<u64>()) {
        let mut rng = Seed(s).rng();
        let x = gaussian_matrix(d, &mut rng);
        let y = gaussian_matrix(d, &mut rng);
        let a = hs_inner(&x, &y).unwrap();
        let b = hs_inner(&y, &x).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
        let t = normalized_trace(&(y.adjoint() * &x));
        prop_assert!((a - t).norm() < 1e-12);
    }

    #[test]
    fn unitary_log_roundtrip(d in 1usize..=24, s in any::<u64>()) {
        let u = haar_unitary(d, Seed(s)).unwrap();
        let h = unitary_log(&u).unwrap();
        let back = exp_i_hermitian(&h, 2.0 * std::f64::consts::PI).unwrap();
        prop_assert!(hs_norm(&(back - &u)) <= 1e-10);
        prop_assert!(op_norm(&h, 1e-12).unwrap() <= 0.5 + 1e-12);
    }
}
