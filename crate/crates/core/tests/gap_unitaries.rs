use acnum_core::expander::{clock_shift, clock_shift_pair, find_gap_pair, GapSearch, VerifiedGapPair};
use acnum_core::gap_unitaries::*;
use acnum_core::linalg::*;
use acnum_core::Error;

fn haars(d: usize, count: usize, seed: u64) -> Vec<CMatrix> {
    (0..count).map(|i| haar_unitary(d, Seed(seed).derive(i as u64)).unwrap()).collect()
}

fn gap_pair_8() -> VerifiedGapPair {
    match find_gap_pair(8, 0.05, 200, Seed(3)).unwrap() {
        GapSearch::Found { pair, .. } => pair,
        other => panic!("no gap pair at n=8: {}", other.restricted_norm()),
    }
}

#[test]
fn clock_shift_pairs_are_certified() {
    for k in 1..=6 {
        let pair = clock_shift_pair(k).unwrap();
        // Oracle: clock and shift diagonalize on the Weyl basis, so the
        // restricted norm is max |1 + w^a + w^b| over (a, b) != (0, 0).
        let w = 2.0 * std::f64::consts::PI / k as f64;
        let mut want: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                if (a, b) != (0, 0) {
                    want = want.max((ONE + C64::from_polar(1.0, w * a as f64) + C64::from_polar(1.0, w * b as f64)).norm());
                }
            }
        }
        assert!((pair.restricted_norm_value() - want).abs() < 1e-8, "k={k}");
    }
    let (c2, s2) = clock_shift(2);
    assert!(max_abs(&(c2 - &pauli_matrices()[3])) < 1e-15);
    assert_eq!(s2, pauli_matrices()[1]);
}

#[test]
fn f3_pair_examples() {
    let pair = gap_pair_8();
    let sys = build_f3_pair(4, &pair).unwrap();
    assert!((sys.eta - 2f64.sqrt() * pair.kappa()).abs() < 1e-15);
    let b = gaussian_matrix(4, &mut Seed(1).rng());
    let (lhs, rhs) = sys.sides(&identity(8).kronecker(&b)).unwrap();
    assert!(lhs < 1e-12 && rhs < 1e-12);

    // x = a ⊗ 1 with tau(a) = 0 reduces to the gap inequality in M_8.
    let mut a = gaussian_matrix(8, &mut Seed(2).rng());
    let t = normalized_trace(&a);
    a -= identity(8) * t;
    let (lhs, rhs) = sys.sides(&a.kronecker(&identity(4))).unwrap();
    let small_l = hs_norm(&a);
    let small_r = hs_norm(&commutator(pair.u1(), &a).unwrap()) + hs_norm(&commutator(pair.u2(), &a).unwrap());
    assert!((lhs - small_l).abs() < 1e-12 && (rhs - small_r).abs() < 1e-12);

    let report = relative_gap_audit(&sys, 500, Seed(4)).unwrap();
    assert_eq!(report.samples, 1000);
    assert_eq!(report.violations, 0);
    assert!(report.max_ratio <= sys.eta);
}

#[test]
fn f2_block_examples() {
    let pair = clock_shift_pair(2).unwrap();
    let w = haar_unitary(6, Seed(5)).unwrap();
    let sys = build_f2_blocks(3, &w, &pair).unwrap();
    for z in &sys.z {
        assert!(max_abs(&(z.adjoint() * z - identity(18))) < 1e-12);
    }
    assert!((sys.eta - 1e7 * (1.0 + pair.kappa().powi(6))).abs() < 1e-6);
    // Condition (2): Z_1 lives on M_3 ⊗ M_k ⊗ 1.
    assert!(support_residual(&sys.z[0], &sys.legs, &[true, true, false]).unwrap() < 1e-14);
    assert!(support_residual(&sys.z[1], &sys.legs, &[true, true, false]).unwrap() > 0.1);
    let report = relative_gap_audit(&sys, 200, Seed(6)).unwrap();
    assert_eq!(report.violations, 0);
    assert!(report.max_ratio.is_finite() && report.max_ratio < sys.eta);

    let bad = identity(6) * c(2.0, 0.0);
    assert!(matches!(build_f2_blocks(3, &bad, &pair), Err(Error::NotUnitary { .. })));
    assert!(matches!(build_f2_blocks(2, &w, &pair), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn f2_sub_inequality_with_sqrt2_kappa() {
    // The inequality for `u ⊗ 1`, `v ⊗ 1` on A ⊗ B used inside the F2 argument.
    let pair = clock_shift_pair(3).unwrap();
    let sys = build_f3_pair(3, &pair).unwrap();
    let report = relative_gap_audit(&sys, 500, Seed(7)).unwrap();
    assert_eq!(report.violations, 0);
}

#[test]
fn fact_identity_holds() {
    for s in 0..10u64 {
        let d = haars(4, 3, 100 + s);
        let x = gaussian_matrix(12, &mut Seed(200 + s).rng());
        let (lhs, rhs) = fact_identity([&d[0], &d[1], &d[2]], &x).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs));
        // Each block term is bounded by the full commutator.
        for i in 0..3 {
            for j in 0..3 {
                let xij = x.view((i * 4, j * 4), (4, 4)).into_owned();
                let term = hs_norm(&(&d[i] * &xij * d[j].adjoint() - &xij)) / 3f64.sqrt();
                assert!(term <= lhs.sqrt() + 1e-12);
            }
        }
    }
}

/// Dense `Z_3`, `T_3` from Kronecker products.
fn dense_f3(us: &[CMatrix], vs: &[CMatrix]) -> (CMatrix, CMatrix) {
    let (k, m, n) = (us.len(), vs.len(), us[0].nrows());
    let mut z = CMatrix::zeros(k * n * m, k * n * m);
    for (i, u) in us.iter().enumerate() {
        z += kron_all(&[matrix_unit(k, i, i), u.clone(), identity(m)]);
    }
    let mut t = CMatrix::zeros(k * n * m, k * n * m);
    for (j, v) in vs.iter().enumerate() {
        t += kron_all(&[identity(k), v.clone(), matrix_unit(m, j, j)]);
    }
    (z, t)
}

#[test]
fn f3_reduction_identity() {
    for (k, m, n, s) in [(2usize, 2usize, 2usize, 1u64), (3, 2, 4, 2), (2, 3, 3, 3), (3, 3, 4, 4)] {
        let us = haars(n, k, 10 * s);
        let vs = haars(n, m, 10 * s + 5);
        let asm = reduction_assembly_f3(&us, &vs, &clock_shift_pair(k).unwrap(), &clock_shift_pair(m).unwrap()).unwrap();
        let (lhs, rhs) = reduction_identity(&asm, &us, &vs).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "k={k} m={m} n={n}");
        let (z, t) = dense_f3(&us, &vs);
        let dense = hs_norm(&commutator(&z, &t).unwrap()).powi(2);
        assert!((dense - lhs).abs() < 1e-10);
        for e in asm.commutator_norms().unwrap() {
            if (e.alpha, e.beta) == (3, 3) {
                assert!(!e.disjoint);
            } else {
                assert!(e.disjoint);
                assert_eq!(e.hs_norm, 0.0);
            }
        }
        for op in asm.z.iter().chain(&asm.t) {
            let u = asm.dense(op).unwrap();
            assert!(max_abs(&(u.adjoint() * &u - identity(k * n * m))) < 1e-12);
        }
    }
}

#[test]
fn f2_reduction_identity_and_factor_nine() {
    for (k, m, n, s) in [(2usize, 2usize, 2usize, 1u64), (3, 2, 2, 2), (2, 3, 3, 3)] {
        let us = haars(n, k, 20 * s);
        let vs = haars(n, m, 20 * s + 5);
        let (xp, yp) = (clock_shift_pair(k).unwrap(), clock_shift_pair(m).unwrap());
        let f2 = reduction_assembly_f2(&us, &vs, &xp, &yp).unwrap();
        let f3 = reduction_assembly_f3(&us, &vs, &xp, &yp).unwrap();
        let (lhs2, rhs2) = reduction_identity(&f2, &us, &vs).unwrap();
        let (lhs3, _) = reduction_identity(&f3, &us, &vs).unwrap();
        assert!((lhs2 - rhs2).abs() < 1e-10);
        assert!((lhs2 / lhs3 - 1.0 / 9.0).abs() < 1e-10);
        for e in f2.commutator_norms().unwrap() {
            if (e.alpha, e.beta) == (2, 2) {
                assert!(!e.disjoint && e.hs_norm > 0.0);
            } else {
                assert!(e.disjoint);
                assert_eq!(e.hs_norm, 0.0);
            }
        }
        let d = f2.legs.total();
        for op in f2.z.iter().chain(&f2.t) {
            let u = f2.dense(op).unwrap();
            assert!(max_abs(&(u.adjoint() * &u - identity(d))) < 1e-12);
        }
    }
}

#[test]
fn f2_commutator_against_dense_oracle() {
    let (k, m, n) = (2, 2, 2);
    let us = haars(n, k, 71);
    let vs = haars(n, m, 72);
    let (xp, yp) = (clock_shift_pair(k).unwrap(), clock_shift_pair(m).unwrap());
    let f2 = reduction_assembly_f2(&us, &vs, &xp, &yp).unwrap();
    // Z_2 and T_2 built by hand from Kronecker products.
    let w = matrix_unit(2, 0, 0).kronecker(&us[0]) + matrix_unit(2, 1, 1).kronecker(&us[1]);
    let wp = vs[0].kronecker(&matrix_unit(2, 0, 0)) + vs[1].kronecker(&matrix_unit(2, 1, 1));
    let z2 = kron_all(&[matrix_unit(3, 0, 2), identity(k * n)]) + kron_all(&[matrix_unit(3, 1, 0), identity(k * n)]) + kron_all(&[matrix_unit(3, 2, 1), w]);
    let t2 = kron_all(&[identity(n * m), matrix_unit(3, 0, 2)]) + kron_all(&[identity(n * m), matrix_unit(3, 1, 0)]) + kron_all(&[wp, matrix_unit(3, 2, 1)]);
    let zd = kron_all(&[z2, identity(m * 3)]);
    let td = kron_all(&[identity(3 * k), t2]);
    let dense = hs_norm(&commutator(&zd, &td).unwrap());
    let entry = f2.commutator_norms().unwrap().into_iter().find(|e| (e.alpha, e.beta) == (2, 2)).unwrap();
    assert!((dense - entry.hs_norm).abs() < 1e-12);
    assert!(max_abs(&(f2.dense(&f2.z[1]).unwrap() - zd)) < 1e-15);
}

#[test]
fn commuting_inputs_give_zero() {
    let d = diag(&[ONE, I, -ONE, -I]);
    let e = diag(&[I, ONE, ONE, -ONE]);
    let us = vec![d.clone(), e.clone()];
    let vs = vec![e, d.adjoint(), identity(4)];
    let (xp, yp) = (clock_shift_pair(2).unwrap(), clock_shift_pair(3).unwrap());
    for asm in [reduction_assembly_f3(&us, &vs, &xp, &yp).unwrap(), reduction_assembly_f2(&us, &vs, &xp, &yp).unwrap()] {
        assert!(asm.commutator_norms().unwrap().iter().all(|e| e.hs_norm == 0.0));
    }
}

#[test]
fn reduction_errors() {
    let us = haars(2, 2, 1);
    let vs = vec![haar_unitary(3, Seed(2)).unwrap()];
    let p2 = clock_shift_pair(2).unwrap();
    let p1 = clock_shift_pair(1).unwrap();
    assert!(matches!(reduction_assembly_f3(&us, &vs, &p2, &p1), Err(Error::DimensionMismatch { .. })));
    let vs = vec![haar_unitary(2, Seed(2)).unwrap()];
    assert!(matches!(reduction_assembly_f3(&us, &vs, &p2, &p2), Err(Error::InvalidArgument(_))));
    assert!(reduction_assembly_f3(&us, &vs, &p2, &p1).is_ok());
}
