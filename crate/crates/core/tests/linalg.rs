use acnum_core::io::{parse_cmat, parse_cmat2, cmat2_to_string, cmat_to_string};
use acnum_core::linalg::*;
use acnum_core::Error;
use nalgebra::SymmetricEigen;

fn sigma_x() -> CMatrix {
    from_rows(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
}
fn sigma_y() -> CMatrix {
    from_rows(2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
}
fn sigma_z() -> CMatrix {
    diag_real(&[1.0, -1.0])
}

fn svd_values(x: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = x.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[test]
fn normalized_trace_examples() {
    assert!((normalized_trace(&identity(7)) - ONE).norm() < 1e-15);
    assert!(normalized_trace(&sigma_z()).norm() < 1e-15);
    let v = [0.0, 1.0, -1.0, 0.0].map(|t| c(t / 2f64.sqrt(), 0.0));
    let v = CVector::from_column_slice(&v);
    let p = &v * v.adjoint();
    assert!((normalized_trace(&p) - c(0.25, 0.0)).norm() < 1e-15);
}

#[test]
fn hs_norm_examples() {
    assert!((hs_norm(&identity(5)) - 1.0).abs() < 1e-15);
    let u = haar_unitary(9, Seed(3)).unwrap();
    assert!((hs_norm(&u) - 1.0).abs() < 1e-12);
    let mut rng = Seed(4).rng();
    let p = random_projection(8, 3, &mut rng).unwrap();
    assert!((hs_norm(&p) - normalized_trace(&p).re.sqrt()).abs() < 1e-12);
    let x = haar_unitary(3, Seed(1)).unwrap();
    let y = haar_unitary(4, Seed(1)).unwrap();
    assert!(matches!(hs_inner(&x, &y), Err(Error::DimensionMismatch { .. })));
    let ip = hs_inner(&x, &x).unwrap();
    assert!((ip.re - hs_norm(&x).powi(2)).abs() < 1e-14 && ip.im.abs() < 1e-14);
}

#[test]
fn trace_norm_examples() {
    let mut rng = Seed(5).rng();
    let p = random_projection(10, 4, &mut rng).unwrap();
    assert!((trace_norm(&p).unwrap() - 0.4).abs() < 1e-12);
    let u = haar_unitary(10, Seed(6)).unwrap();
    assert!((trace_norm(&u).unwrap() - 1.0).abs() < 1e-12);
    for (k, d) in [3usize, 8, 16].into_iter().enumerate() {
        let x = gaussian_matrix(d, &mut Seed(70 + k as u64).rng());
        // Independent route: square roots of the eigenvalues of x* x.
        let eig = SymmetricEigen::new(x.adjoint() * &x);
        let oracle = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum::<f64>() / d as f64;
        assert!((trace_norm(&x).unwrap() - oracle).abs() < 1e-9);
    }
}

#[test]
fn op_norm_examples() {
    let u = haar_unitary(12, Seed(8)).unwrap();
    assert!((op_norm(&u, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    assert!((op_norm(&diag_real(&[3.0, 1.0]), 1e-12).unwrap() - 3.0).abs() < 1e-12);
    for s in 0..20 {
        let x = gaussian_matrix(12, &mut Seed(100 + s).rng());
        let oracle = svd_values(&x)[0];
        let got = op_norm(&x, 1e-12).unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle, "seed {s}: {got} vs {oracle}");
    }
    let nan = diag(&[c(f64::NAN, 0.0), ONE]);
    assert!(matches!(op_norm(&nan, 1e-12), Err(Error::NonFinite)));
}

#[test]
fn op_norm_near_degenerate_top() {
    let u = haar_unitary(20, Seed(9)).unwrap();
    let mut s: Vec<f64> = (0..20).map(|k| 1.0 - 0.04 * k as f64).collect();
    s[1] = 1.0 - 1e-7;
    let x = &u * diag_real(&s) * haar_unitary(20, Seed(10)).unwrap();
    assert!((op_norm(&x, 1e-12).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn kron_and_embed_examples() {
    assert_eq!(kron(&identity(2), &identity(2)), identity(4));
    let legs = TensorLegs::new(vec![2, 2]).unwrap();
    assert_eq!(embed_leg(&sigma_z(), &legs, 0).unwrap(), diag_real(&[1.0, 1.0, -1.0, -1.0]));
    assert_eq!(embed_leg(&sigma_z(), &legs, 1).unwrap(), diag_real(&[1.0, -1.0, 1.0, -1.0]));
    let k = kron(&matrix_unit(2, 0, 1), &matrix_unit(2, 1, 0));
    for i in 0..4 {
        for j in 0..4 {
            let expected = if (i, j) == (0 * 2 + 1, 1 * 2 + 0) { ONE } else { ZERO };
            assert_eq!(k[(i, j)], expected);
        }
    }
    assert!(matches!(embed_leg(&identity(3), &legs, 0), Err(Error::DimensionMismatch { .. })));
    let a = gaussian_matrix(3, &mut Seed(1).rng());
    let b = gaussian_matrix(4, &mut Seed(2).rng());
    let lhs = normalized_trace(&kron(&a, &b));
    assert!((lhs - normalized_trace(&a) * normalized_trace(&b)).norm() < 1e-12);
}

#[test]
fn commutator_examples() {
    let x = gaussian_matrix(5, &mut Seed(11).rng());
    assert!(max_abs(&commutator(&x, &x).unwrap()) < 1e-12);
    assert_eq!(commutator(&x, &identity(5)).unwrap().norm(), 0.0);
    let pauli = commutator(&sigma_x(), &sigma_z()).unwrap();
    assert!(max_abs(&(pauli - sigma_y() * c(0.0, -2.0))) < 1e-15);
}

#[test]
fn haar_examples() {
    for d in [1usize, 2, 7, 32] {
        let u = haar_unitary(d, Seed(d as u64)).unwrap();
        assert!(max_abs(&(u.adjoint() * &u - identity(d))) < 1e-12);
        for j in 0..d {
            assert!((u.column(j).norm() - 1.0).abs() < 1e-12);
        }
    }
    let a = haar_unitary(6, Seed(42)).unwrap();
    let b = haar_unitary(6, Seed(42)).unwrap();
    assert!(a.iter().zip(b.iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    assert_ne!(a, haar_unitary(6, Seed(43)).unwrap());
    assert!(haar_unitary(0, Seed(1)).is_err());
}

#[test]
fn haar_first_moment_is_small() {
    // E|tau(u)|^2 = 1/d^2 for Haar u; the sample mean over 400 draws stays near it.
    let d = 4;
    let m: f64 = (0..400).map(|s| normalized_trace(&haar_unitary(d, Seed(1000 + s)).unwrap()).norm_sqr()).sum::<f64>() / 400.0;
    assert!((m - 1.0 / 16.0).abs() < 0.03, "mean {m}");
}

#[test]
fn polar_examples() {
    let u = haar_unitary(6, Seed(12)).unwrap();
    assert!(max_abs(&(polar_unitary(&u).unwrap() - &u)) < 1e-12);
    let p = polar_unitary(&diag_real(&[2.0, -3.0])).unwrap();
    assert!(max_abs(&(p - diag_real(&[1.0, -1.0]))) < 1e-14);
    let x = gaussian_matrix(9, &mut Seed(13).rng());
    let w = polar_unitary(&x).unwrap();
    assert!(unitary_residual(&w) < 1e-12);
    let abs_x = hermitian_function(&(x.adjoint() * &x), |l| c(l.max(0.0).sqrt(), 0.0)).unwrap();
    assert!(hs_norm(&(&w * abs_x - &x)) < 1e-10);
}

#[test]
fn polar_of_singular_matrix_is_unitary_and_deterministic() {
    let v = haar_unitary(5, Seed(14)).unwrap();
    let x = &v * diag_real(&[2.0, -1.0, 0.0, 0.0, 0.5]) * v.adjoint();
    let w = polar_unitary(&x).unwrap();
    assert!(unitary_residual(&w) < 1e-12);
    let abs_x = &v * diag_real(&[2.0, 1.0, 0.0, 0.0, 0.5]) * v.adjoint();
    assert!(hs_norm(&(&w * abs_x - &x)) < 1e-10);
    assert_eq!(w, polar_unitary(&x).unwrap());
}

#[test]
fn unitary_log_examples() {
    assert!(max_abs(&unitary_log(&identity(3)).unwrap()) < 1e-15);
    let h = unitary_log(&diag_real(&[1.0, -1.0])).unwrap();
    assert!(max_abs(&(h - diag_real(&[0.0, 0.5]))) < 1e-15);
    for d in [2usize, 5, 16, 64] {
        let u = haar_unitary(d, Seed(200 + d as u64)).unwrap();
        let h = unitary_log(&u).unwrap();
        assert!(max_abs(&(&h - h.adjoint())) < 1e-14);
        let back = exp_i_hermitian(&h, 2.0 * std::f64::consts::PI).unwrap();
        assert!(hs_norm(&(back - &u)) <= 1e-10);
        let (vals, _) = hermitian_eigen(&h).unwrap();
        assert!(vals.iter().all(|&l| l > -0.5 && l <= 0.5 + 1e-15));
    }
    let bad = diag_real(&[1.0, 0.5]);
    assert!(matches!(unitary_log(&bad), Err(Error::NotUnitary { .. })));
}

#[test]
fn unitary_log_branch_point_in_rotated_basis() {
    let w = haar_unitary(4, Seed(15)).unwrap();
    let u = &w * diag_real(&[-1.0, -1.0, 1.0, -1.0]) * w.adjoint();
    let h = unitary_log(&u).unwrap();
    let expected = &w * diag_real(&[0.5, 0.5, 0.0, 0.5]) * w.adjoint();
    assert!(max_abs(&(h - expected)) < 1e-12);
}

#[test]
fn leg_local_application_matches_dense() {
    let legs = TensorLegs::new(vec![2, 3, 2]).unwrap();
    let x = gaussian_matrix(12, &mut Seed(16).rng());
    let g = gaussian_matrix(4, &mut Seed(17).rng());
    // g acts on legs (2, 0): reorder g into ambient leg order to build the dense oracle.
    let mut dense = zeros(12);
    for r in 0..12 {
        for s in 0..12 {
            let (r0, r1, r2) = (r / 6, (r / 2) % 3, r % 2);
            let (s0, s1, s2) = (s / 6, (s / 2) % 3, s % 2);
            if r1 == s1 {
                dense[(r, s)] = g[(r2 * 2 + r0, s2 * 2 + s0)];
            }
        }
    }
    let left = apply_on_legs(&x, &legs, &[2, 0], &g, Side::Left).unwrap();
    assert!(max_abs(&(left - &dense * &x)) < 1e-12);
    let right = apply_on_legs(&x, &legs, &[2, 0], &g, Side::Right).unwrap();
    assert!(max_abs(&(right - &x * &dense)) < 1e-12);
}

#[test]
fn partial_expectation_matches_kron_formula() {
    let legs = TensorLegs::new(vec![2, 3]).unwrap();
    let a = gaussian_matrix(2, &mut Seed(18).rng());
    let b = gaussian_matrix(3, &mut Seed(19).rng());
    let x = kron(&a, &b);
    let keep_second = partial_expectation(&x, &legs, &[false, true]).unwrap();
    assert!(max_abs(&(keep_second - kron(&identity(2), &b) * normalized_trace(&a))) < 1e-12);
    let keep_first = reduce_to_legs(&x, &legs, &[true, false]).unwrap();
    assert!(max_abs(&(keep_first - &a * normalized_trace(&b))) < 1e-12);
}

#[test]
fn cmat_roundtrip_is_lossless() {
    let x = gaussian_matrix(4, &mut Seed(20).rng()) * c(1e-3, 0.0);
    let back = parse_cmat(&cmat_to_string(&x)).unwrap();
    assert!(x.iter().zip(back.iter()).all(|(a, b)| a == b));
    let y = haar_unitary(4, Seed(21)).unwrap();
    let (a, b) = parse_cmat2(&cmat2_to_string(&x, &y)).unwrap();
    assert_eq!((a, b), (x, y));
}

#[test]
fn cmat_parse_errors_carry_line_numbers() {
    let text = "CMAT v1 2\n1 0\n0 0\nzz 0\n1 0\n";
    match parse_cmat(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(parse_cmat("CMAT v2 2\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_cmat("CMAT v1 1\n1 0\n"), Ok(_)));
    assert!(matches!(parse_cmat("CMAT v1 1\n1 0\n2 0\n"), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn seeds_derive_distinct_streams() {
    let s = Seed(77);
    assert_ne!(s.derive(0), s.derive(1));
    assert_eq!(s.derive(5), s.derive(5));
    assert_eq!(s.point(3), Seed(77 ^ 3));
}

#[test]
fn powers_stormer_on_commuting_diagonals() {
    let a = [0.9, 0.2, 0.0, 0.5];
    let b = [0.1, 0.2, 0.7, 1.0];
    let ps = powers_stormer(&diag_real(&a), &diag_real(&b)).unwrap();
    let mean = |f: &dyn Fn(f64, f64) -> f64| a.iter().zip(&b).map(|(&x, &y)| f(x, y)).sum::<f64>() / 4.0;
    assert!((ps.lower - mean(&|x, y| (x - y).powi(2))).abs() < 1e-15);
    assert!((ps.middle - mean(&|x, y| (x * x - y * y).abs())).abs() < 1e-14);
    let upper = mean(&|x, y| (x - y).powi(2)).sqrt() * mean(&|x, y| (x + y).powi(2)).sqrt();
    assert!((ps.upper - upper).abs() < 1e-15);
    assert!(ps.holds(0.0));
    let same = powers_stormer(&diag_real(&a), &diag_real(&a)).unwrap();
    assert_eq!((same.lower, same.upper), (0.0, 0.0));
    assert!(same.middle < 1e-15);
}

#[test]
fn powers_stormer_rejects_non_positive_input() {
    assert!(powers_stormer(&diag_real(&[-0.5, 0.5]), &identity(2)).is_err());
    assert!(powers_stormer(&diag_real(&[1.5, 0.5]), &identity(2)).is_err());
    assert!(powers_stormer(&identity(2), &identity(3)).is_err());
}

#[test]
fn projection_trace_gap_examples() {
    let (gap, dist) = projection_trace_gap(&diag_real(&[1.0, 0.0]), &diag_real(&[0.0, 1.0])).unwrap();
    assert!(gap < 1e-15 && (dist - 1.0).abs() < 1e-15);
    // Nested projections give equality.
    let (gap, dist) = projection_trace_gap(&diag_real(&[1.0, 1.0, 0.0]), &diag_real(&[1.0, 0.0, 0.0])).unwrap();
    assert!((gap - 1.0 / 3.0).abs() < 1e-15 && (dist - 1.0 / 3.0).abs() < 1e-15);
    assert!(projection_trace_gap(&diag_real(&[0.5, 0.0]), &identity(2)).is_err());
}

#[test]
fn random_positive_contraction_has_norm_one() {
    let h = random_positive_contraction(6, &mut Seed(3).rng()).unwrap();
    let (values, _) = hermitian_eigen(&h).unwrap();
    assert!(values[0] > -1e-14);
    assert!((values[5] - 1.0).abs() < 1e-12);
}
