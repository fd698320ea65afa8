use acnum_core::linalg::*;
use acnum_core::nearcomm::*;
use acnum_core::witness::{theta_apply, x_ni};
use nalgebra::SVD;

fn diag(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.to_vec()))
}

fn conj_by(w: &CMatrix, x: &CMatrix) -> CMatrix {
    w * x * w.adjoint()
}

/// Projection onto the commutant of `{b, b*}` from the SVD nullspace of the
/// stacked commutator maps, built column by column from matrix units.
fn dense_commutant_projection(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let bs = b.adjoint();
    let mut m = CMatrix::zeros(2 * d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = c(1.0, 0.0);
            let c1 = &e * b - b * &e;
            let c2 = &e * &bs - &bs * &e;
            let col = j * d + i;
            for k in 0..d * d {
                m[(k, col)] = c1[(k % d, k / d)];
                m[(d * d + k, col)] = c2[(k % d, k / d)];
            }
        }
    }
    let svd = SVD::new(m, false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let va = nalgebra::DVector::from_fn(d * d, |k, _| a[(k % d, k / d)]);
    let mut out = nalgebra::DVector::<C64>::zeros(d * d);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-9 * smax.max(1.0) {
            let v = vt.row(k).adjoint();
            let coef = (v.adjoint() * &va)[(0, 0)];
            out += v * coef;
        }
    }
    CMatrix::from_fn(d, d, |i, j| out[j * d + i])
}

fn random_m(d: usize, seed: u64) -> CMatrix {
    gaussian_matrix(d, &mut Seed(seed).rng())
}

/// A commuting pair `(A0, B0)` with `B0` normal of the given block pattern,
/// plus perturbations of HS norm `delta`.
fn normal_plus_delta(d: usize, blocks: usize, delta: f64, seed: u64) -> (CMatrix, CMatrix) {
    let w = haar_unitary(d, Seed(seed)).unwrap();
    let vals = [c(0.8, 0.0), c(-0.8, 0.0), c(0.0, 0.8), c(0.0, -0.8), c(0.5, 0.5), c(-0.5, -0.5)];
    let size = d / blocks;
    let mut rng = Seed(seed + 1).rng();
    let mut bd = CMatrix::zeros(d, d);
    let mut ad = CMatrix::zeros(d, d);
    for k in 0..blocks {
        let g = gaussian_matrix(size, &mut rng);
        let g = &g * c(0.8 / singular_values(&g).unwrap()[0], 0.0);
        for i in 0..size {
            bd[(k * size + i, k * size + i)] = vals[k % vals.len()];
            for j in 0..size {
                ad[(k * size + i, k * size + j)] = g[(i, j)];
            }
        }
    }
    let ea = gaussian_matrix(d, &mut rng);
    let eb = gaussian_matrix(d, &mut rng);
    (
        conj_by(&w, &ad) + &ea * c(delta / hs_norm(&ea), 0.0),
        conj_by(&w, &bd) + &eb * c(delta / hs_norm(&eb), 0.0),
    )
}

#[test]
fn defect_of_pauli_pair() {
    let [_, x, _, z] = pauli_matrices();
    // [X, Z] = -2iY has normalized HS norm 2, and Z* = Z.
    assert!((defect(&x, &z).unwrap() - 4.0).abs() < 1e-14);
    assert!(defect(&z, &diag(&[c(0.3, 1.0), c(-2.0, 0.5)])).unwrap() < 1e-15);
    assert!(defect(&x, &identity(3)).is_err());
}

#[test]
fn defect_sees_the_adjoint_constraint() {
    // A non-normal B commuting with A but not with B*.
    let b = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let a = b.clone();
    let d = defect(&a, &b).unwrap();
    let expected = hs_norm(&(&a * b.adjoint() - b.adjoint() * &a));
    assert!(expected > 0.5);
    assert!((d - expected).abs() < 1e-14);
}

#[test]
fn projection_onto_commutant_of_identity_is_identity_map() {
    let a = random_m(5, 1);
    let p = commutant_projection(&a, &identity(5)).unwrap();
    assert!(max_abs(&(p - &a)) < 1e-13);
}

#[test]
fn projection_onto_commutant_of_distinct_diagonal_is_diagonal_part() {
    let a = random_m(6, 2);
    let b = diag(&[c(0.1, 0.0), c(-0.4, 0.2), c(0.9, 0.0), c(0.0, -0.7), c(0.3, 0.3), c(-0.8, -0.1)]);
    let p = commutant_projection(&a, &b).unwrap();
    let expected = CMatrix::from_fn(6, 6, |i, j| if i == j { a[(i, i)] } else { c(0.0, 0.0) });
    assert!(max_abs(&(p - expected)) < 1e-12);
}

#[test]
fn projection_for_normal_b_is_block_pinching() {
    let d = 8;
    let w = haar_unitary(d, Seed(3)).unwrap();
    let spec = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.7), c(0.0, 0.7), c(-0.2, -0.2), c(0.9, 0.1), c(0.9, 0.1)];
    let groups: [usize; 8] = [0, 0, 0, 1, 1, 2, 3, 3];
    let b = conj_by(&w, &diag(&spec));
    let a = random_m(d, 4);
    let at = w.adjoint() * &a * &w;
    let pinched = CMatrix::from_fn(d, d, |i, j| if groups[i] == groups[j] { at[(i, j)] } else { c(0.0, 0.0) });
    let p = commutant_projection(&a, &b).unwrap();
    assert!(max_abs(&(p - conj_by(&w, &pinched))) < 1e-11);
}

#[test]
fn projection_matches_dense_nullspace() {
    let g = random_m(3, 5);
    let cases: Vec<CMatrix> = vec![
        random_m(4, 6),
        normal_with_spectrum(&[c(0.3, 0.1), c(0.3, 0.1), c(-0.5, 0.0), c(0.0, 0.9), c(0.0, 0.9)], Seed(7)).unwrap(),
        // G ⊕ G: its commutant with the adjoint is M_2 ⊗ 1_3.
        conj_by(&haar_unitary(6, Seed(8)).unwrap(), &identity(2).kronecker(&g)),
        CMatrix::from_fn(4, 4, |i, j| if j == i + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }),
    ];
    for (k, b) in cases.iter().enumerate() {
        let d = b.nrows();
        let a = random_m(d, 100 + k as u64);
        let got = commutant_projection(&a, b).unwrap();
        let want = dense_commutant_projection(&a, b);
        assert!(max_abs(&(&got - &want)) < 1e-10, "case {k}");
    }
}

#[test]
fn projection_is_idempotent_feasible_and_covariant() {
    let d = 6;
    let g = random_m(2, 9);
    let w = haar_unitary(d, Seed(10)).unwrap();
    let b = conj_by(&w, &identity(3).kronecker(&g));
    let a = random_m(d, 11);
    let p = commutant_projection(&a, &b).unwrap();
    let pp = commutant_projection(&p, &b).unwrap();
    assert!(max_abs(&(&pp - &p)) < 1e-12);
    assert!(hs_norm(&p) <= hs_norm(&a) + 1e-12);
    assert!(hs_norm(&(&p * &b - &b * &p)) < 1e-10);
    assert!(hs_norm(&(&p * b.adjoint() - b.adjoint() * &p)) < 1e-10);
    let z = c(-1.7, 0.6);
    let pz = commutant_projection(&(&a * z), &b).unwrap();
    assert!(max_abs(&(pz - &p * z)) < 1e-12);
    // Commutant of a non-normal generic B is the scalars.
    let generic = random_m(d, 12);
    let ps = commutant_projection(&a, &generic).unwrap();
    assert!(max_abs(&(ps - identity(d) * normalized_trace(&a))) < 1e-11);
}

#[test]
fn theorem_a_pair_of_identities_is_zero() {
    let i4 = identity(4);
    let p = build_theorem_a_pair(&i4, &i4, &i4, &i4).unwrap();
    assert!(max_abs(&p.a) < 1e-15 && max_abs(&p.b) < 1e-15);
}

#[test]
fn theorem_a_pair_from_commuting_unitaries_commutes() {
    let d = 6;
    let w = haar_unitary(d, Seed(13)).unwrap();
    let mut rng = Seed(14).rng();
    let us: Vec<CMatrix> = (0..4)
        .map(|_| {
            let ph: Vec<C64> = (0..d).map(|_| C64::from_polar(1.0, 6.0 * rand::Rng::random::<f64>(&mut rng) - 3.0)).collect();
            conj_by(&w, &diag(&ph))
        })
        .collect();
    let p = build_theorem_a_pair(&us[0], &us[1], &us[2], &us[3]).unwrap();
    assert!(defect(&p.a, &p.b).unwrap() <= 1e-9);
}

#[test]
fn theorem_a_pair_components_are_unitary_logs() {
    for d in [2usize, 5, 8] {
        let us: Vec<CMatrix> = (0..4).map(|k| haar_unitary(d, Seed(20 + k)).unwrap()).collect();
        let p = build_theorem_a_pair(&us[0], &us[1], &us[2], &us[3]).unwrap();
        assert!(op_norm(&p.a, 1e-12).unwrap() <= 1.0 + CONTRACTION_TOL);
        assert!(op_norm(&p.b, 1e-12).unwrap() <= 1.0 + CONTRACTION_TOL);
        // A = h1 + i h2 with h1, h2 Hermitian: they are its Hermitian and skew parts.
        for (x, u1, u2) in [(&p.a, &us[0], &us[1]), (&p.b, &us[2], &us[3])] {
            let two_pi_i = c(0.0, 2.0 * std::f64::consts::PI);
            assert!(max_abs(&(exp_hermitian_times(&hermitian_part(x), two_pi_i) - u1)) < 1e-10);
            assert!(max_abs(&(exp_hermitian_times(&skew_part(x), two_pi_i) - u2)) < 1e-10);
        }
    }
}

/// `exp(z h)` for Hermitian `h` through its eigendecomposition.
fn exp_hermitian_times(h: &CMatrix, z: C64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h).unwrap();
    let e: Vec<C64> = vals.iter().map(|&v| (z * v).exp()).collect();
    conj_by(&vecs, &diag(&e))
}

#[test]
fn theorem_a_pair_rejects_bad_input() {
    let u = haar_unitary(3, Seed(30)).unwrap();
    let not_unitary = &u * c(1.1, 0.0);
    assert!(build_theorem_a_pair(&u, &u, &u, &not_unitary).is_err());
    assert!(build_theorem_a_pair(&u, &u, &u, &identity(4)).is_err());
    assert!(ContractionPair::new(identity(2) * c(1.5, 0.0), identity(2)).is_err());
}

#[test]
fn joint_diagonalize_commuting_hermitians() {
    let d = 7;
    let w = haar_unitary(d, Seed(31)).unwrap();
    let d1 = [0.3, 0.3, -0.1, 0.8, 0.8, 0.0, -0.6];
    let d2 = [1.0, -1.0, 0.5, 0.5, 0.2, 0.2, 0.0];
    let hs: Vec<CMatrix> = [d1, d2]
        .iter()
        .map(|v| conj_by(&w, &diag(&v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())))
        .collect();
    let v = joint_diagonalize(&hs, 100).unwrap();
    assert!(unitary_residual(&v) < 1e-12);
    for h in &hs {
        let t = v.adjoint() * h * &v;
        let off = CMatrix::from_fn(d, d, |i, j| if i == j { c(0.0, 0.0) } else { t[(i, j)] });
        assert!(max_abs(&off) < 1e-10);
    }
}

#[test]
fn descent_on_commuting_input_is_exact_in_one_sweep() {
    let d = 8;
    let w = haar_unitary(d, Seed(32)).unwrap();
    let bvals = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, -0.6), c(0.0, -0.6), c(0.0, -0.6), c(0.0, -0.6)];
    let blocks = identity(2).kronecker(&random_m(4, 33)) * c(0.2, 0.0);
    let a = conj_by(&w, &blocks);
    let b = conj_by(&w, &diag(&bvals));
    assert!(defect(&a, &b).unwrap() < 1e-13);
    let tr = alternating_descent(&a, &b, 20, 2, Seed(1)).unwrap();
    assert!(tr.distance_sum() < 1e-12, "{}", tr.distance_sum());
    assert_eq!(tr.sweeps_used, 1);
    assert!(tr.monotone_ok && tr.converged);
}

#[test]
fn descent_recovers_normal_plus_delta() {
    for (d, blocks) in [(4usize, 2usize), (8, 4), (8, 2), (16, 4)] {
        let mut found = Vec::new();
        for delta in [1e-3, 1e-2] {
            let (a, b) = normal_plus_delta(d, blocks, delta, 40 + d as u64 + blocks as u64);
            let tr = alternating_descent(&a, &b, 50, 2, Seed(2)).unwrap();
            assert!(tr.monotone_ok);
            assert!(tr.distance_sum() <= 5.0 * delta, "d={d} blocks={blocks} delta={delta}: {}", tr.distance_sum());
            let (ap, bp) = &tr.final_pair;
            assert!(defect(ap, bp).unwrap() < 1e-10);
            found.push(tr.distance_sum());
        }
        assert!(found[0] <= found[1]);
    }
}

#[test]
fn descent_trace_is_monotone_and_reproducible() {
    let a = random_m(5, 50) * c(0.3, 0.0);
    let b = random_m(5, 51) * c(0.3, 0.0);
    let t1 = alternating_descent(&a, &b, 30, 3, Seed(9)).unwrap();
    let t2 = alternating_descent(&a, &b, 30, 3, Seed(9)).unwrap();
    assert_eq!(t1.objective(), t2.objective());
    assert_eq!(t1.start_objectives, t2.start_objectives);
    assert!(t1.monotone_ok);
    let scale = hs_norm(&a).powi(2) + hs_norm(&b).powi(2);
    for w in t1.iterations.windows(2) {
        assert!(w[1].objective <= w[0].objective + MONOTONE_TOL * (w[0].objective + 1e-3 * scale));
    }
    for s in &t1.iterations {
        assert!((s.objective - s.dist_a.powi(2) - s.dist_b.powi(2)).abs() < 1e-14);
    }
    assert_eq!(t1.restarts, t1.start_objectives.len());
    assert_eq!(t1.objective(), t1.start_objectives[t1.best_start]);
    assert!(alternating_descent(&a, &b, 0, 1, Seed(9)).is_err());
}

#[test]
fn descent_on_witness_pairs() {
    let t = 0.2;
    for n in [2usize, 3] {
        let d = 1 << n;
        let u1 = x_ni(n, 1).unwrap().kronecker(&identity(d));
        let u2 = x_ni(n, 2).unwrap().kronecker(&identity(d));
        let v1 = theta_apply(n, t, &u1).unwrap();
        let v2 = theta_apply(n, t, &u2).unwrap();
        let p = build_theorem_a_pair(&u1, &u2, &v1, &v2).unwrap();
        let tr = alternating_descent(&p.a, &p.b, 50, 2, Seed(3)).unwrap();
        println!(
            "witness n={n} t={t}: defect {:.6e}, distance sum {:.6e}, objective {:.6e}",
            defect(&p.a, &p.b).unwrap(),
            tr.distance_sum(),
            tr.objective()
        );
        assert!(tr.monotone_ok);
        assert!(defect(&tr.final_pair.0, &tr.final_pair.1).unwrap() < 1e-10);
    }
}
