//! Seeded property checks across all modules, run as one command.
//!
//! Every check reduces to a nonnegative number (a residual, an excess over a
//! bound, or a count of failures) that passes when it is at most the
//! check's tolerance.

use std::f64::consts::PI;

use acnum_core::expander::{clock_shift_pair, gap_certificate_check, restricted_norm, UnitaryTuple};
use acnum_core::gap_unitaries::{fact_identity, reduction_assembly_f2, reduction_assembly_f3, reduction_identity};
use acnum_core::linalg::{
    c, exp_i_hermitian, gaussian_matrix, haar_unitary, hs_norm, identity, max_abs, op_norm, powers_stormer,
    projection_trace_gap, random_positive_contraction, random_projection, unitary_log, CMatrix, Seed,
};
use acnum_core::nearcomm::{alternating_descent, build_theorem_a_pair, commutant_projection, defect};
use acnum_core::subalgebra::{
    commutant_basis, cond_expect, generate_subalgebra, group_average_projection, pauli_group, BasicConstruction,
    SubalgebraBasis,
};
use acnum_core::witness::{
    almost_commute_audit, build_witness_family, cond_expect_theta, crossing_search, deform_bounds,
    deform_identity_checks, diag_expect_identity, hamming_bound_check,
};
use acnum_core::Result;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::pairs::{conj_by, normal_plus_delta_pair};

pub struct Invariant {
    pub module: &'static str,
    pub name: &'static str,
    pub tolerance: f64,
    run: fn(Seed) -> Result<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    /// NaN when the check could not be evaluated.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

const fn inv(module: &'static str, name: &'static str, tolerance: f64, run: fn(Seed) -> Result<f64>) -> Invariant {
    Invariant { module, name, tolerance, run }
}

pub const CHECKS: &[Invariant] = &[
    inv("core-linalg", "unitary_log_roundtrip", 1e-10, unitary_log_roundtrip),
    inv("core-linalg", "unitary_log_spectrum", 1e-12, unitary_log_spectrum),
    inv("core-linalg", "powers_stormer", 1e-9, powers_stormer_check),
    inv("core-linalg", "projection_trace", 1e-9, projection_trace),
    inv("core-linalg", "kron_mixed_product", 1e-12, kron_mixed_product),
    inv("subalgebra", "cond_expect_bimodule", 1e-10, cond_expect_bimodule),
    inv("subalgebra", "double_commutant", 0.0, double_commutant),
    inv("subalgebra", "basic_construction_identity", 1e-9, basic_construction_identity),
    inv("expander", "k2_saturation", 1e-6, k2_saturation),
    inv("expander", "clock_shift_certificate", 0.0, clock_shift_certificate),
    inv("gap-unitaries", "fact_identity", 1e-10, fact_identity_check),
    inv("gap-unitaries", "reduction_identity", 1e-10, reduction_identity_check),
    inv("witness", "almost_commute", 1e-9, almost_commute),
    inv("witness", "deform_identities", 1e-12, deform_identities),
    inv("witness", "deform_bound", 1e-9, deform_bound),
    inv("witness", "norm_identity", 1e-9, norm_identity),
    inv("witness", "hamming_bound", 0.0, hamming_bound),
    inv("witness", "expect_identity", 1e-12, expect_identity),
    inv("witness", "crossing", 0.0, crossing),
    inv("nearcomm", "projection_feasible", 1e-10, projection_feasible),
    inv("nearcomm", "descent_monotone", 0.0, descent_monotone),
    inv("nearcomm", "normal_plus_delta", 0.0, normal_plus_delta),
    inv("nearcomm", "theorem_a_contraction", 1e-8, theorem_a_contraction),
];

/// Runs every check on its own child seed; `tol` gives the tolerance by name.
pub fn run_suite(seed: Seed, tol: impl Fn(&str) -> f64 + Sync) -> Vec<Check> {
    CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, inv)| {
            let tolerance = tol(inv.name);
            match (inv.run)(seed.derive(i as u64)) {
                Ok(value) => Check {
                    module: inv.module,
                    name: inv.name,
                    value,
                    tolerance,
                    passed: value <= tolerance,
                    error: None,
                },
                Err(e) => Check {
                    module: inv.module,
                    name: inv.name,
                    value: f64::NAN,
                    tolerance,
                    passed: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn haars(count: usize, d: usize, seed: Seed) -> Result<Vec<CMatrix>> {
    (0..count).map(|i| haar_unitary(d, seed.derive(i as u64))).collect()
}

fn unitary_log_roundtrip(seed: Seed) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let u = haar_unitary(1 + i % 16, seed.derive(i as u64))?;
        let h = unitary_log(&u)?;
        worst = worst.max(hs_norm(&(exp_i_hermitian(&h, 2.0 * PI)? - &u)));
    }
    Ok(worst)
}

fn unitary_log_spectrum(seed: Seed) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let h = unitary_log(&haar_unitary(1 + i % 16, seed.derive(i as u64))?)?;
        worst = worst.max(op_norm(&h, 1e-13)? - 0.5);
    }
    Ok(worst.max(0.0))
}

fn powers_stormer_check(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=16);
        let h = random_positive_contraction(d, &mut rng)?;
        let k = random_positive_contraction(d, &mut rng)?;
        let ps = powers_stormer(&h, &k)?;
        worst = worst.max(ps.lower - ps.middle).max(ps.middle - ps.upper);
    }
    Ok(worst)
}

fn projection_trace(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=16);
        let p = random_projection(d, rng.random_range(0..=d), &mut rng)?;
        let q = random_projection(d, rng.random_range(0..=d), &mut rng)?;
        let (gap, dist_sq) = projection_trace_gap(&p, &q)?;
        worst = worst.max(gap - dist_sq);
    }
    Ok(worst)
}

fn kron_mixed_product(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let [a, b, x, y] = [2, 3, 2, 3].map(|d| gaussian_matrix(d, &mut rng));
    let lhs = a.kronecker(&b) * x.kronecker(&y);
    let rhs = (&a * &x).kronecker(&(&b * &y));
    Ok(max_abs(&(&lhs - &rhs)) / max_abs(&rhs).max(1.0))
}

/// `M_3 ⊗ 1_2` inside `M_6`, generated from two random elements.
fn m3_tensor_one(seed: Seed) -> Result<SubalgebraBasis> {
    let mut rng = seed.rng();
    let gens: Vec<CMatrix> = (0..2).map(|_| gaussian_matrix(3, &mut rng).kronecker(&identity(2))).collect();
    generate_subalgebra(&gens)
}

fn cond_expect_bimodule(seed: Seed) -> Result<f64> {
    let q = m3_tensor_one(seed)?;
    let mut rng = seed.derive(1).rng();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = gaussian_matrix(6, &mut rng);
        let a = q.random_element(&mut rng);
        let b = q.random_element(&mut rng);
        let ex = cond_expect(&x, &q)?;
        let lhs = cond_expect(&(&a * &x * &b), &q)?;
        let scale = hs_norm(&a) * hs_norm(&x) * hs_norm(&b) * 6.0;
        worst = worst.max(hs_norm(&(lhs - &a * &ex * &b)) / scale.max(1.0));
        worst = worst.max(hs_norm(&(cond_expect(&ex, &q)? - &ex)) / hs_norm(&x).max(1.0));
    }
    Ok(worst)
}

fn double_commutant(seed: Seed) -> Result<f64> {
    let q = m3_tensor_one(seed)?;
    let qc = commutant_basis(&q.basis)?;
    let qcc = commutant_basis(&qc.basis)?;
    Ok((q.dim() as f64 - 9.0).abs() + (qc.dim() as f64 - 4.0).abs() + (qcc.dim() as f64 - q.dim() as f64).abs())
}

fn basic_construction_identity(_: Seed) -> Result<f64> {
    let g = pauli_group(1);
    let mut worst = 0.0f64;
    for q in [SubalgebraBasis::diagonal(2), SubalgebraBasis::scalars(2)] {
        let bc = BasicConstruction::new(&q)?;
        let f = group_average_projection(&g, &bc)?;
        let lhs = bc.hs_norm_tr(&(&f - &bc.e_q)).powi(2);
        let rhs = g.iter().map(|u| hs_norm(&(u - q.project(u))).powi(2)).sum::<f64>() / g.len() as f64;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn k2_saturation(seed: Seed) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..3 {
        let us = haars(2, 8, seed.derive(i))?;
        let v = restricted_norm(&UnitaryTuple::new(us)?, 1e-12)?;
        worst = worst.max((v - 2.0).abs());
    }
    Ok(worst)
}

fn clock_shift_certificate(seed: Seed) -> Result<f64> {
    let pair = clock_shift_pair(3)?;
    let report = gap_certificate_check(pair.u1(), pair.u2(), pair.kappa(), 200, seed)?;
    Ok(report.violations as f64)
}

fn fact_identity_check(seed: Seed) -> Result<f64> {
    let d = haars(3, 4, seed)?;
    let mut rng = seed.derive(9).rng();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let x = gaussian_matrix(12, &mut rng);
        let (lhs, rhs) = fact_identity([&d[0], &d[1], &d[2]], &x)?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs));
    }
    Ok(worst)
}

fn reduction_identity_check(seed: Seed) -> Result<f64> {
    let us = haars(2, 2, seed.derive(0))?;
    let vs = haars(3, 2, seed.derive(1))?;
    let (x, y) = (clock_shift_pair(2)?, clock_shift_pair(3)?);
    let mut worst = 0.0f64;
    for asm in [reduction_assembly_f3(&us, &vs, &x, &y)?, reduction_assembly_f2(&us, &vs, &x, &y)?] {
        let (lhs, rhs) = reduction_identity(&asm, &us, &vs)?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + rhs));
    }
    Ok(worst)
}

fn almost_commute(_: Seed) -> Result<f64> {
    let t = 0.1;
    let audit = almost_commute_audit(&build_witness_family(3, t)?)?;
    Ok(audit
        .rows
        .iter()
        .map(|r| (r.comm_op - 4.0 * t).max(r.comm_hs - r.comm_op))
        .fold(0.0, f64::max))
}

fn deform_identities(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x = gaussian_matrix(2, &mut rng);
        let y = gaussian_matrix(2, &mut rng);
        let r = deform_identity_checks(0.05 + 0.007 * i as f64, &x, &y)?;
        worst = worst.max(r.sandwich).max(r.trace).max(r.expectation);
    }
    Ok(worst)
}

fn deform_bound(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = gaussian_matrix(8, &mut rng);
        for b in deform_bounds(3, 0.2, &x)? {
            worst = worst.max(b.lhs - b.rhs);
        }
    }
    Ok(worst)
}

fn norm_identity(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let e = cond_expect_theta(2, 0.3, &gaussian_matrix(4, &mut rng))?;
        worst = worst.max((e.norm_sq - e.formula_sq).abs() / (1.0 + e.norm_sq));
    }
    Ok(worst)
}

fn hamming_bound(_: Seed) -> Result<f64> {
    let mut failures = 0;
    for n in 1..=20 {
        for k in 1..=10 {
            if !hamming_bound_check(n, 0.05 * k as f64)?.holds {
                failures += 1;
            }
        }
    }
    Ok(failures as f64)
}

/// A random diagonal 0/1 projection and a random partition of `0..d`.
pub fn random_partition_instance(d: usize, rng: &mut impl Rng) -> (CMatrix, Vec<Vec<usize>>) {
    let p = CMatrix::from_fn(d, d, |i, j| if i == j && rng.random_bool(0.5) { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut cells = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let take = rng.random_range(1..=rest.len());
        cells.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    (p, cells)
}

fn expect_identity(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (p, cells) = random_partition_instance(16, &mut rng);
        worst = worst.max(diag_expect_identity(&p, &cells)?.residual);
    }
    Ok(worst)
}

fn crossing(_: Seed) -> Result<f64> {
    Ok(if crossing_search(0.2, 1.0 / 32.0, 100_000)?.is_some() { 0.0 } else { 1.0 })
}

fn projection_feasible(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let g = gaussian_matrix(2, &mut rng);
    let b = conj_by(&haar_unitary(6, seed.derive(1))?, &identity(3).kronecker(&g));
    let mut worst = 0.0f64;
    for bb in [b, gaussian_matrix(5, &mut rng)] {
        let a = gaussian_matrix(bb.nrows(), &mut rng);
        let p = commutant_projection(&a, &bb)?;
        let scale = hs_norm(&a).max(1.0) * hs_norm(&bb).max(1.0);
        worst = worst.max(defect(&p, &bb)? / scale).max(defect(&p, &bb.adjoint())? / scale);
        worst = worst.max(max_abs(&(commutant_projection(&p, &bb)? - &p)) / scale);
    }
    Ok(worst)
}

fn descent_monotone(seed: Seed) -> Result<f64> {
    let mut rng = seed.rng();
    let mut bad = 0;
    for _ in 0..2 {
        let a = gaussian_matrix(4, &mut rng);
        let b = gaussian_matrix(4, &mut rng);
        let a = &a * c(0.5 / hs_norm(&a), 0.0);
        let b = &b * c(0.5 / hs_norm(&b), 0.0);
        if !alternating_descent(&a, &b, 50, 1, seed.derive(1))?.monotone_ok {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

/// Excess of the recovered distance over `5 delta` for a commuting normal
/// pair in dimension 8 moved by `delta = 1e-3`.
fn normal_plus_delta(seed: Seed) -> Result<f64> {
    let delta = 1e-3;
    let (a, b) = normal_plus_delta_pair(8, 4, delta, seed)?;
    let trace = alternating_descent(&a, &b, 200, 0, seed.derive(2))?;
    Ok((trace.distance_sum() - 5.0 * delta).max(0.0))
}

fn theorem_a_contraction(seed: Seed) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..3 {
        let u = haars(4, 4, seed.derive(i))?;
        let pair = build_theorem_a_pair(&u[0], &u[1], &u[2], &u[3])?;
        worst = worst.max(op_norm(&pair.a, 1e-12)? - 1.0).max(op_norm(&pair.b, 1e-12)? - 1.0);
    }
    Ok(worst.max(0.0))
}
