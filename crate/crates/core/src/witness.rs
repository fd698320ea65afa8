//! Singlet-deformed qubit witnesses: the unitaries `X_{n,i} ⊗ 1`, the
//! automorphism `theta_{t,n}`, length sectors, and the dimension bounds.
//!
//! `M_n ⊗ M_n` is stored in Kronecker order (left factor first) on `2n`
//! qubit legs. Leg `k` of the left factor is paired with leg `n + k` of the
//! right factor, and `theta` conjugates every such pair by `U_t`.

use num_bigint::BigUint;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    apply_on_legs, c, ensure_square, hs_inner, hs_norm, identity, leg_commutator, normalized_trace,
    pauli_matrices, singular_values, unitary_residual, CMatrix, LegOperator, Side, TensorLegs, C64, ONE, ZERO,
};
use crate::subalgebra::{cond_expect, SubalgebraBasis};

/// Largest `n` for operations on full `4^n`-dimensional matrices.
pub const MAX_DENSE_N: usize = 5;
/// Largest `n` for leg-local operations.
pub const MAX_LOCAL_N: usize = 10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessParams {
    pub n: usize,
    pub t: f64,
}

impl WitnessParams {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !t.is_finite() {
            return Err(invalid("t must be finite"));
        }
        Ok(WitnessParams { n, t })
    }

    pub fn legs(&self) -> TensorLegs {
        TensorLegs::qubits(2 * self.n)
    }
}

fn check_local_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if n > MAX_LOCAL_N {
        return Err(Error::TooLarge { what: "leg-local witness operation", dim: n, cap: MAX_LOCAL_N });
    }
    Ok(())
}

fn check_dense_n(n: usize) -> Result<()> {
    check_local_n(n)?;
    if n > MAX_DENSE_N {
        return Err(Error::TooLarge { what: "dense witness operation", dim: n, cap: MAX_DENSE_N });
    }
    Ok(())
}

fn check_dim(x: &CMatrix, expected: usize) -> Result<()> {
    let d = ensure_square(x)?;
    if d != expected {
        return Err(Error::DimensionMismatch { expected, found: d });
    }
    Ok(())
}

fn sigma_z() -> CMatrix {
    pauli_matrices()[3].clone()
}

/// `sigma_z` on qubit `i` (1-based) of `A_n ⊂ M_n`.
pub fn x_ni(n: usize, i: usize) -> Result<CMatrix> {
    check_local_n(n)?;
    if i == 0 || i > n {
        return Err(invalid(format!("index {i} out of range 1..={n}")));
    }
    let shift = n - i;
    let entries: Vec<C64> = (0..1usize << n).map(|r| if (r >> shift) & 1 == 0 { ONE } else { -ONE }).collect();
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries)))
}

/// Projection onto the span of `e_1 ⊗ e_2 - e_2 ⊗ e_1`.
pub fn singlet_projection() -> CMatrix {
    let mut p = CMatrix::zeros(4, 4);
    p[(1, 1)] = c(0.5, 0.0);
    p[(2, 2)] = c(0.5, 0.0);
    p[(1, 2)] = c(-0.5, 0.0);
    p[(2, 1)] = c(-0.5, 0.0);
    p
}

/// `U_t = P + e^{it}(1 - P)`.
pub fn u_t(t: f64) -> CMatrix {
    let p = singlet_projection();
    &p + (identity(4) - &p) * C64::from_polar(1.0, t)
}

pub fn rho(t: f64) -> f64 {
    (1.0 + t.cos()) / 2.0
}

fn conjugate_pairs(x: &CMatrix, legs: &TensorLegs, pairs: &[(usize, usize)], u: &CMatrix) -> Result<CMatrix> {
    let ua = u.adjoint();
    let mut y = x.clone();
    for &(a, b) in pairs {
        y = apply_on_legs(&y, legs, &[a, b], u, Side::Left)?;
        y = apply_on_legs(&y, legs, &[a, b], &ua, Side::Right)?;
    }
    Ok(y)
}

/// `theta_{t,n}(x)` for `x` in `M_n ⊗ M_n` (dimension `4^n`).
pub fn theta_apply(n: usize, t: f64, x: &CMatrix) -> Result<CMatrix> {
    check_dense_n(n)?;
    check_dim(x, 1 << (2 * n))?;
    let pairs: Vec<(usize, usize)> = (0..n).map(|k| (k, n + k)).collect();
    conjugate_pairs(x, &TensorLegs::qubits(2 * n), &pairs, &u_t(t))
}

/// `theta_{t,n}` of an operator given on some of the `2n` legs; the result
/// lives on the union of the touched pairs.
pub fn theta_local(n: usize, t: f64, op: &LegOperator) -> Result<LegOperator> {
    check_local_n(n)?;
    let legs = TensorLegs::qubits(2 * n);
    if op.positions.iter().any(|&p| p >= 2 * n) {
        return Err(invalid("leg position out of range"));
    }
    let mut support: Vec<usize> = op.positions.iter().flat_map(|&p| [p % n, p % n + n]).collect();
    support.sort_unstable();
    support.dedup();
    let sub = TensorLegs::qubits(support.len());
    let x = op.widen(&legs, &support)?;
    let pairs: Vec<(usize, usize)> = support
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p < n)
        .map(|(a, &p)| (a, support.iter().position(|&q| q == p + n).unwrap()))
        .collect();
    Ok(LegOperator::new(support.clone(), conjugate_pairs(&x, &sub, &pairs, &u_t(t))?))
}

/// Residuals of the deformation identities for 2×2 inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformResiduals {
    /// `P(x ⊗ 1)P = tau(x) P`, max-entry residual.
    pub sandwich: f64,
    /// `tau((x ⊗ 1) U_t (y ⊗ 1) U_t*) = rho tau(xy) + (1 - rho) tau(x) tau(y)`.
    pub trace: f64,
    /// `E(x ⊗ 1) = rho U_t (x ⊗ 1) U_t*` onto `U_t (M_2 ⊗ 1) U_t*`, when
    /// `tau(x) = 0` (otherwise the traceless part of `x` is used).
    pub expectation: f64,
}

/// Conditional expectation onto `U_t (M_2 ⊗ 1) U_t*`, expanded in the
/// orthonormal basis `U_t (sigma_a ⊗ 1) U_t*`.
pub fn expect_onto_deformed_leg(t: f64, z: &CMatrix) -> Result<CMatrix> {
    check_dim(z, 4)?;
    let u = u_t(t);
    let ua = u.adjoint();
    let mut out = CMatrix::zeros(4, 4);
    for s in pauli_matrices() {
        let b = &u * s.kronecker(&identity(2)) * &ua;
        out += &b * hs_inner(z, &b)?;
    }
    Ok(out)
}

pub fn deform_identity_checks(t: f64, x: &CMatrix, y: &CMatrix) -> Result<DeformResiduals> {
    check_dim(x, 2)?;
    check_dim(y, 2)?;
    let p = singlet_projection();
    let u = u_t(t);
    let ua = u.adjoint();
    let x1 = x.kronecker(&identity(2));
    let y1 = y.kronecker(&identity(2));
    let (tx, ty) = (normalized_trace(x), normalized_trace(y));
    let sandwich = crate::linalg::max_abs(&(&p * &x1 * &p - &p * tx));
    let r = rho(t);
    let lhs = normalized_trace(&(&x1 * &u * &y1 * &ua));
    let rhs = normalized_trace(&(x * y)) * r + tx * ty * (1.0 - r);
    let x0 = x - identity(2) * tx;
    let z = x0.kronecker(&identity(2));
    let e = expect_onto_deformed_leg(t, &z)?;
    let expectation = crate::linalg::max_abs(&(e - &u * &z * &ua * c(r, 0.0)));
    Ok(DeformResiduals { sandwich, trace: (lhs - rhs).norm(), expectation })
}

/// Per-leg change of coordinates on `M_n`: the diagonal pair `(v00, v11)` of
/// every leg becomes `(a, b)` with `v = a 1 + b sigma_z`. Afterwards the
/// entry `(r, s)` carries a basis tensor whose non-identity legs are the set
/// bits of `r | s`.
fn leg_coordinates(x: &mut CMatrix, n: usize, forward: bool) {
    let d = 1usize << n;
    let half = if forward { 0.5 } else { 1.0 };
    for k in 0..n {
        let bit = 1usize << k;
        for r in 0..d {
            if r & bit != 0 {
                continue;
            }
            for s in 0..d {
                if s & bit != 0 {
                    continue;
                }
                let v0 = x[(r, s)];
                let v1 = x[(r | bit, s | bit)];
                x[(r, s)] = (v0 + v1) * half;
                x[(r | bit, s | bit)] = (v0 - v1) * half;
            }
        }
    }
}

/// Orthogonal decomposition `x = sum_i f_i(x)` by tensor length.
pub fn length_sectors(n: usize, x: &CMatrix) -> Result<Vec<CMatrix>> {
    check_local_n(n)?;
    check_dim(x, 1 << n)?;
    let d = 1usize << n;
    let mut coords = x.clone();
    leg_coordinates(&mut coords, n, true);
    let mut sectors = vec![CMatrix::zeros(d, d); n + 1];
    for r in 0..d {
        for s in 0..d {
            let w = (r | s).count_ones() as usize;
            sectors[w][(r, s)] = coords[(r, s)];
        }
    }
    for f in &mut sectors {
        leg_coordinates(f, n, false);
    }
    Ok(sectors)
}

/// `(e_l(x), [f_0(x), ..., f_n(x)])`.
pub fn length_projections(n: usize, x: &CMatrix, l: usize) -> Result<(CMatrix, Vec<CMatrix>)> {
    if l > n {
        return Err(invalid(format!("length {l} out of range 0..={n}")));
    }
    let f = length_sectors(n, x)?;
    let d = 1usize << n;
    let e = f[..=l].iter().fold(CMatrix::zeros(d, d), |acc, fi| acc + fi);
    Ok((e, f))
}

/// `E_{theta(M_n ⊗ 1)}(x ⊗ 1)` with its norm and the sector weights.
#[derive(Clone, Debug)]
pub struct ThetaExpectation {
    pub value: CMatrix,
    /// `||value||_2^2`, measured on the matrix.
    pub norm_sq: f64,
    /// `sum_i rho^{2i} ||f_i(x)||_2^2`.
    pub formula_sq: f64,
    /// `||f_i(x)||_2^2` for `i = 0..=n`.
    pub sector_sq: Vec<f64>,
}

fn sector_sq(n: usize, x: &CMatrix) -> Result<Vec<f64>> {
    Ok(length_sectors(n, x)?.iter().map(|f| hs_norm(f).powi(2)).collect())
}

fn weighted(sector_sq: &[f64], r: f64) -> f64 {
    sector_sq.iter().enumerate().map(|(i, s)| r.powi(2 * i as i32) * s).sum()
}

/// `sum_i rho^i theta(f_i(x) ⊗ 1)`.
pub fn cond_expect_theta(n: usize, t: f64, x: &CMatrix) -> Result<ThetaExpectation> {
    check_dense_n(n)?;
    let f = length_sectors(n, x)?;
    let r = rho(t);
    let one = identity(1 << n);
    let mut sum = CMatrix::zeros(1 << n, 1 << n);
    for (i, fi) in f.iter().enumerate() {
        sum += fi * c(r.powi(i as i32), 0.0);
    }
    let value = theta_apply(n, t, &sum.kronecker(&one))?;
    let sector_sq: Vec<f64> = f.iter().map(|fi| hs_norm(fi).powi(2)).collect();
    Ok(ThetaExpectation { norm_sq: hs_norm(&value).powi(2), formula_sq: weighted(&sector_sq, r), value, sector_sq })
}

/// `||E_{theta(M_n ⊗ 1)}(x ⊗ 1)||_2^2` from the sector weights alone.
pub fn theta_expect_norm_sq(n: usize, t: f64, x: &CMatrix) -> Result<f64> {
    Ok(weighted(&sector_sq(n, x)?, rho(t)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformBound {
    pub l: usize,
    pub lhs: f64,
    /// `(1 - rho^{2l}) ||e_l(x)||_2^2 + rho^{2l} ||x||_2^2`.
    pub rhs: f64,
}

/// The length-`l` bound on `||E_{theta(M_n ⊗ 1)}(x ⊗ 1)||_2^2` for
/// `l = 1..=n`. The left side is measured on the dense expectation when
/// `n <= MAX_DENSE_N` and taken from the sector weights otherwise.
pub fn deform_bounds(n: usize, t: f64, x: &CMatrix) -> Result<Vec<DeformBound>> {
    let sq = sector_sq(n, x)?;
    let lhs = if n <= MAX_DENSE_N { cond_expect_theta(n, t, x)?.norm_sq } else { weighted(&sq, rho(t)) };
    let total: f64 = sq.iter().sum();
    let r2 = rho(t).powi(2);
    Ok((1..=n)
        .map(|l| {
            let el: f64 = sq[..=l].iter().sum();
            let rl = r2.powi(l as i32);
            DeformBound { l, lhs, rhs: (1.0 - rl) * el + rl * total }
        })
        .collect())
}

/// The witness sets. `U_set` holds `X_{n,i} ⊗ 1`; `V_generators` holds the
/// generators `X_{n,i} ⊗ 1`, `1 ⊗ sigma_x^(i)`, `1 ⊗ sigma_z^(i)` of
/// `A_n ⊗ M_n` followed by their `theta` images. Members are kept on the legs
/// they act on.
#[derive(Clone, Debug)]
pub struct WitnessFamily {
    pub params: WitnessParams,
    pub u_set: Vec<LegOperator>,
    pub v_generators: Vec<LegOperator>,
    pub legs: TensorLegs,
}

impl WitnessFamily {
    /// Number of undeformed generators; the rest are their `theta` images.
    pub fn undeformed_len(&self) -> usize {
        self.v_generators.len() / 2
    }

    pub fn dense(&self, op: &LegOperator) -> Result<CMatrix> {
        check_dense_n(self.params.n)?;
        op.dense(&self.legs)
    }
}

pub fn build_witness_family(n: usize, t: f64) -> Result<WitnessFamily> {
    let params = WitnessParams::new(n, t)?;
    check_local_n(n)?;
    let [_, sx, _, sz] = pauli_matrices();
    let u_set: Vec<LegOperator> = (0..n).map(|i| LegOperator::new(vec![i], sz.clone())).collect();
    let mut gens = u_set.clone();
    for i in 0..n {
        gens.push(LegOperator::new(vec![n + i], sx.clone()));
        gens.push(LegOperator::new(vec![n + i], sz.clone()));
    }
    let deformed = gens.iter().map(|g| theta_local(n, t, g)).collect::<Result<Vec<_>>>()?;
    gens.extend(deformed);
    for g in u_set.iter().chain(&gens) {
        let r = unitary_residual(&g.local);
        if r > UNITARY_TOL {
            return Err(Error::NotUnitary { residual: r });
        }
    }
    Ok(WitnessFamily { params, u_set, v_generators: gens, legs: params.legs() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditRow {
    /// 1-based index into `U_set`.
    pub u_index: usize,
    /// 1-based index into `V_generators`.
    pub v_index: usize,
    pub comm_hs: f64,
    pub comm_op: f64,
    pub bound_4t: f64,
}

#[derive(Clone, Debug)]
pub struct AlmostCommuteAudit {
    pub rows: Vec<AuditRow>,
    pub max_hs: f64,
    pub max_op: f64,
    /// `||(sigma ⊗ 1) - U_t (sigma ⊗ 1) U_t*||` on `C^2 ⊗ C^2`.
    pub core_norm: f64,
    pub violations: usize,
}

impl AlmostCommuteAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `||(sigma ⊗ 1) - U_t (sigma ⊗ 1) U_t*||`, exact on the 4×4 core.
pub fn core_deviation(t: f64) -> Result<f64> {
    let s = sigma_z().kronecker(&identity(2));
    let u = u_t(t);
    Ok(singular_values(&(&s - &u * &s * u.adjoint()))?[0])
}

/// Both commutator norms for every `(U, V)`; a row violates when
/// `||[U,V]||_2 > ||[U,V]|| + SLACK` or `||[U,V]|| > 4|t| + SLACK`. The core
/// bound `2|t|` is counted as well.
pub fn almost_commute_audit(family: &WitnessFamily) -> Result<AlmostCommuteAudit> {
    let bound = 4.0 * family.params.t.abs();
    let mut rows = Vec::new();
    let mut violations = 0;
    for (a, u) in family.u_set.iter().enumerate() {
        for (b, v) in family.v_generators.iter().enumerate() {
            let comm = leg_commutator(&family.legs, u, v)?;
            let comm_hs = hs_norm(&comm.local);
            let comm_op = singular_values(&comm.local)?[0];
            if comm_hs > comm_op + SLACK || comm_op > bound + SLACK {
                violations += 1;
            }
            rows.push(AuditRow { u_index: a + 1, v_index: b + 1, comm_hs, comm_op, bound_4t: bound });
        }
    }
    let core_norm = core_deviation(family.params.t)?;
    if core_norm > 2.0 * family.params.t.abs() + SLACK {
        violations += 1;
    }
    let max_hs = rows.iter().map(|r| r.comm_hs).fold(0.0, f64::max);
    let max_op = rows.iter().map(|r| r.comm_op).fold(0.0, f64::max);
    Ok(AlmostCommuteAudit { rows, max_hs, max_op, core_norm, violations })
}

/// Binary entropy in bits.
pub fn entropy_h(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("entropy argument {delta} outside (0, 1)")));
    }
    Ok(-delta * delta.log2() - (1.0 - delta) * (1.0 - delta).log2())
}

/// `H` extended by continuity to `H(0) = 0`.
fn entropy_or_zero(delta: f64) -> Result<f64> {
    if delta == 0.0 { Ok(0.0) } else { entropy_h(delta) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HammingCheck {
    pub n: usize,
    pub delta: f64,
    /// `floor(delta n)`.
    pub radius: usize,
    /// `sum_{i <= radius} C(n, i)`, exact.
    pub sum: BigUint,
    pub log2_sum: f64,
    /// `H(delta) n`.
    pub log2_bound: f64,
    pub holds: bool,
}

/// `log2` of a big integer from its leading 64 bits.
pub fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top: u64 = (x >> shift).iter_u64_digits().next().unwrap_or(0);
    (top as f64).log2() + shift as f64
}

/// Radius `floor(delta n)`, guarded against `delta n` landing just below an integer.
fn hamming_radius(n: usize, delta: f64) -> usize {
    (delta * n as f64 + 1e-9).floor() as usize
}

/// Hamming ball `sum_{i <= floor(delta n)} C(n, i)` against `2^{H(delta) n}`.
pub fn hamming_bound_check(n: usize, delta: f64) -> Result<HammingCheck> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("delta {delta} outside (0, 1/2]")));
    }
    let radius = hamming_radius(n, delta).min(n);
    let mut binom = BigUint::from(1u32);
    let mut sum = BigUint::from(1u32);
    for i in 1..=radius {
        binom = binom * BigUint::from(n - i + 1) / BigUint::from(i);
        sum += &binom;
    }
    let log2_bound = entropy_h(delta)? * n as f64;
    let log2_sum = big_log2(&sum);
    let holds = if sum.bits() <= 53 {
        let s = sum.iter_u64_digits().next().unwrap_or(0) as f64;
        s <= log2_bound.exp2()
    } else {
        log2_sum <= log2_bound
    };
    Ok(HammingCheck { n, delta, radius, sum, log2_sum, log2_bound, holds })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectIdentity {
    /// `||p - E_C(p)||_2^2` from the conditional expectation.
    pub lhs: f64,
    /// `sum_j tau(p q_j) tau((1 - p) q_j) / tau(q_j)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of the distance formula for a diagonal projection `p` and the
/// diagonal algebra `C` spanned by the cell indicators `q_j`.
pub fn diag_expect_identity(p: &CMatrix, partition: &[Vec<usize>]) -> Result<ExpectIdentity> {
    let d = ensure_square(p)?;
    for i in 0..d {
        for j in 0..d {
            let v = p[(i, j)];
            let ok = if i == j { v == ZERO || v == ONE } else { v == ZERO };
            if !ok {
                return Err(invalid("p must be a diagonal 0/1 projection"));
            }
        }
    }
    if partition.iter().any(|cell| cell.is_empty()) {
        return Err(invalid("empty partition cell"));
    }
    let algebra = SubalgebraBasis::from_partition(d, partition)?;
    let lhs = hs_norm(&(p - cond_expect(p, &algebra)?)).powi(2);
    let mut rhs = 0.0;
    for cell in partition {
        let ones = cell.iter().filter(|&&i| p[(i, i)] == ONE).count() as f64;
        let size = cell.len() as f64;
        let df = d as f64;
        rhs += (ones / df) * ((size - ones) / df) / (size / df);
    }
    Ok(ExpectIdentity { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimBoundReport {
    pub n: usize,
    pub t: f64,
    pub eps: f64,
    /// Least `l >= 1` with `rho^{2l} <= 1 - 8 eps`.
    pub l: usize,
    /// `64 eps / t^2 + 1`, the exponent in the stated upper bound.
    pub l_cap: f64,
    /// `log2(2 (6n)^{l_cap})`.
    pub upper: f64,
    /// `n - H(4 eps) n - 3`.
    pub lower: f64,
}

impl DimBoundReport {
    pub fn crossed(&self) -> bool {
        self.lower > self.upper
    }
}

fn check_bound_domain(t: f64, eps: f64) -> Result<()> {
    if !(t > 0.0 && t <= std::f64::consts::FRAC_PI_4) {
        return Err(invalid(format!("t = {t} outside (0, pi/4]")));
    }
    if !(0.0..1.0 / 16.0).contains(&eps) {
        return Err(invalid(format!("eps = {eps} outside [0, 1/16)")));
    }
    Ok(())
}

fn length_cutoff(t: f64, eps: f64) -> usize {
    let target = 1.0 - 8.0 * eps;
    let r2 = rho(t).powi(2);
    let guess = (target.ln() / r2.ln()).ceil().max(1.0) as usize;
    let mut l = guess.saturating_sub(1).max(1);
    while r2.powi(l as i32) > target {
        l += 1;
    }
    l
}

pub fn dim_bounds(n: usize, t: f64, eps: f64) -> Result<DimBoundReport> {
    check_bound_domain(t, eps)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let l_cap = 64.0 * eps / (t * t) + 1.0;
    let nf = n as f64;
    let upper = 1.0 + l_cap * (6.0 * nf).log2();
    let lower = nf - entropy_or_zero(4.0 * eps)? * nf - 3.0;
    Ok(DimBoundReport { n, t, eps, l: length_cutoff(t, eps), l_cap, upper, lower })
}

/// Least `n <= n_max` where the lower bound exceeds the upper bound.
pub fn crossing_search(t: f64, eps: f64, n_max: usize) -> Result<Option<DimBoundReport>> {
    if eps <= 0.0 {
        return Err(invalid("crossing search needs eps > 0"));
    }
    for n in 1..=n_max {
        let r = dim_bounds(n, t, eps)?;
        if r.crossed() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
