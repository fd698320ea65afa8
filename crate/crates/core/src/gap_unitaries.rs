//! Relative spectral-gap assemblies and the tensor-trick reductions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expander::VerifiedGapPair;
pub use crate::linalg::LegOperator;
use crate::linalg::{
    self, commutator, ensure_square, gaussian_matrix, hermitian_part, hs_norm, identity, kron_all,
    leg_commutator, leg_union, matrix_unit, partial_expectation, unitary_residual, CMatrix, Seed, TensorLegs,
};

/// Unitary residual accepted for assembled and input unitaries.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest ambient dimension for which assemblies are formed densely.
pub const MAX_DENSE: usize = 2048;
/// Absolute slack of the relative-gap inequality audits.
pub const SLACK: f64 = 1e-9;

fn check_unitary(u: &CMatrix) -> Result<()> {
    linalg::ensure_finite(u)?;
    let residual = unitary_residual(u);
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Unitaries `Z_i` with `||x - E(x)||_2 <= eta sum_i ||[Z_i, x]||_2`, where `E`
/// is the trace-preserving expectation onto the legs flagged in `target_mask`.
#[derive(Clone, Debug)]
pub struct RelativeGapSystem {
    pub legs: TensorLegs,
    pub z: Vec<CMatrix>,
    pub target_mask: Vec<bool>,
    pub eta: f64,
}

impl RelativeGapSystem {
    pub fn new(legs: TensorLegs, z: Vec<CMatrix>, target_mask: Vec<bool>, eta: f64) -> Result<Self> {
        if target_mask.len() != legs.len() {
            return Err(Error::DimensionMismatch { expected: legs.len(), found: target_mask.len() });
        }
        for u in &z {
            if ensure_square(u)? != legs.total() {
                return Err(Error::DimensionMismatch { expected: legs.total(), found: u.nrows() });
            }
            check_unitary(u)?;
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        Ok(RelativeGapSystem { legs, z, target_mask, eta })
    }

    pub fn expect(&self, x: &CMatrix) -> Result<CMatrix> {
        partial_expectation(x, &self.legs, &self.target_mask)
    }

    /// `(||x - E(x)||_2, sum_i ||[Z_i, x]||_2)`.
    pub fn sides(&self, x: &CMatrix) -> Result<(f64, f64)> {
        let lhs = hs_norm(&(x - self.expect(x)?));
        let mut rhs = 0.0;
        for z in &self.z {
            rhs += hs_norm(&commutator(z, x)?);
        }
        Ok((lhs, rhs))
    }
}

/// `Z_1 = u ⊗ 1_n`, `Z_2 = v ⊗ 1_n` on `M_k ⊗ M_n` with target `1 ⊗ M_n`
/// and `eta = sqrt 2 kappa`.
pub fn build_f3_pair(n: usize, pair: &VerifiedGapPair) -> Result<RelativeGapSystem> {
    let k = pair.u1().nrows();
    let legs = TensorLegs::new(vec![k, n])?;
    if legs.total() > MAX_DENSE {
        return Err(Error::TooLarge { what: "relative gap system", dim: legs.total(), cap: MAX_DENSE });
    }
    let z = vec![pair.u1().kronecker(&identity(n)), pair.u2().kronecker(&identity(n))];
    RelativeGapSystem::new(legs, z, vec![false, true], std::f64::consts::SQRT_2 * pair.kappa())
}

/// `Z_1 = diag(u ⊗ 1, u ⊗ 1, v ⊗ 1)` and the cyclic block unitary
/// `Z_2 = e_13 ⊗ 1 + e_21 ⊗ 1 + e_32 ⊗ w` on `M_3 ⊗ M_k ⊗ M_n`, with target
/// `1 ⊗ 1 ⊗ M_n` and `eta = 10^7 (1 + kappa^6)`.
pub fn build_f2_blocks(n: usize, w: &CMatrix, pair: &VerifiedGapPair) -> Result<RelativeGapSystem> {
    let k = pair.u1().nrows();
    if ensure_square(w)? != k * n {
        return Err(Error::DimensionMismatch { expected: k * n, found: w.nrows() });
    }
    check_unitary(w)?;
    let legs = TensorLegs::new(vec![3, k, n])?;
    if legs.total() > MAX_DENSE {
        return Err(Error::TooLarge { what: "relative gap system", dim: legs.total(), cap: MAX_DENSE });
    }
    let u1 = pair.u1().kronecker(&identity(n));
    let v1 = pair.u2().kronecker(&identity(n));
    let z1 = block_diag3([&u1, &u1, &v1]);
    let z2 = cyclic_block(w);
    let eta = 1e7 * (1.0 + pair.kappa().powi(6));
    RelativeGapSystem::new(legs, vec![z1, z2], vec![false, false, true], eta)
}

/// `diag(d_1, d_2, d_3)` in `M_3 ⊗ M_N`.
pub fn block_diag3(d: [&CMatrix; 3]) -> CMatrix {
    let mut out = CMatrix::zeros(0, 0);
    for (i, di) in d.iter().enumerate() {
        let term = matrix_unit(3, i, i).kronecker(*di);
        out = if i == 0 { term } else { out + term };
    }
    out
}

/// `[[0, 0, 1], [1, 0, 0], [0, w, 0]]`.
pub fn cyclic_block(w: &CMatrix) -> CMatrix {
    let n = w.nrows();
    matrix_unit(3, 0, 2).kronecker(&identity(n))
        + matrix_unit(3, 1, 0).kronecker(&identity(n))
        + matrix_unit(3, 2, 1).kronecker(w)
}

/// Both sides of `||[d, x]||_2^2 = sum_ij ||d_i x_ij d_j* - x_ij||_2^2` for
/// `d = diag(d_1, d_2, d_3)`, every norm taken in the ambient `M_3 ⊗ M_N`
/// (so a block `y` placed at `(i, j)` has norm `||y||_2 / sqrt 3`).
pub fn fact_identity(d: [&CMatrix; 3], x: &CMatrix) -> Result<(f64, f64)> {
    let n = ensure_square(d[0])?;
    for di in &d {
        if ensure_square(di)? != n {
            return Err(Error::DimensionMismatch { expected: n, found: di.nrows() });
        }
    }
    if ensure_square(x)? != 3 * n {
        return Err(Error::DimensionMismatch { expected: 3 * n, found: x.nrows() });
    }
    let dd = block_diag3(d);
    let lhs = hs_norm(&commutator(&dd, x)?).powi(2);
    let mut rhs = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let xij = x.view((i * n, j * n), (n, n)).into_owned();
            let r = d[i] * &xij * d[j].adjoint() - &xij;
            rhs += hs_norm(&r).powi(2) / 3.0;
        }
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeGapAudit {
    /// Smallest `eta * rhs - lhs` over samples normalized to `lhs = 1`.
    pub worst_margin: f64,
    pub violations: usize,
    pub samples: usize,
    /// Largest `lhs / rhs`: the smallest `eta` consistent with the samples.
    pub max_ratio: f64,
}

/// Audits the relative-gap inequality on `samples` self-adjoint and
/// `samples` general complex Gaussian matrices.
pub fn relative_gap_audit(sys: &RelativeGapSystem, samples: usize, seed: Seed) -> Result<RelativeGapAudit> {
    let d = sys.legs.total();
    let xs: Vec<CMatrix> = (0..2 * samples)
        .into_par_iter()
        .map(|k| {
            let g = gaussian_matrix(d, &mut seed.derive(k as u64).rng());
            if k < samples {
                hermitian_part(&g)
            } else {
                g
            }
        })
        .collect();
    audit_on(sys, &xs)
}

/// Audits the relative-gap inequality on the given matrices.
pub fn audit_on(sys: &RelativeGapSystem, xs: &[CMatrix]) -> Result<RelativeGapAudit> {
    let sides: Vec<Result<(f64, f64)>> = xs.par_iter().map(|x| sys.sides(x)).collect();
    let mut report = RelativeGapAudit { worst_margin: f64::INFINITY, violations: 0, samples: xs.len(), max_ratio: 0.0 };
    for s in sides {
        let (lhs, rhs) = s?;
        let scale = if lhs > 0.0 { lhs } else { 1.0 };
        let margin = (sys.eta * rhs - lhs) / scale;
        report.worst_margin = report.worst_margin.min(margin);
        if margin < -SLACK {
            report.violations += 1;
        }
        if rhs > 0.0 {
            report.max_ratio = report.max_ratio.max(lhs / rhs);
        } else if lhs > SLACK {
            report.max_ratio = f64::INFINITY;
        }
    }
    Ok(report)
}

/// HS distance of `x` from the operators supported on the flagged legs.
pub fn support_residual(x: &CMatrix, legs: &TensorLegs, mask: &[bool]) -> Result<f64> {
    Ok(hs_norm(&(x - partial_expectation(x, legs, mask)?)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMode {
    F3,
    F2,
}

/// The unitaries `Z_alpha`, `T_beta` of a reduction, stored leg-locally.
#[derive(Clone, Debug)]
pub struct ReductionAssembly {
    pub mode: ReductionMode,
    pub legs: TensorLegs,
    pub z: Vec<LegOperator>,
    pub t: Vec<LegOperator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorEntry {
    /// 1-based indices of `Z_alpha` and `T_beta`.
    pub alpha: usize,
    pub beta: usize,
    pub hs_norm: f64,
    /// Whether the two operators act on disjoint legs, so commute exactly.
    pub disjoint: bool,
}

impl ReductionAssembly {
    /// `||[Z_alpha, T_beta]||_2` for every pair, evaluated on the union of the
    /// two supports (the identity on the remaining legs does not change the
    /// normalized norm).
    pub fn commutator_norms(&self) -> Result<Vec<CommutatorEntry>> {
        let mut out = Vec::new();
        for (a, z) in self.z.iter().enumerate() {
            for (b, t) in self.t.iter().enumerate() {
                let disjoint = z.positions.iter().all(|p| !t.positions.contains(p));
                let hs = local_commutator_norm(&self.legs, z, t)?;
                out.push(CommutatorEntry { alpha: a + 1, beta: b + 1, hs_norm: hs, disjoint });
            }
        }
        Ok(out)
    }

    /// Ambient matrix of a leg operator.
    pub fn dense(&self, op: &LegOperator) -> Result<CMatrix> {
        let d = self.legs.total();
        if d > MAX_DENSE {
            return Err(Error::TooLarge { what: "reduction assembly", dim: d, cap: MAX_DENSE });
        }
        op.dense(&self.legs)
    }
}

fn local_commutator_norm(legs: &TensorLegs, z: &LegOperator, t: &LegOperator) -> Result<f64> {
    let support: usize = leg_union(&[z, t]).iter().map(|&p| legs.dims()[p]).product();
    if support > MAX_DENSE {
        return Err(Error::TooLarge { what: "commutator support", dim: support, cap: MAX_DENSE });
    }
    Ok(hs_norm(&leg_commutator(legs, z, t)?.local))
}

fn common_unitaries(us: &[CMatrix], vs: &[CMatrix]) -> Result<usize> {
    let first = us.first().or(vs.first()).ok_or_else(|| Error::InvalidArgument("no unitaries given".into()))?;
    let n = ensure_square(first)?;
    if us.is_empty() || vs.is_empty() {
        return Err(Error::InvalidArgument("need at least one U and one V".into()));
    }
    for u in us.iter().chain(vs) {
        if ensure_square(u)? != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
        }
        check_unitary(u)?;
    }
    Ok(n)
}

/// `(1/km) sum_ij ||[U_i, V_j]||_2^2`.
pub fn averaged_commutator_sq(us: &[CMatrix], vs: &[CMatrix]) -> Result<f64> {
    common_unitaries(us, vs)?;
    let mut s = 0.0;
    for u in us {
        for v in vs {
            s += hs_norm(&commutator(u, v)?).powi(2);
        }
    }
    Ok(s / (us.len() * vs.len()) as f64)
}

/// `sum_i e_ii ⊗ U_i`.
fn diagonal_sum(us: &[CMatrix]) -> CMatrix {
    let k = us.len();
    us.iter().enumerate().fold(CMatrix::zeros(0, 0), |acc, (i, u)| {
        let term = matrix_unit(k, i, i).kronecker(u);
        if i == 0 {
            term
        } else {
            acc + term
        }
    })
}

/// `sum_j V_j ⊗ e_jj`.
fn diagonal_sum_right(vs: &[CMatrix]) -> CMatrix {
    let m = vs.len();
    vs.iter().enumerate().fold(CMatrix::zeros(0, 0), |acc, (j, v)| {
        let term = v.kronecker(&matrix_unit(m, j, j));
        if j == 0 {
            term
        } else {
            acc + term
        }
    })
}

fn check_pair_dim(pair: &VerifiedGapPair, dim: usize, side: &str) -> Result<()> {
    if pair.u1().nrows() != dim {
        return Err(Error::InvalidArgument(format!(
            "{side} gap pair has dimension {}, expected {dim}",
            pair.u1().nrows()
        )));
    }
    Ok(())
}

/// On `M_k ⊗ M_n ⊗ M_m`: `Z_1 = X_1 ⊗ 1 ⊗ 1`, `Z_2 = X_2 ⊗ 1 ⊗ 1`,
/// `Z_3 = sum_i e_ii ⊗ U_i ⊗ 1`, `T_1 = 1 ⊗ 1 ⊗ Y_1`, `T_2 = 1 ⊗ 1 ⊗ Y_2`,
/// `T_3 = sum_j 1 ⊗ V_j ⊗ e_jj`, with `(X_1, X_2)` and `(Y_1, Y_2)` gap pairs
/// of dimensions `k` and `m`.
pub fn reduction_assembly_f3(
    us: &[CMatrix],
    vs: &[CMatrix],
    x: &VerifiedGapPair,
    y: &VerifiedGapPair,
) -> Result<ReductionAssembly> {
    let n = common_unitaries(us, vs)?;
    let (k, m) = (us.len(), vs.len());
    check_pair_dim(x, k, "left")?;
    check_pair_dim(y, m, "right")?;
    let legs = TensorLegs::new(vec![k, n, m])?;
    let op = |positions: Vec<usize>, local: CMatrix| LegOperator { positions, local };
    let z = vec![op(vec![0], x.u1().clone()), op(vec![0], x.u2().clone()), op(vec![0, 1], diagonal_sum(us))];
    let t = vec![op(vec![2], y.u1().clone()), op(vec![2], y.u2().clone()), op(vec![1, 2], diagonal_sum_right(vs))];
    Ok(ReductionAssembly { mode: ReductionMode::F3, legs, z, t })
}

/// On `M_3 ⊗ M_k ⊗ M_n ⊗ M_m ⊗ M_3`: `Z_1 = diag(X_1, X_1, X_2)` on the first
/// two legs, `Z_2` the cyclic block unitary with `W = sum_i e_ii ⊗ U_i` on the
/// first three, and mirror images `T_1 = Y_1 ⊗ (e_11 + e_22) + Y_2 ⊗ e_33`,
/// `T_2 = 1 ⊗ e_13 + 1 ⊗ e_21 + W' ⊗ e_32` with `W' = sum_j V_j ⊗ e_jj` on
/// the last legs.
pub fn reduction_assembly_f2(
    us: &[CMatrix],
    vs: &[CMatrix],
    x: &VerifiedGapPair,
    y: &VerifiedGapPair,
) -> Result<ReductionAssembly> {
    let n = common_unitaries(us, vs)?;
    let (k, m) = (us.len(), vs.len());
    check_pair_dim(x, k, "left")?;
    check_pair_dim(y, m, "right")?;
    let legs = TensorLegs::new(vec![3, k, n, m, 3])?;
    let op = |positions: Vec<usize>, local: CMatrix| LegOperator { positions, local };
    let z1 = block_diag3([x.u1(), x.u1(), x.u2()]);
    let z2 = cyclic_block(&diagonal_sum(us));
    let t1 = y.u1().kronecker(&(matrix_unit(3, 0, 0) + matrix_unit(3, 1, 1))) + y.u2().kronecker(&matrix_unit(3, 2, 2));
    let wp = diagonal_sum_right(vs);
    let nm = wp.nrows();
    let t2 = kron_all(&[identity(nm), matrix_unit(3, 0, 2)])
        + kron_all(&[identity(nm), matrix_unit(3, 1, 0)])
        + wp.kronecker(&matrix_unit(3, 2, 1));
    let z = vec![op(vec![0, 1], z1), op(vec![0, 1, 2], z2)];
    let t = vec![op(vec![3, 4], t1), op(vec![2, 3, 4], t2)];
    Ok(ReductionAssembly { mode: ReductionMode::F2, legs, z, t })
}

/// Squared HS norm of `[Z, T]` for the distinguished pair, against the
/// averaged commutator identity: `(1/km)` for F3 and `(1/9km)` for F2.
pub fn reduction_identity(asm: &ReductionAssembly, us: &[CMatrix], vs: &[CMatrix]) -> Result<(f64, f64)> {
    let avg = averaged_commutator_sq(us, vs)?;
    let (idx, factor) = match asm.mode {
        ReductionMode::F3 => (2, 1.0),
        ReductionMode::F2 => (1, 1.0 / 9.0),
    };
    let lhs = local_commutator_norm(&asm.legs, &asm.z[idx], &asm.t[idx])?.powi(2);
    Ok((lhs, factor * avg))
}
