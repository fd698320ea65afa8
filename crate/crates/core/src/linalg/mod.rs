//! Dense complex matrices with normalized-trace geometry.
//!
//! All norms here are taken with respect to the normalized trace
//! `tau(x) = trace(x) / d`, so `hs_norm(identity) == 1` in every dimension.

mod decomp;
mod inequalities;
mod krylov;
mod legs;
mod random;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use decomp::{
    cluster_sorted, hermitian_eigen, hermitian_function, exp_i_hermitian, polar_unitary,
    singular_values, unitary_log, unitary_residual,
};
pub use inequalities::{powers_stormer, projection_trace_gap, random_positive_contraction, PowersStormer};
pub use krylov::{top_eigenvalue, KrylovOptions};
pub(crate) use krylov::start_vectors as krylov_start_vectors;
pub(crate) use random::haar_from_rng;
pub use legs::{
    apply_on_legs, embed_leg, kron, kron_all, leg_commutator, leg_union, partial_expectation, reduce_to_legs, LegOperator, Side,
    TensorLegs,
};
pub use random::{
    gaussian_matrix, haar_unitary, random_hermitian, random_projection, random_unit_ball, Seed,
};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn diag_real(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(entries.len(), entries.iter().map(|&v| c(v, 0.0))))
}

/// Matrix from row-major entries.
pub fn from_rows(d: usize, entries: &[C64]) -> Result<CMatrix> {
    if entries.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
    }
    Ok(CMatrix::from_row_slice(d, d, entries))
}

/// Matrix unit `e_ij` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(d);
    m[(i, j)] = ONE;
    m
}

pub fn ensure_square(x: &CMatrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    Ok(x.nrows())
}

pub fn ensure_finite(x: &CMatrix) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let d = ensure_square(a)?;
    let e = ensure_square(b)?;
    if d != e {
        return Err(Error::DimensionMismatch { expected: d, found: e });
    }
    Ok(d)
}

/// `tau(x) = trace(x) / d`.
pub fn normalized_trace(x: &CMatrix) -> C64 {
    let d = x.nrows().min(x.ncols());
    if d == 0 {
        return ZERO;
    }
    let mut s = ZERO;
    for i in 0..d {
        s += x[(i, i)];
    }
    s / d as f64
}

/// `<x, y> = tau(y* x)`, linear in `x`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<C64> {
    let d = ensure_same_dim(x, y)?;
    Ok(hs_inner_unchecked(x, y, d))
}

pub(crate) fn hs_inner_unchecked(x: &CMatrix, y: &CMatrix, d: usize) -> C64 {
    let mut s = ZERO;
    for (a, b) in x.iter().zip(y.iter()) {
        s += a * b.conj();
    }
    s / d as f64
}

/// `||x||_2 = sqrt(tau(x* x))`.
pub fn hs_norm(x: &CMatrix) -> f64 {
    let d = x.nrows();
    if d == 0 {
        return 0.0;
    }
    (x.iter().map(|z| z.norm_sqr()).sum::<f64>() / d as f64).sqrt()
}

pub fn hs_dist(x: &CMatrix, y: &CMatrix) -> f64 {
    hs_norm(&(x - y))
}

/// `||x||_1 = tau(|x|)`, from the singular values of `x`.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    let d = ensure_square(x)?;
    ensure_finite(x)?;
    if d == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(x)?.iter().sum::<f64>() / d as f64)
}

/// Largest singular value, from a Krylov iteration on `x* x`.
pub fn op_norm(x: &CMatrix, tol: f64) -> Result<f64> {
    let d = ensure_square(x)?;
    ensure_finite(x)?;
    if d == 0 {
        return Ok(0.0);
    }
    let xa = x.adjoint();
    let opts = KrylovOptions { tol, ..KrylovOptions::default() };
    let mut best = 0.0f64;
    for start in krylov::start_vectors(d, 2) {
        let (lambda, _) = top_eigenvalue(|v: &CVector| &xa * (x * v), start, &opts)?;
        best = best.max(lambda);
    }
    Ok(best.max(0.0).sqrt())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// Largest absolute entry.
pub fn max_abs(x: &CMatrix) -> f64 {
    x.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * c(0.5, 0.0)
}

/// `(x - x*) / 2i`, so that `x = re + i * im` with both parts Hermitian.
pub fn skew_part(x: &CMatrix) -> CMatrix {
    (x - x.adjoint()) * c(0.0, -0.5)
}

/// Row-major flattening, `vec(x)[i * d + j] = x[(i, j)]`.
pub fn vec_row_major(x: &CMatrix) -> CVector {
    let n = x.ncols();
    CVector::from_fn(x.nrows() * n, |k, _| x[(k / n, k % n)])
}

pub fn unvec_row_major(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// `[1, σ_x, σ_y, σ_z]`.
pub fn pauli_matrices() -> [CMatrix; 4] {
    [
        identity(2),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        diag_real(&[1.0, -1.0]),
    ]
}
