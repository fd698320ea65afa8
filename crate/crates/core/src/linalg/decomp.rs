use std::f64::consts::PI;

use nalgebra::{DVector, Schur, SymmetricEigen, SVD};

use super::{c, ensure_finite, ensure_square, hs_norm, identity, CMatrix, C64};
use crate::error::{Error, Result};

const EIG_EPS: f64 = f64::EPSILON;

/// Eigenvalues and eigenvectors of the Hermitian part of `h`, sorted ascending.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = ensure_square(h)?;
    ensure_finite(h)?;
    if d == 0 {
        return Ok((vec![], CMatrix::zeros(0, 0)));
    }
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, 1000 * d.max(10))
        .ok_or(Error::NoConvergence { routine: "hermitian eigensolver", iterations: 1000 * d.max(10) })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// `f(h)` for Hermitian `h` through its spectral decomposition.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let fd = DVector::from_iterator(values.len(), values.iter().map(|&l| f(l)));
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * fd[j]);
    Ok(scaled * vectors.adjoint())
}

/// `exp(i * scale * h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &CMatrix, scale: f64) -> Result<CMatrix> {
    hermitian_function(h, |l| C64::from_polar(1.0, scale * l))
}

fn svd(x: &CMatrix) -> Result<SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    let d = x.nrows().max(x.ncols());
    SVD::try_new(x.clone(), true, true, EIG_EPS, 2000 * d.max(10))
        .ok_or(Error::NoConvergence { routine: "svd", iterations: 2000 * d.max(10) })
}

pub fn singular_values(x: &CMatrix) -> Result<Vec<f64>> {
    ensure_finite(x)?;
    let mut s: Vec<f64> = svd(x)?.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Unitary factor `u` of `x = u |x|`, as `W V*` from `x = W S V*`.
///
/// On the kernel of `x` the completion pairs the remaining left and right
/// singular vectors in the order the decomposition returns them.
pub fn polar_unitary(x: &CMatrix) -> Result<CMatrix> {
    let d = ensure_square(x)?;
    ensure_finite(x)?;
    if d == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let s = svd(x)?;
    let w = s.u.expect("left singular vectors requested");
    let vt = s.v_t.expect("right singular vectors requested");
    Ok(w * vt)
}

/// `||u* u - 1||_2`.
pub fn unitary_residual(u: &CMatrix) -> f64 {
    hs_norm(&(u.adjoint() * u - identity(u.nrows())))
}

/// Hermitian `h` with `exp(2 pi i h) = u` and spectrum in `(-1/2, 1/2]`.
///
/// Eigenphases come from a complex Schur form; an eigenvalue within `1e-12`
/// of `-1` is sent to `+1/2`.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    let d = ensure_square(u)?;
    ensure_finite(u)?;
    if d == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let residual = unitary_residual(u);
    if residual > 1e-10 {
        return Err(Error::NotUnitary { residual });
    }
    let iterations = 1000 * d.max(10);
    // Real unitaries with eigenvalues +-1 can stall the shifted QR sweeps; a
    // global phase breaks the symmetry without changing the eigenvectors.
    let (schur, alpha) = [0.0, 0.731_813_5, 1.917_604_3]
        .into_iter()
        .find_map(|alpha| Schur::try_new(u * C64::from_polar(1.0, alpha), EIG_EPS, iterations).map(|s| (s, alpha)))
        .ok_or(Error::NoConvergence { routine: "complex Schur", iterations })?;
    let (q, t) = schur.unpack();
    let undo = C64::from_polar(1.0, -alpha);
    let phases: Vec<f64> = (0..d).map(|i| eigenphase(t[(i, i)] * undo)).collect();
    let scaled = CMatrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j]);
    let h = scaled * q.adjoint();
    Ok((&h + h.adjoint()) * c(0.5, 0.0))
}

fn eigenphase(lambda: C64) -> f64 {
    if (lambda + c(1.0, 0.0)).norm() <= 1e-12 {
        return 0.5;
    }
    let theta = lambda.im.atan2(lambda.re) / (2.0 * PI);
    if theta <= -0.5 {
        0.5
    } else {
        theta
    }
}

/// Split ascending `values` into runs whose consecutive gaps are at most `tol`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut begin = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > begin {
                out.push(begin..i);
            }
            begin = i;
        }
    }
    out
}
