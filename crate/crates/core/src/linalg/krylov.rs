use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, CVector, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Relative residual at which a Ritz value is accepted.
    pub tol: f64,
    /// Budget of operator applications, summed over restarts.
    pub max_iter: usize,
    /// Krylov basis size before an explicit restart.
    pub max_basis: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { tol: 1e-12, max_iter: 20_000, max_basis: 160 }
    }
}

/// Deterministic Gaussian start vectors; the schedule depends only on `dim`.
pub(crate) fn start_vectors(dim: usize, count: usize) -> Vec<CVector> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0000_u64 + k as u64);
            CVector::from_fn(dim, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                c(re, im)
            })
        })
        .collect()
}

fn dot(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Largest eigenvalue of a positive semidefinite Hermitian operator.
///
/// Power iteration accelerated by Lanczos with full reorthogonalization and
/// explicit restarts from the current Ritz vector. Returns the Ritz value and
/// its unit Ritz vector.
pub fn top_eigenvalue<F>(mut apply: F, start: CVector, opts: &KrylovOptions) -> Result<(f64, CVector)>
where
    F: FnMut(&CVector) -> CVector,
{
    let n = start.len();
    let norm = start.norm();
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidArgument("start vector must be nonzero and finite".into()));
    }
    let mut v = start / c(norm, 0.0);
    let mut used = 0usize;
    let basis_cap = opts.max_basis.max(2).min(n);

    loop {
        let mut basis: Vec<CVector> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut scale = 0.0f64;
        let mut last: Option<(f64, CVector)> = None;

        for j in 0..basis_cap {
            let mut w = apply(&basis[j]);
            used += 1;
            if !w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            scale = scale.max(w.norm());
            for _ in 0..2 {
                for b in &basis {
                    let h = dot(b, &w);
                    w.axpy(-h, b, c(1.0, 0.0));
                }
            }
            let beta = w.norm();
            let k = alphas.len();
            let check = k < 24 || k % 4 == 0 || beta <= 1e-14 * scale.max(f64::MIN_POSITIVE) || k == basis_cap;
            if check {
                let (theta, s) = ritz(&alphas, &betas);
                let resid = beta * s[k - 1].abs();
                let ritz_vec = combine(&basis, &s);
                let exhausted = beta <= 1e-14 * scale.max(f64::MIN_POSITIVE) || k == n;
                if exhausted || resid <= opts.tol * theta.abs().max(1e-300) || scale == 0.0 {
                    return Ok((theta, ritz_vec));
                }
                last = Some((theta, ritz_vec));
            }
            if used >= opts.max_iter {
                return Err(Error::NoConvergence { routine: "lanczos", iterations: used });
            }
            if k == basis_cap {
                break;
            }
            betas.push(beta);
            basis.push(w / c(beta, 0.0));
        }
        let (_, rv) = last.expect("restart always follows a Ritz check");
        let nrm = rv.norm();
        v = rv / c(nrm, 0.0);
    }
}

fn ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

fn combine(basis: &[CVector], s: &[f64]) -> CVector {
    let mut out = CVector::zeros(basis[0].len());
    for (b, &w) in basis.iter().zip(s) {
        out.axpy(c(w, 0.0), b, c(1.0, 0.0));
    }
    out
}
