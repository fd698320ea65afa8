use std::ops::Range;

use nalgebra::SVD;

use super::{common_dim, hermitian_parts, SubalgebraBasis, RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, cluster_sorted, C64, hermitian_eigen, hs_norm, identity, normalized_trace, CMatrix};

/// Orthonormal basis (as columns) of the numerical nullspace of `m`:
/// right singular directions with `sigma <= rel_tol * max(sigma_max, scale)`.
///
/// Candidates are screened on the Gram matrix `m* m`, then decided on the
/// singular values of `m` restricted to the candidate subspace.
pub fn nullspace(m: &CMatrix, rel_tol: f64, scale: f64) -> Result<CMatrix> {
    let n = m.ncols();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let gram = m.adjoint() * m;
    let (values, vectors) = hermitian_eigen(&gram)?;
    let lmax = values.last().copied().unwrap_or(0.0).max(0.0).max(scale * scale);
    if lmax == 0.0 {
        return Ok(identity(n));
    }
    let screen = (1e-4f64).max(rel_tol).powi(2) * lmax;
    let cand: Vec<usize> = (0..n).filter(|&k| values[k] <= screen).collect();
    if cand.is_empty() {
        return Ok(CMatrix::zeros(n, 0));
    }
    let vc = CMatrix::from_fn(n, cand.len(), |i, j| vectors[(i, cand[j])]);
    let mut restricted = m * &vc;
    if restricted.nrows() < restricted.ncols() {
        // Pad with zero rows so the thin decomposition returns a full basis.
        let r = restricted.nrows();
        restricted = restricted.insert_rows(r, cand.len() - r, c(0.0, 0.0));
    }
    let svd = SVD::try_new(restricted, false, true, f64::EPSILON, 5000)
        .ok_or(Error::NoConvergence { routine: "svd", iterations: 5000 })?;
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = lmax.sqrt();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= rel_tol * smax)
        .collect();
    let local = CMatrix::from_fn(cand.len(), keep.len(), |i, j| vt[(keep[j], i)].conj());
    Ok(vc * local)
}

const MIX: [f64; 3] = [0.754_877_666_246_692_7, 0.569_840_290_998_053_3, 0.618_033_988_749_894_8];

/// `{y : [y, h] = 0 for every h}` for a set of Hermitian matrices.
#[derive(Clone, Debug)]
pub enum CommutantSpace {
    /// Matrices that are block diagonal in the columns of the unitary `w`,
    /// one block per cluster.
    Blocks { w: CMatrix, clusters: Vec<Range<usize>> },
    /// HS-orthonormal basis.
    Basis(Vec<CMatrix>),
}

impl CommutantSpace {
    pub fn dim(&self) -> usize {
        match self {
            CommutantSpace::Blocks { clusters, .. } => clusters.iter().map(|r| r.len() * r.len()).sum(),
            CommutantSpace::Basis(b) => b.len(),
        }
    }

    /// HS-orthogonal projection of `x` onto the space.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        match self {
            CommutantSpace::Blocks { w, clusters } => {
                let xt = w.adjoint() * x * w;
                let mut p = CMatrix::zeros(x.nrows(), x.ncols());
                for r in clusters {
                    for a in r.clone() {
                        for b in r.clone() {
                            p[(a, b)] = xt[(a, b)];
                        }
                    }
                }
                w * p * w.adjoint()
            }
            CommutantSpace::Basis(basis) => {
                let d = x.nrows() as f64;
                let mut out = CMatrix::zeros(x.nrows(), x.ncols());
                for e in basis {
                    let coef = e.iter().zip(x.iter()).map(|(u, v)| u.conj() * v).sum::<C64>() / d;
                    out += e * coef;
                }
                out
            }
        }
    }

    pub fn into_basis(self) -> Vec<CMatrix> {
        match self {
            CommutantSpace::Blocks { w, clusters } => {
                let sqrt_d = c((w.nrows() as f64).sqrt(), 0.0);
                let mut out = Vec::new();
                for r in &clusters {
                    for a in r.clone() {
                        for b in r.clone() {
                            out.push(w.column(a) * w.column(b).adjoint() * sqrt_d);
                        }
                    }
                }
                out
            }
            CommutantSpace::Basis(b) => b,
        }
    }
}

/// Orthonormal basis of `{y : [y, h] = 0 for every h}` for Hermitian `hs`.
pub fn commutant_of_hermitians(d: usize, hs: &[CMatrix]) -> Result<Vec<CMatrix>> {
    Ok(commutant_space(d, hs)?.into_basis())
}

/// The commutant of Hermitian `hs`.
///
/// The unknown is restricted to the block-diagonal matrices in the
/// eigenbasis of a fixed generic real combination of the `hs`, which
/// contains every solution; the commutation equations are then solved
/// exactly on that subspace.
pub fn commutant_space(d: usize, hs: &[CMatrix]) -> Result<CommutantSpace> {
    let centred: Vec<CMatrix> = hs
        .iter()
        .map(|h| h - identity(d) * normalized_trace(h))
        .filter(|h| hs_norm(h) > 0.0)
        .collect();
    let scale_ref = hs.iter().map(hs_norm).fold(0.0f64, f64::max);
    let active: Vec<CMatrix> = centred
        .into_iter()
        .filter(|h| hs_norm(h) > RANK_TOL * scale_ref.max(1e-300))
        .map(|h| {
            let n = hs_norm(&h);
            h * c(1.0 / n, 0.0)
        })
        .collect();
    if active.is_empty() {
        return Ok(CommutantSpace::Blocks { w: identity(d), clusters: vec![0..d] });
    }
    let mut mix = CMatrix::zeros(d, d);
    for (k, h) in active.iter().enumerate() {
        let w = MIX[k % 3] + (k / 3) as f64 * 0.314_159_265_358_979_3;
        let w = (w * (k as f64 + 1.0)).fract() + 0.5;
        mix += h * c(w, 0.0);
    }
    let (values, w) = hermitian_eigen(&mix)?;
    let spread = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let clusters = cluster_sorted(&values, 1e-9 * spread);
    let mut owner = vec![0usize; d];
    for (ci, r) in clusters.iter().enumerate() {
        for i in r.clone() {
            owner[i] = ci;
        }
    }
    let wa = w.adjoint();
    if is_joint_eigenbasis(d, &active, &w, &wa, &clusters) {
        return Ok(CommutantSpace::Blocks { w, clusters });
    }
    // Variable index of each in-cluster entry (a, b).
    let mut var = vec![usize::MAX; d * d];
    let mut nvars = 0;
    for r in &clusters {
        for a in r.clone() {
            for b in r.clone() {
                var[a * d + b] = nvars;
                nvars += 1;
            }
        }
    }
    let mut m = CMatrix::zeros(active.len() * d * d, nvars);
    for (k, h) in active.iter().enumerate() {
        let g = &wa * h * &w;
        let base = k * d * d;
        for a in 0..d {
            for b in 0..d {
                let row = base + a * d + b;
                // (X G)_{ab} = sum_j X_{aj} G_{jb}, j in the cluster of a.
                for j in clusters[owner[a]].clone() {
                    m[(row, var[a * d + j])] += g[(j, b)];
                }
                // (G X)_{ab} = sum_j G_{aj} X_{jb}, j in the cluster of b.
                for j in clusters[owner[b]].clone() {
                    m[(row, var[j * d + b])] -= g[(a, j)];
                }
            }
        }
    }
    // Each active generator has unit HS norm, so its commutator map has
    // Frobenius size of order one.
    let null = nullspace(&m, RANK_TOL, 1.0)?;
    let sqrt_d = c((d as f64).sqrt(), 0.0);
    let mut out = Vec::with_capacity(null.ncols());
    for col in 0..null.ncols() {
        let mut xt = CMatrix::zeros(d, d);
        for r in &clusters {
            for a in r.clone() {
                for b in r.clone() {
                    xt[(a, b)] = null[(var[a * d + b], col)];
                }
            }
        }
        out.push(&w * xt * &wa * sqrt_d);
    }
    Ok(CommutantSpace::Basis(out))
}

/// Whether every generator is scalar on each cluster of the eigenbasis `w`,
/// so that the clusters are the joint eigenspaces.
fn is_joint_eigenbasis(d: usize, hs: &[CMatrix], w: &CMatrix, wa: &CMatrix, clusters: &[Range<usize>]) -> bool {
    // Entries are compared against the unit HS norm, i.e. Frobenius size sqrt(d).
    let tol = RANK_TOL * (d as f64).sqrt();
    for h in hs {
        let g = wa * h * w;
        for r in clusters {
            let mean = r.clone().map(|a| g[(a, a)]).sum::<C64>() / r.len() as f64;
            for a in 0..d {
                for b in r.clone() {
                    let target = if a == b { mean } else { c(0.0, 0.0) };
                    if (g[(a, b)] - target).norm() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Commutant of `S ∪ S*`.
pub fn commutant_basis(s: &[CMatrix]) -> Result<SubalgebraBasis> {
    let d = common_dim(s)?;
    for x in s {
        crate::linalg::ensure_finite(x)?;
    }
    let basis = commutant_of_hermitians(d, &hermitian_parts(s))?;
    Ok(SubalgebraBasis::from_orthonormal(d, basis))
}
