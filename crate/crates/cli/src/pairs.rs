//! Input pairs `(A, B)` for the nearest-commuting-pair experiments.

use acnum_core::linalg::{c, gaussian_matrix, haar_unitary, hs_norm, identity, singular_values, CMatrix, Seed};
use acnum_core::nearcomm::build_theorem_a_pair;
use acnum_core::witness::{theta_apply, x_ni};
use acnum_core::{Error, Result};

pub fn conj_by(w: &CMatrix, x: &CMatrix) -> CMatrix {
    w * x * w.adjoint()
}

/// Contraction pair built from `U_i = X_{n,i} ⊗ 1` and `V_i = theta_t(U_i)`, i = 1, 2.
pub fn witness_pair(n: usize, t: f64) -> Result<(CMatrix, CMatrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("the witness pair needs n >= 2".into()));
    }
    let d = 1usize << n;
    let u1 = x_ni(n, 1)?.kronecker(&identity(d));
    let u2 = x_ni(n, 2)?.kronecker(&identity(d));
    let v1 = theta_apply(n, t, &u1)?;
    let v2 = theta_apply(n, t, &u2)?;
    let pair = build_theorem_a_pair(&u1, &u2, &v1, &v2)?;
    Ok((pair.a, pair.b))
}

/// Contraction pair built from four seeded Haar unitaries.
pub fn haar_pair(d: usize, seed: Seed) -> Result<(CMatrix, CMatrix)> {
    let u: Vec<CMatrix> = (0..4).map(|i| haar_unitary(d, seed.derive(i))).collect::<Result<_>>()?;
    let pair = build_theorem_a_pair(&u[0], &u[1], &u[2], &u[3])?;
    Ok((pair.a, pair.b))
}

/// A commuting pair, `B` normal with `blocks` eigenvalue clusters and `A`
/// block diagonal in the same basis, each moved by a random matrix of HS
/// norm `delta`.
pub fn normal_plus_delta_pair(d: usize, blocks: usize, delta: f64, seed: Seed) -> Result<(CMatrix, CMatrix)> {
    const VALS: [(f64, f64); 6] = [(0.8, 0.0), (-0.8, 0.0), (0.0, 0.8), (0.0, -0.8), (0.5, 0.5), (-0.5, -0.5)];
    if blocks == 0 || d % blocks != 0 {
        return Err(Error::InvalidArgument(format!("{blocks} blocks do not divide dimension {d}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument("delta must be nonnegative".into()));
    }
    let w = haar_unitary(d, seed)?;
    let size = d / blocks;
    let mut rng = seed.derive(1).rng();
    let mut ad = CMatrix::zeros(d, d);
    let mut bd = CMatrix::zeros(d, d);
    for k in 0..blocks {
        let g = gaussian_matrix(size, &mut rng);
        let g = &g * c(0.8 / singular_values(&g)?[0], 0.0);
        let (re, im) = VALS[k % VALS.len()];
        for i in 0..size {
            bd[(k * size + i, k * size + i)] = c(re, im);
            for j in 0..size {
                ad[(k * size + i, k * size + j)] = g[(i, j)];
            }
        }
    }
    let ea = gaussian_matrix(d, &mut rng);
    let eb = gaussian_matrix(d, &mut rng);
    Ok((
        conj_by(&w, &ad) + &ea * c(delta / hs_norm(&ea), 0.0),
        conj_by(&w, &bd) + &eb * c(delta / hs_norm(&eb), 0.0),
    ))
}
