//! Trace and norm inequalities for positive contractions and projections.

use rand_chacha::ChaCha20Rng;

use super::{ensure_same_dim, gaussian_matrix, hermitian_eigen, hs_norm, normalized_trace, op_norm, trace_norm, c, CMatrix};
use crate::error::{invalid, Result};

const POSITIVITY_TOL: f64 = 1e-12;

/// The three sides of `||h - k||_2^2 <= ||h^2 - k^2||_1 <= ||h - k||_2 ||h + k||_2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowersStormer {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl PowersStormer {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.middle + slack && self.middle <= self.upper + slack
    }
}

fn check_positive_contraction(x: &CMatrix, name: &str) -> Result<()> {
    let herm = hs_norm(&(x - x.adjoint()));
    if herm > POSITIVITY_TOL * hs_norm(x).max(1.0) {
        return Err(invalid(format!("{name} is not Hermitian (residual {herm:e})")));
    }
    let (values, _) = hermitian_eigen(&((x + x.adjoint()) * c(0.5, 0.0)))?;
    let (lo, hi) = (values.first().copied().unwrap_or(0.0), values.last().copied().unwrap_or(0.0));
    if lo < -POSITIVITY_TOL || hi > 1.0 + POSITIVITY_TOL {
        return Err(invalid(format!("{name} has spectrum in [{lo}, {hi}], not inside [0, 1]")));
    }
    Ok(())
}

pub fn powers_stormer(h: &CMatrix, k: &CMatrix) -> Result<PowersStormer> {
    ensure_same_dim(h, k)?;
    check_positive_contraction(h, "h")?;
    check_positive_contraction(k, "k")?;
    let diff = hs_norm(&(h - k));
    Ok(PowersStormer {
        lower: diff * diff,
        middle: trace_norm(&(h * h - k * k))?,
        upper: diff * hs_norm(&(h + k)),
    })
}

/// `(|tau(p) - tau(q)|, ||p - q||_2^2)` for projections `p`, `q`.
pub fn projection_trace_gap(p: &CMatrix, q: &CMatrix) -> Result<(f64, f64)> {
    ensure_same_dim(p, q)?;
    for (name, x) in [("p", p), ("q", q)] {
        let r = hs_norm(&(x * x - x)) + hs_norm(&(x - x.adjoint()));
        if r > POSITIVITY_TOL * x.nrows().max(1) as f64 {
            return Err(invalid(format!("{name} is not a projection (residual {r:e})")));
        }
    }
    let gap = (normalized_trace(p) - normalized_trace(q)).norm();
    Ok((gap, hs_norm(&(p - q)).powi(2)))
}

/// `g g*` for a Gaussian `g`, scaled to operator norm 1.
pub fn random_positive_contraction(d: usize, rng: &mut ChaCha20Rng) -> Result<CMatrix> {
    let g = gaussian_matrix(d, rng);
    let h = &g * g.adjoint();
    let n = op_norm(&h, 1e-13)?;
    let h = h * c(1.0 / n, 0.0);
    Ok((&h + h.adjoint()) * c(0.5, 0.0))
}
