use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, op_norm, CMatrix};
use crate::error::{invalid, Result};

/// Root of every random stream; equal seeds give bit-identical samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.0)
    }

    /// Independent child stream, mixed with splitmix64.
    pub fn derive(self, index: u64) -> Seed {
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    /// Sweep-point seed, `root XOR index`.
    pub fn point(self, index: u64) -> Seed {
        Seed(self.0 ^ index)
    }
}

/// Matrix with i.i.d. standard complex Gaussian entries (unit variance per component).
pub fn gaussian_matrix(d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    // Row-major fill keeps the stream layout independent of storage order.
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = c(re, im);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, seed: Seed) -> Result<CMatrix> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut rng = seed.rng();
    Ok(haar_from_rng(d, &mut rng))
}

pub(crate) fn haar_from_rng(d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let qr = gaussian_matrix(d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let g = gaussian_matrix(d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Gaussian matrix rescaled to operator norm `radius`.
pub fn random_unit_ball(d: usize, radius: f64, rng: &mut ChaCha20Rng) -> Result<CMatrix> {
    let g = gaussian_matrix(d, rng);
    let n = op_norm(&g, 1e-12)?;
    Ok(g * c(radius / n, 0.0))
}

/// Orthogonal projection onto the span of `rank` Haar-random columns.
pub fn random_projection(d: usize, rank: usize, rng: &mut ChaCha20Rng) -> Result<CMatrix> {
    if rank > d {
        return Err(invalid(format!("rank {rank} exceeds dimension {d}")));
    }
    let u = haar_from_rng(d, rng);
    let cols = u.columns(0, rank);
    Ok(&cols * cols.adjoint())
}
