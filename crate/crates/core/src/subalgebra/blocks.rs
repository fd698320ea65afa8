use rand_distr::{Distribution, StandardNormal};

use super::{commutant_of_hermitians, SubalgebraBasis};
use crate::error::{Error, Result};
use crate::linalg::{c, cluster_sorted, hermitian_eigen, hs_norm, identity, normalized_trace, CMatrix, Seed};

const MAX_ATTEMPTS: usize = 8;
const DEFAULT_SEED: Seed = Seed(0x0b10_c5ee_d000_0001);

/// One simple summand `M_n ⊗ 1_m` of the algebra.
#[derive(Clone, Debug)]
pub struct Block {
    /// Minimal central projection `z`.
    pub projection: CMatrix,
    pub factor_dim: usize,
    pub multiplicity: usize,
    /// Isometry `W` (`d × nm`) with `W* x W = x̂ ⊗ 1_m` for `x` in the algebra;
    /// its columns are `e_{j1} f_r` for matrix units `e_{jk}` and an
    /// orthonormal basis `f_r` of the range of `e_{11}`.
    pub isometry: CMatrix,
}

#[derive(Clone, Debug)]
pub struct BlockStructure {
    pub ambient_dim: usize,
    pub blocks: Vec<Block>,
}

impl BlockStructure {
    /// Per-block matrices `x̂_i`, averaging the `m × m` diagonal copies.
    pub fn compress(&self, x: &CMatrix) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .map(|b| {
                let (n, m) = (b.factor_dim, b.multiplicity);
                let y = b.isometry.adjoint() * x * &b.isometry;
                CMatrix::from_fn(n, n, |j, k| {
                    let mut s = c(0.0, 0.0);
                    for r in 0..m {
                        s += y[(j * m + r, k * m + r)];
                    }
                    s / m as f64
                })
            })
            .collect()
    }

    /// `sum_i W_i (x̂_i ⊗ 1_m) W_i*`.
    pub fn expand(&self, parts: &[CMatrix]) -> CMatrix {
        let d = self.ambient_dim;
        let mut out = CMatrix::zeros(d, d);
        for (b, xh) in self.blocks.iter().zip(parts) {
            let inner = xh.kronecker(&identity(b.multiplicity));
            out += &b.isometry * inner * b.isometry.adjoint();
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.factor_dim * b.factor_dim).sum()
    }
}

pub fn block_structure(p: &SubalgebraBasis) -> Result<BlockStructure> {
    block_structure_seeded(p, DEFAULT_SEED)
}

/// Minimal central projections and matrix units.
///
/// The center `P ∩ P'` is the commutant of `P ∪ P'`; its minimal projections
/// are the spectral projections of a random Hermitian central element,
/// shifted so the complement of the unit stays separate.
pub fn block_structure_seeded(p: &SubalgebraBasis, seed: Seed) -> Result<BlockStructure> {
    let d = p.ambient_dim;
    let herm_p = p.hermitian_generators();
    let comm = commutant_of_hermitians(d, &herm_p)?;
    let mut all = herm_p.clone();
    all.extend(super::hermitian_parts(&comm));
    let center = commutant_of_hermitians(d, &all)?;
    let herm_z = super::hermitian_parts(&center);
    let unit = p.unit();
    let mass = p.basis.iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b * b.adjoint());

    let mut rng = seed.rng();
    for _ in 0..MAX_ATTEMPTS {
        let mut h = CMatrix::zeros(d, d);
        for z in &herm_z {
            let r: f64 = StandardNormal.sample(&mut rng);
            h += z * c(r, 0.0);
        }
        let shift = 2.0 * hs_norm(&h) * (d as f64).sqrt() + 1.0;
        let shifted = &unit * &h * &unit + &unit * c(shift, 0.0);
        let (values, vectors) = hermitian_eigen(&shifted)?;
        let start = values.iter().position(|&v| v > 0.5 * shift).unwrap_or(d);
        let clusters: Vec<_> = cluster_sorted(&values[start..], 1e-8 * shift)
            .into_iter()
            .map(|r| (r.start + start)..(r.end + start))
            .collect();
        if clusters.len() != center.len() {
            continue;
        }
        let mut blocks = Vec::new();
        let mut ok = true;
        for r in clusters {
            let v = vectors.columns(r.start, r.len()).into_owned();
            let z = &v * v.adjoint();
            let rank = r.len();
            // `sum_k b_k b_k*` is `(d n / m) z` on each block.
            let lambda = normalized_trace(&(&mass * &z)).re / normalized_trace(&z).re;
            let n_real = (lambda * rank as f64 / d as f64).sqrt();
            let n = n_real.round() as usize;
            if n == 0 || (n_real - n as f64).abs() > 1e-6 || rank % n != 0 {
                ok = false;
                break;
            }
            match matrix_units(p, &v, n, rank / n, &mut rng)? {
                Some(isometry) => blocks.push(Block { projection: z, factor_dim: n, multiplicity: rank / n, isometry }),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(BlockStructure { ambient_dim: d, blocks });
        }
    }
    Err(Error::DegenerateSpectrum { attempts: MAX_ATTEMPTS })
}

/// Isometry adapted to `M_n ⊗ 1_m` on the range of `v`, or `None` when the
/// random elements used were degenerate.
fn matrix_units(
    p: &SubalgebraBasis,
    v: &CMatrix,
    n: usize,
    m: usize,
    rng: &mut rand_chacha::ChaCha20Rng,
) -> Result<Option<CMatrix>> {
    let d = p.ambient_dim;
    if n == 1 {
        return Ok(Some(v.clone()));
    }
    let k = crate::linalg::hermitian_part(&p.random_element(rng));
    let kh = v.adjoint() * &k * v;
    let (values, vecs) = hermitian_eigen(&kh)?;
    let spread = values.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let clusters = cluster_sorted(&values, 1e-8 * spread);
    if clusters.len() != n || clusters.iter().any(|r| r.len() != m) {
        return Ok(None);
    }
    let cols: Vec<CMatrix> = clusters.iter().map(|r| v * vecs.columns(r.start, m)).collect();
    let f = &cols[0];
    let e11 = f * f.adjoint();
    let y = p.random_element(rng);
    let ynorm = hs_norm(&y).max(1e-300);
    let mut w = CMatrix::zeros(d, n * m);
    w.columns_mut(0, m).copy_from(f);
    for j in 1..n {
        let ejj = &cols[j] * cols[j].adjoint();
        let g = &ejj * &y * &e11 * f;
        let size = g.norm() / (m as f64).sqrt();
        if size < 1e-6 * ynorm {
            return Ok(None);
        }
        w.columns_mut(j * m, m).copy_from(&(g / c(size, 0.0)));
    }
    Ok(Some(w))
}
