use super::{block_structure, SubalgebraBasis};
use crate::error::{Error, Result};
use crate::linalg::{apply_on_legs, c, identity, max_abs, vec_row_major, CMatrix, Side, TensorLegs, C64};

pub const DEFAULT_CAP: usize = 32;

/// `e_Q` and the trace `Tr` on `<M, e_Q>`, realized on the HS space of
/// row-major vectorized `d × d` matrices.
///
/// `Tr(T) = trace(T R_Δ)` where `R_Δ` is right multiplication by
/// `Δ = sum_i m_i / (d n_i) z_i`; with this weight `Tr(x e_Q y) = tau(xy)`.
#[derive(Clone, Debug)]
pub struct BasicConstruction {
    pub d: usize,
    pub e_q: CMatrix,
    pub delta: CMatrix,
}

impl BasicConstruction {
    pub fn new(q: &SubalgebraBasis) -> Result<Self> {
        Self::with_cap(q, DEFAULT_CAP)
    }

    pub fn with_cap(q: &SubalgebraBasis, cap: usize) -> Result<Self> {
        let d = q.ambient_dim;
        if d > cap {
            return Err(Error::TooLarge { what: "basic construction", dim: d, cap });
        }
        let mut e_q = CMatrix::zeros(d * d, d * d);
        for b in &q.basis {
            let v = vec_row_major(b);
            e_q += &v * v.adjoint();
        }
        e_q /= c(d as f64, 0.0);
        let blocks = block_structure(q)?;
        let mut delta = CMatrix::zeros(d, d);
        for b in &blocks.blocks {
            delta += &b.projection * c(b.multiplicity as f64 / (d as f64 * b.factor_dim as f64), 0.0);
        }
        Ok(BasicConstruction { d, e_q, delta })
    }

    /// Left multiplication `L_x = x ⊗ 1`.
    pub fn left(&self, x: &CMatrix) -> CMatrix {
        x.kronecker(&identity(self.d))
    }

    /// Right multiplication `R_y = 1 ⊗ y^T`.
    pub fn right(&self, y: &CMatrix) -> CMatrix {
        identity(self.d).kronecker(&y.transpose())
    }

    pub fn trace(&self, t: &CMatrix) -> C64 {
        let d = self.d;
        let mut s = c(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    let w = self.delta[(b, e)];
                    if w != c(0.0, 0.0) {
                        s += t[(a * d + b, a * d + e)] * w;
                    }
                }
            }
        }
        s
    }

    /// `||T||_{2,Tr} = Tr(T* T)^{1/2}`.
    pub fn hs_norm_tr(&self, t: &CMatrix) -> f64 {
        self.trace(&(t.adjoint() * t)).re.max(0.0).sqrt()
    }

    /// `L_u e_Q L_u*`, applied leg-locally.
    pub fn conjugate_e_q(&self, u: &CMatrix) -> Result<CMatrix> {
        let legs = TensorLegs::new(vec![self.d, self.d])?;
        let left = apply_on_legs(&self.e_q, &legs, &[0], u, Side::Left)?;
        apply_on_legs(&left, &legs, &[0], &u.adjoint(), Side::Right)
    }
}

/// Checks closure under products and adjoints (the inverses of unitaries).
pub fn verify_group(g: &[CMatrix], tol: f64) -> Result<()> {
    if g.is_empty() {
        return Err(Error::NotAGroup("empty set".into()));
    }
    let d = g[0].nrows();
    let find = |x: &CMatrix| g.iter().any(|h| h.nrows() == d && max_abs(&(h - x)) <= tol);
    for (i, a) in g.iter().enumerate() {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.nrows() });
        }
        if max_abs(&(a.adjoint() * a - identity(d))) > tol {
            return Err(Error::NotAGroup(format!("element {i} is not unitary")));
        }
        if !find(&a.adjoint()) {
            return Err(Error::NotAGroup(format!("inverse of element {i} missing")));
        }
        for (j, b) in g.iter().enumerate() {
            if !find(&(a * b)) {
                return Err(Error::NotAGroup(format!("product of elements {i} and {j} missing")));
            }
        }
    }
    Ok(())
}

/// `f = |G|^{-1} sum_U L_U e_Q L_U*` after verifying that `G` is a group.
pub fn group_average_projection(g: &[CMatrix], bc: &BasicConstruction) -> Result<CMatrix> {
    verify_group(g, 1e-9)?;
    if g[0].nrows() != bc.d {
        return Err(Error::DimensionMismatch { expected: bc.d, found: g[0].nrows() });
    }
    let mut f = CMatrix::zeros(bc.d * bc.d, bc.d * bc.d);
    for u in g {
        f += bc.conjugate_e_q(u)?;
    }
    Ok(f / c(g.len() as f64, 0.0))
}

/// The `n`-qubit Pauli group with phases `{±1, ±i}`, of order `4^(n+1)`.
pub fn pauli_group(qubits: usize) -> Vec<CMatrix> {
    let paulis = crate::linalg::pauli_matrices();
    let mut words: Vec<CMatrix> = vec![identity(1)];
    for _ in 0..qubits {
        words = words.iter().flat_map(|w| paulis.iter().map(move |p| w.kronecker(p))).collect();
    }
    let phases = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    phases.iter().flat_map(|&ph| words.iter().map(move |w| w * ph)).collect()
}
