use super::{c, ensure_square, identity, CMatrix, ZERO};
use crate::error::{invalid, Error, Result};

/// Ordered tensor factors of an ambient space; leg 0 is the most significant
/// digit of the row-major Kronecker index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorLegs {
    dims: Vec<usize>,
}

impl TensorLegs {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(invalid("tensor legs must have positive dimension"));
        }
        Ok(TensorLegs { dims })
    }

    pub fn qubits(n: usize) -> Self {
        TensorLegs { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// For every ambient index, its digit block on `positions` (as a row-major
    /// index of that block) and the ambient index with those digits zeroed.
    fn split(&self, positions: &[usize]) -> Result<(Vec<usize>, Vec<usize>, usize)> {
        let mut seen = vec![false; self.dims.len()];
        for &p in positions {
            if p >= self.dims.len() || seen[p] {
                return Err(invalid(format!("bad leg position {p}")));
            }
            seen[p] = true;
        }
        let strides = self.strides();
        let sub_dim: usize = positions.iter().map(|&p| self.dims[p]).product();
        let total = self.total();
        let mut sub = vec![0; total];
        let mut rest = vec![0; total];
        for idx in 0..total {
            let mut s = 0;
            let mut r = idx;
            for &p in positions {
                let digit = (idx / strides[p]) % self.dims[p];
                s = s * self.dims[p] + digit;
                r -= digit * strides[p];
            }
            sub[idx] = s;
            rest[idx] = r;
        }
        Ok((sub, rest, sub_dim))
    }

    /// Ambient indices grouped by fibre: `fibres[f][s]` is the index whose
    /// block digits equal `s` within fibre `f`.
    fn fibres(&self, positions: &[usize]) -> Result<(Vec<Vec<usize>>, usize)> {
        let (sub, rest, sub_dim) = self.split(positions)?;
        let total = self.total();
        let mut by_rest: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for idx in 0..total {
            by_rest.entry(rest[idx]).or_insert_with(|| vec![usize::MAX; sub_dim])[sub[idx]] = idx;
        }
        Ok((by_rest.into_values().collect(), sub_dim))
    }
}

/// Row-major Kronecker product: `(a ⊗ b)[(i*p + k, j*q + l)] = a[(i,j)] b[(k,l)]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors.iter().fold(identity(1), |acc, f| acc.kronecker(f))
}

/// `1 ⊗ .. ⊗ x ⊗ .. ⊗ 1` with `x` on leg `position`.
pub fn embed_leg(x: &CMatrix, legs: &TensorLegs, position: usize) -> Result<CMatrix> {
    let d = ensure_square(x)?;
    if position >= legs.len() {
        return Err(invalid(format!("leg {position} out of range for {} legs", legs.len())));
    }
    if legs.dims()[position] != d {
        return Err(Error::DimensionMismatch { expected: legs.dims()[position], found: d });
    }
    let left: usize = legs.dims()[..position].iter().product();
    let right: usize = legs.dims()[position + 1..].iter().product();
    Ok(identity(left).kronecker(&x.kronecker(&identity(right))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `(op ⊗ 1) x`
    Left,
    /// `x (op ⊗ 1)`
    Right,
}

/// Multiply `x` by `op` acting on the legs `positions` (in that order) and by
/// the identity elsewhere, without forming the ambient operator.
pub fn apply_on_legs(x: &CMatrix, legs: &TensorLegs, positions: &[usize], op: &CMatrix, side: Side) -> Result<CMatrix> {
    let d = ensure_square(x)?;
    if d != legs.total() {
        return Err(Error::DimensionMismatch { expected: legs.total(), found: d });
    }
    let (fibres, sub_dim) = legs.fibres(positions)?;
    if ensure_square(op)? != sub_dim {
        return Err(Error::DimensionMismatch { expected: sub_dim, found: op.nrows() });
    }
    let mut out = CMatrix::zeros(d, d);
    let nz: Vec<Vec<(usize, crate::linalg::C64)>> = (0..sub_dim)
        .map(|s| (0..sub_dim).filter(|&t| op[(s, t)] != ZERO).map(|t| (t, op[(s, t)])).collect())
        .collect();
    match side {
        Side::Left => {
            for col in 0..d {
                for f in &fibres {
                    for s in 0..sub_dim {
                        let mut acc = ZERO;
                        for &(t, w) in &nz[s] {
                            acc += w * x[(f[t], col)];
                        }
                        out[(f[s], col)] = acc;
                    }
                }
            }
        }
        Side::Right => {
            let nz_t: Vec<Vec<(usize, crate::linalg::C64)>> = (0..sub_dim)
                .map(|s| (0..sub_dim).filter(|&t| op[(t, s)] != ZERO).map(|t| (t, op[(t, s)])).collect())
                .collect();
            for f in &fibres {
                for s in 0..sub_dim {
                    for row in 0..d {
                        let mut acc = ZERO;
                        for &(t, w) in &nz_t[s] {
                            acc += x[(row, f[t])] * w;
                        }
                        out[(row, f[s])] = acc;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Normalized partial trace over the legs not in `keep`, as a matrix on the
/// kept legs (in their ambient order).
pub fn reduce_to_legs(x: &CMatrix, legs: &TensorLegs, keep: &[bool]) -> Result<CMatrix> {
    let d = ensure_square(x)?;
    if d != legs.total() || keep.len() != legs.len() {
        return Err(Error::DimensionMismatch { expected: legs.total(), found: d });
    }
    let traced: Vec<usize> = (0..legs.len()).filter(|&k| !keep[k]).collect();
    let (fibres, sub_dim) = legs.fibres(&traced)?;
    let kept_dim = fibres.len();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    let w = c(1.0 / sub_dim as f64, 0.0);
    for (a, fa) in fibres.iter().enumerate() {
        for (b, fb) in fibres.iter().enumerate() {
            let mut acc = ZERO;
            for t in 0..sub_dim {
                acc += x[(fa[t], fb[t])];
            }
            out[(a, b)] = acc * w;
        }
    }
    Ok(out)
}

/// Trace-preserving conditional expectation onto the legs in `keep`:
/// `(id ⊗ tau)(x) ⊗ 1`, returned in the ambient dimension.
pub fn partial_expectation(x: &CMatrix, legs: &TensorLegs, keep: &[bool]) -> Result<CMatrix> {
    let reduced = reduce_to_legs(x, legs, keep)?;
    let traced: Vec<usize> = (0..legs.len()).filter(|&k| !keep[k]).collect();
    let (fibres, sub_dim) = legs.fibres(&traced)?;
    let d = legs.total();
    let mut out = CMatrix::zeros(d, d);
    for (a, fa) in fibres.iter().enumerate() {
        for (b, fb) in fibres.iter().enumerate() {
            let v = reduced[(a, b)];
            if v == ZERO {
                continue;
            }
            for t in 0..sub_dim {
                out[(fa[t], fb[t])] = v;
            }
        }
    }
    Ok(out)
}

/// An operator acting on the listed legs of an ambient tensor product.
#[derive(Clone, Debug)]
pub struct LegOperator {
    pub positions: Vec<usize>,
    pub local: CMatrix,
}

impl LegOperator {
    pub fn new(positions: Vec<usize>, local: CMatrix) -> Self {
        LegOperator { positions, local }
    }

    /// The ambient matrix `local ⊗ 1`.
    pub fn dense(&self, legs: &TensorLegs) -> Result<CMatrix> {
        apply_on_legs(&identity(legs.total()), legs, &self.positions, &self.local, Side::Left)
    }

    /// The same operator written on `positions` (a superset of its own legs).
    pub fn widen(&self, legs: &TensorLegs, positions: &[usize]) -> Result<CMatrix> {
        let sub = TensorLegs::new(positions.iter().map(|&p| legs.dims()[p]).collect())?;
        let local = self
            .positions
            .iter()
            .map(|p| positions.iter().position(|q| q == p).ok_or_else(|| invalid(format!("leg {p} not in the target support"))))
            .collect::<Result<Vec<_>>>()?;
        apply_on_legs(&identity(sub.total()), &sub, &local, &self.local, Side::Left)
    }
}

/// Sorted union of the supports of `ops`.
pub fn leg_union(ops: &[&LegOperator]) -> Vec<usize> {
    let mut union: Vec<usize> = ops.iter().flat_map(|o| o.positions.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    union
}

/// `[a, b]` on the union of the two supports. The normalized HS norm and the
/// operator norm of the result equal those of the ambient commutator.
pub fn leg_commutator(legs: &TensorLegs, a: &LegOperator, b: &LegOperator) -> Result<LegOperator> {
    let union = leg_union(&[a, b]);
    let am = a.widen(legs, &union)?;
    let bm = b.widen(legs, &union)?;
    let local = &am * &bm - &bm * &am;
    Ok(LegOperator { positions: union, local })
}
