//! Finite-dimensional self-adjoint subalgebras of `M_d`.

mod basic;
mod blocks;
mod commutant;

use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Error, Result};
use crate::io::{parse_err, parse_header, read_cmat_block, write_cmat, Lines};
use crate::linalg::{
    c, ensure_square, gaussian_matrix, hermitian_part, hs_inner_unchecked, hs_norm, identity,
    matrix_unit, op_norm, skew_part, CMatrix, Seed, C64, ZERO,
};

pub use basic::{group_average_projection, pauli_group, verify_group, BasicConstruction};
pub use blocks::{block_structure, block_structure_seeded, Block, BlockStructure};
pub use commutant::{commutant_basis, commutant_of_hermitians, commutant_space, nullspace, CommutantSpace};

/// Relative residual below which a new direction is treated as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// HS-orthonormal basis of a self-adjoint subalgebra.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    pub ambient_dim: usize,
    pub basis: Vec<CMatrix>,
    pub contains_unit: bool,
}

/// Incremental modified Gram-Schmidt in the normalized HS inner product.
pub(crate) struct SpanBuilder {
    d: usize,
    basis: Vec<CMatrix>,
    tol: f64,
}

impl SpanBuilder {
    pub(crate) fn new(d: usize, tol: f64) -> Self {
        SpanBuilder { d, basis: Vec::new(), tol }
    }

    /// Adds the component of `x` orthogonal to the current span; returns
    /// whether the span grew.
    pub(crate) fn push(&mut self, x: &CMatrix) -> Result<bool> {
        self.push_scaled(x, 0.0)
    }

    /// As `push`, with the residual measured against `max(||x||_2, scale)`
    /// so that products which cancel to rounding noise are discarded.
    pub(crate) fn push_scaled(&mut self, x: &CMatrix, scale: f64) -> Result<bool> {
        let n0 = hs_norm(x).max(scale);
        if n0 == 0.0 {
            return Ok(false);
        }
        let mut r = x.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let h = hs_inner_unchecked(&r, b, self.d);
                r.zip_apply(b, |ri, bi| *ri -= h * bi);
            }
        }
        let n = hs_norm(&r);
        let ratio = n / n0;
        if ratio <= self.tol {
            return Ok(false);
        }
        if ratio <= 1e3 * self.tol {
            return Err(Error::RankDetection { ratio });
        }
        self.basis.push(r * c(1.0 / n, 0.0));
        Ok(true)
    }

    pub(crate) fn len(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn get(&self, k: usize) -> &CMatrix {
        &self.basis[k]
    }

    pub(crate) fn finish(self) -> Vec<CMatrix> {
        self.basis
    }
}

fn common_dim(xs: &[CMatrix]) -> Result<usize> {
    let first = xs.first().ok_or_else(|| invalid("empty generating set"))?;
    let d = ensure_square(first)?;
    for x in xs {
        if ensure_square(x)? != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
        }
    }
    Ok(d)
}

impl SubalgebraBasis {
    /// Orthonormalizes `elements` without closing under products.
    pub fn from_span(d: usize, elements: &[CMatrix]) -> Result<Self> {
        let mut span = SpanBuilder::new(d, RANK_TOL);
        for x in elements {
            if x.nrows() != d || x.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
            }
            span.push(x)?;
        }
        Ok(Self::from_orthonormal(d, span.finish()))
    }

    pub(crate) fn from_orthonormal(d: usize, basis: Vec<CMatrix>) -> Self {
        let mut s = SubalgebraBasis { ambient_dim: d, basis, contains_unit: false };
        let one = identity(d);
        s.contains_unit = hs_norm(&(&one - s.project(&one))) <= 1e-9;
        s
    }

    pub fn scalars(d: usize) -> Self {
        Self::from_orthonormal(d, vec![identity(d)])
    }

    pub fn full(d: usize) -> Self {
        let scale = c((d as f64).sqrt(), 0.0);
        let basis = (0..d * d).map(|k| matrix_unit(d, k / d, k % d) * scale).collect();
        Self::from_orthonormal(d, basis)
    }

    pub fn diagonal(d: usize) -> Self {
        let scale = c((d as f64).sqrt(), 0.0);
        Self::from_orthonormal(d, (0..d).map(|k| matrix_unit(d, k, k) * scale).collect())
    }

    /// Diagonal algebra spanned by the indicator projections of `cells`.
    pub fn from_partition(d: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; d];
        let mut basis = Vec::new();
        for cell in cells {
            if cell.is_empty() {
                return Err(invalid("partition has an empty cell"));
            }
            let mut q = CMatrix::zeros(d, d);
            for &i in cell {
                if i >= d || seen[i] {
                    return Err(invalid(format!("index {i} repeated or out of range")));
                }
                seen[i] = true;
                q[(i, i)] = c(1.0, 0.0);
            }
            let t = cell.len() as f64 / d as f64;
            basis.push(q * c(1.0 / t.sqrt(), 0.0));
        }
        Ok(Self::from_orthonormal(d, basis))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// HS-orthogonal projection onto the span.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let d = self.ambient_dim;
        let mut out = CMatrix::zeros(d, d);
        for b in &self.basis {
            let h = hs_inner_unchecked(x, b, d);
            out.zip_apply(b, |o, bi| *o += h * bi);
        }
        out
    }

    pub fn unit(&self) -> CMatrix {
        self.project(&identity(self.ambient_dim))
    }

    /// Distance of `x` from the span, relative to `max(1, ||x||_2)`.
    pub fn span_residual(&self, x: &CMatrix) -> f64 {
        hs_norm(&(x - self.project(x))) / hs_norm(x).max(1.0)
    }

    /// Largest relative residual of `b_i b_j` and `b_i*` against the span.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.basis {
            worst = worst.max(self.span_residual(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.span_residual(&(a * b)));
            }
        }
        worst
    }

    /// Random element with Gaussian coordinates in the orthonormal basis.
    pub fn random_element(&self, rng: &mut ChaCha20Rng) -> CMatrix {
        let coeffs = gaussian_matrix(self.basis.len(), rng);
        let mut out = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (k, b) in self.basis.iter().enumerate() {
            let w = coeffs[(k, 0)];
            out.zip_apply(b, |o, bi| *o += w * bi);
        }
        out
    }

    /// Random element of operator norm `radius`.
    pub fn random_unit_ball(&self, radius: f64, rng: &mut ChaCha20Rng) -> Result<CMatrix> {
        let x = self.random_element(rng);
        let n = op_norm(&x, 1e-12)?;
        if n == 0.0 {
            return Ok(x);
        }
        Ok(x * c(radius / n, 0.0))
    }

    /// Hermitian elements spanning the algebra over the reals.
    pub(crate) fn hermitian_generators(&self) -> Vec<CMatrix> {
        hermitian_parts(&self.basis)
    }
}

/// Real and imaginary parts of each element, dropping zero parts.
pub(crate) fn hermitian_parts(xs: &[CMatrix]) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(2 * xs.len());
    for x in xs {
        for h in [hermitian_part(x), skew_part(x)] {
            if hs_norm(&h) > 0.0 {
                out.push(h);
            }
        }
    }
    out
}

/// Smallest unital self-adjoint algebra containing `gens`.
///
/// The span of `{1} ∪ gens ∪ gens*` is closed under left multiplication by
/// the generators; the result spans every word in the generators.
pub fn generate_subalgebra(gens: &[CMatrix]) -> Result<SubalgebraBasis> {
    let d = common_dim(gens)?;
    let mut letters: Vec<CMatrix> = Vec::new();
    for g in gens {
        crate::linalg::ensure_finite(g)?;
        letters.push(g.clone());
        let ga = g.adjoint();
        if hs_norm(&(&ga - g)) > 0.0 {
            letters.push(ga);
        }
    }
    let mut span = SpanBuilder::new(d, RANK_TOL);
    span.push(&identity(d))?;
    for g in &letters {
        span.push(g)?;
    }
    let mut k = 0;
    while k < span.len() && span.len() < d * d {
        let b = span.get(k).clone();
        for g in &letters {
            span.push_scaled(&(g * &b), hs_norm(g))?;
        }
        k += 1;
    }
    Ok(SubalgebraBasis::from_orthonormal(d, span.finish()))
}

/// `E_Q(x)`: HS-orthogonal projection onto `span(Q)`.
pub fn cond_expect(x: &CMatrix, q: &SubalgebraBasis) -> Result<CMatrix> {
    let d = ensure_square(x)?;
    if d != q.ambient_dim {
        return Err(Error::DimensionMismatch { expected: q.ambient_dim, found: d });
    }
    Ok(q.project(x))
}

/// Testset maximum of `||x - E_Q(x)||_2`; a lower estimate of the supremum
/// over the unit ball of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentEstimate {
    pub defect: f64,
    /// Testset indices that do not lie in `span(P)`.
    pub outside_span: Vec<usize>,
}

pub fn containment_defect(p: &SubalgebraBasis, q: &SubalgebraBasis, testset: &[CMatrix]) -> Result<ContainmentEstimate> {
    if p.ambient_dim != q.ambient_dim {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim, found: q.ambient_dim });
    }
    let mut est = ContainmentEstimate { defect: 0.0, outside_span: Vec::new() };
    for (i, x) in testset.iter().enumerate() {
        if ensure_square(x)? != p.ambient_dim {
            return Err(Error::DimensionMismatch { expected: p.ambient_dim, found: x.nrows() });
        }
        let n = op_norm(x, 1e-12)?;
        if n > 1.0 + 1e-8 {
            return Err(invalid(format!("testset element {i} has operator norm {n} > 1")));
        }
        if p.span_residual(x) > 1e-8 {
            est.outside_span.push(i);
        }
        est.defect = est.defect.max(hs_norm(&(x - q.project(x))));
    }
    Ok(est)
}

/// Larger of the two containment defects.
pub fn subalg_distance(
    p: &SubalgebraBasis,
    q: &SubalgebraBasis,
    testset_p: &[CMatrix],
    testset_q: &[CMatrix],
) -> Result<ContainmentEstimate> {
    let a = containment_defect(p, q, testset_p)?;
    let b = containment_defect(q, p, testset_q)?;
    let mut outside = a.outside_span;
    outside.extend(b.outside_span.iter().map(|i| i + testset_p.len()));
    Ok(ContainmentEstimate { defect: a.defect.max(b.defect), outside_span: outside })
}

/// Generating unitaries plus `count` random elements of the unit sphere of `P`.
pub fn default_testset(p: &SubalgebraBasis, unitaries: &[CMatrix], count: usize, seed: Seed) -> Result<Vec<CMatrix>> {
    let mut rng = seed.rng();
    let mut out: Vec<CMatrix> = unitaries.to_vec();
    for _ in 0..count {
        out.push(p.random_unit_ball(1.0, &mut rng)?);
    }
    Ok(out)
}

/// Unitary `v` in `P` with `||u - v||_2 <= 3 ||u - E_P(u)||_2`, from the polar
/// decomposition of `E_P(u)` computed block by block.
pub fn lemma_close_unitary(u: &CMatrix, p: &SubalgebraBasis) -> Result<CMatrix> {
    let d = ensure_square(u)?;
    if d != p.ambient_dim {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim, found: d });
    }
    if !p.contains_unit {
        return Err(invalid("subalgebra does not contain the identity"));
    }
    let res = crate::linalg::unitary_residual(u);
    if res > 1e-10 {
        return Err(Error::NotUnitary { residual: res });
    }
    let blocks = block_structure(p)?;
    let e = p.project(u);
    let polar: Vec<CMatrix> = blocks
        .compress(&e)
        .iter()
        .map(crate::linalg::polar_unitary)
        .collect::<Result<_>>()?;
    Ok(blocks.expand(&polar))
}

/// Outcome of checking `Q' ∩ qMq ⊂_{4ε} P' ∩ pMp`.
#[derive(Clone, Debug)]
pub struct CommutantLemmaReport {
    pub eps: f64,
    /// Measured defect of `P` in `Q` over the hypothesis testset.
    pub hypothesis_defect: f64,
    pub projection_distance: f64,
    pub hypothesis_holds: bool,
    /// Measured defect of `Q' ∩ qMq` in `P' ∩ pMp`.
    pub conclusion_defect: f64,
    pub bound: f64,
    /// `None` when the hypothesis failed and nothing is asserted.
    pub conclusion_holds: Option<bool>,
}

/// Relative commutant `S' ∩ sMs` for `S` with unit `s`.
pub fn relative_commutant(s: &SubalgebraBasis, unit: &CMatrix) -> Result<SubalgebraBasis> {
    let comm = commutant_basis(&s.basis)?;
    let compressed: Vec<CMatrix> = comm.basis.iter().map(|y| unit * y * unit).collect();
    SubalgebraBasis::from_span(s.ambient_dim, &compressed)
}

pub fn commutant_lemma_check(
    p: &SubalgebraBasis,
    p_unit: &CMatrix,
    q: &SubalgebraBasis,
    q_unit: &CMatrix,
    eps: f64,
    samples: usize,
    seed: Seed,
) -> Result<CommutantLemmaReport> {
    let d = p.ambient_dim;
    if q.ambient_dim != d || p_unit.nrows() != d || q_unit.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.ambient_dim });
    }
    for (alg, unit) in [(p, p_unit), (q, q_unit)] {
        let r = hs_norm(&(unit * unit - unit)) + hs_norm(&(unit - unit.adjoint()));
        if r > 1e-9 || hs_norm(&(alg.unit() - unit)) > 1e-9 {
            return Err(invalid("unit must be the projection that is the identity of the corner algebra"));
        }
    }
    let test_p = default_testset(p, &[], samples, seed.derive(0))?;
    let hyp = containment_defect(p, q, &test_p)?.defect;
    let proj = hs_norm(&(p_unit - q_unit));
    let hypothesis_holds = hyp <= eps && proj <= eps;
    let q_rel = relative_commutant(q, q_unit)?;
    let p_rel = relative_commutant(p, p_unit)?;
    let test_q = default_testset(&q_rel, &[], samples, seed.derive(1))?;
    let concl = containment_defect(&q_rel, &p_rel, &test_q)?.defect;
    let bound = 4.0 * eps + 1e-8;
    Ok(CommutantLemmaReport {
        eps,
        hypothesis_defect: hyp,
        projection_distance: proj,
        hypothesis_holds,
        conclusion_defect: concl,
        bound,
        conclusion_holds: hypothesis_holds.then_some(concl <= bound),
    })
}

/// Serializes as `SALG v1 <ambient_dim> <basis_count>` followed by CMAT blocks.
pub fn salg_to_string(s: &SubalgebraBasis) -> String {
    let mut out = format!("SALG v1 {} {}\n", s.ambient_dim, s.basis.len());
    for b in &s.basis {
        write_cmat(&mut out, b);
    }
    out
}

pub fn parse_salg(text: &str) -> Result<SubalgebraBasis> {
    let mut lines = Lines::new(text);
    let (no, nums) = parse_header(&mut lines, "SALG", 2)?;
    let (d, count) = (nums[0], nums[1]);
    let mut basis = Vec::with_capacity(count);
    for _ in 0..count {
        let b = read_cmat_block(&mut lines)?;
        if b.nrows() != d {
            return Err(parse_err(no, format!("basis matrix of dimension {} in ambient {d}", b.nrows())));
        }
        basis.push(b);
    }
    lines.expect_end()?;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { c(1.0, 0.0) } else { ZERO };
            let got: C64 = hs_inner_unchecked(a, b, d);
            if (got - want).norm() > 1e-9 {
                return Err(parse_err(no, "basis is not HS-orthonormal"));
            }
        }
    }
    Ok(SubalgebraBasis::from_orthonormal(d, basis))
}
