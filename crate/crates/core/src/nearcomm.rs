//! Contraction pairs built from unitary logarithms, their commutation
//! defect, and a search for a nearby pair `(A', B')` with `[A', B'] = 0`
//! and `[A', B'*] = 0`.
//!
//! The search alternates exact projections: `A'` onto the commutant of
//! `{B', B'*}`, then `B'` onto the commutant of `{A', A'*}`. The feasible set
//! is symmetric in the two variables, so every half-step is an exact
//! minimization and the objective `||A - A'||_2^2 + ||B - B'||_2^2` never
//! increases. When the rank decision of a commutant is borderline, the
//! previous iterate is added to its basis so that it stays reachable. No norm bound is imposed on `A'` or `B'`. The result is an
//! upper bound on the distance to the commuting pairs.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    commutator, ensure_same_dim, exp_i_hermitian, haar_unitary, hermitian_part, hs_inner, hs_norm, identity,
    op_norm, random_hermitian, skew_part, unitary_log, unitary_residual, CMatrix, Seed, C64, I, ZERO,
};
use crate::subalgebra::commutant_space;

pub const CONTRACTION_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-10;
/// Relative objective improvement below which a run stops.
pub const STOP_TOL: f64 = 1e-10;
/// Allowed increase of the objective between half-steps, relative to its size.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Commutation defect, relative to the sizes involved, under which an
/// iterate counts as an exact member of a commutant.
pub const FEASIBLE_TOL: f64 = 1e-10;

/// `||[A, B]||_2 + ||[A, B*]||_2`.
pub fn defect(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    ensure_same_dim(a, b)?;
    Ok(hs_norm(&commutator(a, b)?) + hs_norm(&commutator(a, &b.adjoint())?))
}

/// Orthogonal projection of `a` onto `{X : [X, B] = 0, [X, B*] = 0}`.
pub fn commutant_projection(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let d = ensure_same_dim(a, b)?;
    Ok(commutant_space(d, &[hermitian_part(b), skew_part(b)])?.project(a))
}

/// Projection of `x` onto the commutant of `{g, g*}`, with the numerically
/// detected space enlarged by the part of `prev` outside it, when that part
/// commutes with `g` and `g*` to `FEASIBLE_TOL`. The previous iterate then
/// stays admissible.
fn project_keeping(x: &CMatrix, g: &CMatrix, prev: &CMatrix) -> Result<CMatrix> {
    let space = commutant_space(x.nrows(), &[hermitian_part(g), skew_part(g)])?;
    let mut out = space.project(x);
    let mut rem = prev.clone();
    for _ in 0..2 {
        rem -= space.project(&rem);
    }
    let r = hs_norm(&rem);
    if r > 1e-12 * hs_norm(prev) {
        let e = rem * C64::new(1.0 / r, 0.0);
        if defect(&e, g)? <= FEASIBLE_TOL * hs_norm(g).max(1.0) {
            out += &e * hs_inner(x, &e)?;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ContractionPair {
    pub a: CMatrix,
    pub b: CMatrix,
}

impl ContractionPair {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        ensure_same_dim(&a, &b)?;
        for (name, x) in [("A", &a), ("B", &b)] {
            let n = op_norm(x, 1e-12)?;
            if n > 1.0 + CONTRACTION_TOL {
                return Err(invalid(format!("{name} has operator norm {n} > 1")));
            }
        }
        Ok(ContractionPair { a, b })
    }
}

/// `A = h_1 + i h_2`, `B = k_1 + i k_2` with `exp(2 pi i h_p) = U_p` and
/// `exp(2 pi i k_p) = V_p`.
pub fn build_theorem_a_pair(u1: &CMatrix, u2: &CMatrix, v1: &CMatrix, v2: &CMatrix) -> Result<ContractionPair> {
    for x in [u2, v1, v2] {
        ensure_same_dim(u1, x)?;
    }
    for x in [u1, u2, v1, v2] {
        let r = unitary_residual(x);
        if r > UNITARY_TOL {
            return Err(Error::NotUnitary { residual: r });
        }
    }
    let h1 = unitary_log(u1)?;
    let h2 = unitary_log(u2)?;
    let k1 = unitary_log(v1)?;
    let k2 = unitary_log(v2)?;
    ContractionPair::new(h1 + h2 * I, k1 + k2 * I)
}

/// Unitary `W` that approximately diagonalizes every Hermitian matrix in
/// `hs` at once, by Jacobi rotations maximizing the diagonal spread of each
/// 2×2 principal block.
pub fn joint_diagonalize(hs: &[CMatrix], max_sweeps: usize) -> Result<CMatrix> {
    let d = hs.first().map(|h| h.nrows()).ok_or_else(|| invalid("nothing to diagonalize"))?;
    let mut ms: Vec<CMatrix> = hs.to_vec();
    let mut w = identity(d);
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let mut g = nalgebra::Matrix3::<f64>::zeros();
                for m in &ms {
                    let b = m[(p, q)];
                    let h = nalgebra::Vector3::new((m[(p, p)] - m[(q, q)]).re, 2.0 * b.re, -2.0 * b.im);
                    g += h * h.transpose();
                }
                let eig = nalgebra::SymmetricEigen::new(g);
                let k = eig.eigenvalues.imax();
                let mut v = eig.eigenvectors.column(k).into_owned();
                if v[0] < 0.0 {
                    v = -v;
                }
                let cth = ((1.0 + v[0]) / 2.0).sqrt();
                let s = C64::new(v[1], v[2]) / (2.0 * (1.0 + v[0])).sqrt();
                if s.norm() < 1e-13 {
                    continue;
                }
                rotated = true;
                // R = [[c, -conj(s)], [s, c]] on coordinates (p, q); M <- R* M R.
                let rot = |m: &mut CMatrix| {
                    for r in 0..d {
                        let (x, y) = (m[(r, p)], m[(r, q)]);
                        m[(r, p)] = x * cth + y * s;
                        m[(r, q)] = -x * s.conj() + y * cth;
                    }
                };
                let rot_rows = |m: &mut CMatrix| {
                    for col in 0..d {
                        let (x, y) = (m[(p, col)], m[(q, col)]);
                        m[(p, col)] = x * cth + y * s.conj();
                        m[(q, col)] = -x * s + y * cth;
                    }
                };
                for m in ms.iter_mut() {
                    rot(m);
                    rot_rows(m);
                }
                rot(&mut w);
            }
        }
        if !rotated {
            break;
        }
    }
    Ok(w)
}

/// Objective and the two distances after one half-step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentStep {
    pub objective: f64,
    pub dist_a: f64,
    pub dist_b: f64,
}

#[derive(Clone, Debug)]
pub struct DescentTrace {
    /// One entry per half-step of the best run.
    pub iterations: Vec<DescentStep>,
    pub final_pair: (CMatrix, CMatrix),
    pub sweeps_used: usize,
    pub converged: bool,
    /// Every half-step of every run was nonincreasing.
    pub monotone_ok: bool,
    /// Number of starting points tried.
    pub restarts: usize,
    /// Final objective of every start, in start order.
    pub start_objectives: Vec<f64>,
    pub best_start: usize,
}

impl DescentTrace {
    pub fn objective(&self) -> f64 {
        self.iterations.last().map(|s| s.objective).unwrap_or(0.0)
    }

    /// `||A - A'||_2 + ||B - B'||_2`.
    pub fn distance_sum(&self) -> f64 {
        self.iterations.last().map(|s| s.dist_a + s.dist_b).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
enum Start {
    /// Project `A` onto the commutant of the given `B'` first.
    FromB(CMatrix),
    /// Project `B` onto the commutant of the given `A'` first.
    FromA(CMatrix),
}

struct Run {
    steps: Vec<DescentStep>,
    pair: (CMatrix, CMatrix),
    sweeps: usize,
    converged: bool,
    monotone: bool,
}

fn step(a: &CMatrix, b: &CMatrix, ap: &CMatrix, bp: &CMatrix) -> DescentStep {
    let dist_a = hs_norm(&(a - ap));
    let dist_b = hs_norm(&(b - bp));
    DescentStep { objective: dist_a * dist_a + dist_b * dist_b, dist_a, dist_b }
}

fn run_from(a: &CMatrix, b: &CMatrix, start: &Start, max_sweeps: usize) -> Result<Run> {
    let scale = hs_norm(a).powi(2) + hs_norm(b).powi(2);
    let (mut ap, mut bp, b_first) = match start {
        Start::FromB(b0) => (a.clone(), b0.clone(), false),
        Start::FromA(a0) => (a0.clone(), b.clone(), true),
    };
    let mut steps = Vec::new();
    let mut monotone = true;
    let mut converged = false;
    let mut sweeps = 0;
    let mut last_sweep = f64::INFINITY;
    while sweeps < max_sweeps {
        sweeps += 1;
        for half in 0..2 {
            if (half == 0) != b_first {
                ap = project_keeping(a, &bp, &ap)?;
            } else {
                bp = project_keeping(b, &ap, &bp)?;
            }
            let s = step(a, b, &ap, &bp);
            if let Some(prev) = steps.last().map(|p: &DescentStep| p.objective) {
                if s.objective > prev + MONOTONE_TOL * (prev + 1e-3 * scale) {
                    monotone = false;
                }
            }
            steps.push(s);
        }
        let obj = steps.last().unwrap().objective;
        if obj <= 1e-28 * scale.max(1e-300) || last_sweep - obj <= STOP_TOL * obj {
            converged = true;
            break;
        }
        last_sweep = obj;
    }
    Ok(Run { steps, pair: (ap, bp), sweeps, converged, monotone })
}

/// Index groups of `values` whose single-linkage gaps are at most `tol`.
fn cluster_complex(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut owner: Vec<usize> = (0..n).collect();
    fn root(o: &mut [usize], mut i: usize) -> usize {
        while o[i] != i {
            o[i] = o[o[i]];
            i = o[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (root(&mut owner, i), root(&mut owner, j));
                owner[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = root(&mut owner, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// `W diag(cluster means of values) W*`.
fn clustered_normal(w: &CMatrix, values: &[C64], groups: &[Vec<usize>]) -> CMatrix {
    let d = values.len();
    let mut diag = vec![ZERO; d];
    for g in groups {
        let mean = g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64;
        for &i in g {
            diag[i] = mean;
        }
    }
    let dm = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
    w * dm * w.adjoint()
}

const CLUSTER_SCALES: [f64; 7] = [0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3];

/// Clustered-normal starting points from a joint eigenbasis `w`.
fn starts_from_basis(a: &CMatrix, b: &CMatrix, w: &CMatrix, out: &mut Vec<Start>) {
    let d = a.nrows();
    let wa = w.adjoint();
    let da = &wa * a * w;
    let db = &wa * b * w;
    let alpha: Vec<C64> = (0..d).map(|i| da[(i, i)]).collect();
    let beta: Vec<C64> = (0..d).map(|i| db[(i, i)]).collect();
    let spread = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let (sa, sb) = (spread(&alpha), spread(&beta));
    let mut seen: Vec<Vec<Vec<usize>>> = Vec::new();
    for &f in &CLUSTER_SCALES {
        let g = cluster_complex(&beta, f * sb);
        if !seen.contains(&g) {
            out.push(Start::FromB(clustered_normal(w, &beta, &g)));
            seen.push(g);
        }
    }
    seen.clear();
    for &f in &CLUSTER_SCALES {
        let g = cluster_complex(&alpha, f * sa);
        if !seen.contains(&g) {
            out.push(Start::FromA(clustered_normal(w, &alpha, &g)));
            seen.push(g);
        }
    }
}

/// Alternating projections from several starting points; returns the best
/// run. Starts: the input pair itself, clustered-normal approximations in the
/// joint eigenbasis of the Hermitian parts of `A` and `B`, and `restarts`
/// further starts from randomly rotated eigenbases (seeded).
pub fn alternating_descent(
    a: &CMatrix,
    b: &CMatrix,
    max_sweeps: usize,
    restarts: usize,
    seed: Seed,
) -> Result<DescentTrace> {
    let d = ensure_same_dim(a, b)?;
    if max_sweeps == 0 {
        return Err(invalid("max_sweeps must be positive"));
    }
    let herm = [hermitian_part(a), skew_part(a), hermitian_part(b), skew_part(b)];
    let w = joint_diagonalize(&herm, 100)?;
    let mut starts = vec![Start::FromB(b.clone())];
    starts_from_basis(a, b, &w, &mut starts);
    for r in 0..restarts {
        let mut rng = seed.derive(r as u64).rng();
        let h = random_hermitian(d, &mut rng);
        let size = 10f64.powf(rng.random_range(-3.0..-1.0));
        let rot = exp_i_hermitian(&h, size / hs_norm(&h).max(1e-300))?;
        let wr = joint_refine(&herm, &(&w * rot))?;
        let mut extra = Vec::new();
        starts_from_basis(a, b, &wr, &mut extra);
        starts.extend(extra);
    }
    let runs: Vec<Run> = starts.par_iter().map(|s| run_from(a, b, s, max_sweeps)).collect::<Result<Vec<_>>>()?;
    let start_objectives: Vec<f64> = runs.iter().map(|r| r.steps.last().unwrap().objective).collect();
    let monotone_ok = runs.iter().all(|r| r.monotone);
    let mut best = 0;
    for (i, &o) in start_objectives.iter().enumerate() {
        if o < start_objectives[best] {
            best = i;
        }
    }
    let run = runs.into_iter().nth(best).unwrap();
    Ok(DescentTrace {
        iterations: run.steps,
        final_pair: run.pair,
        sweeps_used: run.sweeps,
        converged: run.converged,
        monotone_ok,
        restarts: start_objectives.len(),
        start_objectives,
        best_start: best,
    })
}

/// Continue the joint diagonalization from the basis `w`.
fn joint_refine(hs: &[CMatrix], w: &CMatrix) -> Result<CMatrix> {
    let wa = w.adjoint();
    let rotated: Vec<CMatrix> = hs.iter().map(|h| &wa * h * w).collect();
    Ok(w * joint_diagonalize(&rotated, 100)?)
}

/// `W diag(values) W*` for a Haar-random `W`.
pub fn normal_with_spectrum(values: &[C64], seed: Seed) -> Result<CMatrix> {
    let w = haar_unitary(values.len(), seed)?;
    let dm = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.to_vec()));
    Ok(&w * dm * w.adjoint())
}
