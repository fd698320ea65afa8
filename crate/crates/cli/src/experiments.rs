//! One runner per experiment command.

use std::collections::BTreeMap;
use std::time::Instant;

use acnum_core::expander::{clock_shift_pair, find_gap_pair, gap_certificate_check, GapSearch};
use acnum_core::gap_unitaries::{reduction_assembly_f2, reduction_assembly_f3, reduction_identity};
use acnum_core::io::{fmt_f64, read_cmat2};
use acnum_core::linalg::{gaussian_matrix, haar_unitary, hs_norm, identity, CMatrix, Seed};
use acnum_core::nearcomm::{alternating_descent, defect};
use acnum_core::witness::{
    almost_commute_audit, build_witness_family, cond_expect_theta, crossing_search, deform_bounds,
    deform_identity_checks, dim_bounds, theta_apply, x_ni,
};
use serde_json::{json, Value};

use crate::config::{
    parse_params, CommandKind, DeformCheckParams, DimBoundsParams, ExperimentConfig, GapSearchParams, NearcommParams,
    NoParams, ReductionMode, ReductionParams, WitnessAuditParams,
};
use crate::error::CliError;
use crate::invariants;
use crate::json;
use crate::record::{ExperimentRecord, Measurements};

/// A finished run: the record and the artifact text (JSON or CSV).
#[derive(Clone, Debug)]
pub struct Outcome {
    pub record: ExperimentRecord,
    pub artifact: String,
}

struct Run {
    measurements: Measurements,
    flags: BTreeMap<String, bool>,
    artifact: String,
}

impl Run {
    fn new() -> Self {
        Run { measurements: Measurements::default(), flags: BTreeMap::new(), artifact: String::new() }
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.flags.insert(name.to_string(), ok);
    }
}

/// Validates the config and runs the experiment it names.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate_tolerances()?;
    let kind = cfg.command;
    let start = Instant::now();
    let run = match kind {
        CommandKind::GapSearch => gap_search(cfg, &parse_params(kind, &cfg.params)?)?,
        CommandKind::WitnessAudit => witness_audit(cfg, &parse_params(kind, &cfg.params)?)?,
        CommandKind::DeformCheck => deform_check(cfg, &parse_params(kind, &cfg.params)?)?,
        CommandKind::DimBounds => dim_bounds_table(&parse_params(kind, &cfg.params)?)?,
        CommandKind::Reduction => reduction(cfg, &parse_params(kind, &cfg.params)?)?,
        CommandKind::Nearcomm => nearcomm(cfg, &parse_params(kind, &cfg.params)?)?,
        CommandKind::Invariants => {
            let _: NoParams = parse_params(kind, &cfg.params)?;
            invariant_suite(cfg)?
        }
    };
    let record = ExperimentRecord {
        config: cfg.clone(),
        measurements: run.measurements.0,
        pass_flags: run.flags,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(Outcome { record, artifact: run.artifact })
}

fn usage_if(bad: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if bad {
        Err(CliError::Usage(msg()))
    } else {
        Ok(())
    }
}

/// CSV text with a header line.
struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(format!("{}\n", header.join(",")))
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn gap_search(cfg: &ExperimentConfig, p: &GapSearchParams) -> Result<Run, CliError> {
    let mut run = Run::new();
    let search = find_gap_pair(p.n, p.eps, p.trials, Seed(cfg.seed))?;
    run.flag("found", search.found());
    let kappa = match &search {
        GapSearch::Found { certificate, pair, .. } => {
            if p.check_samples > 0 {
                let report =
                    gap_certificate_check(pair.u1(), pair.u2(), certificate.kappa, p.check_samples, Seed(cfg.seed).derive(1))?;
                run.measurements.real("worst_margin", report.worst_margin);
                run.flag("certificate", report.worst_margin >= -cfg.tolerance("slack"));
            }
            Some(certificate.kappa)
        }
        GapSearch::Exhausted { .. } => None,
    };
    run.measurements
        .real("restricted_norm", search.restricted_norm())
        .opt_real("kappa", kappa)
        .int("trials_used", search.trials_used() as u64);
    run.artifact = json::to_string(&json!({
        "n": p.n,
        "eps": json::real(p.eps),
        "found": search.found(),
        "restricted_norm": json::real(search.restricted_norm()),
        "kappa": kappa.map_or(Value::Null, json::real),
        "trials_used": search.trials_used(),
    }));
    Ok(run)
}

fn witness_audit(cfg: &ExperimentConfig, p: &WitnessAuditParams) -> Result<Run, CliError> {
    let mut run = Run::new();
    let family = build_witness_family(p.n, p.t)?;
    let audit = almost_commute_audit(&family)?;
    let slack = cfg.tolerance("slack");
    let bound = 4.0 * p.t.abs();
    let mut csv = Csv::new(&["u_index", "v_index", "comm_hs", "comm_op", "bound_4t"]);
    let mut violations = 0u64;
    for r in &audit.rows {
        if r.comm_op > bound + slack || r.comm_hs > r.comm_op + slack {
            violations += 1;
        }
        csv.row(&[r.u_index.to_string(), r.v_index.to_string(), fmt_f64(r.comm_hs), fmt_f64(r.comm_op), fmt_f64(r.bound_4t)]);
    }
    run.measurements
        .real("max_comm", audit.max_op)
        .real("max_comm_hs", audit.max_hs)
        .real("bound_4t", bound)
        .real("core_norm", audit.core_norm)
        .int("pairs", audit.rows.len() as u64)
        .int("violations", violations);
    run.flag("op_norm_le_4t", audit.rows.iter().all(|r| r.comm_op <= bound + slack));
    run.flag("hs_le_op", audit.rows.iter().all(|r| r.comm_hs <= r.comm_op + slack));
    run.artifact = csv.0;
    Ok(run)
}

/// Largest n for which the norm identity is checked against the dense
/// conditional expectation.
const DENSE_NORM_N: usize = 4;

fn deform_check(cfg: &ExperimentConfig, p: &DeformCheckParams) -> Result<Run, CliError> {
    usage_if(p.samples == 0, || "samples must be at least 1".into())?;
    let mut run = Run::new();
    let mut rng = Seed(cfg.seed).rng();
    let mut identity_res = 0.0f64;
    for _ in 0..p.samples {
        let x = gaussian_matrix(2, &mut rng);
        let y = gaussian_matrix(2, &mut rng);
        let r = deform_identity_checks(p.t, &x, &y)?;
        identity_res = identity_res.max(r.sandwich).max(r.trace).max(r.expectation);
    }
    let d = 1usize << p.n;
    let dense = p.n <= DENSE_NORM_N;
    let mut csv = Csv::new(&["sample", "l", "lhs", "rhs"]);
    let mut excess = f64::NEG_INFINITY;
    let mut norm_res = 0.0f64;
    for s in 0..p.samples {
        let x = gaussian_matrix(d, &mut rng);
        for b in deform_bounds(p.n, p.t, &x)? {
            excess = excess.max(b.lhs - b.rhs);
            csv.row(&[s.to_string(), b.l.to_string(), fmt_f64(b.lhs), fmt_f64(b.rhs)]);
        }
        if dense {
            let e = cond_expect_theta(p.n, p.t, &x)?;
            norm_res = norm_res.max((e.norm_sq - e.formula_sq).abs() / (1.0 + e.norm_sq));
        }
    }
    run.measurements
        .real("max_identity_residual", identity_res)
        .real("max_bound_excess", excess)
        .opt_real("max_norm_identity_residual", dense.then_some(norm_res))
        .int("samples", p.samples as u64);
    run.flag("identities", identity_res <= cfg.tolerance("identity"));
    run.flag("bound", excess <= cfg.tolerance("bound"));
    if dense {
        run.flag("norm_identity", norm_res <= cfg.tolerance("norm_identity"));
    }
    run.artifact = csv.0;
    Ok(run)
}

fn dim_bounds_table(p: &DimBoundsParams) -> Result<Run, CliError> {
    usage_if(p.nmax == 0, || "nmax must be at least 1".into())?;
    let mut run = Run::new();
    let mut csv = Csv::new(&["n", "l", "log2_upper", "log2_lower", "crossed"]);
    let mut first_in_table = None;
    let mut l = 0;
    for n in 1..=p.nmax {
        let r = dim_bounds(n, p.t, p.eps)?;
        l = r.l;
        if r.crossed() && first_in_table.is_none() {
            first_in_table = Some(n as u64);
        }
        csv.row(&[n.to_string(), r.l.to_string(), fmt_f64(r.upper), fmt_f64(r.lower), r.crossed().to_string()]);
    }
    run.measurements.int("l", l as u64).opt_int("first_crossing_in_table", first_in_table);
    if p.eps > 0.0 {
        let found = crossing_search(p.t, p.eps, p.search_max.max(p.nmax))?;
        run.measurements.opt_int("first_crossing", found.map(|r| r.n as u64));
        run.flag("crossing_found", found.is_some());
    }
    run.artifact = csv.0;
    Ok(run)
}

/// `U_i = X_{n,i} ⊗ 1` and `V_j = theta_t(X_{n,j} ⊗ 1)`, or seeded Haar unitaries.
fn reduction_inputs(cfg: &ExperimentConfig, p: &ReductionParams) -> Result<(Vec<CMatrix>, Vec<CMatrix>), CliError> {
    if p.haar {
        let seed = Seed(cfg.seed);
        let us = (0..p.k).map(|i| haar_unitary(p.n, seed.derive(i as u64))).collect::<Result<_, _>>()?;
        let vs = (0..p.m).map(|j| haar_unitary(p.n, seed.derive((p.k + j) as u64))).collect::<Result<_, _>>()?;
        return Ok((us, vs));
    }
    usage_if(p.k > p.n || p.m > p.n, || format!("witness inputs need k, m <= n = {}", p.n))?;
    let d = 1usize << p.n;
    let mut us = Vec::with_capacity(p.k.max(p.m));
    for i in 1..=p.k.max(p.m) {
        us.push(x_ni(p.n, i)?.kronecker(&identity(d)));
    }
    let vs = us[..p.m].iter().map(|u| theta_apply(p.n, p.t, u)).collect::<Result<Vec<_>, _>>()?;
    us.truncate(p.k);
    Ok((us, vs))
}

fn reduction(cfg: &ExperimentConfig, p: &ReductionParams) -> Result<Run, CliError> {
    let mut run = Run::new();
    usage_if(p.k < 2 || p.m < 2, || "the gap pairs need k, m >= 2".into())?;
    let (us, vs) = reduction_inputs(cfg, p)?;
    let x = clock_shift_pair(p.k)?;
    let y = clock_shift_pair(p.m)?;
    let asm = match p.mode {
        ReductionMode::F3 => reduction_assembly_f3(&us, &vs, &x, &y)?,
        ReductionMode::F2 => reduction_assembly_f2(&us, &vs, &x, &y)?,
    };
    let entries = asm.commutator_norms()?;
    let mut csv = Csv::new(&["alpha", "beta", "commutator_hs_norm"]);
    for e in &entries {
        csv.row(&[e.alpha.to_string(), e.beta.to_string(), fmt_f64(e.hs_norm)]);
    }
    let (lhs, rhs) = reduction_identity(&asm, &us, &vs)?;
    let residual = (lhs - rhs).abs();
    run.measurements
        .real("lhs", lhs)
        .real("rhs", rhs)
        .real("residual", residual)
        .real("max_commutator_hs_norm", entries.iter().map(|e| e.hs_norm).fold(0.0, f64::max));
    run.flag("identity", residual <= cfg.tolerance("identity") * (1.0 + rhs));
    run.flag("disjoint_exact", entries.iter().filter(|e| e.disjoint).all(|e| e.hs_norm == 0.0));
    run.artifact = csv.0;
    Ok(run)
}

fn nearcomm(cfg: &ExperimentConfig, p: &NearcommParams) -> Result<Run, CliError> {
    let mut run = Run::new();
    let (a, b) = read_cmat2(&p.input).map_err(|e| CliError::usage(format!("{}: {e}", p.input.display())))?;
    let d0 = defect(&a, &b)?;
    let trace = alternating_descent(&a, &b, p.sweeps, p.restarts, Seed(cfg.seed))?;
    let (fa, fb) = &trace.final_pair;
    let scale = (hs_norm(&a) * hs_norm(&b)).max(1.0);
    let final_defect = defect(fa, fb)?.max(defect(fa, &fb.adjoint())?);
    run.measurements
        .real("defect", d0)
        .real("distance_upper_sq", trace.objective())
        .real("distance_upper_sum", trace.distance_sum())
        .real("final_defect", final_defect)
        .int("sweeps_used", trace.sweeps_used as u64)
        .int("restarts", trace.restarts as u64)
        .int("converged", trace.converged as u64);
    run.flag("monotone_ok", trace.monotone_ok);
    run.flag("final_feasible", final_defect <= cfg.tolerance("feasible") * scale);
    run.artifact = json::to_string(&json!({
        "defect": json::real(d0),
        "distance_upper_sq": json::real(trace.objective()),
        "distance_upper_sum": json::real(trace.distance_sum()),
        "sweeps_used": trace.sweeps_used,
        "restarts": trace.restarts,
        "monotone_ok": trace.monotone_ok,
    }));
    Ok(run)
}

fn invariant_suite(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let mut run = Run::new();
    let checks = invariants::run_suite(Seed(cfg.seed), |k| cfg.tolerance(k));
    let mut rows = Vec::new();
    for c in &checks {
        run.measurements.real(c.name, c.value);
        run.flag(c.name, c.passed);
        rows.push(json!({
            "module": c.module,
            "name": c.name,
            "value": json::real(c.value),
            "tolerance": json::real(c.tolerance),
            "passed": c.passed,
            "error": c.error,
        }));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    run.artifact = json::to_string(&json!({
        "seed": cfg.seed,
        "checks": rows,
        "passed": passed,
        "failed": checks.len() - passed,
    }));
    Ok(run)
}
