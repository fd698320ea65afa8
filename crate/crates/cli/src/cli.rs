//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use acnum_core::io::write_cmat2_file;
use acnum_core::linalg::Seed;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{
    extract_tolerances, params_to_map, CommandKind, DeformCheckParams, DimBoundsParams, ExperimentConfig,
    GapSearchParams, NearcommParams, NoParams, ReductionParams, WitnessAuditParams,
};
use crate::error::CliError;
use crate::experiments::{execute, Outcome};
use crate::pairs::{haar_pair, normal_plus_delta_pair, witness_pair};
use crate::record::ExperimentRecord;
use crate::report::{aggregate, load_records, parse_plot_spec, plot_data, table_csv};
use crate::sweep::{expand, parse_assignment, parse_axis, run_points};

#[derive(Parser, Debug)]
#[command(
    name = "acnum",
    version,
    about = "Numerical experiments on almost-commuting matrices",
    after_help = "Tolerances of a command can be overridden with --tol.<key>=<value>.\n\
                  ACNUM_THREADS caps the number of worker threads.\n\
                  Exit codes: 0 all checks pass, 1 a check or a numerical routine failed, 2 usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search Haar pairs for a spectral-gap certificate.
    GapSearch(Experiment<GapSearchParams>),
    /// Commutator norms of the witness family against the 4|t| cap.
    WitnessAudit(Experiment<WitnessAuditParams>),
    /// Deformation identities, norm identity and length-cutoff bound on random inputs.
    DeformCheck(Experiment<DeformCheckParams>),
    /// Upper and lower dimension bounds as n grows, with the first crossing.
    DimBounds(Experiment<DimBoundsParams>),
    /// Commutators of a reduction assembly and the averaged-commutator identity.
    Reduction(Experiment<ReductionParams>),
    /// Nearest commuting pair search for a CMAT2 input.
    Nearcomm(Experiment<NearcommParams>),
    /// Seeded property checks of every module.
    Invariants(Experiment<NoParams>),
    /// Run an experiment described by a JSON config file.
    Run(RunArgs),
    /// Run a config over a grid of parameter values.
    Sweep(SweepArgs),
    /// Aggregate experiment records into one CSV and optional plot data.
    Report(ReportArgs),
    /// Write a CMAT2 input pair for `nearcomm`.
    MakePair(MakePairArgs),
}

#[derive(Args, Debug)]
pub struct Output {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Artifact file (JSON or CSV); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File for the experiment record (config echo, measurements, pass flags).
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Experiment<T: Args> {
    #[command(flatten)]
    pub params: T,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Base config; `--command` starts from an empty one instead.
    #[arg(long, required_unless_present = "command", conflicts_with = "command")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<CommandKind>,
    /// Fixed parameter, `key=value` (repeatable).
    #[arg(long = "set")]
    pub set: Vec<String>,
    /// Swept parameter, `key=v1,v2,...` (repeatable; all combinations are run).
    #[arg(long = "vary")]
    pub vary: Vec<String>,
    /// Root seed; point i runs with `seed XOR i`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for per-point artifacts and records and the aggregated `sweep.csv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Record files (a record or an array of records each).
    pub inputs: Vec<PathBuf>,
    /// Aggregated CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot columns as `x:y`.
    #[arg(long, requires = "plot_out")]
    pub plot: Option<String>,
    /// Two-column plot data file.
    #[arg(long, requires = "plot")]
    pub plot_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
pub enum PairKind {
    /// Built from witness generators: `--n`, `--t`.
    Witness,
    /// Built from four Haar unitaries: `--dim`, `--seed`.
    Haar,
    /// Perturbed commuting normal pair: `--dim`, `--blocks`, `--delta`, `--seed`.
    NormalDelta,
}

#[derive(Args, Debug)]
pub struct MakePairArgs {
    #[arg(long, value_enum)]
    pub kind: PairKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.2)]
    pub t: f64,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (without the program name), runs the command and returns
/// the exit code.
pub fn run_cli(args: Vec<String>) -> i32 {
    match try_run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("acnum: {e}");
            e.exit_code()
        }
    }
}

fn try_run(args: Vec<String>) -> Result<i32, CliError> {
    configure_threads()?;
    let (args, tolerances) = extract_tolerances(args)?;
    let cli = match Cli::try_parse_from(std::iter::once("acnum".to_string()).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let no_tolerances = |what: &str| -> Result<(), CliError> {
        if tolerances.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!("{what} takes no --tol options")))
        }
    };
    match cli.command {
        Command::GapSearch(e) => run_config(&experiment_config(CommandKind::GapSearch, &e, tolerances)),
        Command::WitnessAudit(e) => run_config(&experiment_config(CommandKind::WitnessAudit, &e, tolerances)),
        Command::DeformCheck(e) => run_config(&experiment_config(CommandKind::DeformCheck, &e, tolerances)),
        Command::DimBounds(e) => run_config(&experiment_config(CommandKind::DimBounds, &e, tolerances)),
        Command::Reduction(e) => run_config(&experiment_config(CommandKind::Reduction, &e, tolerances)),
        Command::Nearcomm(e) => run_config(&experiment_config(CommandKind::Nearcomm, &e, tolerances)),
        Command::Invariants(e) => run_config(&experiment_config(CommandKind::Invariants, &e, tolerances)),
        Command::Run(r) => {
            let mut cfg = read_config(&r.config)?;
            cfg.tolerances.extend(tolerances);
            if let Some(seed) = r.seed {
                cfg.seed = seed;
            }
            if r.out.is_some() {
                cfg.out = r.out;
            }
            if r.record.is_some() {
                cfg.record = r.record;
            }
            run_config(&cfg)
        }
        Command::Sweep(s) => sweep(s, tolerances),
        Command::Report(r) => {
            no_tolerances("report")?;
            report(r)
        }
        Command::MakePair(m) => {
            no_tolerances("make-pair")?;
            make_pair(m)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("ACNUM_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("ACNUM_THREADS must be a positive integer, got `{text}`")))?;
    // A pool that is already configured (a second call in one process) stays as it is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn experiment_config<T: Args + Serialize>(
    command: CommandKind,
    e: &Experiment<T>,
    tolerances: BTreeMap<String, f64>,
) -> ExperimentConfig {
    ExperimentConfig {
        command,
        params: params_to_map(&e.params),
        seed: e.output.seed,
        out: e.output.out.clone(),
        record: e.output.record.clone(),
        tolerances,
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Runs one experiment, writes its artifact and record, and returns 0 when
/// every check passed and 1 otherwise.
pub fn run_config(cfg: &ExperimentConfig) -> Result<i32, CliError> {
    let outcome = execute(cfg)?;
    deliver(cfg, &outcome)?;
    Ok(if outcome.record.passed() { 0 } else { 1 })
}

fn deliver(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_text(path, &outcome.artifact)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.artifact.as_bytes())?;
            stdout.flush()?;
        }
    }
    if let Some(path) = &cfg.record {
        write_text(path, &outcome.record.to_json())?;
    }
    eprintln!("{}", outcome.record.summary());
    Ok(())
}

fn sweep(s: SweepArgs, tolerances: BTreeMap<String, f64>) -> Result<i32, CliError> {
    let mut base = match (&s.config, s.command) {
        (Some(path), _) => read_config(path)?,
        (None, Some(kind)) => ExperimentConfig::new(kind),
        (None, None) => return Err(CliError::usage("sweep needs --config or --command")),
    };
    base.tolerances.extend(tolerances);
    if let Some(seed) = s.seed {
        base.seed = seed;
    }
    base.out = None;
    base.record = None;
    for spec in &s.set {
        let (k, v) = parse_assignment(spec)?;
        base.params.insert(k, v);
    }
    let axes = s.vary.iter().map(|spec| parse_axis(spec)).collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&s.out_dir).map_err(|e| CliError::usage(format!("{}: {e}", s.out_dir.display())))?;
    let mut points = expand(&base, &axes);
    let name = base.command.name();
    let ext = base.command.extension();
    for (i, p) in points.iter_mut().enumerate() {
        p.out = Some(s.out_dir.join(format!("{name}-{i:04}.{ext}")));
        p.record = Some(s.out_dir.join(format!("{name}-{i:04}.record.json")));
    }
    let results = run_points(&points);
    let mut records: Vec<ExperimentRecord> = Vec::with_capacity(results.len());
    let mut worst = 0;
    for (p, result) in points.iter().zip(results) {
        match result {
            Ok(outcome) => {
                deliver(p, &outcome)?;
                if !outcome.record.passed() {
                    worst = worst.max(1);
                }
                records.push(outcome.record);
            }
            Err(e) => {
                eprintln!("acnum: seed {}: {e}", p.seed);
                worst = worst.max(e.exit_code());
            }
        }
    }
    if records.len() == points.len() {
        write_text(&s.out_dir.join("sweep.csv"), &table_csv(&aggregate(&records)?))?;
    }
    Ok(worst)
}

fn report(r: ReportArgs) -> Result<i32, CliError> {
    let records = load_records(&r.inputs)?;
    let table = aggregate(&records)?;
    let csv = table_csv(&table);
    match &r.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    if let (Some(spec), Some(path)) = (&r.plot, &r.plot_out) {
        let (x, y) = parse_plot_spec(spec)?;
        write_text(path, &plot_data(&table, &x, &y)?)?;
    }
    Ok(0)
}

fn make_pair(m: MakePairArgs) -> Result<i32, CliError> {
    let (a, b) = match m.kind {
        PairKind::Witness => witness_pair(m.n, m.t)?,
        PairKind::Haar => haar_pair(m.dim, Seed(m.seed))?,
        PairKind::NormalDelta => normal_plus_delta_pair(m.dim, m.blocks, m.delta, Seed(m.seed))?,
    };
    write_cmat2_file(&m.out, &a, &b)?;
    eprintln!("wrote {}x{} pair to {}", a.nrows(), a.ncols(), m.out.display());
    Ok(0)
}
