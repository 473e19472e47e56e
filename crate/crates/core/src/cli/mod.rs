//! Command-line front end.
//!
//! Each subcommand runs one computation from an optional flat config and
//! writes `<command>.csv` plus `<command>.summary.json` into the output
//! directory. Exit codes: 0 success, 1 invalid input, 2 solver failure,
//! 3 a gated property failed.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::RunConfig;

use crate::coefficients::check_ellipticity;
use crate::grid::{full_norm, GridField, NormKind};
use crate::solver::{picard_full, picard_limit, IterationHistory};
use crate::studies::{
    epsilon_sweep, interior_scan, operator_checks, rate_fit, resolvent_study, truncation_study, Bounds, Cell, Check,
    CsvTable, Problem, ResolventStudy, Summary,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "anisolab", version, about = "Anisotropic singular-limit laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` configuration file; defaults are used without it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for the CSV and JSON outputs (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads for the ε-loop of sweeps and truncation studies.
    #[arg(long, global = true, default_value_t = 1)]
    pub parallel: usize,

    /// Overrides the `seed` key of the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the ε-problem at `epsilon`.
    Solve,
    /// Solve the limit problem slice by slice.
    Limit,
    /// Sweep `epsilons` and compare with the limit solution.
    Sweep,
    /// Fit convergence rates on the band `ω₁′ × ω₂`.
    Rate,
    /// Interior H¹ norms against the global X₁-gradient.
    Interior,
    /// Cut-off problems for `ns` × `truncation_epsilons`.
    Truncation,
    /// Resolvent approximation for `resolvent_ns`.
    Resolvent,
    /// Ellipticity, admissibility and sampled operator properties.
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Limit => "limit",
            Command::Sweep => "sweep",
            Command::Rate => "rate",
            Command::Interior => "interior",
            Command::Truncation => "truncation",
            Command::Resolvent => "resolvent",
            Command::Check => "check",
        }
    }
}

/// Result of a command that ran to completion.
#[derive(Debug)]
pub struct Outcome {
    pub table: CsvTable,
    pub summary: Summary,
    /// Some ε-rows could not be solved; their cells are `NA`.
    pub solver_failed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.solver_failed {
            EXIT_SOLVER
        } else if !self.summary.pass {
            EXIT_PROPERTY
        } else {
            EXIT_OK
        }
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_INVALID
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", p.display())))?;
            RunConfig::parse(&text)
        }
    }
}

/// Run the parsed command line: compute, write outputs, return the exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(mut c) => {
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            c
        }
        Err(e) => {
            eprintln!("anisolab: {e}");
            return EXIT_INVALID;
        }
    };
    let name = cli.command.name();
    match execute(cli.command, &cfg, cli.parallel) {
        Ok(outcome) => {
            let written = write_atomic(&cli.out, &format!("{name}.csv"), &outcome.table.render(&cfg.echo_lines()))
                .and_then(|_| write_atomic(&cli.out, &format!("{name}.summary.json"), &outcome.summary.to_json()));
            if let Err(e) = written {
                eprintln!("anisolab: {e}");
                return EXIT_INVALID;
            }
            for c in &outcome.summary.checks {
                eprintln!(
                    "{:<5} {}{} measured {:.6e} threshold {:.6e}",
                    if c.pass { "ok" } else { "FAIL" },
                    c.name,
                    if c.gated { "" } else { " (info)" },
                    c.measured,
                    c.threshold
                );
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("anisolab: {e}");
            if e.is_solver_failure() {
                let summary = failure_summary(name, &e);
                // best effort: the failure itself is what gets reported
                let _ = write_atomic(&cli.out, &format!("{name}.summary.json"), &summary.to_json());
            }
            error_exit_code(&e)
        }
    }
}

/// Parse `args` (including the program name) and run. Help and version
/// requests exit with 0, malformed command lines with 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

fn failure_summary(command: &str, e: &Error) -> Summary {
    let history = match e {
        Error::PicardNonConvergence { history, .. } => serde_json::to_value(history.as_ref()).unwrap_or_default(),
        _ => serde_json::Value::Null,
    };
    let mut s = Summary::new(command, Vec::new(), json!({ "error": e.to_string(), "history": history }));
    s.pass = false;
    s
}

/// Write `contents` to `dir/name` through a temporary file and a rename, so
/// readers never observe a half-written file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Run one command without touching the file system.
pub fn execute(command: Command, cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    let threads = threads.max(1);
    match command {
        Command::Solve | Command::Limit => solve(command, cfg),
        Command::Sweep => {
            let problem = cfg.problem()?;
            let report = epsilon_sweep(&problem, threads)?;
            Ok(Outcome {
                table: report.to_csv(),
                solver_failed: !report.all_ok(),
                summary: Summary::new("sweep", report.checks(), serde_json::to_value(&report).unwrap_or_default()),
            })
        }
        Command::Rate => {
            let report = epsilon_sweep(&cfg.problem()?, threads)?;
            let fit = rate_fit(&report, cfg.rate_drop)?;
            let mut checks = vec![all_rows_check(&report)];
            checks.extend(fit.checks());
            Ok(Outcome {
                table: fit.to_csv(&report),
                solver_failed: !report.all_ok(),
                summary: Summary::new("rate", checks, json!({ "fit": fit, "sweep": report })),
            })
        }
        Command::Interior => {
            let report = epsilon_sweep(&cfg.problem()?, threads)?;
            let scan = interior_scan(&report);
            let mut checks = vec![all_rows_check(&report)];
            checks.extend(scan.checks());
            Ok(Outcome {
                table: scan.to_csv(&report),
                solver_failed: !report.all_ok(),
                summary: Summary::new(
                    "interior",
                    checks,
                    json!({ "scan": scan, "interior_region": report.interior, "grid": report.grid }),
                ),
            })
        }
        Command::Truncation => {
            let problem = cfg.problem()?;
            let study = truncation_study(&problem, &cfg.truncation_epsilons, &cfg.ns, threads)?;
            Ok(Outcome {
                table: study.to_csv(),
                solver_failed: false,
                summary: Summary::new("truncation", study.checks(), serde_json::to_value(&study).unwrap_or_default()),
            })
        }
        Command::Resolvent => {
            let grid = cfg.grid()?;
            if cfg.resolvent_f.is_empty() {
                return Err(Error::Config("resolvent_f lists no source".into()));
            }
            let mut table = ResolventStudy::csv_table();
            let mut checks = Vec::new();
            let mut studies = Vec::new();
            for &source in &cfg.resolvent_f {
                let s = resolvent_study(&grid, source, &cfg.resolvent_ns)?;
                s.append_csv(&mut table);
                checks.extend(s.checks());
                studies.push(s);
            }
            Ok(Outcome {
                table,
                solver_failed: false,
                summary: Summary::new("resolvent", checks, json!({ "studies": studies })),
            })
        }
        Command::Check => check(cfg),
    }
}

fn all_rows_check(report: &crate::studies::ConvergenceReport) -> Check {
    let failed = report.rows.iter().filter(|r| !r.ok).count();
    Check::gated("all_rows_solved", failed == 0, failed as f64, 0.0)
}

fn solve(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    let problem = cfg.problem()?;
    let solver = problem.solver;
    let limit = command == Command::Limit;
    let (u, history) = if limit {
        picard_limit(&problem.grid, &problem.blocks, &problem.spec, &solver)?
    } else {
        picard_full(&problem.grid, &problem.blocks, &problem.spec, &solver)?
    };
    let bounds = problem.bounds()?;
    let eps = if limit { 0.0 } else { solver.epsilon };
    let checks = solution_checks(&problem, &bounds, &u, eps);
    let name = command.name();
    let mut table = CsvTable::new(
        "solution",
        &["epsilon", "n", "n1", "n2", "beta", "i", "j", "x1", "x2", "u"],
    );
    let g = problem.grid;
    for (k, &v) in u.values().iter().enumerate() {
        let (i, j) = g.node(k);
        table.push(vec![
            eps.into(),
            Cell::Na,
            g.n1().into(),
            g.n2().into(),
            solver.beta.into(),
            i.into(),
            j.into(),
            g.x1(i).into(),
            g.x2(j).into(),
            v.into(),
        ]);
    }
    Ok(Outcome {
        table,
        solver_failed: false,
        summary: Summary::new(name, checks, solution_details(&problem, &bounds, &history, eps)),
    })
}

fn solution_checks(problem: &Problem, bounds: &Bounds, u: &GridField, eps: f64) -> Vec<Check> {
    let r = problem.constants().map(|c| c.r).unwrap_or(2.0);
    let slack = 1.0 + crate::studies::sweep::BOUND_SLACK;
    let lr = full_norm(u, NormKind::Lr(r));
    let l2 = full_norm(u, NormKind::L2);
    let gx2 = full_norm(u, NormKind::GradX2);
    let mut v = vec![
        Check::gated("lr_bound", lr <= bounds.lr * slack, lr, bounds.lr),
        Check::gated("l2_bound", l2 <= bounds.l2 * slack, l2, bounds.l2),
        Check::gated("gradx2_bound", gx2 <= bounds.grad * slack, gx2, bounds.grad),
    ];
    if eps > 0.0 {
        let e1 = eps * full_norm(u, NormKind::GradX1);
        v.push(Check::gated("eps_gradx1_bound", e1 <= bounds.grad * slack, e1, bounds.grad));
    }
    v
}

fn solution_details(problem: &Problem, bounds: &Bounds, history: &IterationHistory, eps: f64) -> serde_json::Value {
    json!({
        "epsilon": eps,
        "grid": problem.grid,
        "constants": problem.constants().ok(),
        "bounds": bounds,
        "iterations": history.iterations(),
        "contraction_guaranteed": history.contraction_guaranteed,
        "change_ratios": history.change_ratios(),
        "history": history,
    })
}

fn check(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let blocks = cfg.blocks()?;
    let spec = cfg.spec()?;
    let ell = check_ellipticity(&blocks, &grid)?;
    if !ell.pass {
        return Err(Error::Validation(format!(
            "coefficient matrix '{}' is not uniformly elliptic with lambda = {}: measured minimum eigenvalue {}",
            blocks.name, ell.lambda_declared, ell.lambda_measured
        )));
    }
    let solver = cfg.solver();
    solver.validate()?;
    let constants = crate::nonlinear_ops::operator_constants(&spec, &grid)?;
    solver.check_admissible(&constants)?;

    let mut checks = vec![
        Check::gated("ellipticity", true, ell.lambda_measured, ell.lambda_declared),
        Check::gated("beta_admissible", true, solver.beta, constants.beta_min),
        Check::info("contraction_guaranteed", solver.beta > constants.k, solver.beta, constants.k)
            .with_note("beta > K makes the Picard map a contraction"),
    ];
    checks.extend(operator_checks(&spec, &grid, cfg.samples, cfg.seed)?);

    let mut table = CsvTable::new(
        "checks",
        &["epsilon", "n", "n1", "n2", "beta", "check", "gated", "pass", "measured", "threshold"],
    );
    for c in &checks {
        table.push(vec![
            Cell::Na,
            Cell::Na,
            grid.n1().into(),
            grid.n2().into(),
            solver.beta.into(),
            c.name.as_str().into(),
            c.gated.into(),
            c.pass.into(),
            c.measured.into(),
            c.threshold.into(),
        ]);
    }
    Ok(Outcome {
        table,
        solver_failed: false,
        summary: Summary::new(
            "check",
            checks,
            json!({ "ellipticity": ell, "constants": constants, "samples": cfg.samples, "seed": cfg.seed }),
        ),
    })
}
