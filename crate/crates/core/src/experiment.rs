//! Experiment orchestration behind the command line: solves, sweeps, audits,
//! oracle comparisons and the lemma suite, with their on-disk artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::lemma_suite;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimates::{build_report, legendre_oracle, supremum_drift, AuditRequest, EstimateReport};
use crate::field::{PotentialGrid, Rhs};
use crate::io::write_atomic;
use crate::solver::{continuity_run, solve_entry, ContinuityRun, ScheduleEntry};

/// What a command printed and whether every verdict passed.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandReport {
    pub pass: bool,
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

impl CommandReport {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new(), artifacts: Vec::new() }
    }

    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_atomic(&path, bytes)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn json(&mut self, path: PathBuf, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

fn grid_path(out: &Path, m: usize) -> PathBuf {
    out.join(format!("grid_{m}.csv"))
}

fn report_path(out: &Path, m: usize) -> PathBuf {
    out.join(format!("report_{m}.json"))
}

/// Audits one solved grid against the configuration.
pub fn audit_grid(cfg: &RunConfig, grid: &PotentialGrid, rhs: &Rhs, entry: &ScheduleEntry) -> Result<EstimateReport> {
    build_report(&AuditRequest {
        grid,
        rhs,
        eta: entry.eta,
        beta: cfg.beta,
        mu: cfg.gradient_mu,
        deltas: &cfg.holder_deltas,
        mp_discretization: 0.0,
        truncation_drift: None,
        config: cfg.to_json(),
    })
}

/// Runs the continuity family and audits every completed entry.
pub fn sweep(cfg: &RunConfig) -> Result<(ContinuityRun, Vec<EstimateReport>)> {
    let problem = cfg.problem()?;
    let run = continuity_run(&problem, &cfg.schedule()?);
    let reports = run
        .results
        .iter()
        .map(|r| audit_grid(cfg, &r.outcome.grid, &r.rhs, &r.entry))
        .collect::<Result<Vec<_>>>()?;
    Ok((run, reports))
}

/// `sup |φ_ε − φ_oracle|` for each entry, the oracle using the entry's
/// boundary smoothing. `None` where the slices are not strictly convex.
pub fn oracle_distances(cfg: &RunConfig, run: &ContinuityRun) -> Result<Vec<Option<f64>>> {
    let (b0, b1) = cfg.boundaries()?;
    run.results
        .iter()
        .map(|r| match legendre_oracle(&b0, &b1, r.entry.smoothing_k, &r.outcome.grid.geo, cfg.n_t, cfg.oracle_n_x) {
            Ok(o) => r.outcome.grid.max_abs_diff(&o).map(Some),
            Err(Error::NonConvexBoundary { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"))
}

fn monotone_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Solves the last schedule entry from a cold start.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<CommandReport> {
    let mut rep = CommandReport::new();
    let problem = cfg.problem()?;
    let sched = cfg.schedule()?;
    let m = sched.len() - 1;
    let entry = sched.entries[m];
    let result = solve_entry(&problem, &entry).map_err(|e| Error::Entry { entry: m, source: Box::new(e) })?;
    let o = &result.outcome;
    rep.write(grid_path(out, m), o.grid.to_csv().as_bytes())?;
    rep.json(
        out.join("convergence.json"),
        &serde_json::json!({
            "entry": m,
            "eps": entry.eps,
            "eta": entry.eta,
            "iterations": o.iterations,
            "final_residual": o.final_residual,
            "residual_history": o.residual_history,
            "damping_history": o.damping_history,
            "admissible": o.admissible,
            "roundoff_floor": o.roundoff_floor,
            "config": cfg.to_json(),
        }),
    )?;
    rep.pass = o.admissible;
    rep.lines.push(format!(
        "solve eps={:e}: {} iterations, max|residual| = {:.3e}, admissible = {}",
        entry.eps, o.iterations, o.final_residual, o.admissible
    ));
    Ok(rep)
}

/// Runs the continuity family, writing per-entry grids and reports, the
/// combined series and the convergence log.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<CommandReport> {
    let mut rep = CommandReport::new();
    let (run, mut reports) = sweep(cfg)?;
    if cfg.truncation_drift {
        let (_, wide) = sweep(&cfg.extended(2.0)?)?;
        for (r, w) in reports.iter_mut().zip(&wide) {
            r.truncation_drift = Some(supremum_drift(r, w).0);
        }
    }
    let distances = oracle_distances(cfg, &run)?;
    let mut series = String::from("eps,eta,sup_dt_phi,sup_weighted_lap,holder_seminorm,oracle_distance\n");
    for (m, (r, report)) in run.results.iter().zip(&reports).enumerate() {
        rep.write(grid_path(out, m), r.outcome.grid.to_csv().as_bytes())?;
        rep.json(report_path(out, m), report)?;
        let holder = report.holder_seminorm.values().next().copied();
        let _ = writeln!(
            series,
            "{:e},{:e},{:e},{:e},{},{}",
            report.eps,
            report.eta,
            report.sup_dt_phi,
            report.sup_weighted_lap,
            fmt_opt(holder),
            fmt_opt(distances[m])
        );
        rep.pass &= report.all_pass();
        let failed: Vec<&str> = report.verdicts.iter().filter(|(_, v)| *v != "pass").map(|(k, _)| k.as_str()).collect();
        rep.lines.push(format!(
            "entry {m} eps={:e}: {} iterations, residual {:.2e}, sup w = {:.4}, oracle distance {}{}",
            report.eps,
            r.outcome.iterations,
            r.outcome.final_residual,
            report.sup_weighted_lap,
            fmt_opt(distances[m]),
            if failed.is_empty() { String::new() } else { format!(", FAILED {failed:?}") }
        ));
    }
    rep.write(out.join("series.csv"), series.as_bytes())?;
    rep.json(out.join("series.json"), &reports)?;
    rep.write(out.join("convergence.jsonl"), run.convergence_log().as_bytes())?;
    if let Some(e) = &run.failure {
        rep.pass = false;
        rep.lines.push(format!("run stopped: {e}"));
    }
    Ok(rep)
}

/// Re-audits stored grids (from `audit.grids`, or `grid_<entry>.csv` in the
/// output directory), pairing them with schedule entries in order.
pub fn cmd_audit(cfg: &RunConfig, out: &Path) -> Result<CommandReport> {
    let mut rep = CommandReport::new();
    let problem = cfg.problem()?;
    let sched = cfg.schedule()?;
    let paths: Vec<PathBuf> = if cfg.audit_grids.is_empty() {
        (0..sched.len()).map(|m| grid_path(out, m)).filter(|p| p.exists()).collect()
    } else {
        cfg.audit_grids.clone()
    };
    if paths.is_empty() {
        return Err(Error::Invalid("no grids to audit".into()));
    }
    if paths.len() > sched.len() {
        return Err(Error::Invalid(format!("{} grids for {} schedule entries", paths.len(), sched.len())));
    }
    for (m, path) in paths.iter().enumerate() {
        let entry = sched.entries[m];
        let grid = PotentialGrid::read_csv(path)?;
        if grid.values.dim() != (cfg.n_u, cfg.n_t) {
            return Err(Error::GridMismatch(format!("{} does not match the configured grid", path.display())));
        }
        let rhs = problem.rhs(&entry)?;
        let report = audit_grid(cfg, &grid, &rhs, &entry)?;
        rep.json(report_path(out, m), &report)?;
        rep.pass &= report.all_pass();
        rep.lines.push(format!(
            "{}: max principle {} ({:?}), verdicts {}",
            path.display(),
            report.verdicts["max_principle"],
            report.mp_branch,
            if report.all_pass() { "pass" } else { "fail" }
        ));
    }
    Ok(rep)
}

/// Runs the sweep and compares every entry with its Legendre oracle.
pub fn cmd_oracle(cfg: &RunConfig, out: &Path) -> Result<CommandReport> {
    let mut rep = CommandReport::new();
    let problem = cfg.problem()?;
    let run = continuity_run(&problem, &cfg.schedule()?);
    let (b0, b1) = cfg.boundaries()?;
    let mut distances = Vec::new();
    for (m, r) in run.results.iter().enumerate() {
        let oracle = legendre_oracle(&b0, &b1, r.entry.smoothing_k, &problem.geo, cfg.n_t, cfg.oracle_n_x)?;
        rep.write(out.join(format!("oracle_{m}.csv")), oracle.to_csv().as_bytes())?;
        let d = r.outcome.grid.max_abs_diff(&oracle)?;
        rep.lines.push(format!("entry {m} eps={:e}: sup|phi - oracle| = {d:.4e}", r.entry.eps));
        distances.push(d);
    }
    let monotone = monotone_decreasing(&distances);
    rep.pass = monotone && run.failure.is_none();
    rep.json(
        out.join("oracle.json"),
        &serde_json::json!({
            "distances": distances,
            "monotone_decrease": if monotone { "pass" } else { "fail" },
            "config": cfg.to_json(),
        }),
    )?;
    if let Some(e) = &run.failure {
        rep.lines.push(format!("run stopped: {e}"));
    }
    rep.lines.push(format!("monotone decrease: {}", if monotone { "pass" } else { "fail" }));
    Ok(rep)
}

/// Runs the lemma-oracle suite and prints a pass/fail table.
pub fn cmd_lemmas(out: &Path) -> Result<CommandReport> {
    let mut rep = CommandReport::new();
    let checks = lemma_suite()?;
    for c in &checks {
        rep.pass &= c.pass;
        rep.lines.push(format!("{:<44} {}  {}", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail));
    }
    rep.json(out.join("lemmas.json"), &checks)?;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Audit,
    Oracle,
    Lemmas,
}

/// Parses the configuration, applies `refine` halvings and runs `cmd`.
pub fn run_command(cmd: Command, config: &Path, out: &Path, refine: u32) -> Result<CommandReport> {
    let cfg = crate::config::parse_config(config)?.refined(refine);
    match cmd {
        Command::Solve => cmd_solve(&cfg, out),
        Command::Sweep => cmd_sweep(&cfg, out),
        Command::Audit => cmd_audit(&cfg, out),
        Command::Oracle => cmd_oracle(&cfg, out),
        Command::Lemmas => cmd_lemmas(out),
    }
}
