// Audit one converged grid: the maximum-principle quantity, C⁰ barriers, and
// a corrupted copy that the audit must reject.

use std::error::Error;
use std::path::Path;

use conic_geodesic::config::parse_config_str;
use conic_geodesic::estimates::max_principle_audit;
use conic_geodesic::experiment::{audit_grid, sweep};
use conic_geodesic::solver::{sandwich_check, subsolution, supersolution};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config_str(
        "grid.u_max = 10\ngrid.n_u = 65\ngrid.n_t = 33\nschedule.eps_list = 1e-1, 1e-2\n",
        Path::new("."),
    )?;
    let (run, _) = sweep(&cfg)?;
    let r = run.results.last().ok_or("no converged entry")?;
    let report = audit_grid(&cfg, &r.outcome.grid, &r.rhs, &r.entry)?;
    println!("{}", serde_json::to_string_pretty(&report.verdicts)?);

    let problem = cfg.problem()?;
    let (b0, b1) = problem.slices(r.entry.smoothing_k);
    let sub = subsolution(&problem.geo, cfg.n_t, &b0, &b1, 0.0, Some(&r.rhs))?;
    let sup = supersolution(&problem.geo, cfg.n_t, &b0, &b1)?;
    let sw = sandwich_check(&r.outcome.grid, &sub, &sup, 1e-6)?;
    println!("barriers: max(sub - φ) = {:.2e}, max(φ - super) = {:.2e}", sw.below_sub, sw.above_super);

    let mut bad = r.outcome.grid.clone();
    let (i, j) = (bad.n_u() / 2, bad.n_t / 2);
    bad.values[[i, j]] += 1.0;
    let good = max_principle_audit(&r.outcome.grid, &r.rhs, 0.0);
    let corrupted = max_principle_audit(&bad, &r.rhs, 0.0);
    println!("max principle: converged {:?} ({}), corrupted {:?} ({})", good.branch, good.pass, corrupted.branch, corrupted.pass);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
