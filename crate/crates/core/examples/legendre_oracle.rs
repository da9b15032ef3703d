// The exact ε = 0 geodesic for S¹-invariant data via Legendre duals, compared
// with regularized solutions as ε decreases.

use std::error::Error;
use std::path::Path;

use conic_geodesic::config::parse_config_str;
use conic_geodesic::experiment::oracle_distances;
use conic_geodesic::solver::continuity_run;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config_str(
        "grid.u_max = 10\ngrid.n_u = 65\ngrid.n_t = 33\nboundary.t0 = zero\nboundary.t1 = bump\n\
         boundary.bump = 0.3\nweight.kind = unit\nschedule.eps_list = 1e-1, 1e-2, 1e-3\n",
        Path::new("."),
    )?;
    let run = continuity_run(&cfg.problem()?, &cfg.schedule()?);
    for (r, d) in run.results.iter().zip(oracle_distances(&cfg, &run)?) {
        println!("eps = {:.0e}: sup |φ - oracle| = {}", r.entry.eps, d.map_or("n/a".into(), |d| format!("{d:.3e}")));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
