// One regularized geodesic from a cold start: flat data at t = 0, conical data
// at t = 1, damped Newton down to the roundoff floor.

use std::error::Error;
use std::path::Path;

use conic_geodesic::config::parse_config_str;
use conic_geodesic::solver::solve_entry;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config_str(
        "grid.u_max = 10\ngrid.n_u = 65\ngrid.n_t = 33\ndivisor.beta = 0.75\nschedule.eps_list = 1e-2\n",
        Path::new("."),
    )?;
    let problem = cfg.problem()?;
    let entry = cfg.schedule()?.entries[0];
    let r = solve_entry(&problem, &entry)?;
    let o = &r.outcome;
    println!("eps = {:e}, eta = {:.3e}, k = {}", entry.eps, entry.eta, entry.smoothing_k);
    for (n, (res, step)) in o.residual_history.iter().zip(&o.damping_history).enumerate() {
        println!("  iteration {n:>2}: max|residual| = {res:.3e}, step = {step}");
    }
    println!("converged in {} iterations, final {:.2e}, admissible = {}", o.iterations, o.final_residual, o.admissible);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
