// The continuity family: ε decreasing, each entry warm-started from the last.

use std::error::Error;
use std::path::Path;

use conic_geodesic::config::parse_config_str;
use conic_geodesic::experiment::sweep;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = parse_config_str(
        "grid.u_max = 10\ngrid.n_u = 65\ngrid.n_t = 33\ndivisor.beta = 0.5\nschedule.eps_list = 1e-1, 1e-2, 1e-3\n",
        Path::new("."),
    )?;
    let (run, reports) = sweep(&cfg)?;
    if let Some(e) = &run.failure {
        return Err(format!("sweep stopped: {e}").into());
    }
    println!("{:>8} {:>6} {:>10} {:>10} {:>10}", "eps", "iters", "sup w", "sup|φ_t|", "grad");
    for (r, rep) in run.results.iter().zip(&reports) {
        println!(
            "{:>8.0e} {:>6} {:>10.4} {:>10.4} {:>10.4}",
            rep.eps, r.outcome.iterations, rep.sup_weighted_lap, rep.sup_dt_phi, rep.sup_weighted_grad
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
