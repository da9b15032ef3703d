// Conical boundary data on the sphere: admissible coefficients, the profile
// `log|z|²`-reduced potential, and its smoothing at level `k`.

use std::error::Error;

use conic_geodesic::geometry::{c_max, conical_potential, smoothed_boundary, BackgroundGeometry, DivisorData};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let geo = BackgroundGeometry::new(16.0, 129)?;
    for beta in [0.25, 0.5, 0.75] {
        let cmax = c_max(beta, beta, &geo)?;
        let div = DivisorData::symmetric(beta, 0.5 * cmax)?;
        println!("beta = {beta}: c_max = {cmax:.4}, using c = {:.4}", div.c);
        for k in [10u64, 100, 1000, 10000] {
            let gap = geo
                .nodes()
                .iter()
                .map(|&u| (smoothed_boundary(&div, k, u) - conical_potential(&div, u)).abs())
                .fold(0.0, f64::max);
            println!("  k = {k:>5}: sup |smoothed - conical| = {gap:.3e}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
