// Admissible weights: the constant `C₁` in `dd^c log ζ_η ≥ −C₁ ω` for the
// divisor sections, a distance weight and the unit weight.

use std::error::Error;

use conic_geodesic::estimates::chern_bound_check;
use conic_geodesic::geometry::{BackgroundGeometry, DivisorPoint};
use conic_geodesic::weights::{admissibility_audit, WeightKind, WeightSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let geo = BackgroundGeometry::new(16.0, 129)?;
    let weights = [
        ("|s_0|^2", WeightSpec::section(DivisorPoint::Zero, 0.75, 1e-3)?),
        ("|s_0 s_inf|^2", WeightSpec::both_sections(0.75, 1e-3)?),
        ("distance", WeightSpec::new(WeightKind::DistancePower { exponent: 1.0, cap: 1.0 }, 0.75, 1e-3)?),
        ("unit", WeightSpec::constant(1.0, 1.0)?),
    ];
    for (name, w) in weights {
        let c1 = admissibility_audit(&w, &geo)?;
        // the curvature check needs a closed-form log jet
        let margin = match chern_bound_check(&w.clone().certify(&geo)?, &geo) {
            Ok(chern) => format!("{:.3e}", chern.worst()),
            Err(_) => "n/a".to_string(),
        };
        println!("{name:>14}: C1 = {c1:.4}, worst curvature margin = {margin}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
