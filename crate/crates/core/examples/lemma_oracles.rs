// The one-variable lemmas behind the Hölder estimates, checked on closed forms.

use std::error::Error;

use conic_geodesic::analysis::{
    combined_exponent, gradient_growth_prediction, holder_from_growth, lemma_suite, power_lipschitz_profile,
    sobolev_holder, theta_integral,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let profile = power_lipschitz_profile(0.5, 1e-8, 81)?;
    for mu in [0.4, 0.5, 0.6] {
        let h = holder_from_growth(&profile, mu)?;
        println!("x^0.5, mu = {mu}: bounded = {}, growth slope = {:.3}", h.bounded, h.growth_slope);
    }
    let th = theta_integral(1e-6, 0.7, &profile)?;
    println!("theta(1e-6, 0.7) = {:.6} (exponent {:?})", th.value, th.exponent);
    println!("combined exponent mu=1/2 nu=1/2: {}", combined_exponent(0.5, 0.5)?);
    println!("gradient growth beta=0.75 mu=0.9: {:?}", gradient_growth_prediction(0.75, 0.9)?);
    println!("sobolev (p=3, d=2): {:?}", sobolev_holder(3.0, 2)?);
    for c in lemma_suite()? {
        println!("{:<44} {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
