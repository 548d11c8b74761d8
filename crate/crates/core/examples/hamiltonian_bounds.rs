// Generating Hamiltonian, Hofer length and Calabi invariant of the strip flow.
//
// ```bash
// cargo run --example hamiltonian_bounds
// ```

use std::error::Error;

use surface_qm::flow;
use surface_qm::{Scenario, ScenarioParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let sc = Scenario::build(&ScenarioParams::new(1, 0.04, 16, 0.02))?;
    let step = flow::FlowStep::new(&sc, sc.tau)?;
    let p = sc.strips[0].chart_point(0.25, 0.5 * sc.strips[0].width);
    let (q, crossed) = step.apply(p);
    println!("time-τ map: {p:?} -> {q:?}, {} cut crossing(s)", crossed.len());

    for t in [0.0, 0.5 * sc.tau, sc.tau] {
        println!("G({t:.5}) at p = {:+.5}", flow::generator_value(&sc, t, p));
    }

    let bound = flow::hofer_upper_bound(&sc, sc.tau, 4, 256)?;
    println!("Hofer length ≤ {:.4e} (copy bound K = {}, 2Kτ = {:.4e})", bound.numeric, bound.k, bound.analytic);
    let cal = flow::calabi(&sc, sc.tau, 4, 256)?;
    println!("Calabi {cal:+.4e}");
    println!("flux {:?}", flow::flux_check(&sc));
    assert!(cal.abs() <= bound.numeric);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("hamiltonian bounds example");
}
