// Monte Carlo estimate of ρ with a per-class breakdown.
//
// ```bash
// cargo run --example rho_estimate
// ```

use std::error::Error;

use surface_qm::rho;
use surface_qm::{Classification, CountingQM, Scenario, ScenarioParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // thin overlaps keep the bad set small
    let sc = Scenario::build(&ScenarioParams::new(1, 0.0005, 40, 0.02))?;
    let q = CountingQM::new("ab".parse()?)?;
    let est = rho::rho_estimate(&sc, &q, 4 * sc.m, 4000, 1)?;
    let pred = rho::rho_predicted(&sc, &q);
    println!("ρ = {:+.5e} ± {:.1e}, predicted {:+.5e}", est.value, est.stderr, pred.value);
    for (class, t) in &est.per_class {
        println!("  class {class:>4}: area {:.4e}, contribution {:+.4e}", t.area, t.contribution);
    }
    println!("  bad: area {:.2e}, contribution {:+.2e}", est.bad_area, est.bad_contribution);

    // orbits in the horizontal strip that never land in an overlap close up
    // after m steps; starts on the 1/m lattice through an overlap do not
    let h = &sc.strips[0];
    for k in 0..8 {
        let rec = rho::iterate_word(&sc, h.chart_point((k as f64 + 0.37) / 8.0, 0.5 * h.width), sc.m)?;
        let kind = match &rec.classification {
            Classification::Periodic { m, class } => format!("period {m}, class {class}"),
            other => format!("{other:?}"),
        };
        println!("  H orbit from u = {:.3}: {kind}", (k as f64 + 0.37) / 8.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("rho estimate example");
}
