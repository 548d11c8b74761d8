// Building strip configurations and inspecting their overlaps.
//
// ```bash
// cargo run --example scenario_builder
// ```

use std::error::Error;

use surface_qm::surface::SurfaceError;
use surface_qm::{Direction, HoledTorus, Scenario, ScenarioParams, StripSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in [1, 2, 4] {
        let sc = Scenario::build(&ScenarioParams::new(n, 0.04 / n as f64, 16 * n as u32, 0.02))?;
        let v = &sc.validation;
        println!(
            "N={n}: {} strips, τ = {:.3e}, {} overlaps, max overlap {:.2e}, bad-area budget {:.3e}",
            sc.strips.len(),
            sc.tau,
            v.pairwise_overlaps.len(),
            v.max_overlap_area,
            v.bad_area_budget
        );
    }

    let sc = Scenario::build(&ScenarioParams::new(1, 0.04, 16, 0.02))?;
    for s in &sc.strips {
        println!("  {:?} offset {:.4} width {:.4} {:?}", s.direction, s.offset, s.width, s.orientation);
    }
    let doc = sc.to_document();
    let back = Scenario::from_document(&doc)?;
    assert_eq!(back.strips.len(), sc.strips.len());

    // a diagonal strip through the hole is rejected
    let bad = vec![StripSpec::new(Direction::D, -0.01, 0.02, 0.0, 0)];
    match Scenario::checked(HoledTorus::new(0.02)?, bad, 0.02, 16) {
        Err(SurfaceError::InfeasibleScenario(v)) => println!("rejected: {v:?}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("scenario builder example");
}
