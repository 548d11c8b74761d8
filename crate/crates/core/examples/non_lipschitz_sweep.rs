// The ratio ρ/Hofer growing linearly with the number of copies.
//
// Runs the thin-overlap sweep from `configs/small_overlap.cfg` and writes
// the table to `sweep_small_overlap.csv`.
//
// ```bash
// cargo run --release --example non_lipschitz_sweep
// ```

use std::error::Error;

use surface_qm::experiment::{self, ExperimentConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/small_overlap.cfg"))?;
    let config = ExperimentConfig::parse(&text)?;
    let table = experiment::run_sweep(&config)?;
    experiment::write_csv(&table, &config.output)?;
    for r in &table.rows {
        println!(
            "N={}  ρ/(τ·d_r) = {:.3}  ρ/Hofer = {:.4}  (Hofer/τ = {:.3})",
            r.n,
            r.rho.value / (r.tau * -1.0),
            r.ratio,
            r.hofer_numeric / r.tau
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("sweep example");
}
