//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 invalid config, 3 scenario cannot be run, 4 property
//! failure. Errors are also printed to stderr as one JSON record.
//! `SURFACE_QM_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use surface_qm::experiment::{self, ExperimentConfig, ExperimentError, SweepTable};
use surface_qm::flow;
use surface_qm::props::{self, Fixture};

#[derive(Parser)]
#[command(name = "surface-qm", version, about = "Strip flows on a one-holed torus and their quasimorphism")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a config and build every scenario without estimating.
    Validate { config: PathBuf },
    /// Run the first N of the config and print a detailed report.
    Run { config: PathBuf },
    /// Run the full N-sweep and write the CSV table.
    Sweep {
        config: PathBuf,
        /// Overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Props {
        /// Only properties whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Inject a known bug to check that the suite catches it.
        #[arg(long, value_enum, default_value = "none")]
        fixture: FixtureArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureArg {
    None,
    OrientationBug,
    FluxBug,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::parse(&text)
}

fn validate(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    for &n in &config.n_list {
        let sc = experiment::prepare(config, n)?;
        let v = &sc.validation;
        println!(
            "N={n} T={:.6e} m={} tau={:.6e} strips={} overlaps={} triples={} budget={:.4e} drift={:.4e} spacing={:.4e}",
            sc.period,
            sc.m,
            sc.tau,
            sc.strips.len(),
            v.pairwise_overlaps.len(),
            v.triple_overlaps,
            v.bad_area_budget,
            flow::drift(&sc, sc.tau),
            v.min_overlap_spacing
        );
    }
    Ok(())
}

fn run(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    let Some(&n) = config.n_list.first() else {
        return Err(ExperimentError::Config("N_list is empty".into()));
    };
    let (sc, row) = experiment::run_one(config, n)?;
    print!("{}", SweepTable { rows: vec![row.clone()] }.to_csv());
    println!();
    println!("pattern {}  K = {}  samples = {}", config.pattern, row.k, row.rho.samples);
    println!("rho        {:+.6e} ± {:.2e}", row.rho.value, row.rho.stderr);
    println!("predicted  {:+.6e} (radius {:.2e})", row.rho_pred, row.rho_pred_radius);
    println!("bad area   {:.4e} of budget {:.4e}", row.rho.bad_area, sc.validation.bad_area_budget);
    println!("hofer      {:.6e} (2Kτ = {:.6e})", row.hofer_numeric, row.hofer_2ktau);
    println!("calabi     {:+.6e}", row.calabi);
    println!("per class:");
    for (class, t) in &row.rho.per_class {
        let name = if class.is_identity() { "1".to_string() } else { class.to_string() };
        println!("  {name:>8}  area {:.4e}  contribution {:+.4e}", t.area, t.contribution);
    }
    println!("  {:>8}  area {:.4e}  contribution {:+.4e}", "bad", row.rho.bad_area, row.rho.bad_contribution);
    Ok(())
}

fn sweep(config: &ExperimentConfig, output: Option<PathBuf>) -> Result<(), ExperimentError> {
    let table = experiment::run_sweep(config)?;
    let path = output.unwrap_or_else(|| config.output.clone());
    experiment::write_csv(&table, &path)?;
    print!("{}", table.to_csv());
    Ok(())
}

fn report(e: ExperimentError) -> ExitCode {
    eprintln!("error: {e}");
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SURFACE_QM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Validate { config } => load(&config).and_then(|c| validate(&c)),
        Command::Run { config } => load(&config).and_then(|c| run(&c)),
        Command::Sweep { config, output } => load(&config).and_then(|c| sweep(&c, output)),
        Command::Props { filter, fixture } => {
            let fixture = match fixture {
                FixtureArg::None => Fixture::None,
                FixtureArg::OrientationBug => Fixture::OrientationBug,
                FixtureArg::FluxBug => Fixture::FluxBug,
            };
            let r = props::run_property_suite(filter.as_deref(), fixture);
            for p in &r.results {
                let status = if p.passed { "PASS" } else { "FAIL" };
                if p.detail.is_empty() {
                    println!("{status} {}", p.name);
                } else {
                    println!("{status} {}: {}", p.name, p.detail);
                }
            }
            if r.all_passed() {
                return ExitCode::SUCCESS;
            }
            let failed: Vec<&str> = r.results.iter().filter(|p| !p.passed).map(|p| p.name).collect();
            eprintln!(
                "{}",
                serde_json::json!({"error": "PropertyFailure", "failed": failed})
            );
            return ExitCode::from(4);
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}
