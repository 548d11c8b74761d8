mod word_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/word_algebra.rs"));
}

mod counting_quasimorphism {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/counting_quasimorphism.rs"));
}

mod crossing_words {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/crossing_words.rs"));
}

mod scenario_builder {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_builder.rs"));
}

mod hamiltonian_bounds {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hamiltonian_bounds.rs"));
}

mod rho_estimate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rho_estimate.rs"));
}

#[test]
fn word_algebra_runs() {
    word_algebra::run_example().unwrap();
}

#[test]
fn counting_quasimorphism_runs() {
    counting_quasimorphism::run_example().unwrap();
}

#[test]
fn crossing_words_runs() {
    crossing_words::run_example().unwrap();
}

#[test]
fn scenario_builder_runs() {
    scenario_builder::run_example().unwrap();
}

#[test]
fn hamiltonian_bounds_runs() {
    hamiltonian_bounds::run_example().unwrap();
}

#[test]
fn rho_estimate_runs() {
    rho_estimate::run_example().unwrap();
}
