//! Hamiltonian strip flows on a flat one-holed torus and the quasimorphism
//! they carry.
//!
//! The crate builds `N` copies of three shear strips (classes `a`, `b`, `ab`)
//! whose fluxes cancel, composes their flows, and evaluates the Polterovich
//! quasimorphism `ρ` of the resulting map by tracking exact fundamental-group
//! words of sampled orbits. Next to it sit the Hofer-length upper bound and the
//! Calabi invariant of the generating isotopy, so the growth of `ρ` in `N`
//! can be compared against a bound that does not grow.
//!
//! ```
//! use surface_qm::{CountingQM, Word};
//!
//! let q = CountingQM::new("ab".parse().unwrap()).unwrap();
//! let a: Word = "a".parse().unwrap();
//! let b: Word = "b".parse().unwrap();
//! assert_eq!(q.deficiency(&a, &b), -1.0);
//! ```

pub mod brooks;
pub mod experiment;
pub mod flow;
pub mod keyvalue;
pub mod props;
pub mod rho;
pub mod surface;
pub mod word;

pub use experiment::{ExperimentConfig, ExperimentError, SweepRow, SweepTable};
pub use flow::{FlowError, HoferBound, Profile};
pub use brooks::{count_occurrences, CountingQM, QmError};
pub use surface::{
    crossing_word, closing_word, Direction, HoledTorus, OffsetRule, Orientation, OverlapReport, Point,
    Scenario, ScenarioParams, Segment, StripSpec, SurfaceError, Violation,
};
pub use rho::{Classification, Prediction, RhoError, RhoEstimate, TrajectoryRecord};
pub use word::{Letter, Word, WordError};
