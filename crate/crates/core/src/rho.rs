//! Estimating the Polterovich quasimorphism `ρ(Φ^τ)` of a scenario map.
//!
//! Each sampled point is iterated under the composed map while the cut
//! crossings of its path are accumulated into an exact word. The point is then
//!
//! * stationary, if the map never moves it (it contributes nothing);
//! * periodic, if it stays inside its own strip, meets no other strip at any
//!   application time and returns after `m` steps: it contributes
//!   `r̄(class)/m`, with `class` the word of one period;
//! * bad otherwise: it contributes `r̄(word)/K` for the word of `K` iterates
//!   closed up by a hole-avoiding chain.
//!
//! Points are drawn uniformly inside each strip and weighted by strip area;
//! a point lying in two strips is drawn from both, so each draw carries half
//! the weight.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::brooks::CountingQM;
use crate::flow::{self, pairwise_sum, FlowError, StripIndex};
use crate::surface::{closing_word, for_each_crossing, Point, Scenario, SurfaceError, NUDGE};
use crate::word::Word;

/// Return tolerance of the periodicity test.
pub const RETURN_TOLERANCE: f64 = 1e-9;
/// Nudges tried before a degenerate crossing is reported.
pub const NUDGE_RETRIES: usize = 3;
/// Assumed bound on `|r̄(word)|/K` for a bad point: inside the validity window
/// an iterate adds at most a couple of letters, and a pattern occurrence
/// needs at least two of them.
pub const BAD_CONTRIBUTION_PER_AREA: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhoError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("total flux ({0}, {1}) is nonzero: the map is not Hamiltonian")]
    NonzeroFlux(f64, f64),
    #[error("invalid estimator argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Stationary,
    /// Returns after `m` steps; `class` is the word of one period.
    Periodic { m: u32, class: Word },
    Bad,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub start: Point,
    pub end: Point,
    pub iterates: u32,
    /// Crossing word of the `K`-iterate path closed back to `start`.
    pub word: Word,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassTally {
    pub area: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Keyed by the conjugacy representative of the period word.
    pub per_class: BTreeMap<Word, ClassTally>,
    pub bad_area: f64,
    pub bad_contribution: f64,
    /// `bad_area` times [`BAD_CONTRIBUTION_PER_AREA`].
    pub bad_contribution_bound: f64,
    pub periodic_area: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    /// `τ·N·(r̄(a) + r̄(b) − r̄(ab))`.
    pub value: f64,
    /// `bad_area_budget` times [`BAD_CONTRIBUTION_PER_AREA`]; reported only.
    pub error_radius: f64,
}

pub fn rho_predicted(scenario: &Scenario, q: &CountingQM) -> Prediction {
    let a: Word = "a".parse().unwrap();
    let b: Word = "b".parse().unwrap();
    let d_r = q.deficiency(&a, &b);
    Prediction {
        value: scenario.tau * scenario.copies as f64 * d_r,
        error_radius: scenario.validation.bad_area_budget * BAD_CONTRIBUTION_PER_AREA,
    }
}

/// Iterates one point, carrying the word and the periodicity bookkeeping.
struct Orbit<'a> {
    scenario: &'a Scenario,
    index: &'a StripIndex,
}

struct PeriodTest {
    home: Option<usize>,
    foreign: bool,
    moved: bool,
}

impl Orbit<'_> {
    /// One composed step from `p`; letters go to `word`.
    fn step(&self, p: Point, word: &mut Word, test: &mut PeriodTest) -> Result<Point, SurfaceError> {
        let mut err = None;
        let q = self.index.step(self.scenario, self.scenario.tau, p, |mv, seg| {
            if test.home != Some(mv.strip) {
                test.foreign = true;
            }
            if let Some(seg) = seg {
                test.moved = true;
                if err.is_none() {
                    if let Err(e) = for_each_crossing(&seg, |l| word.push(l)) {
                        err = Some(e);
                    }
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(q),
        }
    }

    /// Runs `k` iterates; classification uses the first `m`. Stops after `m`
    /// when `early_exit` is set and the point is already known periodic.
    fn run(&self, start: Point, k: u32, early_exit: bool) -> Result<TrajectoryRecord, SurfaceError> {
        let m = self.scenario.m;
        let members = self.scenario.membership(start);
        let mut test = PeriodTest {
            home: (members.len() == 1).then(|| members[0].0),
            foreign: false,
            moved: false,
        };
        let mut word = Word::identity();
        let mut p = start;
        let mut period_word = None;
        let mut periodic = false;
        for it in 1..=k {
            p = self.step(p, &mut word, &mut test)?;
            if it == 1 && !test.moved {
                // a point that does not move is fixed for good
                return Ok(TrajectoryRecord {
                    start,
                    end: start,
                    iterates: k,
                    word: Word::identity(),
                    classification: Classification::Stationary,
                });
            }
            if it == m {
                let dx = p.x - start.x;
                let dy = p.y - start.y;
                let returned = (dx - dx.round()).abs() < RETURN_TOLERANCE
                    && (dy - dy.round()).abs() < RETURN_TOLERANCE;
                periodic = returned && !test.foreign && test.home.is_some();
                if periodic {
                    let (close, _) = closing_word(&self.scenario.surface, p, start)?;
                    let closed = &word * &close;
                    if early_exit {
                        let reps = k / m;
                        return Ok(TrajectoryRecord {
                            start,
                            end: p.wrapped(),
                            iterates: k,
                            word: closed.pow(reps as i64),
                            classification: Classification::Periodic { m, class: closed },
                        });
                    }
                    period_word = Some(closed);
                }
            }
            p = p.wrapped();
        }
        let (close, _) = closing_word(&self.scenario.surface, p, start)?;
        word.append(&close);
        let classification = match period_word {
            Some(class) if periodic => Classification::Periodic { m, class },
            _ => Classification::Bad,
        };
        Ok(TrajectoryRecord {
            start,
            end: p.wrapped(),
            iterates: k,
            word,
            classification,
        })
    }
}

fn nudged(p: Point, attempt: usize) -> Point {
    let e = NUDGE * attempt as f64;
    Point::new(p.x + e, p.y + 0.618_033_988_749_895 * e).wrapped()
}

fn iterate_with(scenario: &Scenario, index: &StripIndex, p: Point, k: u32, early_exit: bool) -> Result<TrajectoryRecord, SurfaceError> {
    let orbit = Orbit { scenario, index };
    let mut last = None;
    for attempt in 0..=NUDGE_RETRIES {
        match orbit.run(nudged(p, attempt), k, early_exit) {
            Ok(r) => return Ok(r),
            Err(e @ SurfaceError::DegenerateCrossing { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Iterates `p` `K` times with step `τ` and records its closed word and class.
pub fn iterate_word(scenario: &Scenario, p: Point, k: u32) -> Result<TrajectoryRecord, SurfaceError> {
    if k == 0 {
        return Err(SurfaceError::InvalidParameter("K must be at least 1".into()));
    }
    iterate_with(scenario, &StripIndex::new(scenario), p.wrapped(), k, false)
}

/// Contribution of one classified point, per unit area.
pub fn contribution(q: &CountingQM, record: &TrajectoryRecord) -> f64 {
    match &record.classification {
        Classification::Stationary => 0.0,
        Classification::Periodic { m, class } => q.homogenized(class) / *m as f64,
        Classification::Bad => q.homogenized(&record.word) / record.iterates as f64,
    }
}

fn check_inputs(scenario: &Scenario, k: u32) -> Result<(), RhoError> {
    let (fa, fb) = flow::flux_check(scenario);
    if fa.abs() > 1e-12 || fb.abs() > 1e-12 {
        return Err(RhoError::NonzeroFlux(fa, fb));
    }
    if k == 0 || k % scenario.m != 0 {
        return Err(RhoError::InvalidArgument(format!(
            "K = {k} must be a positive multiple of m = {}",
            scenario.m
        )));
    }
    flow::check_validity_window(scenario, scenario.tau)?;
    Ok(())
}

struct Sample {
    weight: f64,
    value: f64,
    record_class: Classification,
}

#[derive(Default)]
struct Tally {
    per_class: BTreeMap<Word, ClassTally>,
    bad_area: f64,
    bad_contribution: f64,
    periodic_area: f64,
}

impl Tally {
    fn add(&mut self, s: &Sample) {
        let c = s.weight * s.value;
        match &s.record_class {
            Classification::Stationary => {}
            Classification::Periodic { class, .. } => {
                self.periodic_area += s.weight;
                let e = self
                    .per_class
                    .entry(class.conjugacy_representative())
                    .or_insert(ClassTally {
                        area: 0.0,
                        contribution: 0.0,
                    });
                e.area += s.weight;
                e.contribution += c;
            }
            Classification::Bad => {
                self.bad_area += s.weight;
                self.bad_contribution += c;
            }
        }
    }
}

/// Draws sample `j` of strip `s`: a uniform point of the strip.
pub fn strip_sample(scenario: &Scenario, seed: u64, strip: usize, j: usize) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(strip as u64);
    rng.set_word_pos(j as u128 * 4);
    let u: f64 = rng.random();
    let h: f64 = rng.random();
    let s = &scenario.strips[strip];
    s.chart_point(u, h * s.width)
}

/// Stratified Monte Carlo estimate of `ρ(Φ^τ)`.
pub fn rho_estimate(
    scenario: &Scenario,
    q: &CountingQM,
    k: u32,
    samples_per_strip: usize,
    seed: u64,
) -> Result<RhoEstimate, RhoError> {
    if scenario.strips.is_empty() {
        return Ok(RhoEstimate {
            value: 0.0,
            stderr: 0.0,
            per_class: BTreeMap::new(),
            bad_area: 0.0,
            bad_contribution: 0.0,
            bad_contribution_bound: 0.0,
            periodic_area: 0.0,
            samples: 0,
        });
    }
    check_inputs(scenario, k)?;
    if samples_per_strip < 2 {
        return Err(RhoError::InvalidArgument("need at least two samples per strip".into()));
    }
    let index = StripIndex::new(scenario);
    let n = samples_per_strip;
    let mut tally = Tally::default();
    let mut value = 0.0;
    let mut variance = 0.0;
    for (si, strip) in scenario.strips.iter().enumerate() {
        let samples: Vec<Sample> = (0..n)
            .into_par_iter()
            .map(|j| {
                let p = strip_sample(scenario, seed, si, j);
                let record = iterate_with(scenario, &index, p, k, true)?;
                let multiplicity = scenario.membership(record.start).len().max(1) as f64;
                Ok(Sample {
                    weight: strip.width / n as f64 / multiplicity,
                    value: contribution(q, &record),
                    record_class: record.classification,
                })
            })
            .collect::<Result<_, SurfaceError>>()?;
        // per-draw values of the stratum mean estimator
        let x: Vec<f64> = samples.iter().map(|s| s.weight * n as f64 * s.value).collect();
        let mean = pairwise_sum(&x) / n as f64;
        let dev: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
        variance += pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64;
        value += mean;
        for s in &samples {
            tally.add(s);
        }
    }
    Ok(RhoEstimate {
        value,
        stderr: variance.sqrt(),
        per_class: tally.per_class,
        bad_area: tally.bad_area,
        bad_contribution: tally.bad_contribution,
        bad_contribution_bound: tally.bad_area * BAD_CONTRIBUTION_PER_AREA,
        periodic_area: tally.periodic_area,
        samples: n * scenario.strips.len(),
    })
}

/// Full enumeration: every cell centre of an `n × n` grid is iterated and
/// weighted by the cell area. No sampling error, only discretization error.
pub fn rho_grid_enumeration(scenario: &Scenario, q: &CountingQM, k: u32, n: usize) -> Result<f64, RhoError> {
    if scenario.strips.is_empty() {
        return Ok(0.0);
    }
    check_inputs(scenario, k)?;
    let index = StripIndex::new(scenario);
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let p = Point::new(((c % n) as f64 + 0.5) / n as f64, ((c / n) as f64 + 0.5) / n as f64);
            if scenario.membership(p).is_empty() {
                return Ok(0.0);
            }
            let record = iterate_with(scenario, &index, p, k, true)?;
            Ok(contribution(q, &record))
        })
        .collect::<Result<_, SurfaceError>>()?;
    Ok(pairwise_sum(&values) / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{Direction, HoledTorus, OffsetRule, ScenarioParams};

    fn qm(s: &str) -> CountingQM {
        CountingQM::new(s.parse().unwrap()).unwrap()
    }

    fn scenario(n: usize, period: f64, m: u32) -> Scenario {
        Scenario::build(&ScenarioParams::new(n, period, m, 0.02)).unwrap()
    }

    /// A point of strip `s` whose `m`-step orbit meets no other strip.
    fn clean_point(sc: &Scenario, s: usize) -> Point {
        let strip = &sc.strips[s];
        for k in 0..1000 {
            let p = strip.chart_point(k as f64 / 1000.0 + 1e-4, strip.width * 0.5);
            let r = iterate_word(sc, p, sc.m).unwrap();
            if matches!(r.classification, Classification::Periodic { .. }) {
                return p;
            }
        }
        panic!("no clean orbit on strip {s}");
    }

    #[test]
    fn stationary_points() {
        let sc = scenario(1, 0.05, 10);
        let r = iterate_word(&sc, Point::new(0.05, 0.1), 30).unwrap();
        assert_eq!(r.classification, Classification::Stationary);
        assert!(r.word.is_identity());
    }

    #[test]
    fn periodic_classes_per_direction() {
        let sc = scenario(1, 0.05, 10);
        let expected = ["a", "b", "BA"];
        for (s, want) in expected.iter().enumerate() {
            assert_eq!(sc.strips[s].direction, Direction::ALL[s]);
            let p = clean_point(&sc, s);
            let r = iterate_word(&sc, p, 3 * sc.m).unwrap();
            let Classification::Periodic { m, class } = &r.classification else {
                panic!("not periodic");
            };
            assert_eq!(*m, 10);
            let want: Word = want.parse().unwrap();
            assert_eq!(class.conjugacy_representative(), want.conjugacy_representative());
            assert_eq!(r.word.conjugacy_representative(), want.pow(3).conjugacy_representative());
        }
    }

    #[test]
    fn period_word_matches_oracle_on_k_word() {
        let sc = scenario(2, 0.04, 16);
        let q = qm("ab");
        let index = StripIndex::new(&sc);
        let k = 4 * sc.m;
        for s in 0..sc.strips.len() {
            for j in 0..50 {
                let p = strip_sample(&sc, 9, s, j);
                let r = iterate_with(&sc, &index, p, k, false).unwrap();
                if let Classification::Periodic { m, class } = &r.classification {
                    let exact = q.homogenized(class) / *m as f64;
                    let oracle = q.homogenize_oracle(&r.word, 1) / k as f64;
                    assert!((exact - oracle).abs() <= 1.0 / k as f64 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn empty_scenario_is_zero() {
        let sc = Scenario::from_strips(HoledTorus::new(0.02).unwrap(), vec![], 0.05, 10);
        let est = rho_estimate(&sc, &qm("ab"), 40, 1000, 1).unwrap();
        assert_eq!((est.value, est.stderr), (0.0, 0.0));
        let p = rho_predicted(&sc, &qm("ab"));
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn prediction_examples() {
        let sc = scenario(4, 0.04, 64);
        let p = rho_predicted(&sc, &qm("ab"));
        assert!((p.value + 4.0 * sc.tau).abs() < 1e-15);
        assert_eq!(rho_predicted(&sc, &qm("abAB")).value, 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let sc = scenario(1, 0.05, 10);
        assert!(matches!(
            rho_estimate(&sc, &qm("ab"), 15, 100, 1),
            Err(RhoError::InvalidArgument(_))
        ));
        let lone = Scenario::from_strips(sc.surface, vec![sc.strips[0].clone()], 0.05, 10);
        assert!(matches!(rho_estimate(&lone, &qm("ab"), 10, 100, 1), Err(RhoError::NonzeroFlux(..))));
    }

    #[test]
    fn small_overlap_estimate_matches_prediction() {
        let sc = Scenario::build(&ScenarioParams::new(1, 0.005, 8, 0.02)).unwrap();
        let q = qm("ab");
        let est = rho_estimate(&sc, &q, 32, 4000, 1).unwrap();
        let pred = rho_predicted(&sc, &q);
        assert!(
            (est.value - pred.value).abs() <= 3.0 * est.stderr + pred.error_radius,
            "{est:?} vs {pred:?}"
        );
        assert!(est.bad_area <= 2.0 * sc.validation.bad_area_budget);
    }

    #[test]
    fn sample_streams_are_partition_independent() {
        let sc = scenario(1, 0.05, 10);
        let a = strip_sample(&sc, 42, 2, 777);
        let b = strip_sample(&sc, 42, 2, 777);
        assert_eq!(a, b);
        assert_ne!(a, strip_sample(&sc, 42, 1, 777));
        let q = qm("ab");
        let x = rho_estimate(&sc, &q, 40, 500, 3).unwrap();
        let y = rho_estimate(&sc, &q, 40, 500, 3).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn reversal_negates_estimate() {
        let sc = Scenario::build(&ScenarioParams::new(1, 0.01, 8, 0.02).with_offsets(OffsetRule::default())).unwrap();
        let q = qm("ab");
        let fwd = rho_estimate(&sc, &q, 32, 2000, 5).unwrap();
        let rev = rho_estimate(&sc.reversed(), &q, 32, 2000, 5).unwrap();
        let tol = 2.0 * (fwd.stderr.powi(2) + rev.stderr.powi(2)).sqrt();
        assert!((fwd.value + rev.value).abs() <= tol + 1e-15, "{} vs {}", fwd.value, rev.value);
    }
}
