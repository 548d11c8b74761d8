//! Shear flows of the strips, their composition, and the quantities attached
//! to the generating isotopy.
//!
//! A strip flow translates points along the strip's core direction with
//! speed `c′(h)`, where `c` is the piecewise-linear profile across the strip.
//! Since `h` is preserved, every strip map is an exact shear with unit
//! Jacobian, and its inverse is the same shear run backwards in time.
//!
//! Each strip is generated by the potential `F = χ·σ·C(ℓ − offset)` on the
//! plane, where `ℓ` is the strip's transverse coordinate, `C(u) = ⌊u⌋ + c(frac u)`
//! climbs by one across every lattice copy of the band, and `χ` is `+1` for
//! `H`, `−1` for `V` and `D`, so that `X = (∂F/∂y, −∂F/∂x)` is the flow field.

use rayon::prelude::*;
use thiserror::Error;

use crate::surface::{Direction, Point, Scenario, Segment, StripSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("drift {drift:.6} per step is not below the minimal overlap spacing {spacing:.6}")]
    ValidityWindowExceeded { drift: f64, spacing: f64 },
    #[error("invalid flow argument: {0}")]
    InvalidArgument(String),
}

/// Piecewise-linear cutoff across a strip: flat `0` on `[0, δ′]`, a linear
/// ramp to `1`, flat `1` on `[w − δ′, w]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub width: f64,
    pub smoothing: f64,
}

impl Profile {
    pub fn new(width: f64, smoothing: f64) -> Profile {
        assert!(width > 2.0 * smoothing && smoothing >= 0.0, "degenerate profile");
        Profile { width, smoothing }
    }

    pub fn of(strip: &StripSpec) -> Profile {
        Profile::new(strip.width, strip.smoothing)
    }

    pub fn ramp(&self) -> f64 {
        self.width - 2.0 * self.smoothing
    }

    /// `c(h)`, clamped to `[0, 1]` outside `[0, w]`.
    pub fn value(&self, h: f64) -> f64 {
        ((h - self.smoothing) / self.ramp()).clamp(0.0, 1.0)
    }

    /// `c′(h)`, taken from the right at the kinks.
    pub fn velocity(&self, h: f64) -> f64 {
        if h >= self.smoothing && h < self.width - self.smoothing {
            1.0 / self.ramp()
        } else {
            0.0
        }
    }

    /// `C(u) = ⌊u⌋ + c(frac u)`: climbs by one across each band translate.
    pub fn lifted(&self, u: f64) -> f64 {
        let f = u.floor();
        f + self.value(u - f)
    }
}

pub fn profile_velocity(pr: &Profile, h: f64) -> f64 {
    pr.velocity(h)
}

fn chi(direction: Direction) -> f64 {
    match direction {
        Direction::H => 1.0,
        Direction::V | Direction::D => -1.0,
    }
}

/// The time-`t` map of one strip. Points outside the strip are fixed and get
/// no segment.
pub fn apply_strip(strip: &StripSpec, t: f64, p: Point) -> (Point, Option<Segment>) {
    let Some(h) = strip.contains(p) else {
        return (p, None);
    };
    let d = strip.orientation.sign() * t * Profile::of(strip).velocity(h);
    if d == 0.0 {
        return (p, None);
    }
    let (ax, ay) = strip.direction.along();
    let q = p.offset(d * ax, d * ay);
    (q, Some(Segment::new(p, q)))
}

/// One strip move made during a composed step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Move {
    pub strip: usize,
    /// Whether the point sat on the linear ramp (as opposed to a flat margin).
    pub on_ramp: bool,
}

/// `Φ^t = φ_1^t ∘ … ∘ φ_n^t` in strip-list order (the last strip acts first),
/// checking every strip. The reference implementation.
pub fn apply_composed(scenario: &Scenario, t: f64, p: Point) -> (Point, Vec<Segment>) {
    let mut q = p;
    let mut path = Vec::new();
    for strip in scenario.strips.iter().rev() {
        let (next, seg) = apply_strip(strip, t, q);
        q = next;
        path.extend(seg);
    }
    (q, path)
}

/// Per-direction lookup table for the strips of a scenario, so that one
/// composed step costs a few binary searches instead of a scan of all strips.
#[derive(Clone, Debug)]
pub struct StripIndex {
    /// Per direction: `(offset, strip index)` sorted by offset.
    by_direction: [Vec<(f64, usize)>; 3],
}

impl StripIndex {
    pub fn new(scenario: &Scenario) -> StripIndex {
        let mut by_direction: [Vec<(f64, usize)>; 3] = Default::default();
        for (i, s) in scenario.strips.iter().enumerate() {
            by_direction[dir_slot(s.direction)].push((s.offset, i));
        }
        for v in &mut by_direction {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        StripIndex { by_direction }
    }

    /// The strip of `direction` containing `p`, if any. Strips of one
    /// direction are disjoint, so the candidate is the one with the largest
    /// offset not above the transverse coordinate (cyclically).
    pub fn lookup(&self, scenario: &Scenario, direction: Direction, p: Point) -> Option<(usize, f64)> {
        let list = &self.by_direction[dir_slot(direction)];
        if list.is_empty() {
            return None;
        }
        let ell = crate::surface::wrap_unit(direction.transverse(p));
        let k = list.partition_point(|&(off, _)| off <= ell);
        let idx = if k == 0 { list[list.len() - 1].1 } else { list[k - 1].1 };
        scenario.strips[idx].contains(p).map(|h| (idx, h))
    }

    /// Same map as [`apply_composed`]. Reports each strip whose band
    /// contained the point when it was applied.
    pub fn step(
        &self,
        scenario: &Scenario,
        t: f64,
        p: Point,
        mut on_visit: impl FnMut(Move, Option<Segment>),
    ) -> Point {
        let mut q = p;
        // strips with index ≥ `pos` have been applied
        let mut pos = scenario.strips.len();
        loop {
            let mut next: Option<(usize, f64)> = None;
            for d in Direction::ALL {
                if let Some((i, h)) = self.lookup(scenario, d, q) {
                    if i < pos && next.is_none_or(|(j, _)| i > j) {
                        next = Some((i, h));
                    }
                }
            }
            let Some((i, h)) = next else {
                return q;
            };
            let strip = &scenario.strips[i];
            let v = Profile::of(strip).velocity(h);
            let d = strip.orientation.sign() * t * v;
            let seg = if d != 0.0 {
                let (ax, ay) = strip.direction.along();
                let r = q.offset(d * ax, d * ay);
                let seg = Segment::new(q, r);
                q = r;
                Some(seg)
            } else {
                None
            };
            on_visit(Move { strip: i, on_ramp: v > 0.0 }, seg);
            pos = i;
        }
    }
}

fn dir_slot(d: Direction) -> usize {
    match d {
        Direction::H => 0,
        Direction::V => 1,
        Direction::D => 2,
    }
}

/// A time step of the composed flow of one scenario.
#[derive(Clone, Copy, Debug)]
pub struct FlowStep<'a> {
    pub scenario: &'a Scenario,
    pub t: f64,
}

impl<'a> FlowStep<'a> {
    /// Rejects steps outside `(0, τ_max]`, where `τ_max` keeps the drift
    /// below the minimal overlap spacing.
    pub fn new(scenario: &'a Scenario, t: f64) -> Result<FlowStep<'a>, FlowError> {
        if !(t > 0.0) {
            return Err(FlowError::InvalidArgument(format!("step {t} must be positive")));
        }
        check_validity_window(scenario, t)?;
        Ok(FlowStep { scenario, t })
    }

    pub fn apply(&self, p: Point) -> (Point, Vec<Segment>) {
        apply_composed(self.scenario, self.t, p)
    }
}

/// Largest drift, in loop-parameter units, of one step of length `t`.
pub fn drift(scenario: &Scenario, t: f64) -> f64 {
    scenario
        .strips
        .iter()
        .map(|s| t / s.ramp_width())
        .fold(0.0, f64::max)
}

pub fn check_validity_window(scenario: &Scenario, t: f64) -> Result<(), FlowError> {
    let drift = drift(scenario, t);
    let spacing = scenario.validation.min_overlap_spacing;
    if drift >= spacing {
        return Err(FlowError::ValidityWindowExceeded { drift, spacing });
    }
    Ok(())
}

/// Hamiltonian of a single strip on the plane cover.
pub fn strip_potential(strip: &StripSpec, p: Point) -> f64 {
    let u = strip.direction.transverse(p) - strip.offset;
    chi(strip.direction) * strip.orientation.sign() * Profile::of(strip).lifted(u)
}

fn raw_generator(scenario: &Scenario, t: f64, p: Point) -> f64 {
    let mut q = p;
    let mut g = 0.0;
    for strip in &scenario.strips {
        g += strip_potential(strip, q);
        q = apply_strip(strip, -t, q).0;
    }
    g
}

/// `G(t)(p) = F₁(p) + F₂(φ₁^{−t} p) + F₃(φ₂^{−t} φ₁^{−t} p) + …`, the
/// generator of `s ↦ Φ^s` at time `t`, normalized to vanish on the hole.
pub fn generator_value(scenario: &Scenario, t: f64, p: Point) -> f64 {
    raw_generator(scenario, t, p) - raw_generator(scenario, t, Point::new(0.0, 0.0))
}

/// The combinatorial oscillation bound of one copy: the potential is a signed
/// sum of unit steps, so its oscillation is at most the number of steps.
pub fn copy_oscillation_bound(scenario: &Scenario) -> f64 {
    (0..scenario.copies)
        .map(|c| scenario.strips.iter().filter(|s| s.copy_id == c).count() as f64)
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoferBound {
    /// Riemann sum of the sampled oscillation of `G(t)` over `[0, τ]`.
    pub numeric: f64,
    pub k: f64,
    /// `2Kτ`.
    pub analytic: f64,
}

/// Midpoint times in `[0, tau]`.
fn time_nodes(tau: f64, samples: usize) -> impl Iterator<Item = f64> {
    (0..samples).map(move |j| (j as f64 + 0.5) / samples as f64 * tau)
}

/// Cell-centre grid on the fundamental square, row-major.
fn space_nodes(n: usize) -> impl IndexedParallelIterator<Item = Point> {
    (0..n * n).into_par_iter().map(move |k| {
        let (i, j) = (k % n, k / n);
        Point::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64)
    })
}

/// Oscillation `max G(t) − min G(t)` over an `n × n` grid.
pub fn oscillation(scenario: &Scenario, t: f64, n: usize) -> f64 {
    let (lo, hi) = space_nodes(n)
        .map(|p| generator_value(scenario, t, p))
        .fold(|| (0.0f64, 0.0f64), |(lo, hi), g| (lo.min(g), hi.max(g)))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    hi - lo
}

/// Upper bound for the Hofer length of `s ↦ Φ^s`, `s ∈ [0, τ]`.
pub fn hofer_upper_bound(
    scenario: &Scenario,
    tau: f64,
    time_samples: usize,
    space_samples: usize,
) -> Result<HoferBound, FlowError> {
    let k = copy_oscillation_bound(scenario);
    if scenario.strips.is_empty() {
        return Ok(HoferBound {
            numeric: 0.0,
            k,
            analytic: 0.0,
        });
    }
    check_validity_window(scenario, tau)?;
    if time_samples == 0 || space_samples == 0 {
        return Err(FlowError::InvalidArgument("sample counts must be positive".into()));
    }
    let numeric = time_nodes(tau, time_samples)
        .map(|t| oscillation(scenario, t, space_samples))
        .sum::<f64>()
        * tau
        / time_samples as f64;
    Ok(HoferBound {
        numeric,
        k,
        analytic: 2.0 * k * tau,
    })
}

/// Pairwise sum in a fixed tree order, so results do not depend on how work
/// was split.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `∫₀^τ ∫_M G(t) ω dt` by midpoint rules in time and space.
pub fn calabi(scenario: &Scenario, tau: f64, time_samples: usize, space_samples: usize) -> Result<f64, FlowError> {
    if scenario.strips.is_empty() {
        return Ok(0.0);
    }
    check_validity_window(scenario, tau)?;
    if time_samples == 0 || space_samples == 0 {
        return Err(FlowError::InvalidArgument("sample counts must be positive".into()));
    }
    let n = space_samples;
    let per_time: Vec<f64> = time_nodes(tau, time_samples)
        .map(|t| {
            let vals: Vec<f64> = space_nodes(n).map(|p| generator_value(scenario, t, p)).collect();
            pairwise_sum(&vals) / (n * n) as f64
        })
        .collect();
    Ok(pairwise_sum(&per_time) * tau / time_samples as f64)
}

/// Signed flux `(through a, through b)`: each strip contributes its
/// orientation times the homology class of its core.
pub fn flux_check(scenario: &Scenario) -> (f64, f64) {
    flux_of(scenario.strips.iter())
}

pub fn flux_per_copy(scenario: &Scenario) -> Vec<(f64, f64)> {
    (0..scenario.copies)
        .map(|c| flux_of(scenario.strips.iter().filter(|s| s.copy_id == c)))
        .collect()
}

fn flux_of<'a>(strips: impl Iterator<Item = &'a StripSpec>) -> (f64, f64) {
    strips.fold((0.0, 0.0), |(fa, fb), s| {
        let (ha, hb) = s.direction.homology();
        let sg = s.orientation.sign();
        (fa + sg * ha as f64, fb + sg * hb as f64)
    })
}

/// Measured flux of one strip: signed area crossing a transversal per unit
/// time, `σ ∫ c′ dh`, by the midpoint rule.
pub fn measured_strip_flux(strip: &StripSpec, samples: usize) -> f64 {
    let pr = Profile::of(strip);
    let dh = strip.width / samples as f64;
    let v: Vec<f64> = (0..samples).map(|k| pr.velocity((k as f64 + 0.5) * dh) * dh).collect();
    strip.orientation.sign() * pairwise_sum(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{HoledTorus, OffsetRule, ScenarioParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scenario(n: usize, period: f64, m: u32) -> Scenario {
        Scenario::build(&ScenarioParams::new(n, period, m, 0.02)).unwrap()
    }

    /// Integrates `ṗ = X(p)` with many small Euler steps, `X` read off the
    /// profile velocity at the current point. Exact up to roundoff for a shear.
    fn integrate_strip(strip: &StripSpec, t: f64, p: Point, steps: usize) -> Point {
        let dt = t / steps as f64;
        let (ax, ay) = strip.direction.along();
        let mut q = p;
        for _ in 0..steps {
            let v = match strip.contains(q) {
                Some(h) => strip.orientation.sign() * Profile::of(strip).velocity(h),
                None => 0.0,
            };
            q = q.offset(v * dt * ax, v * dt * ay);
        }
        q
    }

    #[test]
    fn profile_examples() {
        let pr = Profile::new(0.05, 0.0);
        assert_eq!(profile_velocity(&pr, 0.025), 1.0 / 0.05);
        let sm = Profile::new(0.05, 0.01);
        assert_eq!(sm.velocity(0.0), 0.0);
        assert_eq!(sm.velocity(0.005), 0.0);
        for pr in [pr, sm] {
            let n = 100_000;
            let integral: f64 = (0..n).map(|k| pr.velocity((k as f64 + 0.5) * pr.width / n as f64)).sum::<f64>()
                * pr.width
                / n as f64;
            assert!((integral - 1.0).abs() < 1e-9);
            assert_eq!(pr.value(0.0), 0.0);
            assert_eq!(pr.value(pr.width), 1.0);
        }
    }

    #[test]
    fn full_period_is_one_loop() {
        let s = StripSpec::new(Direction::H, 0.3, 0.05, 0.0, 0);
        let p = Point::new(0.4, 0.32);
        let (q, seg) = apply_strip(&s, 0.05, p);
        let seg = seg.unwrap();
        assert!((q.x - (p.x + 1.0)).abs() < 1e-12 && q.y == p.y);
        assert_eq!(crate::surface::crossing_word(&seg).unwrap().to_string(), "a");
    }

    #[test]
    fn d_strip_matches_integrator() {
        let s = StripSpec::new(Direction::D, 0.4, 0.05, 0.0, 0);
        let tau = 0.05 / 16.0;
        let p = s.chart_point(0.37, 0.02);
        let (q, _) = apply_strip(&s, tau, p);
        let r = integrate_strip(&s, tau, p, 10_000);
        assert!((q.x - r.x).abs() < 1e-12 && (q.y - r.y).abs() < 1e-12);
        // 1/m of a loop backwards along (1, 1)
        assert!((q.x - p.x + 1.0 / 16.0).abs() < 1e-12);
        assert!((q.y - p.y + 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn outside_points_are_fixed() {
        let sc = scenario(1, 0.05, 10);
        let p = Point::new(0.05, 0.1);
        assert!(sc.membership(p).is_empty());
        let (q, path) = apply_composed(&sc, sc.tau, p);
        assert_eq!(q, p);
        assert!(path.is_empty());
    }

    #[test]
    fn index_matches_naive_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, period, m) in [(1, 0.16, 16), (3, 0.05, 20), (8, 0.02, 128)] {
            let sc = scenario(n, period, m);
            let index = StripIndex::new(&sc);
            for _ in 0..20_000 {
                let p = Point::new(rng.random(), rng.random());
                let (a, path) = apply_composed(&sc, sc.tau, p);
                let mut segs = Vec::new();
                let b = index.step(&sc, sc.tau, p, |_, s| segs.extend(s));
                assert_eq!(a, b);
                assert_eq!(path, segs);
            }
        }
    }

    /// Moves a point makes, as a signature of the linear piece it sits in.
    fn signature(sc: &Scenario, index: &StripIndex, p: Point) -> Vec<(usize, bool)> {
        let mut v = Vec::new();
        index.step(sc, sc.tau, p, |m, _| v.push((m.strip, m.on_ramp)));
        v
    }

    #[test]
    fn composed_map_preserves_area() {
        let sc = scenario(2, 0.08, 32);
        let index = StripIndex::new(&sc);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-6;
        let mut checked = 0;
        while checked < 1000 {
            // bias half the draws into strips so overlaps are exercised
            let p = if checked % 2 == 0 {
                Point::new(rng.random(), rng.random())
            } else {
                let s = &sc.strips[rng.random_range(0..sc.strips.len())];
                s.chart_point(rng.random(), rng.random::<f64>() * s.width)
            };
            let stencil = [p.offset(eps, 0.0), p.offset(-eps, 0.0), p.offset(0.0, eps), p.offset(0.0, -eps)];
            let sig = signature(&sc, &index, p);
            if stencil.iter().any(|&q| signature(&sc, &index, q) != sig) {
                continue;
            }
            let f = |q: Point| apply_composed(&sc, sc.tau, q).0;
            let (px, mx, py, my) = (f(stencil[0]), f(stencil[1]), f(stencil[2]), f(stencil[3]));
            let j11 = (px.x - mx.x) / (2.0 * eps);
            let j21 = (px.y - mx.y) / (2.0 * eps);
            let j12 = (py.x - my.x) / (2.0 * eps);
            let j22 = (py.y - my.y) / (2.0 * eps);
            let det = j11 * j22 - j12 * j21;
            assert!((det - 1.0).abs() < 1e-8, "det {det} at {p:?}");
            checked += 1;
        }
    }

    #[test]
    fn composed_inverse_is_identity() {
        let sc = scenario(4, 0.04, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let p = Point::new(rng.random(), rng.random());
            let (q, _) = apply_composed(&sc, sc.tau, p);
            let mut r = q;
            for s in &sc.strips {
                r = apply_strip(s, -sc.tau, r).0;
            }
            assert!((r.x - p.x).abs() < 1e-12 && (r.y - p.y).abs() < 1e-12);
        }
    }

    #[test]
    fn generator_vanishes_on_hole() {
        let sc = scenario(2, 0.08, 32);
        for t in [0.0, sc.tau / 2.0, sc.tau] {
            assert_eq!(generator_value(&sc, t, Point::new(0.005, 0.003)), 0.0);
            assert_eq!(generator_value(&sc, t, Point::new(0.999, 0.001)), 0.0);
        }
    }

    /// Integrates `dG = −X_y dx + X_x dy` from the hole along an axis-parallel
    /// path, with `X` the composed strip velocity field at `t = 0`.
    fn path_integral_potential(sc: &Scenario, p: Point, steps: usize) -> f64 {
        let field = |q: Point| -> (f64, f64) {
            let mut v = (0.0, 0.0);
            for s in &sc.strips {
                if let Some(h) = s.contains(q) {
                    let speed = s.orientation.sign() * Profile::of(s).velocity(h);
                    let (ax, ay) = s.direction.along();
                    v.0 += speed * ax;
                    v.1 += speed * ay;
                }
            }
            v
        };
        // leave the hole diagonally into the square, then go right, then up
        let start = Point::new(0.03, 0.03);
        let mut g = 0.0;
        let dx = (p.x - start.x) / steps as f64;
        for k in 0..steps {
            let q = Point::new(start.x + (k as f64 + 0.5) * dx, start.y);
            g += -field(q).1 * dx;
        }
        let dy = (p.y - start.y) / steps as f64;
        for k in 0..steps {
            let q = Point::new(p.x, start.y + (k as f64 + 0.5) * dy);
            g += field(q).0 * dy;
        }
        g
    }

    #[test]
    fn generator_matches_flux_path_integral() {
        let sc = scenario(1, 0.05, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(sc.membership(Point::new(0.03, 0.03)).is_empty());
        for _ in 0..200 {
            let p = Point::new(0.03 + 0.96 * rng.random::<f64>(), 0.03 + 0.96 * rng.random::<f64>());
            let g = generator_value(&sc, 0.0, p);
            let oracle = path_integral_potential(&sc, p, 200_000);
            assert!((g - oracle).abs() < 1e-3, "{g} vs {oracle} at {p:?}");
        }
    }

    #[test]
    fn single_copy_oscillation_is_at_most_three() {
        let sc = scenario(1, 0.05, 10);
        let osc = oscillation(&sc, 0.0, 400);
        assert!(osc <= 3.0 + 1e-12 && osc > 1.0, "{osc}");
    }

    #[test]
    fn hofer_bound_examples() {
        let sc = scenario(1, 0.16, 16);
        let hb = hofer_upper_bound(&sc, sc.tau, 4, 256).unwrap();
        assert_eq!(hb.k, 3.0);
        assert!(hb.numeric <= hb.analytic * 1.05);
        let empty = Scenario::from_strips(HoledTorus::new(0.02).unwrap(), vec![], 0.05, 10);
        assert_eq!(hofer_upper_bound(&empty, 0.005, 4, 64).unwrap().numeric, 0.0);
        assert_eq!(calabi(&empty, 0.005, 4, 64).unwrap(), 0.0);
        assert!(matches!(
            hofer_upper_bound(&sc, 0.16, 4, 64),
            Err(FlowError::ValidityWindowExceeded { .. })
        ));
    }

    #[test]
    fn hofer_bound_does_not_grow_with_copies() {
        let one = scenario(1, 0.02, 40);
        let two = scenario(2, 0.02, 40);
        let a = hofer_upper_bound(&one, one.tau, 4, 512).unwrap().numeric;
        let b = hofer_upper_bound(&two, two.tau, 4, 512).unwrap().numeric;
        assert!((a - b).abs() <= 0.05 * a, "{a} vs {b}");
    }

    #[test]
    fn calabi_below_hofer() {
        for (n, period, m) in [(1, 0.16, 16), (2, 0.08, 32), (4, 0.04, 64)] {
            let sc = scenario(n, period, m);
            let hb = hofer_upper_bound(&sc, sc.tau, 4, 256).unwrap();
            let cal = calabi(&sc, sc.tau, 4, 256).unwrap();
            assert!(cal.abs() <= hb.numeric, "{cal} vs {}", hb.numeric);
        }
    }

    #[test]
    fn flux_examples() {
        let sc = scenario(3, 0.05, 10);
        assert_eq!(flux_check(&sc), (0.0, 0.0));
        assert!(flux_per_copy(&sc).iter().all(|&f| f == (0.0, 0.0)));
        let lone = Scenario::from_strips(
            HoledTorus::new(0.02).unwrap(),
            vec![StripSpec::new(Direction::H, 0.3, 0.05, 0.0, 0)],
            0.05,
            10,
        );
        assert_eq!(flux_check(&lone), (1.0, 0.0));
        let sm = StripSpec::new(Direction::D, 0.4, 0.05, 0.01, 0);
        assert!((measured_strip_flux(&sm, 100_000) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn validity_window() {
        let sc = scenario(1, 0.05, 10);
        assert!(FlowStep::new(&sc, sc.tau).is_ok());
        assert!(FlowStep::new(&sc, 0.0).is_err());
        assert!(matches!(
            FlowStep::new(&sc, 0.05),
            Err(FlowError::ValidityWindowExceeded { .. })
        ));
    }

    #[test]
    fn pairwise_sum_is_split_independent() {
        let v: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn grid_offsets_param_is_used() {
        let sc = Scenario::build(&ScenarioParams::new(1, 0.05, 10, 0.02).with_offsets(OffsetRule::Grid {
            phase_h: 0.5,
            phase_v: 0.6,
            phase_d: 0.2,
        }))
        .unwrap();
        assert_eq!(sc.strips[0].offset, 0.5);
    }

    proptest! {
        #[test]
        fn shear_times_add(u in 0.0f64..1.0, h in 0.001f64..0.049, t1 in 0.0f64..0.02, t2 in 0.0f64..0.02) {
            let s = StripSpec::new(Direction::V, 0.3, 0.05, 0.0, 0);
            let p = s.chart_point(u, h);
            let two = apply_strip(&s, t2, apply_strip(&s, t1, p).0).0;
            let one = apply_strip(&s, t1 + t2, p).0;
            prop_assert!((two.x - one.x).abs() < 1e-12 && (two.y - one.y).abs() < 1e-12);
        }
    }
}
