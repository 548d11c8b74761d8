//! Fixed-seed invariant checks across all modules, runnable from the CLI.
//!
//! Each property returns `Ok(())` or a short failure description. The
//! [`Fixture`] argument swaps in deliberately broken inputs so the suite can
//! be shown to catch them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brooks::CountingQM;
use crate::flow::{self, StripIndex};
use crate::rho;
use crate::surface::{crossing_word, Point, Scenario, ScenarioParams, Segment};
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fixture {
    #[default]
    None,
    /// The "reversed" scenario keeps its orientations.
    OrientationBug,
    /// The flux check sees a lone strip.
    FluxBug,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropertyReport {
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

type Check = fn(Fixture) -> Result<(), String>;

pub const PROPERTIES: &[(&str, Check)] = &[
    ("word.reduce_idempotent", word_reduce_idempotent),
    ("word.multiply_concatenation", word_multiply_concatenation),
    ("word.power_additive", word_power_additive),
    ("word.cyclic_round_trip", word_cyclic_round_trip),
    ("qm.reference_values", qm_reference_values),
    ("qm.homogeneity", qm_homogeneity),
    ("qm.conjugation_invariance", qm_conjugation_invariance),
    ("qm.oracle_agreement", qm_oracle_agreement),
    ("surface.loop_exactness", surface_loop_exactness),
    ("surface.winding_consistency", surface_winding_consistency),
    ("surface.no_triple_overlap", surface_no_triple_overlap),
    ("flow.flux_zero", flow_flux_zero),
    ("flow.area_preservation", flow_area_preservation),
    ("flow.invertibility", flow_invertibility),
    ("flow.calabi_below_hofer", flow_calabi_below_hofer),
    ("rho.antisymmetry", rho_antisymmetry),
    ("rho.null_pattern", rho_null_pattern),
];

/// Runs every property whose name contains `filter`.
pub fn run_property_suite(filter: Option<&str>, fixture: Fixture) -> PropertyReport {
    let results = PROPERTIES
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|&(name, check)| {
            let outcome = check(fixture);
            PropertyResult {
                name,
                passed: outcome.is_ok(),
                detail: outcome.err().unwrap_or_default(),
            }
        })
        .collect();
    PropertyReport { results }
}

const LETTERS: [Letter; 4] = [Letter::A, Letter::A_INV, Letter::B, Letter::B_INV];

fn raw_letters(rng: &mut ChaCha8Rng, max: usize) -> Vec<Letter> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| LETTERS[rng.random_range(0..4)]).collect()
}

fn random_word(rng: &mut ChaCha8Rng, max: usize) -> Word {
    Word::reduce(raw_letters(rng, max))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn word_reduce_idempotent(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let raw = raw_letters(&mut rng, 40);
        let r = Word::reduce(raw.clone());
        ensure(Word::reduce(r.letters().to_vec()) == r && r.len() <= raw.len(), || {
            format!("reduce not idempotent on {r}")
        })?;
    }
    Ok(())
}

fn word_multiply_concatenation(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let (x, y) = (raw_letters(&mut rng, 30), raw_letters(&mut rng, 30));
        let joined: Vec<Letter> = x.iter().chain(&y).copied().collect();
        let (u, v) = (Word::reduce(x), Word::reduce(y));
        ensure(&u * &v == Word::reduce(joined), || format!("{u} * {v}"))?;
    }
    Ok(())
}

fn word_power_additive(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let u = random_word(&mut rng, 12);
        let (j, k) = (rng.random_range(-8..=8i64), rng.random_range(-8..=8i64));
        ensure(u.pow(j + k) == &u.pow(j) * &u.pow(k), || format!("{u}^({j}+{k})"))?;
    }
    Ok(())
}

fn word_cyclic_round_trip(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let u = random_word(&mut rng, 30);
        let (core, c) = u.cyclic_reduce();
        ensure(&(&c * &core) * &c.inverse() == u, || format!("round trip of {u}"))?;
    }
    Ok(())
}

fn qm(pattern: &str) -> CountingQM {
    CountingQM::new(pattern.parse().unwrap()).unwrap()
}

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn qm_reference_values(_: Fixture) -> Result<(), String> {
    let (ab, comm) = (qm("ab"), qm("abAB"));
    let got = [
        ab.homogenized(&w("a")),
        ab.homogenized(&w("b")),
        ab.homogenized(&w("ab")),
        comm.homogenized(&w("a")),
        comm.homogenized(&w("b")),
        comm.homogenized(&w("abAB")),
    ];
    ensure(got == [0.0, 0.0, 1.0, 0.0, 0.0, 1.0], || format!("{got:?}"))
}

fn qm_homogeneity(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in [qm("ab"), qm("abAB")] {
        for _ in 0..1000 {
            let g = random_word(&mut rng, 16);
            let k = rng.random_range(-8..=8i64);
            let r = q.homogenized(&g);
            ensure(q.homogenized(&g.pow(k)) == k as f64 * r, || format!("{g}^{k}"))?;
            ensure(q.homogenized(&g.inverse()) == -r, || format!("antisymmetry at {g}"))?;
        }
    }
    Ok(())
}

fn qm_conjugation_invariance(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for q in [qm("ab"), qm("abAB")] {
        for _ in 0..1000 {
            let (g, u) = (random_word(&mut rng, 16), random_word(&mut rng, 16));
            let conj = &(&u * &g) * &u.inverse();
            ensure(q.homogenized(&conj) == q.homogenized(&g), || format!("{u} {g} {u}⁻¹"))?;
        }
    }
    Ok(())
}

fn qm_oracle_agreement(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in [qm("ab"), qm("abAB")] {
        let d = q.estimate_defect(4).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let g = random_word(&mut rng, 10);
            for k in [10u32, 100] {
                let gap = (q.homogenized(&g) - q.homogenize_oracle(&g, k)).abs();
                ensure(gap <= d / k as f64 + 1e-12, || format!("{g}, k = {k}: gap {gap}"))?;
            }
        }
    }
    Ok(())
}

/// Open convex regions of the plane free of hole translates: `kind` picks
/// the coordinate `y`, `x`, `x − y` or `x + y`, whose band `(k + r, k + 1 − r)`
/// misses every hole.
fn band_coordinate(kind: usize, p: Point) -> f64 {
    match kind {
        0 => p.y,
        1 => p.x,
        2 => p.x - p.y,
        _ => p.x + p.y,
    }
}

fn band_margin(kind: usize, s: f64) -> f64 {
    if kind < 2 {
        s
    } else {
        2.0 * s
    }
}

fn in_band(kind: usize, p: Point, s: f64) -> bool {
    let c = band_coordinate(kind, p);
    let r = band_margin(kind, s) + 1e-6;
    let f = c - c.floor();
    f > r && f < 1.0 - r
}

/// A random point in the same band as `p` (of the given kind), within
/// distance ~2, kept clear of the band's edges and the cut lines.
fn step_in_band(rng: &mut ChaCha8Rng, kind: usize, p: Point, s: f64) -> Option<Point> {
    if !in_band(kind, p, s) {
        return None;
    }
    let k = band_coordinate(kind, p).floor();
    let r = band_margin(kind, s) + 1e-6;
    let target = k + r + rng.random::<f64>() * (1.0 - 2.0 * r);
    let along = rng.random_range(-2.0..2.0);
    let q = match kind {
        0 => Point::new(p.x + along, target),
        1 => Point::new(target, p.y + along),
        2 => {
            let sum = p.x + p.y + along;
            Point::new((sum + target) / 2.0, (sum - target) / 2.0)
        }
        _ => {
            let diff = p.x - p.y + along;
            Point::new((target + diff) / 2.0, (target - diff) / 2.0)
        }
    };
    let off_cut = |v: f64| (v - v.round()).abs() > 1e-6;
    (off_cut(q.x) && off_cut(q.y)).then_some(q)
}

/// A random hole-avoiding polygonal path: every segment lies in one
/// hole-free convex band.
fn random_band_path(rng: &mut ChaCha8Rng, start: Point, legs: usize, s: f64) -> Vec<Point> {
    let mut pts = vec![start];
    while pts.len() <= legs {
        let p = *pts.last().unwrap();
        let kind = rng.random_range(0..4);
        if let Some(q) = step_in_band(rng, kind, p, s) {
            pts.push(q);
        }
    }
    pts
}

fn polyline_word(pts: &[Point]) -> Result<Word, String> {
    let mut word = Word::identity();
    for pair in pts.windows(2) {
        word.append(&crossing_word(&Segment::new(pair[0], pair[1])).map_err(|e| e.to_string())?);
    }
    Ok(word)
}

/// Random closed loops: a path out, a loop inside one band, and the path
/// back. Each loop has a closed lift and avoids the holes.
pub fn random_closed_loop(rng: &mut ChaCha8Rng, s: f64) -> Vec<Point> {
    let start = Point::new(0.5, 0.5);
    let legs = rng.random_range(1..6);
    let out = random_band_path(rng, start, legs, s);
    let base = *out.last().unwrap();
    let kind = (0..4)
        .find(|&k| in_band(k, base, s))
        .expect("every path vertex lies in some band");
    let corners = rng.random_range(3..8);
    let mut lp = vec![base];
    while lp.len() < corners {
        if let Some(q) = step_in_band(rng, kind, *lp.last().unwrap(), s) {
            lp.push(q);
        }
    }
    lp.push(base);
    let mut pts = out.clone();
    pts.extend(lp.into_iter().skip(1));
    pts.extend(out.iter().rev().skip(1));
    pts
}

fn surface_loop_exactness(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let pts = random_closed_loop(&mut rng, 0.02);
        let word = polyline_word(&pts)?;
        ensure(word.is_identity(), || format!("closed loop reads {word}"))?;
    }
    Ok(())
}

fn surface_winding_consistency(_: Fixture) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let n = rng.random_range(1..6);
        let pts: Vec<Point> = (0..=n)
            .map(|_| Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        let word = polyline_word(&pts)?;
        let (first, last) = (pts[0], pts[n]);
        let want = [
            (last.x.floor() - first.x.floor()) as i64,
            (last.y.floor() - first.y.floor()) as i64,
        ];
        ensure(word.abelianization(2) == want, || format!("{word} vs {want:?}"))?;
    }
    Ok(())
}

fn sweep_scenarios() -> Vec<Scenario> {
    [1usize, 2, 4, 8]
        .into_iter()
        .map(|n| Scenario::build(&ScenarioParams::new(n, 0.16 / n as f64, 16 * n as u32, 0.02)).unwrap())
        .collect()
}

fn surface_no_triple_overlap(_: Fixture) -> Result<(), String> {
    for sc in sweep_scenarios() {
        let n = 1000;
        for i in 0..n {
            for j in 0..n {
                let p = Point::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                ensure(sc.membership(p).len() < 3, || format!("N = {}: triple at {p:?}", sc.copies))?;
            }
        }
    }
    Ok(())
}

fn flow_flux_zero(fixture: Fixture) -> Result<(), String> {
    let mut scenarios = sweep_scenarios();
    if fixture == Fixture::FluxBug {
        let sc = &scenarios[0];
        scenarios.push(Scenario::from_strips(sc.surface, vec![sc.strips[0].clone()], sc.period, sc.m));
    }
    for sc in &scenarios {
        let (fa, fb) = flow::flux_check(sc);
        ensure(fa.abs() <= 1e-12 && fb.abs() <= 1e-12, || format!("flux ({fa}, {fb}) with {} strips", sc.strips.len()))?;
        ensure(flow::flux_per_copy(sc).iter().all(|&f| f == (0.0, 0.0)), || "copy flux".into())?;
    }
    Ok(())
}

fn flow_area_preservation(_: Fixture) -> Result<(), String> {
    let sc = Scenario::build(&ScenarioParams::new(2, 0.08, 32, 0.02)).unwrap();
    let index = StripIndex::new(&sc);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let eps = 1e-6;
    let signature = |p: Point| {
        let mut v = Vec::new();
        index.step(&sc, sc.tau, p, |m, _| v.push((m.strip, m.on_ramp)));
        v
    };
    let mut checked = 0;
    while checked < 1000 {
        let s = &sc.strips[rng.random_range(0..sc.strips.len())];
        let p = s.chart_point(rng.random(), rng.random::<f64>() * s.width);
        let st = [p.offset(eps, 0.0), p.offset(-eps, 0.0), p.offset(0.0, eps), p.offset(0.0, -eps)];
        let sig = signature(p);
        if st.iter().any(|&q| signature(q) != sig) {
            continue;
        }
        let f = |q: Point| flow::apply_composed(&sc, sc.tau, q).0;
        let (a, b, c, d) = (f(st[0]), f(st[1]), f(st[2]), f(st[3]));
        let det = ((a.x - b.x) * (c.y - d.y) - (c.x - d.x) * (a.y - b.y)) / (4.0 * eps * eps);
        ensure((det - 1.0).abs() < 1e-8, || format!("Jacobian {det} at {p:?}"))?;
        checked += 1;
    }
    Ok(())
}

fn flow_invertibility(_: Fixture) -> Result<(), String> {
    let sc = Scenario::build(&ScenarioParams::new(4, 0.04, 64, 0.02)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = Point::new(rng.random(), rng.random());
        let mut r = flow::apply_composed(&sc, sc.tau, p).0;
        for s in &sc.strips {
            r = flow::apply_strip(s, -sc.tau, r).0;
        }
        ensure((r.x - p.x).abs() < 1e-12 && (r.y - p.y).abs() < 1e-12, || format!("{p:?} ↦ {r:?}"))?;
    }
    Ok(())
}

fn flow_calabi_below_hofer(_: Fixture) -> Result<(), String> {
    for sc in sweep_scenarios() {
        let hb = flow::hofer_upper_bound(&sc, sc.tau, 2, 128).map_err(|e| e.to_string())?;
        let cal = flow::calabi(&sc, sc.tau, 2, 128).map_err(|e| e.to_string())?;
        ensure(cal.abs() <= hb.numeric, || format!("N = {}: calabi {cal} > {}", sc.copies, hb.numeric))?;
    }
    Ok(())
}

fn small_overlap_scenario() -> Scenario {
    Scenario::build(&ScenarioParams::new(1, 0.005, 8, 0.02)).unwrap()
}

fn rho_antisymmetry(fixture: Fixture) -> Result<(), String> {
    let sc = small_overlap_scenario();
    let reversed = if fixture == Fixture::OrientationBug {
        sc.clone()
    } else {
        sc.reversed()
    };
    let q = qm("ab");
    let fwd = rho::rho_estimate(&sc, &q, 32, 2000, 3).map_err(|e| e.to_string())?;
    let rev = rho::rho_estimate(&reversed, &q, 32, 2000, 3).map_err(|e| e.to_string())?;
    let tol = 2.0 * (fwd.stderr.powi(2) + rev.stderr.powi(2)).sqrt();
    ensure((fwd.value + rev.value).abs() <= tol, || {
        format!("ρ = {:.4e}, reversed {:.4e}", fwd.value, rev.value)
    })
}

fn rho_null_pattern(_: Fixture) -> Result<(), String> {
    let sc = small_overlap_scenario();
    let q = qm("abAB");
    let est = rho::rho_estimate(&sc, &q, 32, 2000, 4).map_err(|e| e.to_string())?;
    let pred = rho::rho_predicted(&sc, &q);
    ensure(est.value.abs() <= 3.0 * est.stderr + pred.error_radius, || {
        format!("ρ = {:.4e} for a null pattern", est.value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_caught() {
        let ok = run_property_suite(Some("rho.antisymmetry"), Fixture::None);
        assert!(ok.all_passed(), "{ok:?}");
        let bad = run_property_suite(Some("rho.antisymmetry"), Fixture::OrientationBug);
        assert!(!bad.all_passed());
        let bad = run_property_suite(Some("flow.flux_zero"), Fixture::FluxBug);
        assert!(!bad.all_passed());
        assert!(run_property_suite(Some("flow.flux_zero"), Fixture::None).all_passed());
    }

    #[test]
    fn filter_selects_by_substring() {
        let r = run_property_suite(Some("word."), Fixture::None);
        assert_eq!(r.results.len(), 4);
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn random_loops_close_and_avoid_holes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let torus = crate::surface::HoledTorus::new(0.02).unwrap();
        for _ in 0..100 {
            let pts = random_closed_loop(&mut rng, 0.02);
            assert_eq!(pts.first(), pts.last());
            for pair in pts.windows(2) {
                for k in 0..=200 {
                    let t = k as f64 / 200.0;
                    let p = Point::new(pair[0].x + t * (pair[1].x - pair[0].x), pair[0].y + t * (pair[1].y - pair[0].y));
                    assert!(!torus.in_hole(p));
                }
            }
        }
    }
}
