//! Flat one-holed torus, its cut system, and strip scenarios.
//!
//! The surface is the unit square with opposite sides identified, minus an
//! open axis-aligned square hole centred at the identified corner. Cutting
//! along the circles `x = 0` and `y = 0` (both pass through the hole) leaves a
//! disk, so the signed sequence of cut crossings along a path is its exact
//! class in `π₁ = F(a, b)`: crossing `x ∈ ℤ` in the `+x` direction reads `a`,
//! crossing `y ∈ ℤ` in the `+y` direction reads `b`.
//!
//! Paths are handled in the plane cover. A point of the plane is lifted
//! surface position; lattice translates of the hole are the obstacles.
//!
//! # Scenario documents
//!
//! Scenarios serialize to the `key = value` grammar of [`crate::keyvalue`]:
//!
//! ```text
//! N = 1
//! T = 5.0000000000000003e-2
//! m = 10
//! hole_halfwidth = 2.0000000000000000e-2
//! strip = H offset=3.0000000000000000e-1 width=5.0000000000000003e-2 orientation=+1 smoothing=0.0000000000000000e0 copy=0
//! ```
//!
//! One `strip` entry per strip, in composition order. Reals are written with
//! 17 significant digits, so a document round-trips bit-exactly.

use std::fmt;

use thiserror::Error;

use crate::keyvalue::{self, format_f64, DocError};
use crate::word::{Letter, Word};

/// Distance to a cut line below which a point counts as lying on it.
pub const CUT_TOLERANCE: f64 = 1e-12;
/// Displacement applied to a sample that lands on a cut line.
pub const NUDGE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("no feasible offsets: {0}")]
    InfeasibleScenario(Violation),
    #[error("path touches a cut line or a lattice corner near ({x:.6}, {y:.6})")]
    DegenerateCrossing { x: f64, y: f64 },
    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Document(#[from] DocError),
}

/// A broken scenario invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MeetsHole { strip: usize },
    SameDirectionOverlap { first: usize, second: usize },
    TripleOverlap { h: usize, v: usize, d: usize },
    CopyStructure { copy: usize },
    CopyFlux { copy: usize },
    NarrowStrip { strip: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MeetsHole { strip } => write!(f, "strip {strip} meets the hole"),
            Violation::SameDirectionOverlap { first, second } => {
                write!(f, "parallel strips {first} and {second} overlap")
            }
            Violation::TripleOverlap { h, v, d } => {
                write!(f, "strips {h}, {v}, {d} have a common point")
            }
            Violation::CopyStructure { copy } => {
                write!(f, "copy {copy} does not have exactly one H, V and D strip")
            }
            Violation::CopyFlux { copy } => write!(f, "fluxes of copy {copy} do not cancel"),
            Violation::NarrowStrip { strip } => {
                write!(f, "strip {strip} is not wider than twice its smoothing margin")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    /// Representative in the fundamental square `[0, 1)²`.
    pub fn wrapped(self) -> Point {
        Point::new(wrap_unit(self.x), wrap_unit(self.y))
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// `x mod 1` in `[0, 1)`.
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A straight segment in the plane cover.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

impl Segment {
    pub fn new(from: Point, to: Point) -> Segment {
        Segment { from, to }
    }

    pub fn is_degenerate(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoledTorus {
    hole_halfwidth: f64,
}

impl HoledTorus {
    pub fn new(hole_halfwidth: f64) -> Result<HoledTorus, SurfaceError> {
        if !(hole_halfwidth > 0.0 && hole_halfwidth < 0.1) {
            return Err(SurfaceError::InvalidParameter(format!(
                "hole half-width {hole_halfwidth} outside (0, 0.1)"
            )));
        }
        Ok(HoledTorus { hole_halfwidth })
    }

    pub fn hole_halfwidth(&self) -> f64 {
        self.hole_halfwidth
    }

    /// Whether a plane point lies in a lattice translate of the hole.
    pub fn in_hole(&self, p: Point) -> bool {
        let s = self.hole_halfwidth;
        (p.x - p.x.round()).abs() < s && (p.y - p.y.round()).abs() < s
    }

    /// Whether the segment (in the fundamental square) meets one of the four
    /// corner pieces of the hole.
    fn segment_meets_hole(&self, seg: &Segment) -> bool {
        let s = self.hole_halfwidth;
        [(0.0, 0.0), (1.0 - s, 0.0), (0.0, 1.0 - s), (1.0 - s, 1.0 - s)]
            .iter()
            .any(|&(x0, y0)| segment_meets_box(seg, x0, y0, x0 + s, y0 + s))
    }
}

/// Liang-Barsky test against the closed box `[x0, x1] × [y0, y1]`.
fn segment_meets_box(seg: &Segment, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    let (dx, dy) = (seg.to.x - seg.from.x, seg.to.y - seg.from.y);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (p, q) in [
        (-dx, seg.from.x - x0),
        (dx, x1 - seg.from.x),
        (-dy, seg.from.y - y0),
        (dy, y1 - seg.from.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    lo <= hi
}

/// Strip family: `H` runs along `(1, 0)` in class `a`, `V` along `(0, 1)` in
/// class `b`, `D` along `(1, 1)` in class `ab`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    H,
    V,
    D,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::H, Direction::V, Direction::D];

    /// Displacement of one full traversal of the core curve.
    pub fn along(self) -> (f64, f64) {
        match self {
            Direction::H => (1.0, 0.0),
            Direction::V => (0.0, 1.0),
            Direction::D => (1.0, 1.0),
        }
    }

    /// Linear transverse coordinate: `y`, `x`, `x − y`. Each is unimodular
    /// against the others, so every crossing of two strips of different
    /// families is a parallelogram of area `w₁·w₂`.
    pub fn transverse(self, p: Point) -> f64 {
        match self {
            Direction::H => p.y,
            Direction::V => p.x,
            Direction::D => p.x - p.y,
        }
    }

    pub fn class_word(self) -> Word {
        match self {
            Direction::H => Word::letter(Letter::A),
            Direction::V => Word::letter(Letter::B),
            Direction::D => Word::reduce([Letter::A, Letter::B]),
        }
    }

    /// Homology class of the core curve in `H₁ = ℤ²`.
    pub fn homology(self) -> (i64, i64) {
        match self {
            Direction::H => (1, 0),
            Direction::V => (0, 1),
            Direction::D => (1, 1),
        }
    }

    /// Half-extent of the hole measured in this family's transverse coordinate.
    fn hole_reach(self, s: f64) -> f64 {
        match self {
            Direction::D => 2.0 * s,
            _ => s,
        }
    }

    fn symbol(self) -> char {
        match self {
            Direction::H => 'H',
            Direction::V => 'V',
            Direction::D => 'D',
        }
    }

    fn from_symbol(s: &str) -> Option<Direction> {
        match s {
            "H" => Some(Direction::H),
            "V" => Some(Direction::V),
            "D" => Some(Direction::D),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reverse => -1.0,
        }
    }

    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripSpec {
    pub direction: Direction,
    /// Transverse position of the band's lower edge, in `[0, 1)`.
    pub offset: f64,
    pub width: f64,
    pub orientation: Orientation,
    /// Margin on each side where the profile is flat.
    pub smoothing: f64,
    pub copy_id: usize,
    pub class_word: Word,
}

impl StripSpec {
    /// The default orientation: forward along `a` and `b`, reversed along `ab`.
    pub fn new(direction: Direction, offset: f64, width: f64, smoothing: f64, copy_id: usize) -> StripSpec {
        let orientation = match direction {
            Direction::D => Orientation::Reverse,
            _ => Orientation::Forward,
        };
        StripSpec {
            direction,
            offset: wrap_unit(offset),
            width,
            orientation,
            smoothing,
            copy_id,
            class_word: direction.class_word(),
        }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> StripSpec {
        self.orientation = orientation;
        self
    }

    /// Width of the linear part of the profile; its traversal period.
    pub fn ramp_width(&self) -> f64 {
        self.width - 2.0 * self.smoothing
    }

    /// Transverse coordinate of `p` relative to the band, in `[0, 1)`.
    pub fn transverse_coordinate(&self, p: Point) -> f64 {
        wrap_unit(self.direction.transverse(p) - self.offset)
    }

    /// Transverse coordinate `h ∈ (0, width)` if `p` lies in the open band.
    pub fn contains(&self, p: Point) -> Option<f64> {
        let h = self.transverse_coordinate(p);
        (h > 0.0 && h < self.width).then_some(h)
    }

    /// Surface point with loop parameter `u` and transverse coordinate `h`.
    pub fn chart_point(&self, u: f64, h: f64) -> Point {
        let t = self.offset + h;
        match self.direction {
            Direction::H => Point::new(u, t),
            Direction::V => Point::new(t, u),
            Direction::D => Point::new(u + t, u),
        }
        .wrapped()
    }

    pub fn area(&self) -> f64 {
        self.width
    }

    /// Start of the loop-parameter interval (length `other.width`) on which a
    /// point at height `h` of this strip lies in `other`'s band.
    fn crossing_start(&self, h: f64, other: &StripSpec) -> Option<f64> {
        let (a, b, c) = (self.offset, other.offset, other.width);
        use Direction::*;
        let start = match (self.direction, other.direction) {
            (H, V) => b,
            (H, D) => a + h + b,
            (V, H) => b,
            (V, D) => a + h - b - c,
            (D, H) => b,
            (D, V) => b - a - h,
            _ => return None,
        };
        Some(wrap_unit(start))
    }

    fn to_line(&self) -> String {
        format!(
            "{} offset={} width={} orientation={} smoothing={} copy={}",
            self.direction.symbol(),
            format_f64(self.offset),
            format_f64(self.width),
            if self.orientation == Orientation::Forward { "+1" } else { "-1" },
            format_f64(self.smoothing),
            self.copy_id
        )
    }

    fn from_line(line: &str) -> Result<StripSpec, DocError> {
        let bad = || DocError::BadValue {
            key: "strip".into(),
            value: line.to_string(),
        };
        let mut parts = line.split_whitespace();
        let direction = parts.next().and_then(Direction::from_symbol).ok_or_else(bad)?;
        let (mut offset, mut width, mut orientation, mut smoothing, mut copy) =
            (None, None, None, Some(0.0), None);
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k {
                "offset" => offset = Some(keyvalue::parse_value::<f64>(k, v)?),
                "width" => width = Some(keyvalue::parse_value::<f64>(k, v)?),
                "smoothing" => smoothing = Some(keyvalue::parse_value::<f64>(k, v)?),
                "copy" => copy = Some(keyvalue::parse_value::<usize>(k, v)?),
                "orientation" => {
                    orientation = Some(match v {
                        "+1" | "1" => Orientation::Forward,
                        "-1" => Orientation::Reverse,
                        _ => return Err(bad()),
                    })
                }
                _ => return Err(bad()),
            }
        }
        let (Some(offset), Some(width), Some(smoothing), Some(copy)) = (offset, width, smoothing, copy)
        else {
            return Err(bad());
        };
        let mut strip = StripSpec::new(direction, offset, width, smoothing, copy);
        if let Some(o) = orientation {
            strip.orientation = o;
        }
        Ok(strip)
    }
}

/// Do the open circular arcs `(s1, s1 + l1)` and `(s2, s2 + l2)` of `ℝ/ℤ` meet?
fn arcs_overlap(s1: f64, l1: f64, s2: f64, l2: f64) -> bool {
    wrap_unit(s2 - s1) < l1 || wrap_unit(s1 - s2) < l2
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapReport {
    /// Unordered pairs of crossing strips with the area of their overlap.
    pub pairwise_overlaps: Vec<(usize, usize, f64)>,
    pub max_overlap_area: f64,
    /// `m` times the overlap area charged to each strip, summed over strips
    /// (every overlap is charged to both strips that share it).
    pub bad_area_budget: f64,
    /// Smallest gap, in loop-parameter units, between consecutive overlap
    /// intervals met by a point travelling along any strip.
    pub min_overlap_spacing: f64,
    pub triple_overlaps: usize,
}

impl OverlapReport {
    fn compute(strips: &[StripSpec], m: u32) -> OverlapReport {
        let mut pairwise = Vec::new();
        for i in 0..strips.len() {
            for j in i + 1..strips.len() {
                if strips[i].direction != strips[j].direction {
                    pairwise.push((i, j, strips[i].width * strips[j].width));
                }
            }
        }
        let total: f64 = pairwise.iter().map(|p| p.2).sum();
        let max_overlap_area = pairwise.iter().map(|p| p.2).fold(0.0, f64::max);
        let triple_overlaps = triple_overlaps(strips).len();
        OverlapReport {
            pairwise_overlaps: pairwise,
            max_overlap_area,
            bad_area_budget: m as f64 * total,
            min_overlap_spacing: min_overlap_spacing(strips),
            triple_overlaps,
        }
    }
}

fn triple_overlaps(strips: &[StripSpec]) -> Vec<(usize, usize, usize)> {
    let of = |d: Direction| -> Vec<usize> { (0..strips.len()).filter(|&i| strips[i].direction == d).collect() };
    let (hs, vs, ds) = (of(Direction::H), of(Direction::V), of(Direction::D));
    let mut out = Vec::new();
    for &h in &hs {
        for &v in &vs {
            // x − y over the H∩V rectangle
            let lo = strips[v].offset - strips[h].offset - strips[h].width;
            let len = strips[h].width + strips[v].width;
            for &d in &ds {
                if arcs_overlap(lo, len, strips[d].offset, strips[d].width) {
                    out.push((h, v, d));
                }
            }
        }
    }
    out
}

fn min_overlap_spacing(strips: &[StripSpec]) -> f64 {
    let mut best = 1.0f64;
    for s in strips {
        for h in [0.0, s.width] {
            let mut arcs: Vec<(f64, f64)> = strips
                .iter()
                .filter_map(|o| s.crossing_start(h, o).map(|start| (start, o.width)))
                .collect();
            if arcs.is_empty() {
                continue;
            }
            arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (k, &(start, len)) in arcs.iter().enumerate() {
                let next = arcs[(k + 1) % arcs.len()].0;
                let mut gap = next - (start + len);
                if k + 1 == arcs.len() {
                    gap += 1.0;
                }
                best = best.min(gap.max(0.0));
            }
        }
    }
    best
}

/// How strip offsets are chosen by [`Scenario::build`].
#[derive(Clone, Debug, PartialEq)]
pub enum OffsetRule {
    /// Copy `i` of family `X` sits at `(phase_X + i)/N`.
    Grid { phase_h: f64, phase_v: f64, phase_d: f64 },
    /// Offsets per family, one per copy.
    Explicit { h: Vec<f64>, v: Vec<f64>, d: Vec<f64> },
}

impl Default for OffsetRule {
    fn default() -> Self {
        OffsetRule::Grid {
            phase_h: 0.3,
            phase_v: 0.3,
            phase_d: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    pub copies: usize,
    /// Traversal period and strip area.
    pub period: f64,
    pub m: u32,
    pub hole_halfwidth: f64,
    pub smoothing: f64,
    pub offsets: OffsetRule,
    /// Candidates tried by the perturbation search.
    pub search_budget: usize,
}

impl ScenarioParams {
    pub fn new(copies: usize, period: f64, m: u32, hole_halfwidth: f64) -> ScenarioParams {
        ScenarioParams {
            copies,
            period,
            m,
            hole_halfwidth,
            smoothing: 0.0,
            offsets: OffsetRule::default(),
            search_budget: 20_000,
        }
    }

    pub fn with_offsets(mut self, offsets: OffsetRule) -> ScenarioParams {
        self.offsets = offsets;
        self
    }

    pub fn with_smoothing(mut self, smoothing: f64) -> ScenarioParams {
        self.smoothing = smoothing;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub surface: HoledTorus,
    /// Composition order: the last strip acts first.
    pub strips: Vec<StripSpec>,
    pub copies: usize,
    pub period: f64,
    pub m: u32,
    pub tau: f64,
    pub validation: OverlapReport,
}

impl Scenario {
    /// Places `N` copies of the H/V/D triple, searching deterministically for
    /// offsets that satisfy every scenario invariant.
    pub fn build(params: &ScenarioParams) -> Result<Scenario, SurfaceError> {
        let n = params.copies;
        if n == 0 {
            return Err(SurfaceError::InvalidParameter("N must be at least 1".into()));
        }
        if !(params.period > 0.0 && params.period <= 1.0 / (4.0 * n as f64)) {
            return Err(SurfaceError::InvalidParameter(format!(
                "T = {} outside (0, 1/(4N)]",
                params.period
            )));
        }
        if params.m == 0 {
            return Err(SurfaceError::InvalidParameter("m must be at least 1".into()));
        }
        if params.smoothing < 0.0 {
            return Err(SurfaceError::InvalidParameter("negative smoothing".into()));
        }
        let surface = HoledTorus::new(params.hole_halfwidth)?;
        let base: [Vec<f64>; 3] = match &params.offsets {
            OffsetRule::Grid {
                phase_h,
                phase_v,
                phase_d,
            } => [*phase_h, *phase_v, *phase_d]
                .map(|ph| (0..n).map(|i| (ph + i as f64) / n as f64).collect()),
            OffsetRule::Explicit { h, v, d } => {
                if h.len() != n || v.len() != n || d.len() != n {
                    return Err(SurfaceError::InvalidParameter(
                        "explicit offsets need one value per copy and family".into(),
                    ));
                }
                [h.clone(), v.clone(), d.clone()]
            }
        };
        // The ramp keeps period T; flat margins widen the strip.
        let width = params.period + 2.0 * params.smoothing;
        let assemble = |shift: [f64; 3]| -> Vec<StripSpec> {
            let mut strips = Vec::with_capacity(3 * n);
            for copy in 0..n {
                for (k, dir) in Direction::ALL.into_iter().enumerate() {
                    let mut offset = wrap_unit(base[k][copy] + shift[k]);
                    offset = push_off_hole(dir, offset, width, params.hole_halfwidth);
                    strips.push(StripSpec::new(dir, offset, width, params.smoothing, copy));
                }
            }
            strips
        };

        let step = width / 4.0;
        let reach = 24i64;
        let shifts: Vec<f64> = std::iter::once(0)
            .chain((1..=reach).flat_map(|k| [k, -k]))
            .map(|k| k as f64 * step)
            .collect();
        let mut first_violation = None;
        let mut tried = 0usize;
        'search: for &sh in &shifts {
            for &sv in &shifts {
                for &sd in &shifts {
                    if tried >= params.search_budget {
                        break 'search;
                    }
                    tried += 1;
                    let strips = assemble([sh, sv, sd]);
                    let scenario = Scenario::from_strips(surface, strips, params.period, params.m);
                    match scenario.violations().into_iter().next() {
                        None => {
                            let mut scenario = scenario;
                            scenario.copies = n;
                            return Ok(scenario);
                        }
                        Some(v) => {
                            first_violation.get_or_insert(v);
                        }
                    }
                }
            }
        }
        Err(SurfaceError::InfeasibleScenario(
            first_violation.expect("search visits at least one candidate"),
        ))
    }

    /// Wraps an arbitrary strip list without checking scenario invariants.
    /// Used for fixtures such as the empty scenario or a lone strip.
    pub fn from_strips(surface: HoledTorus, strips: Vec<StripSpec>, period: f64, m: u32) -> Scenario {
        let copies = strips.iter().map(|s| s.copy_id + 1).max().unwrap_or(0);
        let validation = OverlapReport::compute(&strips, m);
        Scenario {
            surface,
            strips,
            copies,
            period,
            m,
            tau: period / m as f64,
            validation,
        }
    }

    /// Like [`Scenario::from_strips`] but rejects any invariant violation.
    pub fn checked(surface: HoledTorus, strips: Vec<StripSpec>, period: f64, m: u32) -> Result<Scenario, SurfaceError> {
        if !(period > 0.0) || m == 0 {
            return Err(SurfaceError::InvalidParameter("T and m must be positive".into()));
        }
        let s = Scenario::from_strips(surface, strips, period, m);
        match s.violations().into_iter().next() {
            Some(v) => Err(SurfaceError::InfeasibleScenario(v)),
            None => Ok(s),
        }
    }

    /// All broken invariants, in a fixed order.
    pub fn violations(&self) -> Vec<Violation> {
        let strips = &self.strips;
        let mut out = Vec::new();
        for (i, s) in strips.iter().enumerate() {
            if s.width <= 2.0 * s.smoothing {
                out.push(Violation::NarrowStrip { strip: i });
            }
        }
        let s = self.surface.hole_halfwidth();
        for (i, strip) in strips.iter().enumerate() {
            let r = strip.direction.hole_reach(s);
            if arcs_overlap(strip.offset, strip.width, -r, 2.0 * r) {
                out.push(Violation::MeetsHole { strip: i });
            }
        }
        for i in 0..strips.len() {
            for j in i + 1..strips.len() {
                let (a, b) = (&strips[i], &strips[j]);
                if a.direction == b.direction && arcs_overlap(a.offset, a.width, b.offset, b.width) {
                    out.push(Violation::SameDirectionOverlap { first: i, second: j });
                }
            }
        }
        for (h, v, d) in triple_overlaps(strips) {
            out.push(Violation::TripleOverlap { h, v, d });
        }
        for copy in 0..self.copies {
            let members: Vec<&StripSpec> = strips.iter().filter(|s| s.copy_id == copy).collect();
            let mut dirs: Vec<Direction> = members.iter().map(|s| s.direction).collect();
            dirs.sort();
            if dirs != Direction::ALL {
                out.push(Violation::CopyStructure { copy });
                continue;
            }
            let (fa, fb) = members.iter().fold((0.0, 0.0), |(fa, fb), s| {
                let (ha, hb) = s.direction.homology();
                let sg = s.orientation.sign();
                (fa + sg * ha as f64, fb + sg * hb as f64)
            });
            if fa != 0.0 || fb != 0.0 {
                out.push(Violation::CopyFlux { copy });
            }
        }
        out
    }

    /// Strips containing `p`, with the transverse coordinate in each.
    pub fn membership(&self, p: Point) -> Vec<(usize, f64)> {
        let p = p.wrapped();
        self.strips
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.contains(p).map(|h| (i, h)))
            .collect()
    }

    pub fn total_strip_area(&self) -> f64 {
        self.strips.iter().map(StripSpec::area).sum()
    }

    /// Same strips with every orientation reversed.
    pub fn reversed(&self) -> Scenario {
        let mut out = self.clone();
        for s in &mut out.strips {
            s.orientation = s.orientation.flipped();
        }
        out
    }

    pub fn to_document(&self) -> String {
        let mut out = String::from("# surface-qm scenario\n");
        out += &format!("N = {}\n", self.copies);
        out += &format!("T = {}\n", format_f64(self.period));
        out += &format!("m = {}\n", self.m);
        out += &format!("hole_halfwidth = {}\n", format_f64(self.surface.hole_halfwidth()));
        for s in &self.strips {
            out += &format!("strip = {}\n", s.to_line());
        }
        out
    }

    pub fn from_document(text: &str) -> Result<Scenario, SurfaceError> {
        let entries = keyvalue::parse(text)?;
        for e in &entries {
            if !matches!(e.key.as_str(), "N" | "T" | "m" | "hole_halfwidth" | "strip") {
                return Err(DocError::UnknownKey {
                    key: e.key.clone(),
                    line: e.line,
                }
                .into());
            }
        }
        let copies: usize = keyvalue::parse_value("N", keyvalue::require(&entries, "N")?)?;
        let period: f64 = keyvalue::parse_value("T", keyvalue::require(&entries, "T")?)?;
        let m: u32 = keyvalue::parse_value("m", keyvalue::require(&entries, "m")?)?;
        let hole: f64 = keyvalue::parse_value("hole_halfwidth", keyvalue::require(&entries, "hole_halfwidth")?)?;
        let strips = entries
            .iter()
            .filter(|e| e.key == "strip")
            .map(|e| StripSpec::from_line(&e.value))
            .collect::<Result<Vec<_>, _>>()?;
        let mut scenario = Scenario::checked(HoledTorus::new(hole)?, strips, period, m)?;
        if scenario.copies > copies {
            return Err(SurfaceError::InvalidParameter(format!(
                "N = {copies} but strips name copy {}",
                scenario.copies - 1
            )));
        }
        scenario.copies = copies;
        if let Some(v) = scenario.violations().into_iter().next() {
            return Err(SurfaceError::InfeasibleScenario(v));
        }
        Ok(scenario)
    }
}

/// Moves a band that meets the hole to the nearest hole-free position.
fn push_off_hole(dir: Direction, offset: f64, width: f64, s: f64) -> f64 {
    let r = dir.hole_reach(s);
    if !arcs_overlap(offset, width, -r, 2.0 * r) {
        return offset;
    }
    let up = r + 1e-9;
    let down = wrap_unit(-r - width - 1e-9);
    let d_up = (up - offset).abs().min(1.0 - (up - offset).abs());
    let d_down = (down - offset).abs().min(1.0 - (down - offset).abs());
    if d_up <= d_down {
        up
    } else {
        down
    }
}

/// Feeds the signed cut crossings of a plane segment, in order, to `emit`.
///
/// Fails when an endpoint is within [`CUT_TOLERANCE`] of a cut line or the
/// segment passes through a lattice corner.
pub fn for_each_crossing(seg: &Segment, mut emit: impl FnMut(Letter)) -> Result<(), SurfaceError> {
    let (p, q) = (seg.from, seg.to);
    for pt in [p, q] {
        if (pt.x - pt.x.round()).abs() < CUT_TOLERANCE || (pt.y - pt.y.round()).abs() < CUT_TOLERANCE {
            return Err(SurfaceError::DegenerateCrossing { x: pt.x, y: pt.y });
        }
    }
    let mut xs = LineCrossings::new(p.x, q.x, Letter::A);
    let mut ys = LineCrossings::new(p.y, q.y, Letter::B);
    let len = ((q.x - p.x).powi(2) + (q.y - p.y).powi(2)).sqrt();
    loop {
        match (xs.peek(), ys.peek()) {
            (None, None) => return Ok(()),
            (Some(tx), Some(ty)) if ((tx - ty) * len).abs() < CUT_TOLERANCE => {
                return Err(SurfaceError::DegenerateCrossing {
                    x: p.x + tx * (q.x - p.x),
                    y: p.y + tx * (q.y - p.y),
                });
            }
            (Some(tx), Some(ty)) if tx < ty => emit(xs.next_letter()),
            (Some(_), None) => emit(xs.next_letter()),
            _ => emit(ys.next_letter()),
        }
    }
}

/// Integer values strictly between `from` and `to`, walked from `from`.
struct LineCrossings {
    from: f64,
    span: f64,
    next: f64,
    remaining: i64,
    step: f64,
    letter: Letter,
}

impl LineCrossings {
    fn new(from: f64, to: f64, forward: Letter) -> LineCrossings {
        let (first, count, step, letter) = if to > from {
            (from.floor() + 1.0, to.floor() - from.floor(), 1.0, forward)
        } else {
            (from.floor(), from.floor() - to.floor(), -1.0, forward.inverse())
        };
        LineCrossings {
            from,
            span: to - from,
            next: first,
            remaining: count as i64,
            step,
            letter,
        }
    }

    fn peek(&self) -> Option<f64> {
        (self.remaining > 0).then(|| (self.next - self.from) / self.span)
    }

    fn next_letter(&mut self) -> Letter {
        self.remaining -= 1;
        self.next += self.step;
        self.letter
    }
}

/// Reduced cut-crossing word of a plane segment.
pub fn crossing_word(seg: &Segment) -> Result<Word, SurfaceError> {
    let mut w = Word::identity();
    for_each_crossing(seg, |l| w.push(l))?;
    Ok(w)
}

/// Closes a trajectory: a hole-avoiding chain from `end` back to `start`
/// inside the cut-open square, with its crossing word.
///
/// When the straight segment would clip the hole, the chain goes through the
/// centre of the square; segments from any hole-free point to the centre stay
/// clear of all four corner pieces.
pub fn closing_word(surface: &HoledTorus, end: Point, start: Point) -> Result<(Word, Vec<Segment>), SurfaceError> {
    let (e, s) = (end.wrapped(), start.wrapped());
    if e == s {
        return Ok((Word::identity(), Vec::new()));
    }
    let direct = Segment::new(e, s);
    let chain = if surface.segment_meets_hole(&direct) {
        let c = Point::new(0.5, 0.5);
        vec![Segment::new(e, c), Segment::new(c, s)]
    } else {
        vec![direct]
    };
    let mut w = Word::identity();
    for seg in &chain {
        for_each_crossing(seg, |l| w.push(l))?;
    }
    Ok((w, chain))
}
