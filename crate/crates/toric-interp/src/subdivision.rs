//! Subdivisions of lattice polygons: exact validity checking, convex
//! lifting functions (regularity) via rational LP, the separating-line
//! lifting construction, and completion of partial tile placements to full
//! subdivisions.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::induced::Plane;
pub use crate::induced::{induced_faces, InducedError};
use crate::lattice::{enclosed_points, LatticePoint, LatticePolygon};
use crate::lp::{rat, FarkasWitness, Feasibility, LinearSystem, Rat};

/// The role a cell plays in a degeneration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellTag {
    /// Unimodular triangle (twice-area 1).
    Plane,
    /// Unimodular image of the unit square (4 lattice points, twice-area 2).
    Quadric,
    /// A 6-point cell carrying a catalog class; these host the triple points.
    Special,
    /// Any other cell shape (bridges, fans along long edges, ...).
    Filler,
}

/// One cell of a subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub polygon: LatticePolygon,
    pub tag: CellTag,
    /// Catalog id, present exactly when `tag` is `Special`.
    pub class_id: Option<String>,
}

impl Cell {
    /// Tags a polygon by its shape: plane, quadric, or filler.
    pub fn tagged(polygon: LatticePolygon) -> Cell {
        let tag = if polygon.twice_area() == 1 {
            CellTag::Plane
        } else if polygon.edge_count() == 4
            && polygon.twice_area() == 2
            && enclosed_points(&polygon).len() == 4
        {
            CellTag::Quadric
        } else {
            CellTag::Filler
        };
        Cell { polygon, tag, class_id: None }
    }

    pub fn special(polygon: LatticePolygon, class_id: impl Into<String>) -> Cell {
        Cell { polygon, tag: CellTag::Special, class_id: Some(class_id.into()) }
    }

    /// Returns a description of the violated tag invariant, if any.
    pub fn tag_violation(&self) -> Option<String> {
        match self.tag {
            CellTag::Plane => {
                if self.polygon.twice_area() != 1 {
                    return Some("plane cell is not a unimodular triangle".into());
                }
            }
            CellTag::Quadric => {
                if self.polygon.edge_count() != 4
                    || self.polygon.twice_area() != 2
                    || enclosed_points(&self.polygon).len() != 4
                {
                    return Some("quadric cell is not a unit-square image".into());
                }
            }
            CellTag::Special => {
                if enclosed_points(&self.polygon).len() != 6 {
                    return Some("special cell does not enclose 6 lattice points".into());
                }
                if self.class_id.is_none() {
                    return Some("special cell is missing its class id".into());
                }
            }
            CellTag::Filler => {}
        }
        if self.tag != CellTag::Special && self.class_id.is_some() {
            return Some("class id on a non-special cell".into());
        }
        None
    }
}

/// A region together with cells intended to tile it face-to-face.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub region: LatticePolygon,
    pub cells: Vec<Cell>,
}

impl Subdivision {
    pub fn new(region: LatticePolygon, cells: Vec<Cell>) -> Subdivision {
        Subdivision { region, cells }
    }

    /// The trivial subdivision whose single cell is the region itself.
    pub fn single_cell(region: LatticePolygon) -> Subdivision {
        let cell = Cell::tagged(region.clone());
        Subdivision { region, cells: vec![cell] }
    }
}

/// Structured reasons a subdivision fails validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityIssue {
    TagInvariant { cell: usize, reason: String },
    CellOutsideRegion { cell: usize },
    AreaMismatch { cells_total: i64, region: i64 },
    Overlap { a: usize, b: usize },
    NotFaceToFace { a: usize, b: usize },
}

impl std::fmt::Display for ValidityIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityIssue::TagInvariant { cell, reason } => {
                write!(f, "cell {cell}: {reason}")
            }
            ValidityIssue::CellOutsideRegion { cell } => {
                write!(f, "cell {cell} is not contained in the region")
            }
            ValidityIssue::AreaMismatch { cells_total, region } => {
                write!(f, "cell areas sum to {cells_total}, region has {region}")
            }
            ValidityIssue::Overlap { a, b } => {
                write!(f, "cells {a} and {b} have overlapping interiors")
            }
            ValidityIssue::NotFaceToFace { a, b } => {
                write!(f, "cells {a} and {b} do not meet in a common face")
            }
        }
    }
}

/// Exact validity: tags, containment, area bookkeeping, and the face-to-face
/// condition (any two cells meet in a common vertex, a common full edge, or
/// not at all).
pub fn validate_subdivision(s: &Subdivision) -> Result<(), Vec<ValidityIssue>> {
    let mut issues = Vec::new();
    for (i, cell) in s.cells.iter().enumerate() {
        if let Some(reason) = cell.tag_violation() {
            issues.push(ValidityIssue::TagInvariant { cell: i, reason });
        }
        if !cell.polygon.vertices().iter().all(|&v| s.region.contains(v)) {
            issues.push(ValidityIssue::CellOutsideRegion { cell: i });
        }
    }
    let total: i64 = s.cells.iter().map(|c| c.polygon.twice_area()).sum();
    if total != s.region.twice_area() {
        issues.push(ValidityIssue::AreaMismatch { cells_total: total, region: s.region.twice_area() });
    }
    for i in 0..s.cells.len() {
        for j in (i + 1)..s.cells.len() {
            match contact(&s.cells[i].polygon, &s.cells[j].polygon) {
                Contact::Empty => {}
                Contact::Area => issues.push(ValidityIssue::Overlap { a: i, b: j }),
                Contact::Point(p) => {
                    let ok = p
                        .as_lattice()
                        .map(|q| is_vertex(&s.cells[i].polygon, q) && is_vertex(&s.cells[j].polygon, q))
                        .unwrap_or(false);
                    if !ok {
                        issues.push(ValidityIssue::NotFaceToFace { a: i, b: j });
                    }
                }
                Contact::Segment(p, q) => {
                    let ok = match (p.as_lattice(), q.as_lattice()) {
                        (Some(u), Some(v)) => {
                            is_edge(&s.cells[i].polygon, u, v) && is_edge(&s.cells[j].polygon, u, v)
                        }
                        _ => false,
                    };
                    if !ok {
                        issues.push(ValidityIssue::NotFaceToFace { a: i, b: j });
                    }
                }
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

fn is_vertex(poly: &LatticePolygon, p: LatticePoint) -> bool {
    poly.vertices().contains(&p)
}

fn is_edge(poly: &LatticePolygon, u: LatticePoint, v: LatticePoint) -> bool {
    poly.edges().any(|(a, b)| (a == u && b == v) || (a == v && b == u))
}

/// A point with exact rational coordinates (cell intersections).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    fn of(p: LatticePoint) -> RatPoint {
        RatPoint { x: rat(p.x), y: rat(p.y) }
    }

    pub(crate) fn as_lattice(&self) -> Option<LatticePoint> {
        if self.x.is_integer() && self.y.is_integer() {
            let x = i64::try_from(self.x.to_integer()).ok()?;
            let y = i64::try_from(self.y.to_integer()).ok()?;
            Some(LatticePoint { x, y })
        } else {
            None
        }
    }
}

fn cross_rat(o: &RatPoint, a: &RatPoint, b: &RatPoint) -> Rat {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// How two convex lattice polygons intersect, computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Contact {
    Empty,
    Point(RatPoint),
    Segment(RatPoint, RatPoint),
    Area,
}

/// Exact convex intersection of `a` and `b` via half-plane clipping.
pub(crate) fn contact(a: &LatticePolygon, b: &LatticePolygon) -> Contact {
    let (amin, amax) = a.bounding_box();
    let (bmin, bmax) = b.bounding_box();
    if amax.x < bmin.x || bmax.x < amin.x || amax.y < bmin.y || bmax.y < amin.y {
        return Contact::Empty;
    }
    let mut subject: Vec<RatPoint> = a.vertices().iter().map(|&v| RatPoint::of(v)).collect();
    for (u, v) in b.edges() {
        subject = clip_halfplane(subject, &RatPoint::of(u), &RatPoint::of(v));
        if subject.is_empty() {
            return Contact::Empty;
        }
    }
    // Collapse exact duplicates while preserving order.
    let mut distinct: Vec<RatPoint> = Vec::new();
    for p in subject {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    match distinct.len() {
        0 => Contact::Empty,
        1 => Contact::Point(distinct.pop().unwrap()),
        _ => {
            let mut area = Rat::zero();
            for i in 0..distinct.len() {
                let p = &distinct[i];
                let q = &distinct[(i + 1) % distinct.len()];
                area += &p.x * &q.y - &q.x * &p.y;
            }
            if !area.is_zero() {
                Contact::Area
            } else {
                // All collinear: report the extreme points.
                let key = |p: &RatPoint| (p.x.clone(), p.y.clone());
                let lo = distinct.iter().min_by_key(|p| key(p)).unwrap().clone();
                let hi = distinct.iter().max_by_key(|p| key(p)).unwrap().clone();
                Contact::Segment(lo, hi)
            }
        }
    }
}

/// Sutherland-Hodgman step: keeps the part of `pts` on or left of `(u, v)`.
fn clip_halfplane(pts: Vec<RatPoint>, u: &RatPoint, v: &RatPoint) -> Vec<RatPoint> {
    if pts.is_empty() {
        return pts;
    }
    let side = |p: &RatPoint| cross_rat(u, v, p);
    let mut out = Vec::with_capacity(pts.len() + 2);
    for i in 0..pts.len() {
        let s = &pts[(i + pts.len() - 1) % pts.len()];
        let e = &pts[i];
        let ss = side(s);
        let se = side(e);
        if !se.is_negative() {
            if ss.is_negative() {
                out.push(line_hit(s, e, u, v));
            }
            out.push(e.clone());
        } else if !ss.is_negative() {
            out.push(line_hit(s, e, u, v));
        }
    }
    out
}

/// Intersection of segment `s..e` with the line through `u, v` (the segment
/// must genuinely cross the line).
fn line_hit(s: &RatPoint, e: &RatPoint, u: &RatPoint, v: &RatPoint) -> RatPoint {
    let dsx = &e.x - &s.x;
    let dsy = &e.y - &s.y;
    let dvx = &v.x - &u.x;
    let dvy = &v.y - &u.y;
    let denom = &dvx * &dsy - &dvy * &dsx;
    debug_assert!(!denom.is_zero());
    let t = -(&dvx * (&s.y - &u.y) - &dvy * (&s.x - &u.x)) / denom;
    RatPoint { x: &s.x + dsx * &t, y: &s.y + dsy * &t }
}

/// Exact rational heights on the lattice points of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifting {
    heights: BTreeMap<LatticePoint, Rat>,
}

impl Lifting {
    pub fn new(heights: BTreeMap<LatticePoint, Rat>) -> Lifting {
        Lifting { heights }
    }

    pub fn from_fn(points: &[LatticePoint], mut f: impl FnMut(LatticePoint) -> Rat) -> Lifting {
        Lifting { heights: points.iter().map(|&p| (p, f(p))).collect() }
    }

    pub fn get(&self, p: LatticePoint) -> Option<&Rat> {
        self.heights.get(&p)
    }

    pub fn set(&mut self, p: LatticePoint, h: Rat) {
        self.heights.insert(p, h);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &Rat)> {
        self.heights.iter()
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    /// Adds a constant so every height is strictly positive (a constant
    /// shift changes neither affineness nor the strict inequalities).
    pub fn shift_positive(&mut self) {
        if let Some(min) = self.heights.values().min().cloned() {
            if !min.is_positive() {
                let delta = rat(1) - min;
                for h in self.heights.values_mut() {
                    *h += &delta;
                }
            }
        }
    }

    /// Translates every height key by `(dx, dy)`.
    pub fn translated(&self, dx: i64, dy: i64) -> Lifting {
        Lifting {
            heights: self
                .heights
                .iter()
                .map(|(p, h)| (LatticePoint { x: p.x + dx, y: p.y + dy }, h.clone()))
                .collect(),
        }
    }
}

/// Structured reasons heights fail to certify a subdivision.
#[derive(Debug, Clone, PartialEq)]
pub enum LiftingIssue {
    MissingHeight(LatticePoint),
    AffinenessBroken { cell: usize, point: LatticePoint },
    NotStrict { cell: usize, point: LatticePoint },
}

impl std::fmt::Display for LiftingIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LiftingIssue::MissingHeight(p) => write!(f, "no height for point {p}"),
            LiftingIssue::AffinenessBroken { cell, point } => {
                write!(f, "cell {cell} is not affine at {point}")
            }
            LiftingIssue::NotStrict { cell, point } => {
                write!(f, "cell {cell}'s plane is not strictly below {point}")
            }
        }
    }
}

/// The affine function a lifting induces on one cell (fit through the first
/// three vertices; affineness over the rest is checked separately).
pub(crate) fn cell_plane(polygon: &LatticePolygon, lifting: &Lifting) -> Option<Plane> {
    let vs = polygon.vertices();
    let h0 = lifting.get(vs[0])?;
    let h1 = lifting.get(vs[1])?;
    let h2 = lifting.get(vs[2])?;
    Some(Plane::through([(vs[0], h0), (vs[1], h1), (vs[2], h2)]))
}

/// Verifies that `h` is a lifting function for `s`: affine on each cell and,
/// for each cell, strictly below the height of every region lattice point
/// outside that cell.
pub fn check_lifting(s: &Subdivision, h: &Lifting) -> Result<(), Vec<LiftingIssue>> {
    let points = enclosed_points(&s.region);
    let missing: Vec<LiftingIssue> = points
        .iter()
        .filter(|&&p| h.get(p).is_none())
        .map(|&p| LiftingIssue::MissingHeight(p))
        .collect();
    if !missing.is_empty() {
        return Err(missing);
    }
    let mut issues = Vec::new();
    for (ci, cell) in s.cells.iter().enumerate() {
        let plane = cell_plane(&cell.polygon, h).expect("heights cover the region");
        let cell_points = enclosed_points(&cell.polygon);
        for &p in &cell_points {
            if &plane.eval(p) != h.get(p).expect("heights cover the region") {
                issues.push(LiftingIssue::AffinenessBroken { cell: ci, point: p });
            }
        }
        let inside: HashSet<LatticePoint> = cell_points.into_iter().collect();
        for &q in &points {
            if inside.contains(&q) {
                continue;
            }
            if &plane.eval(q) < h.get(q).expect("heights cover the region") {
                continue;
            }
            issues.push(LiftingIssue::NotStrict { cell: ci, point: q });
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// Proof that no lifting exists: a Farkas witness for the lifting LP.
#[derive(Debug, Clone)]
pub struct Irregularity {
    pub system: LinearSystem,
    pub witness: FarkasWitness,
}

impl Irregularity {
    /// The witness really is a contradictory combination of the LP rows.
    pub fn verified(&self) -> bool {
        self.system.check_witness(&self.witness)
    }
}

/// Finds exact rational heights certifying regularity, or a dual witness
/// that none exist. Slack 1 on the strict inequalities is general: any
/// lifting scales to slack 1.
///
/// The LP is edge-local, with three variables per cell (its affine
/// function): for each interior edge the two adjacent planes must agree at
/// the edge endpoints and split strictly across it. For a valid face-to-face
/// subdivision of a convex region this is equivalent to full regularity —
/// local convexity of a piecewise-affine function implies convexity, and
/// strictness across every edge of a cell pins the face `{h = plane}` down
/// to the cell itself. `check_lifting` remains the independent arbiter.
pub fn find_lifting(s: &Subdivision) -> Result<Lifting, Box<Irregularity>> {
    let points = enclosed_points(&s.region);
    let cell_points: Vec<Vec<LatticePoint>> =
        s.cells.iter().map(|c| enclosed_points(&c.polygon)).collect();
    let mut owner: HashMap<LatticePoint, usize> = HashMap::new();
    for (ci, ps) in cell_points.iter().enumerate() {
        for &p in ps {
            owner.entry(p).or_insert(ci);
        }
    }
    for &p in &points {
        assert!(owner.contains_key(&p), "subdivision does not cover point {p}");
    }
    // Interior edges: in a valid subdivision cells share full edges, so a
    // normalized endpoint pair appearing twice identifies an adjacency.
    // BTreeMap keeps row order (and hence the solver's choice of heights)
    // deterministic.
    let mut edge_map: BTreeMap<(LatticePoint, LatticePoint), Vec<usize>> = BTreeMap::new();
    for (ci, cell) in s.cells.iter().enumerate() {
        for (a, b) in cell.polygon.edges() {
            let key = if a <= b { (a, b) } else { (b, a) };
            edge_map.entry(key).or_default().push(ci);
        }
    }
    let coeffs = |cell: usize, p: LatticePoint, sign: i64| -> Vec<(usize, Rat)> {
        vec![
            (3 * cell, rat(sign * p.x)),
            (3 * cell + 1, rat(sign * p.y)),
            (3 * cell + 2, rat(sign)),
        ]
    };
    let mut sys = LinearSystem::new(3 * s.cells.len());
    for (&(u, v), adjacent) in &edge_map {
        let &[i, j] = adjacent.as_slice() else { continue };
        for p in [u, v] {
            let mut row = coeffs(i, p, 1);
            row.extend(coeffs(j, p, -1));
            sys.add_eq(row, rat(0));
        }
        // Any vertex of cell j off the shared line witnesses the strict
        // split; the difference of the two planes vanishes on the edge.
        let w = s.cells[j]
            .polygon
            .vertices()
            .iter()
            .copied()
            .find(|&w| crate::lattice::orient(u, v, w) != 0)
            .expect("cell has positive area");
        let mut row = coeffs(j, w, 1);
        row.extend(coeffs(i, w, -1));
        sys.add_ge(row, rat(1));
    }
    match sys.solve() {
        Feasibility::Feasible(x) => {
            let mut lifting = Lifting::new(BTreeMap::new());
            for &p in &points {
                let o = owner[&p];
                let h = &x[3 * o] * rat(p.x) + &x[3 * o + 1] * rat(p.y) + &x[3 * o + 2];
                lifting.set(p, h);
            }
            lifting.shift_positive();
            debug_assert!(check_lifting(s, &lifting).is_ok());
            Ok(lifting)
        }
        Feasibility::Infeasible(witness) => Err(Box::new(Irregularity { system: sys, witness })),
    }
}

/// An integer line `a·x + b·y + c = 0` used to separate two regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparatingLine {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl SeparatingLine {
    pub fn eval(&self, p: LatticePoint) -> i64 {
        self.a * p.x + self.b * p.y + self.c
    }

    fn negated(&self) -> SeparatingLine {
        SeparatingLine { a: -self.a, b: -self.b, c: -self.c }
    }
}

/// How `separating_lift` produced its heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMethod {
    /// The tilted-maximum closed form with an exactly computed multiplier.
    ClosedForm,
    /// The closed form failed on the supplied assembly; the LP found heights.
    LpFallback,
}

#[derive(Debug, thiserror::Error)]
pub enum SeparatingError {
    #[error("line does not separate the regions: {0}")]
    NotSeparated(String),
    #[error("no lifting exists for the assembled subdivision")]
    LiftingFailed(Box<Irregularity>),
}

/// Combines verified liftings of two disjoint regions across a lattice-free
/// separating line: heights on the second side are tilted by `mu * L` with
/// `mu` large enough that every cell of either side stays strictly below the
/// far side, then the caller-supplied assembly (the two subdivisions plus
/// bridge cells) is checked. Falls back to the lifting LP on the assembly.
pub fn separating_lift(
    s1: &Subdivision,
    h1: &Lifting,
    s2: &Subdivision,
    h2: &Lifting,
    line: SeparatingLine,
    assembly: &Subdivision,
) -> Result<(Lifting, LiftMethod), SeparatingError> {
    let pts1 = enclosed_points(&s1.region);
    let pts2 = enclosed_points(&s2.region);
    for &p in pts1.iter().chain(&pts2) {
        if line.eval(p) == 0 {
            return Err(SeparatingError::NotSeparated(format!(
                "line vanishes at lattice point {p}"
            )));
        }
    }
    let s1_positive = line.eval(pts1[0]) > 0;
    let line = if s1_positive { line.negated() } else { line };
    if pts1.iter().any(|&p| line.eval(p) > 0) || pts2.iter().any(|&p| line.eval(p) < 0) {
        return Err(SeparatingError::NotSeparated(
            "regions are not strictly on opposite sides".into(),
        ));
    }

    let planes1: Vec<Plane> = s1
        .cells
        .iter()
        .map(|c| cell_plane(&c.polygon, h1).expect("lifting covers its region"))
        .collect();
    let planes2: Vec<Plane> = s2
        .cells
        .iter()
        .map(|c| cell_plane(&c.polygon, h2).expect("lifting covers its region"))
        .collect();
    // mu >= (l_C(q) + 1 - h2(q)) / L(q) over side-1 cells and side-2 points,
    // and symmetrically with the sign of L flipped.
    let mut mu = rat(1);
    for plane in &planes1 {
        for &q in &pts2 {
            let need = (plane.eval(q) + rat(1) - h2.get(q).expect("height")) / rat(line.eval(q));
            if need > mu {
                mu = need;
            }
        }
    }
    for plane in &planes2 {
        for &q in &pts1 {
            let need = (plane.eval(q) + rat(1) - h1.get(q).expect("height")) / rat(-line.eval(q));
            if need > mu {
                mu = need;
            }
        }
    }

    let assembly_points = enclosed_points(&assembly.region);
    let covered = assembly_points.iter().all(|p| {
        h1.get(*p).is_some() || h2.get(*p).is_some()
    });
    if covered {
        for attempt in 0..4 {
            let factor = mu.clone() * rat(1 << attempt);
            let mut lifting = Lifting::new(BTreeMap::new());
            for &p in &assembly_points {
                let h = match h1.get(p) {
                    Some(v) => v.clone(),
                    None => {
                        h2.get(p).expect("point covered").clone() + &factor * rat(line.eval(p))
                    }
                };
                lifting.set(p, h);
            }
            lifting.shift_positive();
            if check_lifting(assembly, &lifting).is_ok() {
                return Ok((lifting, LiftMethod::ClosedForm));
            }
        }
    }
    match find_lifting(assembly) {
        Ok(lifting) => Ok((lifting, LiftMethod::LpFallback)),
        Err(irr) => Err(SeparatingError::LiftingFailed(irr)),
    }
}

/// Failure to complete a partial placement to a full subdivision.
#[derive(Debug, thiserror::Error)]
#[error("cannot fill complement: {reason}")]
pub struct CannotFill {
    pub reason: String,
}

/// Completes pairwise-disjoint occupied cells to a full regular subdivision
/// of `region`, returning the complementary cells.
///
/// A coarse lifting is found by LP (one affine function per occupied cell
/// and one supporting plane per leftover lattice point), then refined by a
/// strictly convex quadratic so the complement breaks into faces using every
/// leftover lattice point as a vertex; the faces are read off the induced
/// lower hull. The output, together with `occupied`, always validates and
/// admits a lifting.
pub fn fill_complement(
    region: &LatticePolygon,
    occupied: &[LatticePolygon],
) -> Result<Vec<Cell>, CannotFill> {
    fill_complement_full(region, occupied).map(|(cells, _)| cells)
}

/// As [`fill_complement`], but also returns the refined heights, which are a
/// lifting of the completed subdivision by construction.
pub(crate) fn fill_complement_full(
    region: &LatticePolygon,
    occupied: &[LatticePolygon],
) -> Result<(Vec<Cell>, Lifting), CannotFill> {
    let points = enclosed_points(region);
    for (i, occ) in occupied.iter().enumerate() {
        if !occ.vertices().iter().all(|&v| region.contains(v)) {
            return Err(CannotFill { reason: format!("occupied cell {i} leaves the region") });
        }
        for (j, other) in occupied.iter().enumerate().skip(i + 1) {
            if contact(occ, other) != Contact::Empty {
                return Err(CannotFill { reason: format!("occupied cells {i} and {j} touch") });
            }
        }
    }
    let occ_points: Vec<Vec<LatticePoint>> = occupied.iter().map(enclosed_points).collect();
    let mut owner: HashMap<LatticePoint, usize> = HashMap::new();
    for (ti, ps) in occ_points.iter().enumerate() {
        for &p in ps {
            owner.insert(p, ti);
        }
    }
    let leftover: Vec<LatticePoint> =
        points.iter().copied().filter(|p| !owner.contains_key(p)).collect();
    let leftover_index: HashMap<LatticePoint, usize> =
        leftover.iter().enumerate().map(|(k, &q)| (q, k)).collect();
    let n_tiles = occupied.len();

    // Variables: three per occupied cell, then three per leftover point.
    let slot = |p: LatticePoint| -> usize {
        match owner.get(&p) {
            Some(&t) => 3 * t,
            None => 3 * (n_tiles + leftover_index[&p]),
        }
    };
    let coeffs = |base: usize, p: LatticePoint, sign: i64| -> Vec<(usize, Rat)> {
        vec![
            (base, rat(sign * p.x)),
            (base + 1, rat(sign * p.y)),
            (base + 2, rat(sign)),
        ]
    };
    let mut sys = LinearSystem::new(3 * (n_tiles + leftover.len()));
    for ti in 0..n_tiles {
        let mine: &Vec<LatticePoint> = &occ_points[ti];
        let mine: HashSet<LatticePoint> = mine.iter().copied().collect();
        for &p in &points {
            if mine.contains(&p) {
                continue;
            }
            let mut row = coeffs(slot(p), p, 1);
            row.extend(coeffs(3 * ti, p, -1));
            sys.add_ge(row, rat(1));
        }
    }
    for (k, &q) in leftover.iter().enumerate() {
        for &p in &points {
            if p == q {
                continue;
            }
            let mut row = coeffs(slot(p), p, 1);
            row.extend(coeffs(3 * (n_tiles + k), p, -1));
            sys.add_ge(row, rat(1));
        }
    }
    let solution = match sys.solve() {
        Feasibility::Feasible(x) => x,
        Feasibility::Infeasible(_) => {
            return Err(CannotFill { reason: "occupied placement admits no lifting".into() })
        }
    };
    let eval = |base: usize, p: LatticePoint| -> Rat {
        &solution[base] * rat(p.x) + &solution[base + 1] * rat(p.y) + &solution[base + 2]
    };
    let coarse: HashMap<LatticePoint, Rat> =
        points.iter().map(|&p| (p, eval(slot(p), p))).collect();

    // Refine: F = N * coarse + G, with G the quadratic x^2 + y^2 replaced on
    // each occupied cell by its affine interpolant (keeping cells flat) and N
    // large enough that the coarse strictness dominates the interpolation
    // error everywhere.
    let g = |p: LatticePoint| rat(p.x * p.x + p.y * p.y);
    let tile_interp: Vec<Plane> = occupied
        .iter()
        .map(|poly| {
            let vs = poly.vertices();
            let h: Vec<Rat> = vs.iter().map(|&v| g(v)).collect();
            Plane::through([(vs[0], &h[0]), (vs[1], &h[1]), (vs[2], &h[2])])
        })
        .collect();
    let refined_g = |p: LatticePoint| -> Rat {
        match owner.get(&p) {
            Some(&t) => tile_interp[t].eval(p),
            None => g(p),
        }
    };
    let mut max_gap = Rat::zero();
    for (ti, interp) in tile_interp.iter().enumerate() {
        let mine: HashSet<LatticePoint> = occ_points[ti].iter().copied().collect();
        for &p in &points {
            if mine.contains(&p) {
                continue;
            }
            let gap = interp.eval(p) - refined_g(p);
            if gap > max_gap {
                max_gap = gap;
            }
        }
    }
    for &q in &leftover {
        // Tangent plane of the quadratic at q.
        for &p in &points {
            if p == q {
                continue;
            }
            let tangent = rat(2 * q.x * p.x + 2 * q.y * p.y - q.x * q.x - q.y * q.y);
            let gap = tangent - refined_g(p);
            if gap > max_gap {
                max_gap = gap;
            }
        }
    }
    let n_scale = max_gap + rat(1);
    let heights: Vec<Rat> = points
        .iter()
        .map(|&p| &n_scale * &coarse[&p] + refined_g(p))
        .collect();
    let faces = induced_faces(&points, &heights)
        .map_err(|e| CannotFill { reason: format!("induced subdivision failed: {e}") })?;
    let mut fillers = Vec::new();
    let mut matched = vec![false; n_tiles];
    for face in faces {
        if let Some(ti) = occupied.iter().position(|occ| *occ == face) {
            matched[ti] = true;
        } else {
            fillers.push(Cell::tagged(face));
        }
    }
    if let Some(missing) = matched.iter().position(|&m| !m) {
        return Err(CannotFill {
            reason: format!("occupied cell {missing} did not survive as a face"),
        });
    }
    let mut lifting =
        Lifting::new(points.iter().cloned().zip(heights).collect());
    lifting.shift_positive();
    Ok((fillers, lifting))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{pt, rectangle_region, triangle_region};

    fn poly(vs: &[(i64, i64)]) -> LatticePolygon {
        LatticePolygon::new(vs.iter().map(|&(x, y)| pt(x, y)).collect()).unwrap()
    }

    fn subdivision(region: LatticePolygon, polys: &[LatticePolygon]) -> Subdivision {
        Subdivision::new(region, polys.iter().cloned().map(Cell::tagged).collect())
    }

    #[test]
    fn unit_square_split_by_diagonal_is_valid() {
        let region = rectangle_region(1, 1);
        let t1 = poly(&[(0, 0), (1, 0), (1, 1)]);
        let t2 = poly(&[(0, 0), (1, 1), (0, 1)]);
        let s = subdivision(region, &[t1, t2]);
        assert!(validate_subdivision(&s).is_ok());
    }

    #[test]
    fn duplicate_cell_fails_area_check() {
        let region = rectangle_region(1, 1);
        let t1 = poly(&[(0, 0), (1, 0), (1, 1)]);
        let t2 = poly(&[(0, 0), (1, 1), (0, 1)]);
        let s = subdivision(region, &[t1.clone(), t1, t2]);
        let issues = validate_subdivision(&s).unwrap_err();
        assert!(issues
            .iter()
            .any(|i| matches!(i, ValidityIssue::AreaMismatch { .. })));
        assert!(issues.iter().any(|i| matches!(i, ValidityIssue::Overlap { .. })));
    }

    #[test]
    fn half_edge_contact_is_not_face_to_face() {
        // A 2x1 cell under two unit squares: each square meets the long cell
        // in half of its top edge, which is not a face of the long cell.
        let region = rectangle_region(2, 2);
        let wide = poly(&[(0, 0), (2, 0), (2, 1), (0, 1)]);
        let sq1 = poly(&[(0, 1), (1, 1), (1, 2), (0, 2)]);
        let sq2 = poly(&[(1, 1), (2, 1), (2, 2), (1, 2)]);
        let s = subdivision(region, &[wide, sq1, sq2]);
        let issues = validate_subdivision(&s).unwrap_err();
        assert_eq!(
            issues,
            vec![
                ValidityIssue::NotFaceToFace { a: 0, b: 1 },
                ValidityIssue::NotFaceToFace { a: 0, b: 2 },
            ]
        );
    }

    #[test]
    fn vertex_contact_must_be_mutual_vertex() {
        // B's apex lands in the interior of A's hypotenuse: a single-point
        // contact, but not a vertex of both, so not a common face.
        let region = poly(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let a = poly(&[(0, 0), (2, 0), (2, 2)]);
        let b = poly(&[(1, 1), (0, 2), (0, 1)]);
        assert!(matches!(contact(&a, &b), Contact::Point(_)));
        let s = subdivision(region, &[a, b]);
        let issues = validate_subdivision(&s).unwrap_err();
        assert!(issues.contains(&ValidityIssue::NotFaceToFace { a: 0, b: 1 }));
    }

    #[test]
    fn contact_classifies_intersections() {
        let sq = poly(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let far = poly(&[(5, 0), (6, 0), (5, 1)]);
        assert_eq!(contact(&sq, &far), Contact::Empty);
        let corner = poly(&[(2, 2), (3, 2), (2, 3)]);
        assert!(matches!(contact(&sq, &corner), Contact::Point(p) if p.as_lattice() == Some(pt(2, 2))));
        let beside = poly(&[(2, 0), (3, 0), (3, 2), (2, 2)]);
        match contact(&sq, &beside) {
            Contact::Segment(p, q) => {
                assert_eq!(p.as_lattice(), Some(pt(2, 0)));
                assert_eq!(q.as_lattice(), Some(pt(2, 2)));
            }
            other => panic!("expected a segment, got {other:?}"),
        }
        let overlapping = poly(&[(1, 1), (3, 1), (3, 3), (1, 3)]);
        assert_eq!(contact(&sq, &overlapping), Contact::Area);
    }

    #[test]
    fn paraboloid_certifies_grid_of_squares() {
        let region = rectangle_region(3, 2);
        let mut cells = Vec::new();
        for x in 0..3 {
            for y in 0..2 {
                cells.push(poly(&[(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]));
            }
        }
        let s = subdivision(region.clone(), &cells);
        assert!(validate_subdivision(&s).is_ok());
        let points = enclosed_points(&region);
        let h = Lifting::from_fn(&points, |p| rat(p.x * p.x + p.y * p.y));
        assert!(check_lifting(&s, &h).is_ok());
        let found = find_lifting(&s).expect("grid is regular");
        assert!(check_lifting(&s, &found).is_ok());
    }

    #[test]
    fn corrupted_height_breaks_affineness() {
        let region = rectangle_region(2, 1);
        let cells = vec![
            poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]),
            poly(&[(1, 0), (2, 0), (2, 1), (1, 1)]),
        ];
        let s = subdivision(region.clone(), &cells);
        let points = enclosed_points(&region);
        let mut h = Lifting::from_fn(&points, |p| rat(p.x * p.x + p.y * p.y));
        assert!(check_lifting(&s, &h).is_ok());
        h.set(pt(2, 1), rat(1_000_000));
        assert!(check_lifting(&s, &h).is_err());
    }

    #[test]
    fn flat_heights_fail_strictness_on_two_cells() {
        let region = rectangle_region(1, 1);
        let s = subdivision(
            region.clone(),
            &[poly(&[(0, 0), (1, 0), (1, 1)]), poly(&[(0, 0), (1, 1), (0, 1)])],
        );
        let points = enclosed_points(&region);
        let h = Lifting::from_fn(&points, |_| rat(0));
        let issues = check_lifting(&s, &h).unwrap_err();
        assert!(issues.iter().any(|i| matches!(i, LiftingIssue::NotStrict { .. })));
    }

    #[test]
    fn pinwheel_triangulation_is_irregular() {
        // The classic twisted configuration: an inner triangle whose
        // connecting triangles chase each other cyclically. No convex
        // piecewise-affine lifting exists.
        let region = triangle_region(4);
        let cells = vec![
            poly(&[(1, 1), (2, 1), (1, 2)]),
            poly(&[(0, 0), (4, 0), (2, 1)]),
            poly(&[(0, 0), (2, 1), (1, 1)]),
            poly(&[(4, 0), (0, 4), (1, 2)]),
            poly(&[(4, 0), (1, 2), (2, 1)]),
            poly(&[(0, 4), (0, 0), (1, 1)]),
            poly(&[(0, 4), (1, 1), (1, 2)]),
        ];
        let s = subdivision(region, &cells);
        assert!(validate_subdivision(&s).is_ok());
        let irr = find_lifting(&s).expect_err("pinwheel must be irregular");
        assert!(irr.verified(), "the dual witness must refute the LP");
    }

    #[test]
    fn separating_lift_on_trapezoid_closed_form() {
        // Two skew cells in a trapezoid, one bridge parallelogram between
        // the lattice-free lines x - y = 4 and x - y = 5.
        let region = poly(&[(0, 0), (9, 0), (11, 3), (2, 3)]);
        let x1 = poly(&[(0, 0), (4, 0), (7, 3), (2, 3)]);
        let x2 = poly(&[(5, 0), (9, 0), (11, 3), (8, 3)]);
        let bridge = poly(&[(4, 0), (5, 0), (8, 3), (7, 3)]);
        let s1 = Subdivision::single_cell(x1.clone());
        let s2 = Subdivision::single_cell(x2.clone());
        let h1 = Lifting::from_fn(&enclosed_points(&x1), |_| rat(0));
        let h2 = Lifting::from_fn(&enclosed_points(&x2), |_| rat(0));
        let assembly = subdivision(region, &[x1.clone(), bridge, x2.clone()]);
        assert!(validate_subdivision(&assembly).is_ok());
        let line = SeparatingLine { a: 2, b: -2, c: -9 };
        let (lifting, method) =
            separating_lift(&s1, &h1, &s2, &h2, line, &assembly).expect("lemma applies");
        assert_eq!(method, LiftMethod::ClosedForm);
        assert!(check_lifting(&assembly, &lifting).is_ok());
        assert_eq!(contact(&x1, &x2), Contact::Empty, "the two cells are skew");
    }

    #[test]
    fn separating_lift_falls_back_to_lp_on_split_bridge() {
        // Splitting the bridge along a diagonal makes the closed-form
        // heights degenerate (the two bridge triangles end up coplanar), but
        // the assembly is still regular, so the LP succeeds.
        let region = poly(&[(0, 0), (9, 0), (11, 3), (2, 3)]);
        let x1 = poly(&[(0, 0), (4, 0), (7, 3), (2, 3)]);
        let x2 = poly(&[(5, 0), (9, 0), (11, 3), (8, 3)]);
        let b1 = poly(&[(4, 0), (5, 0), (7, 3)]);
        let b2 = poly(&[(5, 0), (8, 3), (7, 3)]);
        let s1 = Subdivision::single_cell(x1.clone());
        let s2 = Subdivision::single_cell(x2.clone());
        let h1 = Lifting::from_fn(&enclosed_points(&x1), |_| rat(0));
        let h2 = Lifting::from_fn(&enclosed_points(&x2), |_| rat(0));
        let assembly = subdivision(region, &[x1, b1, b2, x2]);
        assert!(validate_subdivision(&assembly).is_ok());
        let line = SeparatingLine { a: 2, b: -2, c: -9 };
        let (lifting, method) =
            separating_lift(&s1, &h1, &s2, &h2, line, &assembly).expect("regular assembly");
        assert_eq!(method, LiftMethod::LpFallback);
        assert!(check_lifting(&assembly, &lifting).is_ok());
    }

    #[test]
    fn iterated_separating_lift_gives_three_skew_cells() {
        // Iterate the construction: split the right-hand cell again along a
        // second lattice-free line; the final assembly carries three
        // pairwise-skew cells.
        let x2_region = poly(&[(5, 0), (9, 0), (11, 3), (8, 3)]);
        let y2 = poly(&[(5, 0), (7, 0), (10, 3), (8, 3)]);
        let y3 = poly(&[(8, 0), (9, 0), (11, 3)]);
        let inner_bridge = poly(&[(7, 0), (8, 0), (11, 3), (10, 3)]);
        let hy2 = Lifting::from_fn(&enclosed_points(&y2), |_| rat(0));
        let hy3 = Lifting::from_fn(&enclosed_points(&y3), |_| rat(0));
        let inner_assembly =
            subdivision(x2_region.clone(), &[y2.clone(), inner_bridge, y3.clone()]);
        assert!(validate_subdivision(&inner_assembly).is_ok());
        let m = SeparatingLine { a: 2, b: -2, c: -15 };
        let (h2, inner_method) = separating_lift(
            &Subdivision::single_cell(y2.clone()),
            &hy2,
            &Subdivision::single_cell(y3.clone()),
            &hy3,
            m,
            &inner_assembly,
        )
        .expect("inner lemma");
        assert_eq!(inner_method, LiftMethod::ClosedForm);

        let region = poly(&[(0, 0), (9, 0), (11, 3), (2, 3)]);
        let x1 = poly(&[(0, 0), (4, 0), (7, 3), (2, 3)]);
        let outer_bridge = poly(&[(4, 0), (5, 0), (8, 3), (7, 3)]);
        let h1 = Lifting::from_fn(&enclosed_points(&x1), |_| rat(0));
        let assembly = subdivision(
            region,
            &[
                x1.clone(),
                outer_bridge,
                y2.clone(),
                poly(&[(7, 0), (8, 0), (11, 3), (10, 3)]),
                y3.clone(),
            ],
        );
        assert!(validate_subdivision(&assembly).is_ok());
        let line = SeparatingLine { a: 2, b: -2, c: -9 };
        let (lifting, _) = separating_lift(
            &Subdivision::single_cell(x1.clone()),
            &h1,
            &inner_assembly,
            &h2,
            line,
            &assembly,
        )
        .expect("outer lemma");
        assert!(check_lifting(&assembly, &lifting).is_ok());
        for (a, b) in [(&x1, &y2), (&x1, &y3), (&y2, &y3)] {
            assert_eq!(contact(a, b), Contact::Empty);
        }
    }

    #[test]
    fn separating_lift_rejects_bad_line() {
        let x1 = poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let x2 = poly(&[(3, 0), (4, 0), (4, 1), (3, 1)]);
        let h1 = Lifting::from_fn(&enclosed_points(&x1), |_| rat(0));
        let h2 = Lifting::from_fn(&enclosed_points(&x2), |_| rat(0));
        let region = poly(&[(0, 0), (4, 0), (4, 1), (0, 1)]);
        let assembly = subdivision(
            region,
            &[x1.clone(), poly(&[(1, 0), (3, 0), (3, 1), (1, 1)]), x2.clone()],
        );
        // This line passes through lattice points of x1.
        let line = SeparatingLine { a: 1, b: 0, c: -1 };
        let err = separating_lift(
            &Subdivision::single_cell(x1),
            &h1,
            &Subdivision::single_cell(x2),
            &h2,
            line,
            &assembly,
        )
        .unwrap_err();
        assert!(matches!(err, SeparatingError::NotSeparated(_)));
    }

    #[test]
    fn two_separated_squares_with_bridge_square() {
        // The smallest two-plane picture: unit squares at x in [0,1] and
        // [2,3], bridge square between, separated by 2x - 3 = 0.
        let region = rectangle_region(3, 1);
        let a = poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let b = poly(&[(2, 0), (3, 0), (3, 1), (2, 1)]);
        let bridge = poly(&[(1, 0), (2, 0), (2, 1), (1, 1)]);
        let ha = Lifting::from_fn(&enclosed_points(&a), |_| rat(0));
        let hb = Lifting::from_fn(&enclosed_points(&b), |_| rat(0));
        let assembly = subdivision(region, &[a.clone(), bridge, b.clone()]);
        let line = SeparatingLine { a: 2, b: 0, c: -3 };
        let (lifting, method) = separating_lift(
            &Subdivision::single_cell(a),
            &ha,
            &Subdivision::single_cell(b),
            &hb,
            line,
            &assembly,
        )
        .expect("lemma applies");
        assert_eq!(method, LiftMethod::ClosedForm);
        assert!(check_lifting(&assembly, &lifting).is_ok());
    }

    #[test]
    fn fill_complement_unit_triangle() {
        let region = rectangle_region(1, 1);
        let occ = poly(&[(0, 0), (1, 0), (0, 1)]);
        let fillers = fill_complement(&region, &[occ.clone()]).unwrap();
        assert_eq!(fillers.len(), 1);
        assert_eq!(fillers[0].polygon, poly(&[(1, 0), (1, 1), (0, 1)]));
        assert_eq!(fillers[0].tag, CellTag::Plane);
        let mut cells = vec![Cell::tagged(occ)];
        cells.extend(fillers);
        let s = Subdivision::new(region, cells);
        assert!(validate_subdivision(&s).is_ok());
        assert!(find_lifting(&s).is_ok());
    }

    #[test]
    fn fill_complement_of_full_region_is_empty() {
        let region = triangle_region(2);
        let fillers = fill_complement(&region, &[region.clone()]).unwrap();
        assert!(fillers.is_empty());
    }

    #[test]
    fn fill_complement_zigzag_cover() {
        // Two 6-point triangles in R(2,3) leave a lattice-free diagonal
        // strip; the completion must produce a valid, regular subdivision in
        // which every leftover lattice point is a vertex.
        let region = rectangle_region(2, 3);
        let t1 = poly(&[(0, 0), (2, 0), (0, 2)]);
        let t2 = poly(&[(2, 1), (2, 3), (0, 3)]);
        let fillers = fill_complement(&region, &[t1.clone(), t2.clone()]).unwrap();
        let mut cells = vec![Cell::tagged(t1), Cell::tagged(t2)];
        cells.extend(fillers);
        let s = Subdivision::new(region, cells);
        assert!(validate_subdivision(&s).is_ok());
        let lifting = find_lifting(&s).expect("completion is regular");
        assert!(check_lifting(&s, &lifting).is_ok());
    }

    #[test]
    fn fill_complement_rejects_touching_tiles() {
        let region = rectangle_region(2, 1);
        let a = poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let b = poly(&[(1, 0), (2, 0), (2, 1), (1, 1)]);
        let err = fill_complement(&region, &[a, b]).unwrap_err();
        assert!(err.reason.contains("touch"));
    }

    #[test]
    fn cell_tagging_rules() {
        assert_eq!(Cell::tagged(poly(&[(0, 0), (1, 0), (0, 1)])).tag, CellTag::Plane);
        assert_eq!(
            Cell::tagged(poly(&[(0, 0), (1, 0), (2, 1), (1, 1)])).tag,
            CellTag::Quadric
        );
        assert_eq!(Cell::tagged(poly(&[(0, 0), (2, 0), (0, 2)])).tag, CellTag::Filler);
        let special = Cell::special(poly(&[(0, 0), (2, 0), (0, 2)]), "E1");
        assert!(special.tag_violation().is_none());
        let bogus = Cell::special(poly(&[(0, 0), (1, 0), (0, 1)]), "E1");
        assert!(bogus.tag_violation().is_some());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::lattice::apply_map;
        use crate::test_strategies::{arb_hull, arb_unimodular};

        /// Coefficients of a strictly convex integral quadric
        /// `a x^2 + b xy + c y^2 + d x + e y`. Positive definiteness puts
        /// every lifted lattice point on the lower hull, which is exactly
        /// the precondition of `induced_faces`.
        fn arb_quadric() -> impl Strategy<Value = (i64, i64, i64, i64, i64)> {
            (1i64..=3, -2i64..=2, 1i64..=3, -3i64..=3, -3i64..=3)
                .prop_filter("needs b^2 < 4ac", |&(a, b, c, _, _)| b * b < 4 * a * c)
        }

        proptest! {
            // Each case runs several exact LPs; trimmed case count keeps the
            // unit suite quick (the acceptance suite runs the full battery).
            #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

            #[test]
            fn induced_quadric_subdivisions_round_trip_through_the_lp(
                region in arb_hull(2),
                (a, b, c, d, e) in arb_quadric(),
                g in arb_unimodular(3, 2),
            ) {
                let points = enclosed_points(&region);
                let heights: Vec<Rat> = points
                    .iter()
                    .map(|p| rat(a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y))
                    .collect();
                let faces = induced_faces(&points, &heights).unwrap();
                let s = Subdivision::new(
                    region.clone(),
                    faces.iter().cloned().map(Cell::tagged).collect(),
                );
                prop_assert!(validate_subdivision(&s).is_ok());

                // The generating heights certify the subdivision they induce...
                let given =
                    Lifting::new(points.iter().copied().zip(heights.iter().cloned()).collect());
                prop_assert!(check_lifting(&s, &given).is_ok());

                // ...and so does a lifting recovered from scratch.
                let found = find_lifting(&s).expect("induced subdivisions are regular");
                prop_assert!(check_lifting(&s, &found).is_ok());

                // Regularity is a property of the combinatorics, not of the
                // coordinates.
                let mapped = Subdivision::new(
                    apply_map(&region, &g),
                    s.cells
                        .iter()
                        .map(|cell| Cell::tagged(apply_map(&cell.polygon, &g)))
                        .collect(),
                );
                prop_assert!(validate_subdivision(&mapped).is_ok());
                prop_assert!(find_lifting(&mapped).is_ok());
            }
        }
    }
}
