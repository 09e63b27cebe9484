//! Lattice points, unimodular affine maps, and convex lattice polygons.
//!
//! Conventions used throughout the crate:
//!
//! - Polygons are stored as strictly convex counter-clockwise vertex lists:
//!   every vertex is a corner (no three consecutive vertices are collinear),
//!   and the list is rotated so it starts at the lexicographically smallest
//!   vertex. Two `LatticePolygon` values compare equal iff they are the same
//!   point set.
//! - "Lattice length" of an edge is the number of primitive steps along it,
//!   i.e. `gcd(|dx|, |dy|)`; an edge of lattice length `k` carries `k + 1`
//!   lattice points.
//! - A *standard position* places a longest edge from the origin along the
//!   positive x-axis with the polygon in the upper half plane and the edge
//!   adjacent to the origin sheared to a primitive direction `(p, q)` with
//!   `0 <= p < q`. The *canonical form* is the lexicographically smallest
//!   vertex list over all standard positions; it is a complete invariant for
//!   unimodular affine equivalence.
//!
//! Coordinates are `i64`; every product goes through `i128`, which is safe for
//! all coordinate ranges that appear in this crate (well below 2^40).

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from lattice-geometry constructors and operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    /// Input spans a point or a segment where a two-dimensional polygon is required.
    #[error("input is not two-dimensional (all points on one line)")]
    DimensionTooLow,
    /// Vertex list is not strictly convex in counter-clockwise order.
    #[error("vertex list is not a strictly convex counter-clockwise polygon")]
    NotConvex,
    /// Vertex list winds clockwise.
    #[error("vertex list is ordered clockwise, expected counter-clockwise")]
    NotCounterClockwise,
    /// Linear part of an affine map does not have determinant +-1.
    #[error("matrix determinant is {0}, expected +1 or -1")]
    NotUnimodular(i64),
    /// Line coefficients `a`, `b` are both zero.
    #[error("line coefficients a and b are both zero")]
    DegenerateLine,
}

/// A point of the integer lattice Z^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    #[inline]
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl std::ops::Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Shorthand for `LatticePoint::new`.
#[inline]
pub const fn pt(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y)
}

/// Cross product of `b - a` and `c - a`; positive iff `a, b, c` turn left.
#[inline]
pub fn orient(a: LatticePoint, b: LatticePoint, c: LatticePoint) -> i128 {
    let abx = (b.x - a.x) as i128;
    let aby = (b.y - a.y) as i128;
    let acx = (c.x - a.x) as i128;
    let acy = (c.y - a.y) as i128;
    abx * acy - aby * acx
}

/// Lattice length of the segment from `a` to `b` (0 iff `a == b`).
#[inline]
pub fn lattice_length(a: LatticePoint, b: LatticePoint) -> i64 {
    (b.x - a.x).abs().gcd(&(b.y - a.y).abs())
}

/// Primitive direction of the nonzero vector `v`.
pub fn primitive(v: LatticePoint) -> LatticePoint {
    debug_assert!(v.x != 0 || v.y != 0);
    let g = v.x.abs().gcd(&v.y.abs());
    pt(v.x / g, v.y / g)
}

/// An affine map `x -> M x + t` with `det M = +-1`, so it preserves Z^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularAffineMap {
    /// Matrix rows: maps `(x, y)` to `(a x + b y + tx, c x + d y + ty)`.
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub tx: i64,
    pub ty: i64,
}

impl UnimodularAffineMap {
    pub fn new(a: i64, b: i64, c: i64, d: i64, tx: i64, ty: i64) -> Result<Self, LatticeError> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 && det != -1 {
            return Err(LatticeError::NotUnimodular(det as i64));
        }
        Ok(Self { a, b, c, d, tx, ty })
    }

    pub fn identity() -> Self {
        Self { a: 1, b: 0, c: 0, d: 1, tx: 0, ty: 0 }
    }

    pub fn translation(tx: i64, ty: i64) -> Self {
        Self { a: 1, b: 0, c: 0, d: 1, tx, ty }
    }

    /// Counter-clockwise quarter turn about the origin.
    pub fn rotation_quarter() -> Self {
        Self { a: 0, b: -1, c: 1, d: 0, tx: 0, ty: 0 }
    }

    #[inline]
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn apply(&self, p: LatticePoint) -> LatticePoint {
        pt(self.a * p.x + self.b * p.y + self.tx, self.c * p.x + self.d * p.y + self.ty)
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            tx: self.a * other.tx + self.b * other.ty + self.tx,
            ty: self.c * other.tx + self.d * other.ty + self.ty,
        }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det(); // +-1
        let (ia, ib, ic, id) = (self.d * det, -self.b * det, -self.c * det, self.a * det);
        Self {
            a: ia,
            b: ib,
            c: ic,
            d: id,
            tx: -(ia * self.tx + ib * self.ty),
            ty: -(ic * self.tx + id * self.ty),
        }
    }
}

/// Pick's-theorem data of a convex lattice polygon.
///
/// Invariant (Pick's identity): `2 * area = 2 * interior + boundary - 2`.
/// `interior` and `boundary` are counted directly from lattice points, while
/// `twice_area` comes from the shoelace formula, so the identity is a genuine
/// cross-check rather than a definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickData {
    pub boundary: i64,
    pub interior: i64,
    pub twice_area: i64,
}

impl PickData {
    /// Total number of lattice points in the closed polygon.
    #[inline]
    pub fn total(&self) -> i64 {
        self.boundary + self.interior
    }

    /// Whether Pick's identity holds for this data.
    #[inline]
    pub fn identity_holds(&self) -> bool {
        self.twice_area == 2 * self.interior + self.boundary - 2
    }
}

/// A strictly convex lattice polygon; see the module docs for invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePolygon {
    vertices: Vec<LatticePoint>,
}

impl LatticePolygon {
    /// Validates and normalizes a counter-clockwise strictly convex vertex list.
    ///
    /// The list is rotated to start at the lexicographically smallest vertex.
    /// Rejects lists that are degenerate (`DimensionTooLow`), wind clockwise
    /// (`NotCounterClockwise`), or are not strictly convex (`NotConvex`).
    pub fn new(vertices: Vec<LatticePoint>) -> Result<Self, LatticeError> {
        let n = vertices.len();
        if n < 3 {
            return Err(LatticeError::DimensionTooLow);
        }
        let mut doubled_area: i128 = 0;
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            doubled_area += (p.x as i128) * (q.y as i128) - (q.x as i128) * (p.y as i128);
        }
        if doubled_area == 0 {
            return Err(LatticeError::DimensionTooLow);
        }
        if doubled_area < 0 {
            return Err(LatticeError::NotCounterClockwise);
        }
        // Strict convexity: every consecutive triple turns left. Combined with
        // the winding-number check below this guarantees a simple polygon.
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if orient(a, b, c) <= 0 {
                return Err(LatticeError::NotConvex);
            }
        }
        // All-left-turn lists can still wind more than once (star polygons).
        // The edge directions of a simple convex CCW polygon are sorted by
        // angle with exactly one wrap-around.
        let mut wraps = 0;
        for i in 0..n {
            let d0 = vertices[(i + 1) % n] - vertices[i];
            let d1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if angular_less(d1, d0) {
                wraps += 1;
            }
        }
        if wraps != 1 {
            return Err(LatticeError::NotConvex);
        }
        let start = (0..n)
            .min_by_key(|&i| (vertices[i].x, vertices[i].y))
            .expect("nonempty vertex list");
        let mut v = vertices;
        v.rotate_left(start);
        Ok(Self { vertices: v })
    }

    #[inline]
    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edges as ordered vertex pairs in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (LatticePoint, LatticePoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Twice the (positive) area, via the shoelace formula.
    pub fn twice_area(&self) -> i64 {
        let n = self.vertices.len();
        let mut s: i128 = 0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            s += (p.x as i128) * (q.y as i128) - (q.x as i128) * (p.y as i128);
        }
        s as i64
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (LatticePoint, LatticePoint) {
        let xs = self.vertices.iter().map(|p| p.x);
        let ys = self.vertices.iter().map(|p| p.y);
        (
            pt(xs.clone().min().unwrap(), ys.clone().min().unwrap()),
            pt(xs.max().unwrap(), ys.max().unwrap()),
        )
    }

    /// True iff `p` lies in the closed polygon.
    pub fn contains(&self, p: LatticePoint) -> bool {
        self.edges().all(|(a, b)| orient(a, b, p) >= 0)
    }

    /// True iff `p` lies strictly inside the polygon.
    pub fn contains_strictly(&self, p: LatticePoint) -> bool {
        self.edges().all(|(a, b)| orient(a, b, p) > 0)
    }

    /// Translate by `(dx, dy)`.
    pub fn translated(&self, dx: i64, dy: i64) -> LatticePolygon {
        let v = self.vertices.iter().map(|p| pt(p.x + dx, p.y + dy)).collect();
        LatticePolygon::new(v).expect("translate preserves validity")
    }
}

impl fmt::Display for LatticePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[{},{}]", v.x, v.y)?;
        }
        write!(f, "]")
    }
}

/// Angular strict-less on nonzero vectors, sweeping CCW from the +x axis.
fn angular_less(u: LatticePoint, v: LatticePoint) -> bool {
    let half = |p: LatticePoint| -> u8 {
        // 0 for angle in [0, pi), 1 for [pi, 2 pi).
        if p.y > 0 || (p.y == 0 && p.x > 0) {
            0
        } else {
            1
        }
    };
    let (hu, hv) = (half(u), half(v));
    if hu != hv {
        return hu < hv;
    }
    orient(pt(0, 0), u, v) > 0
}

/// Convex hull of a point set, as a `LatticePolygon`.
///
/// Collinear boundary points are not vertices of the result. Errors with
/// `DimensionTooLow` when the set spans a point or segment only.
pub fn convex_hull(points: &[LatticePoint]) -> Result<LatticePolygon, LatticeError> {
    let mut pts: Vec<LatticePoint> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return Err(LatticeError::DimensionTooLow);
    }
    // Andrew's monotone chain, strict turns only.
    let mut lower: Vec<LatticePoint> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<LatticePoint> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    LatticePolygon::new(lower)
}

/// All lattice points of the closed polygon, in lexicographic order.
pub fn enclosed_points(poly: &LatticePolygon) -> Vec<LatticePoint> {
    let (lo, hi) = poly.bounding_box();
    let mut out = Vec::new();
    for x in lo.x..=hi.x {
        for y in lo.y..=hi.y {
            let p = pt(x, y);
            if poly.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Boundary, interior, and doubled-area counts of the polygon.
pub fn pick_data(poly: &LatticePolygon) -> PickData {
    let boundary: i64 = poly.edges().map(|(a, b)| lattice_length(a, b)).sum();
    let total = enclosed_points(poly).len() as i64;
    PickData { boundary, interior: total - boundary, twice_area: poly.twice_area() }
}

/// Image of the polygon under a unimodular affine map.
///
/// Reflections (determinant -1) reverse orientation; the result is re-ordered
/// so it is again counter-clockwise.
pub fn apply_map(poly: &LatticePolygon, map: &UnimodularAffineMap) -> LatticePolygon {
    let mut v: Vec<LatticePoint> = poly.vertices().iter().map(|&p| map.apply(p)).collect();
    if map.det() < 0 {
        v.reverse();
    }
    LatticePolygon::new(v).expect("unimodular image of a convex polygon is convex")
}

/// A polygon in standard position together with its placement data.
///
/// `m` is the lattice length of the longest edge (which runs from the origin
/// to `(m, 0)`); the polygon's lattice points on that edge number `m + 1`.
/// `(p, q)` is the primitive direction of the other edge at the origin, with
/// `0 <= p < q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardPosition {
    pub polygon: LatticePolygon,
    pub m: i64,
    pub p: i64,
    pub q: i64,
}

/// Every standard position of `poly`: one per (longest edge, endpoint) choice.
///
/// Endpoint swaps implicitly include the reflection, so this enumeration is
/// exhaustive: any unimodular map taking `poly` to a standard position lands
/// in this list.
fn standard_positions(poly: &LatticePolygon) -> Vec<StandardPosition> {
    let verts = poly.vertices();
    let n = verts.len();
    let max_len = poly.edges().map(|(a, b)| lattice_length(a, b)).max().expect("polygon has edges");
    let mut out = Vec::new();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        if lattice_length(a, b) != max_len {
            continue;
        }
        for &(origin, other, reflect) in &[(a, b, false), (b, a, true)] {
            // Build M with M(origin) = 0 and M(other) on the +x axis, polygon above.
            let u = primitive(other - origin);
            // Extended gcd: find (vx, vy) with ux*vy - uy*vx = 1.
            let g = extended_gcd(u.x, u.y);
            debug_assert_eq!(g.0, 1, "primitive vector has coprime entries");
            // u.x * s + u.y * t = 1  =>  v = (-t, s) gives det(u, v) = u.x*s + u.y*t = 1.
            let (s, t) = (g.1, g.2);
            let (vx, vy) = (-t, s);
            // Inverse of the column matrix [u v] (determinant 1).
            let lin = UnimodularAffineMap::new(vy, -vx, -u.y, u.x, 0, 0).expect("det 1");
            let shift = UnimodularAffineMap::translation(-origin.x, -origin.y);
            let mut map = lin.compose(&shift);
            if reflect {
                // Traversing the edge against CCW order leaves the polygon
                // below the axis; flip it back up across the x-axis.
                let mirror = UnimodularAffineMap::new(1, 0, 0, -1, 0, 0).expect("det -1 is fine");
                map = mirror.compose(&map);
            }
            let q_poly = apply_map(poly, &map);
            // The adjacent edge at the origin is the one arriving there in CCW
            // order; shear it to 0 <= p < q.
            let qverts = q_poly.vertices();
            let origin_idx =
                qverts.iter().position(|&v| v == pt(0, 0)).expect("origin is a vertex");
            let prev = qverts[(origin_idx + qverts.len() - 1) % qverts.len()];
            let dir = primitive(prev);
            debug_assert!(dir.y > 0, "polygon lies above the x-axis");
            let k = dir.x.div_euclid(dir.y);
            let shear = UnimodularAffineMap::new(1, -k, 0, 1, 0, 0).expect("shear det 1");
            let final_poly = apply_map(&q_poly, &shear);
            out.push(StandardPosition {
                polygon: final_poly,
                m: max_len,
                p: dir.x.rem_euclid(dir.y),
                q: dir.y,
            });
        }
    }
    out
}

/// Vertex list rotated to start at the origin vertex (standard positions only).
fn standard_vertex_key(poly: &LatticePolygon) -> Vec<LatticePoint> {
    let verts = poly.vertices();
    let idx = verts.iter().position(|&v| v == pt(0, 0)).expect("origin is a vertex");
    let mut v = verts.to_vec();
    v.rotate_left(idx);
    v
}

/// A standard position of `poly` (the one with the smallest vertex list, so
/// the result is deterministic and `normalize_standard(P).polygon ==
/// canonical_form(P)`).
pub fn normalize_standard(poly: &LatticePolygon) -> StandardPosition {
    standard_positions(poly)
        .into_iter()
        .min_by_key(|sp| standard_vertex_key(&sp.polygon))
        .expect("at least one standard position exists")
}

/// Canonical representative of the unimodular affine equivalence class.
///
/// Two polygons have equal canonical forms iff some unimodular affine map
/// sends one to the other.
pub fn canonical_form(poly: &LatticePolygon) -> LatticePolygon {
    normalize_standard(poly).polygon
}

/// True iff the line `a x + b y = c` contains no lattice point.
pub fn line_is_lattice_free(a: i64, b: i64, c: i64) -> Result<bool, LatticeError> {
    if a == 0 && b == 0 {
        return Err(LatticeError::DegenerateLine);
    }
    Ok(c.rem_euclid(a.abs().gcd(&b.abs())) != 0)
}

/// `gcd, s, t` with `a*s + b*t = gcd` (gcd >= 0).
fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a >= 0 {
            (a, 1, 0)
        } else {
            (-a, -1, 0)
        }
    } else {
        let (g, s, t) = extended_gcd(b, a.rem_euclid(b));
        (g, t, s - a.div_euclid(b) * t)
    }
}

/// Axis-aligned right triangle with legs `d` on the coordinate axes.
pub fn triangle_region(d: i64) -> LatticePolygon {
    LatticePolygon::new(vec![pt(0, 0), pt(d, 0), pt(0, d)]).expect("valid triangle")
}

/// Axis-aligned rectangle `[0, a] x [0, b]`.
pub fn rectangle_region(a: i64, b: i64) -> LatticePolygon {
    LatticePolygon::new(vec![pt(0, 0), pt(a, 0), pt(a, b), pt(0, b)]).expect("valid rectangle")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(v: &[(i64, i64)]) -> LatticePolygon {
        LatticePolygon::new(v.iter().map(|&(x, y)| pt(x, y)).collect()).unwrap()
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts =
            [pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2), pt(1, 1), pt(1, 0), pt(2, 1)];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices(), &[pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2)]);
    }

    #[test]
    fn hull_of_collinear_points_is_degenerate() {
        let pts = [pt(0, 0), pt(1, 2), pt(2, 4), pt(3, 6)];
        assert_eq!(convex_hull(&pts), Err(LatticeError::DimensionTooLow));
    }

    #[test]
    fn constructor_rejects_clockwise_and_nonconvex() {
        assert_eq!(
            LatticePolygon::new(vec![pt(0, 0), pt(0, 1), pt(1, 0)]),
            Err(LatticeError::NotCounterClockwise)
        );
        // Collinear middle vertex.
        assert_eq!(
            LatticePolygon::new(vec![pt(0, 0), pt(1, 0), pt(2, 0), pt(0, 1)]),
            Err(LatticeError::NotConvex)
        );
        // Reflex quadrilateral.
        assert_eq!(
            LatticePolygon::new(vec![pt(0, 0), pt(4, 0), pt(1, 1), pt(0, 4)]),
            Err(LatticeError::NotConvex)
        );
    }

    #[test]
    fn enclosed_points_of_conic_triangle() {
        let t = poly(&[(0, 0), (2, 0), (0, 2)]);
        assert_eq!(
            enclosed_points(&t),
            vec![pt(0, 0), pt(0, 1), pt(0, 2), pt(1, 0), pt(1, 1), pt(2, 0)]
        );
    }

    // Brute-force lattice-point counts for pick_data cross-checks: boundary
    // points satisfy an edge equation, interior points none. Frozen values
    // below were obtained from this independent count.
    fn brute_counts(p: &LatticePolygon) -> (i64, i64) {
        let (lo, hi) = p.bounding_box();
        let (mut boundary, mut interior) = (0, 0);
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                let q = pt(x, y);
                if !p.contains(q) {
                    continue;
                }
                if p.edges().any(|(a, b)| {
                    orient(a, b, q) == 0
                        && (q.x - a.x) * (q.x - b.x) + (q.y - a.y) * (q.y - b.y) <= 0
                }) {
                    boundary += 1;
                } else {
                    interior += 1;
                }
            }
        }
        (boundary, interior)
    }

    #[test]
    fn pick_data_matches_brute_force_counts() {
        let cases = [
            // (vertices, boundary, interior, twice_area)
            (vec![(0, 0), (4, 0), (0, 1)], 6, 0, 4),
            (vec![(0, 0), (2, 0), (0, 2)], 6, 0, 4),
            (vec![(0, 0), (1, 0), (2, 7)], 3, 3, 7),
            (vec![(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)], 5, 1, 5),
            (vec![(0, 0), (1, 0), (2, 3), (1, 3)], 4, 2, 6),
            (vec![(0, 0), (5, 0), (5, 3), (0, 3)], 16, 8, 30),
        ];
        for (verts, boundary, interior, twice_area) in cases {
            let p = poly(&verts);
            let data = pick_data(&p);
            assert_eq!((data.boundary, data.interior), brute_counts(&p), "{p}");
            assert_eq!(data.boundary, boundary, "{p}");
            assert_eq!(data.interior, interior, "{p}");
            assert_eq!(data.twice_area, twice_area, "{p}");
            assert!(data.identity_holds(), "{p}");
        }
    }

    #[test]
    fn map_roundtrip_and_composition() {
        let m = UnimodularAffineMap::new(2, 1, 1, 1, 3, -2).unwrap();
        let inv = m.inverse();
        let p = pt(5, -7);
        assert_eq!(inv.apply(m.apply(p)), p);
        assert_eq!(m.compose(&inv).apply(p), p);
        assert!(UnimodularAffineMap::new(2, 0, 0, 2, 0, 0).is_err());
    }

    #[test]
    fn apply_map_keeps_ccw_under_reflection() {
        let t = poly(&[(0, 0), (2, 0), (0, 2)]);
        let mirror = UnimodularAffineMap::new(-1, 0, 0, 1, 0, 0).unwrap();
        let image = apply_map(&t, &mirror);
        assert!(image.twice_area() > 0);
        assert_eq!(image.twice_area(), t.twice_area());
    }

    #[test]
    fn normalize_standard_keeps_already_standard_triangle() {
        let t = poly(&[(0, 0), (4, 0), (0, 1)]);
        let sp = normalize_standard(&t);
        assert_eq!(sp.polygon, t);
        assert_eq!(sp.m, 4);
        assert_eq!((sp.p, sp.q), (0, 1));
    }

    #[test]
    fn canonical_form_identifies_equivalent_polygons() {
        let base = poly(&[(0, 0), (2, 0), (1, 2), (0, 1)]);
        let maps = [
            UnimodularAffineMap::new(1, 0, 5, 1, 2, 9).unwrap(),
            UnimodularAffineMap::new(0, -1, 1, 0, -3, 4).unwrap(),
            UnimodularAffineMap::new(-1, 0, 0, 1, 7, 0).unwrap(),
            UnimodularAffineMap::new(3, 2, 1, 1, 0, 0).unwrap(),
        ];
        let canon = canonical_form(&base);
        for m in &maps {
            assert_eq!(canonical_form(&apply_map(&base, m)), canon, "map {m:?}");
        }
        // A genuinely different polygon must not collide.
        let other = poly(&[(0, 0), (2, 0), (0, 2)]);
        assert_ne!(canonical_form(&other), canon);
    }

    #[test]
    fn lattice_free_lines() {
        assert!(line_is_lattice_free(0, 2, 7).unwrap());
        assert!(line_is_lattice_free(2, 0, -3).unwrap());
        assert!(!line_is_lattice_free(0, 2, 6).unwrap());
        assert!(!line_is_lattice_free(3, 5, 1).unwrap());
        assert!(line_is_lattice_free(4, 6, 3).unwrap());
        assert!(line_is_lattice_free(0, 0, 1).is_err());
    }

    #[test]
    fn extended_gcd_identity() {
        for a in -12..12 {
            for b in -12..12 {
                if a == 0 && b == 0 {
                    continue;
                }
                let (g, s, t) = extended_gcd(a, b);
                assert_eq!(g, (a as i64).abs().gcd(&(b as i64).abs()));
                assert_eq!(a * s + b * t, g);
            }
        }
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::test_strategies::{arb_hull, arb_unimodular};

        proptest! {
            #[test]
            fn unimodular_maps_preserve_counts_and_canonical_form(
                p in arb_hull(6),
                g in arb_unimodular(4, 3),
            ) {
                let image = apply_map(&p, &g);
                prop_assert_eq!(enclosed_points(&image).len(), enclosed_points(&p).len());
                prop_assert_eq!(pick_data(&image), pick_data(&p));
                prop_assert_eq!(canonical_form(&image), canonical_form(&p));
            }

            #[test]
            fn pick_identity_holds_on_random_hulls(p in arb_hull(7)) {
                let data = pick_data(&p);
                prop_assert!(data.identity_holds(), "2A = 2I + B - 2 fails on {:?}", p);
                prop_assert_eq!(data.total() as usize, enclosed_points(&p).len());
            }
        }
    }
}
