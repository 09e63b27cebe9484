//! Lower-hull ("induced") subdivisions of a lifted lattice point set.
//!
//! Given exact rational heights on a finite set of lattice points in convex
//! position (every point lies on the lower convex hull of its lift), this
//! module computes the subdivision induced by the heights: the projections of
//! the lower-hull facets. The pipeline is a lexicographic sweep triangulation
//! that uses *every* input point as a vertex, Lawson flips driven by the
//! exact lifted-convexity predicate, and a final merge of coplanar adjacent
//! triangles into maximal faces.

use std::collections::{HashMap, VecDeque};

use crate::lattice::{convex_hull, orient, LatticePoint, LatticePolygon};
use crate::lp::Rat;

/// Affine function `z = a·x + b·y + c` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl Plane {
    /// The unique affine function through three non-collinear lifted points.
    pub fn through(points: [(LatticePoint, &Rat); 3]) -> Plane {
        let [(p0, h0), (p1, h1), (p2, h2)] = points;
        let det = orient(p0, p1, p2);
        assert!(det != 0, "plane through collinear points");
        let det = Rat::from(num_bigint::BigInt::from(det));
        let d1 = h1 - h0;
        let d2 = h2 - h0;
        let x1 = Rat::from(num_bigint::BigInt::from(p1.x - p0.x));
        let y1 = Rat::from(num_bigint::BigInt::from(p1.y - p0.y));
        let x2 = Rat::from(num_bigint::BigInt::from(p2.x - p0.x));
        let y2 = Rat::from(num_bigint::BigInt::from(p2.y - p0.y));
        let a = (&d1 * &y2 - &d2 * &y1) / &det;
        let b = (&d2 * &x1 - &d1 * &x2) / &det;
        let c = h0 - &a * Rat::from(num_bigint::BigInt::from(p0.x))
            - &b * Rat::from(num_bigint::BigInt::from(p0.y));
        Plane { a, b, c }
    }

    pub fn eval(&self, p: LatticePoint) -> Rat {
        &self.a * Rat::from(num_bigint::BigInt::from(p.x))
            + &self.b * Rat::from(num_bigint::BigInt::from(p.y))
            + &self.c
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InducedError {
    #[error("need at least 3 points spanning the plane, got {0}")]
    Degenerate(usize),
    #[error("duplicate input point ({0})")]
    DuplicatePoint(LatticePoint),
    #[error("flip sequence did not terminate (heights not in convex position?)")]
    FlipLimit,
}

/// Computes the faces of the subdivision induced by `heights`.
///
/// Requires the lifted points to be in convex position (each point lies on
/// the lower hull); callers own that guarantee, and downstream validation
/// catches violations loudly.
pub fn induced_faces(
    points: &[LatticePoint],
    heights: &[Rat],
) -> Result<Vec<LatticePolygon>, InducedError> {
    assert_eq!(points.len(), heights.len());
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i]);
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(InducedError::DuplicatePoint(points[w[0]]));
        }
    }
    let pts: Vec<LatticePoint> = order.iter().map(|&i| points[i]).collect();
    let hts: Vec<Rat> = order.iter().map(|&i| heights[i].clone()).collect();

    let mut tri = sweep_triangulation(&pts)?;
    lawson_flips(&pts, &hts, &mut tri)?;
    Ok(merge_coplanar(&pts, &hts, &tri))
}

/// CCW triangles, as index triples into the sorted point list.
type Triangle = [usize; 3];

/// Lexicographic incremental triangulation using every point as a vertex.
///
/// The hull is kept as a CCW cycle that retains collinear boundary points, so
/// a later point never lands in the interior of an existing hull edge.
fn sweep_triangulation(pts: &[LatticePoint]) -> Result<Vec<Triangle>, InducedError> {
    let n = pts.len();
    if n < 3 {
        return Err(InducedError::Degenerate(n));
    }
    // Initial collinear run along the lexicographically first points.
    let mut k = 2;
    while k < n && orient(pts[0], pts[1], pts[k]) == 0 {
        k += 1;
    }
    if k == n {
        return Err(InducedError::Degenerate(n));
    }
    let q = k;
    let side = orient(pts[0], pts[1], pts[q]);
    let mut triangles: Vec<Triangle> = Vec::new();
    for j in 0..k - 1 {
        if side > 0 {
            triangles.push([j, j + 1, q]);
        } else {
            triangles.push([j + 1, j, q]);
        }
    }
    // CCW hull cycle including the collinear run.
    let mut hull: Vec<usize> = if side > 0 {
        let mut h: Vec<usize> = (0..k).collect();
        h.push(q);
        h
    } else {
        let mut h: Vec<usize> = (0..k).rev().collect();
        h.push(q);
        h
    };

    for p in (k + 1)..n {
        let m = hull.len();
        let visible: Vec<bool> = (0..m)
            .map(|i| orient(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) < 0)
            .collect();
        let starts: Vec<usize> = (0..m)
            .filter(|&i| visible[i] && !visible[(i + m - 1) % m])
            .collect();
        assert_eq!(
            starts.len(),
            1,
            "visible hull edges must form one contiguous arc"
        );
        let start = starts[0];
        let mut arc_len = 0;
        while visible[(start + arc_len) % m] {
            arc_len += 1;
        }
        for t in 0..arc_len {
            let a = hull[(start + t) % m];
            let b = hull[(start + t + 1) % m];
            triangles.push([a, p, b]);
        }
        // New hull: from the end of the visible arc around the invisible part
        // to its start, then the new point.
        let mut new_hull = Vec::with_capacity(m - arc_len + 2);
        let mut idx = (start + arc_len) % m;
        loop {
            new_hull.push(hull[idx]);
            if idx == start {
                break;
            }
            idx = (idx + 1) % m;
        }
        new_hull.push(p);
        hull = new_hull;
    }
    Ok(triangles)
}

/// Undirected edge key.
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn tri_plane(pts: &[LatticePoint], hts: &[Rat], t: &Triangle) -> Plane {
    Plane::through([
        (pts[t[0]], &hts[t[0]]),
        (pts[t[1]], &hts[t[1]]),
        (pts[t[2]], &hts[t[2]]),
    ])
}

/// Flips interior edges until the lifted surface is locally convex across
/// every edge; for heights in convex position this yields the lower hull.
fn lawson_flips(
    pts: &[LatticePoint],
    hts: &[Rat],
    triangles: &mut Vec<Triangle>,
) -> Result<(), InducedError> {
    let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, t) in triangles.iter().enumerate() {
        for e in 0..3 {
            edge_map
                .entry(edge_key(t[e], t[(e + 1) % 3]))
                .or_default()
                .push(ti);
        }
    }
    let mut queue: VecDeque<(usize, usize)> = edge_map.keys().copied().collect();
    let mut limit = 1000 + 60 * pts.len() * pts.len();
    while let Some(key) = queue.pop_front() {
        let Some(owners) = edge_map.get(&key) else { continue };
        if owners.len() != 2 {
            continue;
        }
        let (t1, t2) = (owners[0], owners[1]);
        let (a, b) = key;
        let c = third_vertex(&triangles[t1], a, b);
        let d = third_vertex(&triangles[t2], a, b);
        // Flip when the opposite vertex dips strictly below the other
        // triangle's plane (lifted non-convexity across the edge).
        let plane = tri_plane(pts, hts, &triangles[t1]);
        let below = plane.eval(pts[d]) > hts[d];
        if !below {
            continue;
        }
        // The flip needs the quad to be strictly convex: cd must cross ab.
        let oa = orient(pts[c], pts[d], pts[a]);
        let ob = orient(pts[c], pts[d], pts[b]);
        if !(oa > 0 && ob < 0 || oa < 0 && ob > 0) {
            // Re-examine later; other flips unlock this configuration.
            queue.push_back(key);
            if limit == 0 {
                return Err(InducedError::FlipLimit);
            }
            limit -= 1;
            continue;
        }
        // Replace (a,b,c),(b,a,d) by (c,d,·): orient each new triangle CCW.
        let new1 = ccw([a, d, c], pts);
        let new2 = ccw([d, b, c], pts);
        for (ti, old) in [(t1, triangles[t1]), (t2, triangles[t2])] {
            for e in 0..3 {
                let k = edge_key(old[e], old[(e + 1) % 3]);
                if let Some(v) = edge_map.get_mut(&k) {
                    v.retain(|&x| x != ti);
                }
            }
        }
        triangles[t1] = new1;
        triangles[t2] = new2;
        for (ti, t) in [(t1, new1), (t2, new2)] {
            for e in 0..3 {
                let k = edge_key(t[e], t[(e + 1) % 3]);
                edge_map.entry(k).or_default().push(ti);
                queue.push_back(k);
            }
        }
        if limit == 0 {
            return Err(InducedError::FlipLimit);
        }
        limit -= 1;
    }
    // Loud post-condition: no interior edge may remain lifted-concave.
    for (key, owners) in &edge_map {
        if owners.len() != 2 {
            continue;
        }
        let (a, b) = *key;
        let d = third_vertex(&triangles[owners[1]], a, b);
        let plane = tri_plane(pts, hts, &triangles[owners[0]]);
        if plane.eval(pts[d]) > hts[d] {
            return Err(InducedError::FlipLimit);
        }
    }
    Ok(())
}

fn third_vertex(t: &Triangle, a: usize, b: usize) -> usize {
    *t.iter().find(|&&v| v != a && v != b).expect("degenerate triangle")
}

fn ccw(mut t: Triangle, pts: &[LatticePoint]) -> Triangle {
    if orient(pts[t[0]], pts[t[1]], pts[t[2]]) < 0 {
        t.swap(1, 2);
    }
    debug_assert!(orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 0);
    t
}

/// Merges adjacent coplanar triangles into maximal faces and returns each
/// face's polygon (convex hull of the member triangles' vertices).
fn merge_coplanar(pts: &[LatticePoint], hts: &[Rat], triangles: &[Triangle]) -> Vec<LatticePolygon> {
    let planes: Vec<Plane> = triangles.iter().map(|t| tri_plane(pts, hts, t)).collect();
    let mut parent: Vec<usize> = (0..triangles.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, t) in triangles.iter().enumerate() {
        for e in 0..3 {
            edge_map
                .entry(edge_key(t[e], t[(e + 1) % 3]))
                .or_default()
                .push(ti);
        }
    }
    for owners in edge_map.values() {
        if owners.len() == 2 && planes[owners[0]] == planes[owners[1]] {
            let (a, b) = (find(&mut parent, owners[0]), find(&mut parent, owners[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for ti in 0..triangles.len() {
        let root = find(&mut parent, ti);
        groups.entry(root).or_default().push(ti);
    }
    let mut faces: Vec<LatticePolygon> = groups
        .values()
        .map(|members| {
            let mut verts: Vec<LatticePoint> = members
                .iter()
                .flat_map(|&ti| triangles[ti].iter().map(|&v| pts[v]))
                .collect();
            verts.sort();
            verts.dedup();
            let face = convex_hull(&verts).expect("merged face must be a valid polygon");
            let member_area: i64 = members
                .iter()
                .map(|&ti| {
                    let t = triangles[ti];
                    orient(pts[t[0]], pts[t[1]], pts[t[2]]) as i64
                })
                .sum();
            assert_eq!(
                face.twice_area(),
                member_area,
                "coplanar group does not form a convex face"
            );
            face
        })
        .collect();
    faces.sort_by(|a, b| a.vertices().cmp(b.vertices()));
    faces
}
