//! Degeneration certificates: verification, transformation, and assembly.
//!
//! A [`DegenCertificate`] bounds the dimension of a triple-point linear
//! system on a lattice region: it exhibits a regular subdivision whose
//! marked cells all belong to catalog classes that are emptied by one triple
//! point and together use every lattice point of the region except the `e`
//! explicitly uncovered ones. A verified certificate proves the system of
//! sections with one general triple point per marked cell has dimension at
//! most `e - 1`.
//!
//! Certificates compose: liftings of disjoint sub-regions merge across
//! lattice-free separating lines into a lifting of the union
//! ([`PartialAssembly`]), rectangle blocks stack along either axis
//! ([`compose_stack`]), and the two builders [`build_p1xp1`] and
//! [`build_p2`] implement the recursive recipes that cover all rectangle
//! bidegrees in the block families and all triangle degrees except the
//! classical quartic exclusion.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use crate::certificate::{CertificateError, DegenCertificate, Meta, Region};
use crate::classify::{match_class, Catalog};
use crate::fat_points::vdim_polygon;
use crate::induced::{induced_faces, Plane};
use crate::lattice::{
    apply_map, enclosed_points, line_is_lattice_free, LatticePoint, LatticePolygon,
    UnimodularAffineMap,
};
use crate::lp::{rat, Rat};
pub use crate::search::{search_block, NotFound, SearchStats, DEFAULT_SEARCH_BUDGET};
use crate::subdivision::{
    check_lifting, contact, find_lifting, validate_subdivision, Cell, CellTag, Contact, Lifting,
    SeparatingLine, Subdivision,
};

/// How the regularity of a certificate's subdivision was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// The certificate carried heights and they were checked cell by cell.
    GivenLiftingChecked,
    /// No heights were carried; the feasibility solver produced some.
    LpFound,
    /// No heights exist; the infeasibility witness was re-verified.
    Infeasible,
    /// Structural failures made the regularity check meaningless.
    NotChecked,
}

/// Outcome of checking every claim a certificate makes.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub valid: bool,
    /// Human-readable descriptions of every failed check.
    pub failures: Vec<String>,
    pub special_count: usize,
    pub uncovered_count: usize,
    /// `uncovered_count - 1`; present only when the certificate is valid.
    pub dim_upper_bound: Option<i64>,
    pub regularity: Regularity,
}

/// Checks a certificate from scratch: subdivision validity, marked-cell
/// classes, pairwise disjointness of marked cells, the exact point count,
/// and regularity. Never panics on structurally well-formed input; every
/// defect becomes an entry in `failures`.
pub fn verify_certificate(cert: &DegenCertificate, catalog: &Catalog) -> VerificationReport {
    let mut failures: Vec<String> = Vec::new();
    let special_count = cert.marked.len();
    let uncovered_count = cert.uncovered.len();
    let finish = |failures: Vec<String>, regularity: Regularity| {
        let valid = failures.is_empty();
        VerificationReport {
            valid,
            failures,
            special_count,
            uncovered_count,
            dim_upper_bound: valid.then(|| uncovered_count as i64 - 1),
            regularity,
        }
    };

    let region_poly = match cert.region.polygon() {
        Ok(p) => p,
        Err(e) => return finish(vec![format!("region: {e}")], Regularity::NotChecked),
    };

    // Marked indices must be in range and distinct.
    let mut marked: Vec<usize> = Vec::new();
    for &i in &cert.marked {
        if i >= cert.cells.len() {
            failures.push(format!("marked index {i} is out of range"));
        } else if marked.contains(&i) {
            failures.push(format!("marked index {i} is repeated"));
        } else {
            marked.push(i);
        }
    }

    // Subdivision validity (face-to-face tiling, tags, area).
    let sub = Subdivision::new(region_poly.clone(), cert.cells.clone());
    let sub_ok = match validate_subdivision(&sub) {
        Ok(()) => true,
        Err(issues) => {
            failures.extend(issues.iter().map(|i| format!("subdivision: {i}")));
            false
        }
    };

    // Every marked cell carries a matching empty class.
    for &i in &marked {
        let cell = &cert.cells[i];
        if cell.tag != CellTag::Special {
            failures.push(format!("marked cell {i} is tagged {:?}, not special", cell.tag));
            continue;
        }
        let Some(claimed) = &cell.class_id else {
            failures.push(format!("marked cell {i} carries no class id"));
            continue;
        };
        match match_class(&cell.polygon, catalog) {
            Ok(class) => {
                if &class.id != claimed {
                    failures.push(format!(
                        "marked cell {i} claims class {claimed} but matches {}",
                        class.id
                    ));
                } else if !class.empty_after_triple {
                    failures.push(format!(
                        "marked cell {i} has class {claimed}, which survives a triple point"
                    ));
                }
            }
            Err(e) => failures.push(format!("marked cell {i}: {e}")),
        }
    }

    // Marked cells must be pairwise disjoint (no shared points or edges).
    for (k, &i) in marked.iter().enumerate() {
        for &j in &marked[k + 1..] {
            if contact(&cert.cells[i].polygon, &cert.cells[j].polygon) != Contact::Empty {
                failures.push(format!("marked cells {i} and {j} are not disjoint"));
            }
        }
    }

    // Every lattice point of the region lies in exactly one marked cell or
    // is exactly one uncovered point.
    let points = enclosed_points(&region_poly);
    let mut cover: BTreeMap<LatticePoint, usize> = points.iter().map(|&p| (p, 0)).collect();
    for &i in &marked {
        for p in enclosed_points(&cert.cells[i].polygon) {
            if let Some(n) = cover.get_mut(&p) {
                *n += 1;
            }
        }
    }
    for &q in &cert.uncovered {
        match cover.get_mut(&q) {
            Some(n) => *n += 1,
            None => failures.push(format!("uncovered point {q} lies outside the region")),
        }
    }
    for (&p, &n) in &cover {
        match n {
            0 => failures.push(format!("lattice point {p} is neither covered nor uncovered")),
            1 => {}
            n => failures.push(format!("lattice point {p} is claimed {n} times")),
        }
    }

    // Regularity, via the carried heights if present.
    let regularity = if !sub_ok {
        Regularity::NotChecked
    } else if let Some(lifting) = &cert.lifting {
        if let Err(issues) = check_lifting(&sub, lifting) {
            let shown = issues.len().min(10);
            failures.extend(issues.iter().take(shown).map(|i| format!("lifting: {i}")));
            if issues.len() > shown {
                failures.push(format!("lifting: ... and {} more issues", issues.len() - shown));
            }
        }
        Regularity::GivenLiftingChecked
    } else {
        match find_lifting(&sub) {
            Ok(_) => Regularity::LpFound,
            Err(irr) => {
                failures.push("subdivision is irregular: no convex lifting exists".into());
                if !irr.verified() {
                    failures.push("internal: irregularity witness failed re-verification".into());
                }
                Regularity::Infeasible
            }
        }
    };

    finish(failures, regularity)
}

/// Applies a unimodular affine map to every geometric component of a
/// certificate. Tags, classes, marked indices and validity are preserved;
/// reflections re-orient each cell counter-clockwise.
pub fn transform_certificate(
    cert: &DegenCertificate,
    map: &UnimodularAffineMap,
) -> Result<DegenCertificate, CertificateError> {
    let region_poly = cert.region.polygon()?;
    Ok(DegenCertificate {
        region: Region::from_polygon(&apply_map(&region_poly, map)),
        cells: cert
            .cells
            .iter()
            .map(|c| Cell {
                polygon: apply_map(&c.polygon, map),
                tag: c.tag,
                class_id: c.class_id.clone(),
            })
            .collect(),
        marked: cert.marked.clone(),
        uncovered: cert.uncovered.iter().map(|&p| map.apply(p)).collect(),
        lifting: cert
            .lifting
            .as_ref()
            .map(|l| Lifting::new(l.iter().map(|(&p, h)| (map.apply(p), h.clone())).collect())),
        meta: cert.meta.clone(),
    })
}

#[derive(Debug, thiserror::Error)]
pub enum AssembleError {
    #[error("certificate '{0}' carries no lifting")]
    MissingLifting(String),
    #[error("certificate '{name}' fails its own lifting check: {first}")]
    BadPiece { name: String, first: String },
    #[error("line {a}x + {b}y + {c} does not separate the pieces: {detail}")]
    NotSeparated { a: i64, b: i64, c: i64, detail: String },
    #[error("assembled pieces overlap at {0}")]
    Overlap(LatticePoint),
    #[error("assembled heights do not cover the region: {0}")]
    Coverage(String),
    #[error("induced subdivision failed: {0}")]
    Induced(String),
    #[error("carried cell with vertices {0} is not a face of the assembled lifting")]
    LostFace(String),
    #[error("bad region: {0}")]
    Region(String),
}

#[derive(Debug, Clone)]
struct CarriedCell {
    cell: Cell,
    marked: bool,
}

/// Liftings of disjoint sub-regions merged across lattice-free lines.
///
/// Invariant: `heights` restricted to any carried cell is affine and stays
/// strictly below every other lifted point, so every carried cell is a face
/// of the lower hull of the whole height set. [`PartialAssembly::absorb`]
/// preserves this by tilting the incoming side by an exact multiple of the
/// separating line.
#[derive(Debug, Clone)]
pub struct PartialAssembly {
    cells: Vec<CarriedCell>,
    uncovered: Vec<LatticePoint>,
    heights: BTreeMap<LatticePoint, Rat>,
}

impl PartialAssembly {
    /// Starts an assembly from a certificate that carries a valid lifting.
    pub fn from_certificate(cert: &DegenCertificate) -> Result<PartialAssembly, AssembleError> {
        let name = &cert.meta.name;
        let lifting = cert
            .lifting
            .as_ref()
            .ok_or_else(|| AssembleError::MissingLifting(name.clone()))?;
        let region_poly =
            cert.region.polygon().map_err(|e| AssembleError::Region(e.to_string()))?;
        let sub = Subdivision::new(region_poly, cert.cells.clone());
        if let Err(issues) = check_lifting(&sub, lifting) {
            return Err(AssembleError::BadPiece {
                name: name.clone(),
                first: issues.first().map(|i| i.to_string()).unwrap_or_default(),
            });
        }
        let marked: HashSet<usize> = cert.marked.iter().copied().collect();
        Ok(PartialAssembly {
            cells: cert
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| CarriedCell { cell: c.clone(), marked: marked.contains(&i) })
                .collect(),
            uncovered: cert.uncovered.clone(),
            heights: lifting.iter().map(|(&p, h)| (p, h.clone())).collect(),
        })
    }

    /// Merges `other` into `self` across a lattice-free line with all of
    /// `self` strictly on one side and all of `other` strictly on the other.
    ///
    /// The incoming heights are tilted by `mu * L` where `mu` is computed
    /// exactly so that each side's cells end up strictly below the far
    /// side's lifted points (margin 1); internal relations on each side are
    /// unchanged, so the face invariant carries over to the union.
    pub fn absorb(
        &mut self,
        other: PartialAssembly,
        line: SeparatingLine,
    ) -> Result<(), AssembleError> {
        let not_sep = |detail: String| AssembleError::NotSeparated {
            a: line.a,
            b: line.b,
            c: line.c,
            detail,
        };
        let free = line_is_lattice_free(line.a, line.b, line.c)
            .map_err(|e| not_sep(e.to_string()))?;
        if !free {
            return Err(not_sep("the line passes through lattice points".into()));
        }
        let self_side = side_of(self.heights.keys(), line).ok_or_else(|| {
            not_sep("the current assembly does not lie strictly on one side".into())
        })?;
        let other_side = side_of(other.heights.keys(), line)
            .ok_or_else(|| not_sep("the absorbed piece does not lie strictly on one side".into()))?;
        if self_side == other_side {
            return Err(not_sep("both pieces lie on the same side".into()));
        }
        // Normalize so `self` is on the negative side of `line`.
        let line = if self_side < 0 {
            line
        } else {
            SeparatingLine { a: -line.a, b: -line.b, c: -line.c }
        };

        let mut mu = rat(1);
        // Self cells must stay strictly below other's tilted points:
        //   plane(q) + 1 <= h_o(q) + mu * L(q),   L(q) > 0.
        for cc in &self.cells {
            let plane = plane_of(&cc.cell.polygon, &self.heights);
            for (&q, hq) in &other.heights {
                let need = (plane.eval(q) + rat(1) - hq) / rat(line.eval(q));
                if need > mu {
                    mu = need;
                }
            }
        }
        // Other cells, tilted along with their points, must stay strictly
        // below self's points: plane(p) + mu * L(p) + 1 <= h_s(p), L(p) < 0.
        for cc in &other.cells {
            let plane = plane_of(&cc.cell.polygon, &other.heights);
            for (&p, hp) in &self.heights {
                let need = (plane.eval(p) + rat(1) - hp) / rat(-line.eval(p));
                if need > mu {
                    mu = need;
                }
            }
        }

        for (q, h) in other.heights {
            let tilted = h + &mu * rat(line.eval(q));
            if self.heights.insert(q, tilted).is_some() {
                return Err(AssembleError::Overlap(q));
            }
        }
        self.cells.extend(other.cells);
        self.uncovered.extend(other.uncovered);
        Ok(())
    }

    /// Reads the final subdivision off the assembled heights: the induced
    /// lower-hull faces must contain every carried cell exactly (bridge
    /// faces between pieces are tagged by shape), and the heights become the
    /// certificate's lifting.
    pub fn finalize(self, region: Region, meta: Meta) -> Result<DegenCertificate, AssembleError> {
        let region_poly = region.polygon().map_err(|e| AssembleError::Region(e.to_string()))?;
        let points = enclosed_points(&region_poly);
        let mut heights_vec: Vec<Rat> = Vec::with_capacity(points.len());
        for &p in &points {
            match self.heights.get(&p) {
                Some(h) => heights_vec.push(h.clone()),
                None => {
                    return Err(AssembleError::Coverage(format!("no height at {p}")));
                }
            }
        }
        if self.heights.len() != points.len() {
            return Err(AssembleError::Coverage(format!(
                "{} heights for {} region points",
                self.heights.len(),
                points.len()
            )));
        }
        let faces = induced_faces(&points, &heights_vec)
            .map_err(|e| AssembleError::Induced(e.to_string()))?;
        let lookup: HashMap<&[LatticePoint], usize> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, cc)| (cc.cell.polygon.vertices(), i))
            .collect();
        let mut cells: Vec<Cell> = Vec::with_capacity(faces.len());
        let mut marked: Vec<usize> = Vec::new();
        let mut matched = vec![false; self.cells.len()];
        for face in faces {
            if let Some(&ci) = lookup.get(face.vertices()) {
                matched[ci] = true;
                if self.cells[ci].marked {
                    marked.push(cells.len());
                }
                cells.push(self.cells[ci].cell.clone());
            } else {
                cells.push(Cell::tagged(face));
            }
        }
        if let Some(lost) = matched.iter().position(|&m| !m) {
            return Err(AssembleError::LostFace(format!(
                "{:?}",
                self.cells[lost].cell.polygon.vertices()
            )));
        }
        let mut uncovered = self.uncovered;
        uncovered.sort();
        let mut lifting = Lifting::new(self.heights);
        lifting.shift_positive();
        Ok(DegenCertificate { region, cells, marked, uncovered, lifting: Some(lifting), meta })
    }
}

/// `Some(1)` / `Some(-1)` when every point is strictly on that side.
fn side_of<'a>(
    mut points: impl Iterator<Item = &'a LatticePoint>,
    line: SeparatingLine,
) -> Option<i64> {
    let mut sign = 0;
    points.try_for_each(|&p| {
        let s = line.eval(p).signum();
        if s == 0 || (sign != 0 && s != sign) {
            return None;
        }
        sign = s;
        Some(())
    })?;
    (sign != 0).then_some(sign)
}

/// The affine function a carried cell spans in a height map. All cell
/// vertices are keys by the piece-lifting precondition.
fn plane_of(poly: &LatticePolygon, heights: &BTreeMap<LatticePoint, Rat>) -> Plane {
    let v = poly.vertices();
    Plane::through([(v[0], &heights[&v[0]]), (v[1], &heights[&v[1]]), (v[2], &heights[&v[2]])])
}

/// Stacking direction for [`compose_stack`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackAxis {
    /// Blocks placed side by side, left to right.
    Horizontal,
    /// Blocks placed on top of each other, bottom to top.
    Vertical,
}

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("cannot stack an empty list of blocks")]
    Empty,
    #[error("block {index} ('{name}') is not a rectangle region")]
    NotRectangle { index: usize, name: String },
    #[error("block {index} ('{name}') spans {got} across the stacking axis, expected {expected}")]
    WidthMismatch { index: usize, name: String, got: i64, expected: i64 },
    #[error(transparent)]
    Assembly(#[from] AssembleError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
}

/// Stacks rectangle certificates along an axis with one lattice-free seam
/// between consecutive blocks: heights `b1` and `b2` over a common width
/// compose to height `b1 + b2 + 1`, special cells and uncovered points
/// accumulating. The result's name is `C_w^h` for the combined rectangle.
pub fn compose_stack(
    blocks: &[DegenCertificate],
    axis: StackAxis,
) -> Result<DegenCertificate, ComposeError> {
    match axis {
        StackAxis::Vertical => compose_vertical(blocks),
        StackAxis::Horizontal => {
            let t = transpose();
            let flipped = blocks
                .iter()
                .map(|b| transform_certificate(b, &t))
                .collect::<Result<Vec<_>, _>>()?;
            let stacked = compose_vertical(&flipped)?;
            let mut out = transform_certificate(&stacked, &t)?;
            if let Region::Rectangle { a, b } = out.region {
                out.meta = stack_meta(a, b);
            }
            Ok(out)
        }
    }
}

/// The reflection swapping the two axes.
fn transpose() -> UnimodularAffineMap {
    UnimodularAffineMap::new(0, 1, 1, 0, 0, 0).expect("axis swap is unimodular")
}

fn stack_meta(a: i64, b: i64) -> Meta {
    let name = format!("C_{a}^{b}");
    Meta { name: name.clone(), generator: "compose-stack".into(), block: Some(name) }
}

fn compose_vertical(blocks: &[DegenCertificate]) -> Result<DegenCertificate, ComposeError> {
    let mut dims: Vec<(i64, i64)> = Vec::with_capacity(blocks.len());
    for (index, block) in blocks.iter().enumerate() {
        match block.region {
            Region::Rectangle { a, b } => dims.push((a, b)),
            _ => {
                return Err(ComposeError::NotRectangle {
                    index,
                    name: block.meta.name.clone(),
                })
            }
        }
    }
    let Some(&(width, first_height)) = dims.first() else {
        return Err(ComposeError::Empty);
    };
    for (index, &(w, _)) in dims.iter().enumerate() {
        if w != width {
            return Err(ComposeError::WidthMismatch {
                index,
                name: blocks[index].meta.name.clone(),
                got: w,
                expected: width,
            });
        }
    }
    if blocks.len() == 1 {
        return Ok(blocks[0].clone());
    }
    let mut assembly = PartialAssembly::from_certificate(&blocks[0])?;
    let mut top = first_height;
    for (i, block) in blocks.iter().enumerate().skip(1) {
        let shift = UnimodularAffineMap::translation(0, top + 1);
        let moved = transform_certificate(block, &shift)?;
        assembly.absorb(
            PartialAssembly::from_certificate(&moved)?,
            SeparatingLine { a: 0, b: 2, c: -(2 * top + 1) },
        )?;
        top += 1 + dims[i].1;
    }
    let region = Region::Rectangle { a: width, b: top };
    let meta = stack_meta(width, top);
    Ok(assembly.finalize(region, meta)?)
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("bidegree ({a},{b}) is outside the composition recipes: {reason}")]
    NotCovered { a: i64, b: i64, reason: String },
    #[error("degree {d} is not handled: {reason}")]
    NotApplicable { d: i64, reason: String },
    #[error("no base block named '{0}'")]
    UnknownBlock(String),
    #[error("search for base block {name} failed: {message}")]
    BaseSearch { name: String, message: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("assembly for {what} failed: {source}")]
    Assembly { what: String, source: AssembleError },
    #[error("internal: assembled certificate for {what} failed verification: {failures:?}")]
    Unverified { what: String, failures: Vec<String> },
}

/// Searched rectangle base blocks: name, width, height, special cells.
/// All of them cover every lattice point (`6r = (a+1)(b+1)`).
const BASE_BLOCKS: &[(&str, i64, i64, usize)] = &[
    ("C_2^3", 2, 3, 2),
    ("C_5^3", 5, 3, 4),
    ("C_5^5", 5, 5, 6),
    ("C_5^6", 5, 6, 7),
    ("C_5^8", 5, 8, 9),
    ("C_8^3", 8, 3, 6),
    ("C_8^5", 8, 5, 9),
    ("C_11^2", 11, 2, 6),
    ("C_11^3", 11, 3, 8),
    ("C_11^4", 11, 4, 10),
    ("C_17^4", 17, 4, 15),
];

/// Searched triangle blocks `V_d` for small degrees: degree, special cells.
/// The uncovered count is `(d+1)(d+2)/2 mod 6`; degree 4 is excluded.
const BASE_TRIANGLES: &[(i64, usize)] = &[
    (1, 0),
    (2, 1),
    (3, 1),
    (5, 3),
    (6, 4),
    (7, 6),
    (8, 7),
    (9, 9),
    (10, 11),
    (11, 13),
    (12, 15),
];

fn block_cache() -> &'static Mutex<HashMap<String, DegenCertificate>> {
    static CACHE: OnceLock<Mutex<HashMap<String, DegenCertificate>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Builds once per process; the builders are deterministic, so the cache is
/// a pure time saver.
fn cached_block(
    key: &str,
    build: impl FnOnce() -> Result<DegenCertificate, BuildError>,
) -> Result<DegenCertificate, BuildError> {
    if let Some(hit) = block_cache().lock().unwrap().get(key) {
        return Ok(hit.clone());
    }
    let built = build()?;
    block_cache().lock().unwrap().insert(key.to_string(), built.clone());
    Ok(built)
}

/// Returns a searched base block by name (see `BASE_BLOCKS` for the list).
pub fn base_block(name: &str, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let Some(&(_, a, b, r)) = BASE_BLOCKS.iter().find(|&&(n, ..)| n == name) else {
        return Err(BuildError::UnknownBlock(name.to_string()));
    };
    cached_block(name, || {
        let mut cert = search_block(&Region::Rectangle { a, b }, r, catalog, DEFAULT_SEARCH_BUDGET)
            .map_err(|e| BuildError::BaseSearch { name: name.to_string(), message: e.to_string() })?;
        cert.meta = Meta {
            name: name.to_string(),
            generator: "search-block".into(),
            block: Some(name.to_string()),
        };
        Ok(cert)
    })
}

/// Names of all searched base blocks, in catalog order.
pub fn base_block_names() -> Vec<&'static str> {
    BASE_BLOCKS.iter().map(|&(n, ..)| n).collect()
}

fn base_triangle(d: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let Some(&(_, r)) = BASE_TRIANGLES.iter().find(|&&(dd, _)| dd == d) else {
        return Err(BuildError::NotApplicable {
            d,
            reason: "no searched triangle block for this degree".into(),
        });
    };
    let name = format!("V_{d}");
    cached_block(&name, || {
        let mut cert = search_block(&Region::Triangle { d }, r, catalog, DEFAULT_SEARCH_BUDGET)
            .map_err(|e| BuildError::BaseSearch { name: name.clone(), message: e.to_string() })?;
        cert.meta =
            Meta { name: name.clone(), generator: "search-block".into(), block: Some(name.clone()) };
        Ok(cert)
    })
}

/// Builds a verified certificate for bidegree `(a, b)` curves on the
/// `a` by `b` rectangle with `(a+1)(b+1)/6` general triple points, proving
/// the system empty. Bidegrees outside the block families (the genuinely
/// special `(a,1)` and `(5,4)`, and heights the families cannot reach)
/// return [`BuildError::NotCovered`] naming the reduction that fails.
pub fn build_p1xp1(a: i64, b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    if a < 1 || b < 1 {
        return Err(BuildError::NotCovered {
            a,
            b,
            reason: "both parts of the bidegree must be positive".into(),
        });
    }
    let n_points = (a + 1) * (b + 1);
    if n_points % 6 != 0 {
        return Err(BuildError::NotCovered {
            a,
            b,
            reason: format!("(a+1)(b+1) = {n_points} is not divisible by 6"),
        });
    }
    if a == 1 || b == 1 {
        // Sections linear in one variable have a vanishing second derivative,
        // so a triple point imposes only five conditions and the system stays
        // nonempty: dimension r - 1 instead of -1.
        return Err(BuildError::NotCovered {
            a,
            b,
            reason: "the system is genuinely special (a triple point imposes only five \
                     conditions on sections linear in one variable), so no certificate exists"
                .into(),
        });
    }
    cached_block(&format!("C_{a}^{b}"), || {
        let mut cert = dispatch_rect(a, b, catalog, true)?;
        let report = verify_certificate(&cert, catalog);
        if !report.valid {
            return Err(BuildError::Unverified {
                what: format!("C_{a}^{b}"),
                failures: report.failures,
            });
        }
        let name = format!("C_{a}^{b}");
        cert.meta.name = name.clone();
        cert.meta.block = Some(name);
        Ok(cert)
    })
}

fn dispatch_rect(
    a: i64,
    b: i64,
    catalog: &Catalog,
    allow_swap: bool,
) -> Result<DegenCertificate, BuildError> {
    let result = match a {
        2 => family_c2(b, catalog),
        5 => family_c5(b, catalog),
        8 => family_c8(b, catalog),
        11 => family_c11(b, catalog),
        17 if b == 4 => base_block("C_17^4", catalog),
        _ if a >= 17 && a % 6 == 5 => family_rows_6k(a, b, catalog),
        _ if a >= 14 && a % 12 == 2 => family_rows_12k2(a, b, catalog),
        _ if a >= 20 && a % 12 == 8 => family_rows_12k8(a, b, catalog),
        _ => Err(BuildError::NotCovered {
            a,
            b,
            reason: format!("width {a} is not in any block family"),
        }),
    };
    match result {
        Err(primary @ BuildError::NotCovered { .. }) if allow_swap => {
            match dispatch_rect(b, a, catalog, false) {
                Ok(cert) => {
                    let mut out = transform_certificate(&cert, &transpose())?;
                    out.meta = stack_meta(a, b);
                    Ok(out)
                }
                Err(_) => Err(primary),
            }
        }
        other => other,
    }
}

/// Remaps a failed sub-build so the error names the outer bidegree and the
/// reduction step that broke.
fn needs(
    a: i64,
    b: i64,
    what: &str,
    sub: Result<DegenCertificate, BuildError>,
) -> Result<DegenCertificate, BuildError> {
    sub.map_err(|e| match e {
        BuildError::NotCovered { reason, .. } => BuildError::NotCovered {
            a,
            b,
            reason: format!("needs {what}: {reason}"),
        },
        other => other,
    })
}

fn family_c2(b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    if b % 4 != 3 {
        return Err(BuildError::NotCovered {
            a: 2,
            b,
            reason: "width-2 rectangles stack C_2^3 blocks, so the height must be 3 mod 4".into(),
        });
    }
    let unit = base_block("C_2^3", catalog)?;
    let parts = vec![unit; ((b + 1) / 4) as usize];
    Ok(compose_stack(&parts, StackAxis::Vertical)?)
}

fn family_c5(b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    if b == 4 {
        return Err(BuildError::NotCovered {
            a: 5,
            b,
            reason: "its triple-point system is genuinely special (nonempty), so no width-5 \
                     block of height 4 exists"
                .into(),
        });
    }
    let Some(base_h) = [3i64, 5, 6, 8].into_iter().find(|i| i % 4 == b % 4 && *i <= b) else {
        return Err(BuildError::NotCovered {
            a: 5,
            b,
            reason: format!(
                "width-5 rectangles need a base block of height 3, 5, 6 or 8 congruent to \
                 {} mod 4 and at most {b}",
                b % 4
            ),
        });
    };
    let mut parts = vec![base_block(&format!("C_5^{base_h}"), catalog)?];
    parts.extend(vec![base_block("C_5^3", catalog)?; ((b - base_h) / 4) as usize]);
    Ok(compose_stack(&parts, StackAxis::Vertical)?)
}

fn family_c8(b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let not_covered = |reason: String| BuildError::NotCovered { a: 8, b, reason };
    if b % 2 == 0 {
        return Err(not_covered("width-8 rectangles need an odd height".into()));
    }
    let mut parts: Vec<DegenCertificate>;
    if b % 4 == 3 {
        parts = vec![base_block("C_8^3", catalog)?; ((b + 1) / 4) as usize];
    } else if b >= 5 {
        parts = vec![base_block("C_8^5", catalog)?];
        parts.extend(vec![base_block("C_8^3", catalog)?; ((b - 5) / 4) as usize]);
    } else {
        return Err(not_covered("height 1 is below every width-8 base block".into()));
    }
    Ok(compose_stack(&parts, StackAxis::Vertical)?)
}

fn family_c11(b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let Some(base_h) = [2i64, 3, 4].into_iter().find(|i| i % 3 == b % 3 && *i <= b) else {
        return Err(BuildError::NotCovered {
            a: 11,
            b,
            reason: format!(
                "width-11 rectangles need a base block of height 2, 3 or 4 congruent to \
                 {} mod 3 and at most {b}",
                b % 3
            ),
        });
    };
    let mut parts = vec![base_block(&format!("C_11^{base_h}"), catalog)?];
    parts.extend(vec![base_block("C_11^2", catalog)?; ((b - base_h) / 3) as usize]);
    Ok(compose_stack(&parts, StackAxis::Vertical)?)
}

/// Widths `a = 6k - 1 >= 17`: columns of width 11 (pairing two 6-columns),
/// with a width-5 or width-17 column absorbing odd `k`.
fn family_rows_6k(a: i64, b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let k = (a + 1) / 6;
    let mut parts: Vec<DegenCertificate>;
    if k % 2 == 0 {
        let col = needs(a, b, &format!("C_11^{b}"), dispatch_rect(11, b, catalog, false))?;
        parts = vec![col; (k / 2) as usize];
    } else if b == 4 {
        parts = vec![base_block("C_17^4", catalog)?];
        let col = needs(a, b, "C_11^4", dispatch_rect(11, 4, catalog, false))?;
        parts.extend(vec![col; ((k - 3) / 2) as usize]);
    } else {
        parts = vec![needs(a, b, &format!("C_5^{b}"), dispatch_rect(5, b, catalog, false))?];
        let col = needs(a, b, &format!("C_11^{b}"), dispatch_rect(11, b, catalog, false))?;
        parts.extend(vec![col; ((k - 1) / 2) as usize]);
    }
    Ok(compose_stack(&parts, StackAxis::Horizontal)?)
}

/// Widths `a = 12r + 2 >= 14` (odd heights): `C_5 + C_8 + (r-1) C_11`.
fn family_rows_12k2(a: i64, b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let r = (a - 2) / 12;
    let mut parts = vec![
        needs(a, b, &format!("C_5^{b}"), dispatch_rect(5, b, catalog, false))?,
        needs(a, b, &format!("C_8^{b}"), dispatch_rect(8, b, catalog, false))?,
    ];
    let col = needs(a, b, &format!("C_11^{b}"), dispatch_rect(11, b, catalog, false))?;
    parts.extend(vec![col; (r - 1) as usize]);
    Ok(compose_stack(&parts, StackAxis::Horizontal)?)
}

/// Widths `a = 12r + 8 >= 20` (odd heights): `C_8 + r C_11`.
fn family_rows_12k8(a: i64, b: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let r = (a - 8) / 12;
    let mut parts = vec![needs(a, b, &format!("C_8^{b}"), dispatch_rect(8, b, catalog, false))?];
    let col = needs(a, b, &format!("C_11^{b}"), dispatch_rect(11, b, catalog, false))?;
    parts.extend(vec![col; r as usize]);
    Ok(compose_stack(&parts, StackAxis::Horizontal)?)
}

/// Builds a verified certificate for degree-`d` plane curves with
/// `floor(N/6)` general triple points, `N = (d+1)(d+2)/2`, leaving
/// `N mod 6` uncovered points: the system attains its expected dimension.
/// Degree 4 is refused: its system is special (the double conic survives),
/// and no such certificate exists.
pub fn build_p2(d: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    if d < 1 {
        return Err(BuildError::NotApplicable { d, reason: "degree must be positive".into() });
    }
    if d == 4 {
        return Err(BuildError::NotApplicable {
            d,
            reason: "the quartic system with two general triple points is special: the conic \
                     through the two points, doubled, survives, so its dimension exceeds the \
                     expected one and no emptiness degeneration exists"
                .into(),
        });
    }
    if d <= 12 {
        return base_triangle(d, catalog);
    }
    let name = format!("V_{d}");
    cached_block(&name, || {
        let cert = if d == 16 {
            assemble_v16(catalog)?
        } else {
            assemble_big_triangle(d, catalog)?
        };
        let report = verify_certificate(&cert, catalog);
        if !report.valid {
            return Err(BuildError::Unverified { what: name.clone(), failures: report.failures });
        }
        Ok(cert)
    })
}

fn triangle_meta(d: i64) -> Meta {
    let name = format!("V_{d}");
    Meta { name: name.clone(), generator: "assemble-triangle".into(), block: Some(name) }
}

/// Degree 16 needs its own layout (the generic recursion would land on the
/// excluded degree 4): a 10x5 rectangle block plus `V_5` fill the bottom
/// band, with `V_10` on top.
fn assemble_v16(catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let wrap = |source: AssembleError| BuildError::Assembly { what: "V_16".into(), source };
    let band = build_p1xp1(10, 5, catalog)?;
    let v5 = transform_certificate(&build_p2(5, catalog)?, &UnimodularAffineMap::translation(11, 0))?;
    let v10 = transform_certificate(&build_p2(10, catalog)?, &UnimodularAffineMap::translation(0, 6))?;
    let mut assembly = PartialAssembly::from_certificate(&band).map_err(wrap)?;
    assembly
        .absorb(
            PartialAssembly::from_certificate(&v5).map_err(wrap)?,
            SeparatingLine { a: 2, b: 0, c: -21 },
        )
        .map_err(wrap)?;
    assembly
        .absorb(
            PartialAssembly::from_certificate(&v10).map_err(wrap)?,
            SeparatingLine { a: 0, b: 2, c: -11 },
        )
        .map_err(wrap)?;
    assembly.finalize(Region::Triangle { d: 16 }, triangle_meta(16)).map_err(wrap)
}

/// Degrees `d = 12(k+1) + j >= 13`, `j` in `1..=12`, except 16: the triangle
/// splits into `V_{d-12}` on top of a height-11 strip of rectangle blocks
/// (`k` towers `C_11^11`, a rotated `C_11^{j+1}`, and `V_10` at the right).
fn assemble_big_triangle(d: i64, catalog: &Catalog) -> Result<DegenCertificate, BuildError> {
    let what = format!("V_{d}");
    let wrap = |source: AssembleError| BuildError::Assembly { what: what.clone(), source };
    let j = (d - 1) % 12 + 1;
    let k = (d - j) / 12 - 1;
    debug_assert_eq!(d, 12 * (k + 1) + j);
    let top = build_p2(d - 12, catalog)?;
    let rot = transform_certificate(&build_p1xp1(11, j + 1, catalog)?, &transpose())?;
    let v10 = build_p2(10, catalog)?;

    let mut strip: Vec<(DegenCertificate, i64)> = Vec::new();
    if k > 0 {
        let tower = build_p1xp1(11, 11, catalog)?;
        for m in 0..k {
            strip.push((tower.clone(), 12 * m));
        }
    }
    strip.push((rot, 12 * k));
    strip.push((v10, 12 * k + j + 2));

    let mut assembly: Option<PartialAssembly> = None;
    for (cert, x) in strip {
        let moved = transform_certificate(&cert, &UnimodularAffineMap::translation(x, 0))?;
        let piece = PartialAssembly::from_certificate(&moved).map_err(&wrap)?;
        match assembly.as_mut() {
            None => assembly = Some(piece),
            Some(a) => {
                a.absorb(piece, SeparatingLine { a: 2, b: 0, c: -(2 * x - 1) }).map_err(&wrap)?
            }
        }
    }
    let mut assembly = assembly.expect("strip always has at least two pieces");
    let top_moved = transform_certificate(&top, &UnimodularAffineMap::translation(0, 12))?;
    assembly
        .absorb(
            PartialAssembly::from_certificate(&top_moved).map_err(&wrap)?,
            SeparatingLine { a: 0, b: 2, c: -23 },
        )
        .map_err(&wrap)?;
    assembly.finalize(Region::Triangle { d }, triangle_meta(d)).map_err(&wrap)
}

/// The linear system a certificate makes a claim about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    pub region: Region,
    /// Number of general triple points imposed on the sections.
    pub triple_points: usize,
}

impl SystemSpec {
    /// The system a certificate addresses: its region, one triple point per
    /// marked cell.
    pub fn of(cert: &DegenCertificate) -> SystemSpec {
        SystemSpec { region: cert.region.clone(), triple_points: cert.marked.len() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConclusionError {
    #[error("certificate did not verify: {0}")]
    InvalidReport(String),
    #[error("certificate has {got} special cells but the system imposes {want} triple points")]
    WrongPointCount { got: usize, want: usize },
    #[error("bad region: {0}")]
    Region(String),
    #[error("upper bound {bound} is below the expected dimension {expected}: the certificate \
             and the dimension count contradict each other")]
    Conflicting { bound: i64, expected: i64 },
}

/// Turns a verification report into the dimension statement it supports.
pub fn conclude_dimension(
    report: &VerificationReport,
    spec: &SystemSpec,
) -> Result<String, ConclusionError> {
    if !report.valid {
        return Err(ConclusionError::InvalidReport(report.failures.join("; ")));
    }
    if report.special_count != spec.triple_points {
        return Err(ConclusionError::WrongPointCount {
            got: report.special_count,
            want: spec.triple_points,
        });
    }
    let poly = spec.region.polygon().map_err(|e| ConclusionError::Region(e.to_string()))?;
    let (_, expected) = vdim_polygon(&poly, &vec![3; spec.triple_points]);
    let bound = report.dim_upper_bound.expect("valid reports carry a bound");
    if bound < expected {
        return Err(ConclusionError::Conflicting { bound, expected });
    }
    Ok(if bound > expected {
        format!(
            "dimension at most {bound}; expected dimension {expected}; the bound alone does \
             not settle non-speciality"
        )
    } else if bound == -1 {
        "the system is empty: dimension -1 equals the expected dimension".to_string()
    } else {
        format!("dimension at most {bound}, equal to the expected dimension: the system is \
                 non-special")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::enumerate_classes;
    use crate::lattice::pt;
    use once_cell::sync::Lazy;

    static CATALOG: Lazy<Catalog> = Lazy::new(|| enumerate_classes(6, 8).unwrap());

    fn searched_r23() -> DegenCertificate {
        base_block("C_2^3", &CATALOG).expect("base block search succeeds")
    }

    #[test]
    fn verify_accepts_searched_block() {
        let cert = searched_r23();
        let report = verify_certificate(&cert, &CATALOG);
        assert!(report.valid, "failures: {:?}", report.failures);
        assert_eq!(report.special_count, 2);
        assert_eq!(report.dim_upper_bound, Some(-1));
        assert_eq!(report.regularity, Regularity::GivenLiftingChecked);
    }

    #[test]
    fn verify_rejects_mutations() {
        let good = searched_r23();

        // Dropping a cell breaks the tiling.
        let mut broken = good.clone();
        broken.cells.pop();
        assert!(!verify_certificate(&broken, &CATALOG).valid);

        // Unmarking a special cell leaves its points unclaimed.
        let mut broken = good.clone();
        broken.marked.pop();
        let report = verify_certificate(&broken, &CATALOG);
        assert!(!report.valid);
        assert!(report.failures.iter().any(|f| f.contains("neither covered")));

        // Claiming an extra uncovered point double-counts it.
        let mut broken = good.clone();
        broken.uncovered.push(pt(0, 0));
        let report = verify_certificate(&broken, &CATALOG);
        assert!(report.failures.iter().any(|f| f.contains("claimed 2 times")));

        // Corrupting one height breaks the lifting check.
        let mut broken = good.clone();
        if let Some(l) = broken.lifting.as_mut() {
            l.set(pt(0, 0), rat(999_999));
        }
        let report = verify_certificate(&broken, &CATALOG);
        assert!(!report.valid);
        assert_eq!(report.regularity, Regularity::GivenLiftingChecked);
        assert!(report.failures.iter().any(|f| f.starts_with("lifting:")));
    }

    #[test]
    fn transform_preserves_validity() {
        let cert = searched_r23();
        // A reflection composed with a translation; determinant is -1.
        let map = UnimodularAffineMap::new(0, 1, 1, 0, 7, -3).unwrap();
        let moved = transform_certificate(&cert, &map).unwrap();
        let report = verify_certificate(&moved, &CATALOG);
        assert!(report.valid, "failures: {:?}", report.failures);
        assert_eq!(moved.region, Region::Polygon {
            vertices: vec![[7, -3], [10, -3], [10, -1], [7, -1]],
        });
    }

    #[test]
    fn stack_two_blocks_vertically() {
        let unit = searched_r23();
        let stacked = compose_stack(&[unit.clone(), unit], StackAxis::Vertical).unwrap();
        assert_eq!(stacked.region, Region::Rectangle { a: 2, b: 7 });
        assert_eq!(stacked.meta.name, "C_2^7");
        assert_eq!(stacked.special_count(), 4);
        assert_eq!(stacked.uncovered_count(), 0);
        let report = verify_certificate(&stacked, &CATALOG);
        assert!(report.valid, "failures: {:?}", report.failures);
    }

    #[test]
    fn stack_two_blocks_horizontally() {
        let unit = searched_r23();
        let side = compose_stack(&[unit.clone(), unit], StackAxis::Horizontal).unwrap();
        assert_eq!(side.region, Region::Rectangle { a: 5, b: 3 });
        assert_eq!(side.special_count(), 4);
        let report = verify_certificate(&side, &CATALOG);
        assert!(report.valid, "failures: {:?}", report.failures);
    }

    #[test]
    fn stack_rejects_mismatched_widths() {
        let unit = searched_r23();
        let wide = compose_stack(&[unit.clone(), unit.clone()], StackAxis::Horizontal).unwrap();
        let err = compose_stack(&[unit, wide], StackAxis::Vertical).unwrap_err();
        assert!(matches!(err, ComposeError::WidthMismatch { index: 1, .. }));
    }

    #[test]
    fn build_small_bidegrees() {
        let cert = build_p1xp1(2, 3, &CATALOG).unwrap();
        assert_eq!(cert.meta.name, "C_2^3");
        let cert = build_p1xp1(2, 7, &CATALOG).unwrap();
        assert_eq!(cert.special_count(), 4);
        let cert = build_p1xp1(5, 7, &CATALOG).unwrap();
        assert_eq!(cert.special_count(), 8);
        assert_eq!(cert.uncovered_count(), 0);
    }

    #[test]
    fn build_rejects_uncovered_bidegrees() {
        let err = build_p1xp1(5, 4, &CATALOG).unwrap_err();
        assert!(matches!(err, BuildError::NotCovered { a: 5, b: 4, .. }), "got {err}");
        let err = build_p1xp1(3, 3, &CATALOG).unwrap_err();
        assert!(err.to_string().contains("not divisible by 6"));
        let err = build_p1xp1(2, 5, &CATALOG).unwrap_err();
        assert!(matches!(err, BuildError::NotCovered { .. }));
        let err = build_p1xp1(5, 1, &CATALOG).unwrap_err();
        assert!(err.to_string().contains("genuinely special"), "got {err}");
    }

    #[test]
    fn build_swaps_orientation_when_needed() {
        // Width 3 has no family, but height 3 with width 2 does.
        let cert = build_p1xp1(3, 2, &CATALOG).unwrap();
        assert_eq!(cert.region, Region::Rectangle { a: 3, b: 2 });
        assert_eq!(cert.meta.name, "C_3^2");
        assert!(verify_certificate(&cert, &CATALOG).valid);
    }

    #[test]
    fn build_small_triangles() {
        // Degree 1: no triple points, three uncovered points, dimension 2.
        let v1 = build_p2(1, &CATALOG).unwrap();
        assert_eq!(v1.special_count(), 0);
        assert_eq!(v1.uncovered_count(), 3);
        let report = verify_certificate(&v1, &CATALOG);
        let statement = conclude_dimension(&report, &SystemSpec::of(&v1)).unwrap();
        assert!(statement.contains("at most 2"), "got: {statement}");

        // Degree 2: the triangle is itself one special cell.
        let v2 = build_p2(2, &CATALOG).unwrap();
        assert_eq!(v2.special_count(), 1);
        assert_eq!(v2.uncovered_count(), 0);
        let report = verify_certificate(&v2, &CATALOG);
        let statement = conclude_dimension(&report, &SystemSpec::of(&v2)).unwrap();
        assert!(statement.contains("empty"), "got: {statement}");

        // Degree 3: one cell, four uncovered points, dimension 3.
        let v3 = build_p2(3, &CATALOG).unwrap();
        assert_eq!(v3.special_count(), 1);
        assert_eq!(v3.uncovered_count(), 4);
    }

    #[test]
    fn build_refuses_the_quartic() {
        let err = build_p2(4, &CATALOG).unwrap_err();
        assert!(matches!(err, BuildError::NotApplicable { d: 4, .. }));
        assert!(err.to_string().contains("special"));
    }

    #[test]
    fn conclude_rejects_invalid_reports() {
        let mut cert = searched_r23();
        cert.marked.pop();
        let report = verify_certificate(&cert, &CATALOG);
        let err = conclude_dimension(&report, &SystemSpec::of(&cert)).unwrap_err();
        assert!(matches!(err, ConclusionError::InvalidReport(_)));
    }
}
