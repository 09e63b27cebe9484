//! Sections of lattice polygons and linear conditions from fat base points.
//!
//! A lattice polygon `P` spans the space of Laurent polynomials with monomial
//! exponents in `P`; after translating `P` into the nonnegative quadrant
//! (which changes nothing about the linear system except a global monomial
//! factor) these are ordinary monomials `x^a y^b`. A point of multiplicity
//! `m` imposes the vanishing of all partial derivatives of order `< m`: for a
//! triple point that is the six conditions `f, f_x, f_y, f_xx, f_xy, f_yy`.
//!
//! Two independent routes decide whether conditions are dependent:
//!
//! - the *symbolic* route ([`triple_point_matrix`] + [`symbolic_det`]):
//!   exact determinant of the 6x6 condition matrix over `Z[x, y]`, giving a
//!   proof valid for every position of the point at once;
//! - the *numeric* route ([`generic_dim_oracle`]): exact rank of the
//!   interpolation matrix at seeded random rational points, which bounds the
//!   dimension from below in probability but is reproducible per seed.
//!
//! They are kept free of shared matrix code on purpose so that one can
//! cross-check the other.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lattice::{enclosed_points, LatticePolygon};

/// Errors from section and condition-matrix construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FatPointsError {
    /// The triple-point determinant test needs a polygon with exactly 6 lattice points.
    #[error("polygon has {got} lattice points, the triple-point test needs exactly 6")]
    WrongPointCount { got: usize },
    /// Determinants are only defined for square matrices.
    #[error("condition matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    /// Multiplicities must be at least 1.
    #[error("multiplicity {0} is not a positive integer")]
    InvalidMultiplicity(u32),
    /// At least one trial is required.
    #[error("trials must be at least 1")]
    NoTrials,
}

/// A monomial `x^a y^b` with nonnegative exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (0, 0) => write!(f, "1"),
            (a, 0) => write_power(f, "x", a),
            (0, b) => write_power(f, "y", b),
            (a, b) => {
                write_power(f, "x", a)?;
                write!(f, "*")?;
                write_power(f, "y", b)
            }
        }
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, var: &str, e: u32) -> fmt::Result {
    if e == 1 {
        write!(f, "{var}")
    } else {
        write!(f, "{var}^{e}")
    }
}

/// A polynomial in `Z[x, y]`, stored sparsely; no zero coefficients are kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPolynomial {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(a: u32, b: u32, coeff: BigInt) -> Self {
        let mut p = Self::zero();
        if !coeff.is_zero() {
            p.terms.insert((a, b), coeff);
        }
        p
    }

    pub fn constant(c: i64) -> Self {
        Self::term(0, 0, BigInt::from(c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &BigInt)> {
        self.terms.iter().map(|(&(a, b), c)| (Monomial { a, b }, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (&k, c) in &other.terms {
            let entry = terms.entry(k).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(&k);
            }
        }
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                let k = (a1 + a2, b1 + b2);
                let entry = terms.entry(k).or_insert_with(BigInt::zero);
                *entry += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self { terms }
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let max_a = self.terms.keys().map(|&(a, _)| a).max().unwrap_or(0);
        let max_b = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0);
        let xp = rational_powers(x, max_a);
        let yp = rational_powers(y, max_b);
        let mut acc = BigRational::zero();
        for (&(a, b), c) in &self.terms {
            acc += BigRational::from(c.clone()) * &xp[a as usize] * &yp[b as usize];
        }
        acc
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(a, b)| a + b).max()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest monomial first for readability.
        for (i, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let mono = Monomial { a, b };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            if abs.is_one() && (a, b) != (0, 0) {
                write!(f, "{mono}")?;
            } else if (a, b) == (0, 0) {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*{mono}")?;
            }
        }
        Ok(())
    }
}

fn rational_powers(x: &BigRational, up_to: u32) -> Vec<BigRational> {
    let mut v = Vec::with_capacity(up_to as usize + 1);
    v.push(BigRational::one());
    for i in 1..=up_to as usize {
        let next = &v[i - 1] * x;
        v.push(next);
    }
    v
}

/// Falling factorial `n (n-1) ... (n-k+1)` as a `BigInt` (1 for `k = 0`).
fn falling(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
    }
    acc
}

/// `d/dx^alpha d/dy^beta` of `x^a y^b` as a polynomial (zero if the order
/// exceeds the exponent).
fn monomial_partial(a: u32, b: u32, alpha: u32, beta: u32) -> IntPolynomial {
    if alpha > a || beta > b {
        return IntPolynomial::zero();
    }
    IntPolynomial::term(a - alpha, b - beta, falling(a, alpha) * falling(b, beta))
}

/// Section basis of `P`: monomials for the lattice points of `P`, after
/// translating `P` into the nonnegative quadrant. Lexicographic order.
pub fn sections_of(poly: &LatticePolygon) -> Vec<Monomial> {
    let (lo, _) = poly.bounding_box();
    enclosed_points(poly)
        .into_iter()
        .map(|p| Monomial { a: (p.x - lo.x) as u32, b: (p.y - lo.y) as u32 })
        .collect()
}

/// The derivative orders of a point of multiplicity `m`, in the column order
/// used throughout: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn derivative_orders(m: u32) -> Vec<(u32, u32)> {
    let mut v = Vec::new();
    for s in 0..m {
        for alpha in (0..=s).rev() {
            v.push((alpha, s - alpha));
        }
    }
    v
}

/// The 6x6 matrix of triple-point conditions on the sections of a 6-point
/// polygon. Row `i` is section `i`; columns are
/// `[f, f_x, f_y, f_xx, f_xy, f_yy]` evaluated symbolically at `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionMatrix {
    entries: Vec<Vec<IntPolynomial>>,
}

impl ConditionMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn entry(&self, i: usize, j: usize) -> &IntPolynomial {
        &self.entries[i][j]
    }
}

/// Builds the triple-point condition matrix of a polygon with exactly 6
/// lattice points.
pub fn triple_point_matrix(poly: &LatticePolygon) -> Result<ConditionMatrix, FatPointsError> {
    let sections = sections_of(poly);
    if sections.len() != 6 {
        return Err(FatPointsError::WrongPointCount { got: sections.len() });
    }
    let orders = derivative_orders(3);
    let entries = sections
        .iter()
        .map(|&Monomial { a, b }| {
            orders.iter().map(|&(alpha, beta)| monomial_partial(a, b, alpha, beta)).collect()
        })
        .collect();
    Ok(ConditionMatrix { entries })
}

/// Exact determinant over `Z[x, y]` by Laplace expansion with memoized column
/// subsets (division-free; fine for the 6x6 matrices used here).
pub fn symbolic_det(matrix: &ConditionMatrix) -> Result<IntPolynomial, FatPointsError> {
    let n = matrix.rows();
    if n != matrix.cols() {
        return Err(FatPointsError::NotSquare { rows: n, cols: matrix.cols() });
    }
    if n == 0 {
        return Ok(IntPolynomial::constant(1));
    }
    assert!(n <= 16, "subset-indexed determinant limited to small matrices");
    // minors[mask] = determinant of rows 0..popcount(mask) and the column set
    // `mask`, built up one row at a time.
    let full: usize = (1 << n) - 1;
    let mut minors: Vec<Option<IntPolynomial>> = vec![None; full + 1];
    minors[0] = Some(IntPolynomial::constant(1));
    for mask in 1..=full {
        let row = (mask as u32).count_ones() as usize - 1;
        let mut acc = IntPolynomial::zero();
        let mut sign_pos = true;
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = minors[mask & !(1 << j)].as_ref().expect("smaller mask already computed");
            let contrib = matrix.entry(row, j).mul(sub);
            acc = if sign_pos { acc.add(&contrib) } else { acc.sub(&contrib) };
            sign_pos = !sign_pos;
        }
        minors[mask] = Some(acc);
    }
    Ok(minors[full].take().expect("full mask computed"))
}

/// Whether a 6-point polygon's system becomes empty after one general triple
/// point: true iff the symbolic determinant is not identically zero.
///
/// The verdict is a property of the unimodular equivalence class.
pub fn is_empty_after_triple(poly: &LatticePolygon) -> Result<bool, FatPointsError> {
    let det = symbolic_det(&triple_point_matrix(poly)?)?;
    Ok(!det.is_zero())
}

/// Exact-dimension oracle for the system of sections of `poly` vanishing to
/// orders `mults` at general points.
///
/// Draws the base points with rational coordinates (numerators and
/// denominators uniform in `[1, 10^6]`) from a ChaCha stream seeded with
/// `seed + trial`, builds the exact interpolation matrix of all partials of
/// order below each multiplicity, and returns `sections - 1 - max rank` over
/// the trials. `-1` means the system is empty at those points; for general
/// points the true dimension can only be larger, never smaller.
pub fn generic_dim_oracle(
    poly: &LatticePolygon,
    mults: &[u32],
    trials: u32,
    seed: u64,
) -> Result<i64, FatPointsError> {
    if trials == 0 {
        return Err(FatPointsError::NoTrials);
    }
    if let Some(&m) = mults.iter().find(|&&m| m == 0) {
        return Err(FatPointsError::InvalidMultiplicity(m));
    }
    let sections = sections_of(poly);
    let mut best_rank = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let points = draw_distinct_points(&mut rng, mults.len());
        let mut matrix: Vec<Vec<BigRational>> = Vec::new();
        for (point, &m) in points.iter().zip(mults) {
            let max_exp =
                sections.iter().map(|s| s.a.max(s.b)).max().unwrap_or(0);
            let xp = rational_powers(&point.0, max_exp);
            let yp = rational_powers(&point.1, max_exp);
            for (alpha, beta) in derivative_orders(m) {
                let row = sections
                    .iter()
                    .map(|&Monomial { a, b }| {
                        if alpha > a || beta > b {
                            BigRational::zero()
                        } else {
                            BigRational::from(falling(a, alpha) * falling(b, beta))
                                * &xp[(a - alpha) as usize]
                                * &yp[(b - beta) as usize]
                        }
                    })
                    .collect();
                matrix.push(row);
            }
        }
        best_rank = best_rank.max(rational_rank(matrix));
        if best_rank == sections.len() {
            break; // rank cannot grow further
        }
    }
    Ok(sections.len() as i64 - 1 - best_rank as i64)
}

fn draw_distinct_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(BigRational, BigRational)> {
    let mut pts: Vec<(BigRational, BigRational)> = Vec::with_capacity(n);
    while pts.len() < n {
        let mut coord = || {
            let num = rng.gen_range(1..=1_000_000i64);
            let den = rng.gen_range(1..=1_000_000i64);
            BigRational::new(BigInt::from(num), BigInt::from(den))
        };
        let p = (coord(), coord());
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

/// Exact rank by Gaussian elimination over the rationals.
fn rational_rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].recip();
        for c in col..cols {
            let scaled = &m[rank][c] * &inv;
            m[rank][c] = scaled;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Virtual and expected dimension of plane curves of degree `d` with
/// assigned multiplicities: `v = C(d+2,2) - 1 - sum C(m_i+1,2)`,
/// `e = max(v, -1)`.
pub fn vdim_plane(d: i64, mults: &[u32]) -> (i64, i64) {
    let v = (d + 2) * (d + 1) / 2 - 1 - mult_conditions(mults);
    (v, v.max(-1))
}

/// Same for the system of sections of an arbitrary polygon:
/// `v = #(P cap Z^2) - 1 - sum C(m_i+1,2)`.
pub fn vdim_polygon(poly: &LatticePolygon, mults: &[u32]) -> (i64, i64) {
    let v = enclosed_points(poly).len() as i64 - 1 - mult_conditions(mults);
    (v, v.max(-1))
}

fn mult_conditions(mults: &[u32]) -> i64 {
    mults.iter().map(|&m| (m as i64) * (m as i64 + 1) / 2).sum()
}

/// `C(d+2, 2) mod 6`: the expected count of unhit sections when degree-`d`
/// plane curves absorb as many general triple points as possible.
/// As a function of `d` this is periodic mod 12 with values
/// `[1, 3, 0, 4, 3, 3, 4, 0, 3, 1, 0, 0]`.
pub fn residue_table(d: i64) -> i64 {
    debug_assert!(d >= 0);
    ((d + 2) * (d + 1) / 2).rem_euclid(6)
}
