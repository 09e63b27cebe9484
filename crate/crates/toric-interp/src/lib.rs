//! Exact lattice-polygon machinery for triple-point interpolation problems.
//!
//! The library is organized bottom-up:
//!
//! - [`lattice`]: points, unimodular affine maps, convex lattice polygons,
//!   Pick data, canonical forms under unimodular equivalence.
//! - [`classify`]: enumeration of equivalence classes of polygons with a fixed
//!   number of lattice points, and the resulting catalog.
//! - [`fat_points`]: integer polynomials, toric section bases, the symbolic
//!   6x6 triple-point determinant test, and a seeded exact-rank oracle for
//!   dimensions of linear systems with fat base points.
//! - [`lp`]: an exact rational feasibility solver (simplex with Bland's rule)
//!   returning either a solution or a Farkas-style infeasibility witness.
//! - [`subdivision`]: polygonal subdivisions of a region, validity checking,
//!   convex liftings (regularity), induced lower-hull subdivisions, filling,
//!   and separating-line composition of liftings.
//! - [`degeneration`]: certificates that bound the dimension of a triple-point
//!   system via a regular subdivision with marked special cells; search,
//!   composition, and assembly for triangle and rectangle regions.
//! - [`render`]: deterministic SVG rendering of certificates.
//!
//! All arithmetic on geometric and algebraic data is exact: `i64`/`i128` for
//! lattice coordinates, `BigInt`/`BigRational` everywhere overflow or division
//! can occur. No floating point is used anywhere in the verification paths.

pub mod certificate;
pub mod classify;
pub mod degeneration;
pub mod fat_points;
mod induced;
pub mod lattice;
pub mod lp;
pub mod render;
pub mod search;
pub mod subdivision;
#[cfg(test)]
mod test_strategies;

pub use lattice::{LatticePoint, LatticePolygon, PickData, StandardPosition, UnimodularAffineMap};
