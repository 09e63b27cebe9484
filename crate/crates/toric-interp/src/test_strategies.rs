//! Shared proptest strategies for the geometric unit tests.

use proptest::prelude::*;

use crate::lattice::{convex_hull, pt, LatticePoint, LatticePolygon, UnimodularAffineMap};

/// Points in the centered `[-bound, bound]` square.
pub fn arb_point(bound: i64) -> impl Strategy<Value = LatticePoint> {
    ((-bound..=bound), (-bound..=bound)).prop_map(|(x, y)| pt(x, y))
}

/// Convex hulls of a handful of random points; degenerate (collinear) sets
/// are rejected locally so shrinking stays inside valid polygons.
pub fn arb_hull(bound: i64) -> impl Strategy<Value = LatticePolygon> {
    proptest::collection::vec(arb_point(bound), 3..=8)
        .prop_filter_map("degenerate point set", |pts| convex_hull(&pts).ok())
}

/// Unimodular affine maps built from at most `max_steps` elementary factors
/// (shears bounded by `shear`, quarter turns, one reflection) composed with a
/// small translation. Keeping the factors small bounds the matrix entries,
/// which keeps mapped coordinates comfortably inside `i64`.
pub fn arb_unimodular(max_steps: usize, shear: i64) -> impl Strategy<Value = UnimodularAffineMap> {
    let step = prop_oneof![
        (-shear..=shear).prop_map(|s| UnimodularAffineMap::new(1, s, 0, 1, 0, 0).unwrap()),
        (-shear..=shear).prop_map(|s| UnimodularAffineMap::new(1, 0, s, 1, 0, 0).unwrap()),
        Just(UnimodularAffineMap::rotation_quarter()),
        Just(UnimodularAffineMap::new(-1, 0, 0, 1, 0, 0).unwrap()),
    ];
    (proptest::collection::vec(step, 0..=max_steps), -9i64..=9, -9i64..=9).prop_map(
        |(steps, tx, ty)| {
            steps
                .iter()
                .fold(UnimodularAffineMap::translation(tx, ty), |acc, m| acc.compose(m))
        },
    )
}
