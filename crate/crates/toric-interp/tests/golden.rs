//! Checks on the committed certificate corpus in `golden/`: every file
//! verifies, the point accounting holds, and verdicts survive random
//! unimodular changes of coordinates.

mod common;

use common::load_goldens;
use once_cell::sync::Lazy;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toric_interp::classify::{enumerate_classes, Catalog};
use toric_interp::degeneration::{transform_certificate, verify_certificate};
use toric_interp::lattice::enclosed_points;
use toric_interp::UnimodularAffineMap;

static CATALOG: Lazy<Catalog> = Lazy::new(|| enumerate_classes(6, 8).expect("catalog builds"));

/// A random unimodular affine map assembled from shears, quarter turns, a
/// possible reflection, and a translation.
fn random_map(rng: &mut ChaCha8Rng) -> UnimodularAffineMap {
    let mut map = UnimodularAffineMap::translation(rng.gen_range(-9..=9), rng.gen_range(-9..=9));
    for _ in 0..rng.gen_range(0..=4) {
        let step = match rng.gen_range(0..4) {
            0 => UnimodularAffineMap::new(1, rng.gen_range(-3..=3), 0, 1, 0, 0).unwrap(),
            1 => UnimodularAffineMap::new(1, 0, rng.gen_range(-3..=3), 1, 0, 0).unwrap(),
            2 => UnimodularAffineMap::rotation_quarter(),
            _ => UnimodularAffineMap::new(-1, 0, 0, 1, 0, 0).unwrap(),
        };
        map = map.compose(&step);
    }
    map
}

#[test]
fn every_golden_certificate_verifies_with_exact_accounting() {
    for (name, cert) in load_goldens() {
        let report = verify_certificate(&cert, &CATALOG);
        assert!(report.valid, "{name}: {:?}", report.failures);
        let points = enclosed_points(&cert.region.polygon().unwrap()).len();
        assert_eq!(
            6 * cert.special_count() + cert.uncovered_count(),
            points,
            "{name}: 6r + e must exhaust the region"
        );
        assert_eq!(
            report.dim_upper_bound,
            Some(cert.uncovered_count() as i64 - 1),
            "{name}: the dimension bound is e - 1"
        );
    }
}

#[test]
fn golden_verdicts_survive_twenty_random_unimodular_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (name, cert) in load_goldens() {
        for k in 0..20 {
            let map = random_map(&mut rng);
            let moved = transform_certificate(&cert, &map).expect("transform is total");
            let report = verify_certificate(&moved, &CATALOG);
            assert!(report.valid, "{name} (map {k}): {:?}", report.failures);
            assert_eq!(moved.special_count(), cert.special_count(), "{name} (map {k})");
            assert_eq!(moved.uncovered_count(), cert.uncovered_count(), "{name} (map {k})");
        }
    }
}
