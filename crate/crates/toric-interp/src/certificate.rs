//! Degeneration certificates and their canonical JSON representation.
//!
//! A certificate records a region, a face-to-face subdivision of it, which
//! cells are marked (each carrying one triple point), the lattice points left
//! uncovered, and optionally the exact lifting that witnesses regularity.
//! The JSON schema is stable: integers exact, rationals as `"p/q"` strings,
//! deterministic field order, two-space indentation.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lattice::{
    pt, rectangle_region, triangle_region, LatticeError, LatticePoint, LatticePolygon,
};
use crate::lp::Rat;
use crate::subdivision::{Cell, CellTag, Lifting};

/// The ambient region of a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Region {
    /// `T(d)`: the triangle with legs `d` (degree-`d` plane curves).
    Triangle { d: i64 },
    /// `R(a,b)`: the `a` by `b` rectangle (bidegree `(a,b)` curves).
    Rectangle { a: i64, b: i64 },
    /// Any other convex lattice polygon, as CCW vertices.
    Polygon { vertices: Vec<[i64; 2]> },
}

impl Region {
    pub fn polygon(&self) -> Result<LatticePolygon, CertificateError> {
        match self {
            Region::Triangle { d } => {
                if *d < 1 {
                    return Err(CertificateError::BadRegion(format!("triangle d={d}")));
                }
                Ok(triangle_region(*d))
            }
            Region::Rectangle { a, b } => {
                if *a < 1 || *b < 1 {
                    return Err(CertificateError::BadRegion(format!("rectangle {a}x{b}")));
                }
                Ok(rectangle_region(*a, *b))
            }
            Region::Polygon { vertices } => {
                let vs = vertices.iter().map(|&[x, y]| pt(x, y)).collect();
                LatticePolygon::new(vs).map_err(CertificateError::BadPolygon)
            }
        }
    }

    /// Recognizes origin-anchored triangles and rectangles, falling back to
    /// an explicit polygon.
    pub fn from_polygon(poly: &LatticePolygon) -> Region {
        let vs = poly.vertices();
        if vs.len() == 3 && vs[0] == pt(0, 0) && vs[1].y == 0 && vs[2].x == 0 && vs[1].x == vs[2].y
        {
            return Region::Triangle { d: vs[1].x };
        }
        if vs.len() == 4
            && vs[0] == pt(0, 0)
            && vs[1].y == 0
            && vs[2] == pt(vs[1].x, vs[3].y)
            && vs[3].x == 0
        {
            return Region::Rectangle { a: vs[1].x, b: vs[3].y };
        }
        Region::Polygon { vertices: vs.iter().map(|p| [p.x, p.y]).collect() }
    }
}

/// Free-form descriptive metadata carried by a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
}

/// A full degeneration certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenCertificate {
    pub region: Region,
    pub cells: Vec<Cell>,
    /// Indices into `cells` of the special cells carrying triple points.
    pub marked: Vec<usize>,
    pub uncovered: Vec<LatticePoint>,
    pub lifting: Option<Lifting>,
    pub meta: Meta,
}

#[derive(Debug, thiserror::Error)]
pub enum CertificateError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad region: {0}")]
    BadRegion(String),
    #[error("bad polygon: {0}")]
    BadPolygon(LatticeError),
    #[error("cell {index}: {reason}")]
    BadCell { index: usize, reason: String },
    #[error("lifting: {0}")]
    BadLifting(String),
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CertJson {
    region: Region,
    cells: Vec<CellJson>,
    marked: Vec<usize>,
    uncovered: Vec<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lifting: Option<LiftingJson>,
    meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    vertices: Vec<[i64; 2]>,
    tag: CellTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct LiftingJson {
    points: Vec<[i64; 2]>,
    heights: Vec<String>,
}

impl DegenCertificate {
    /// Canonical pretty-printed JSON bytes (deterministic, newline-terminated).
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let wire = CertJson {
            region: self.region.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    vertices: c.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
                    tag: c.tag,
                    class: c.class_id.clone(),
                })
                .collect(),
            marked: self.marked.clone(),
            uncovered: self.uncovered.iter().map(|p| [p.x, p.y]).collect(),
            lifting: self.lifting.as_ref().map(|l| LiftingJson {
                points: l.iter().map(|(p, _)| [p.x, p.y]).collect(),
                heights: l.iter().map(|(_, h)| h.to_string()).collect(),
            }),
            meta: self.meta.clone(),
        };
        let mut bytes = serde_json::to_vec_pretty(&wire).expect("certificate serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<DegenCertificate, CertificateError> {
        let wire: CertJson = serde_json::from_slice(bytes)?;
        let mut cells = Vec::with_capacity(wire.cells.len());
        for (index, cj) in wire.cells.into_iter().enumerate() {
            let vs = cj.vertices.iter().map(|&[x, y]| pt(x, y)).collect();
            let polygon = LatticePolygon::new(vs).map_err(|e| CertificateError::BadCell {
                index,
                reason: e.to_string(),
            })?;
            cells.push(Cell { polygon, tag: cj.tag, class_id: cj.class });
        }
        let lifting = match wire.lifting {
            None => None,
            Some(lj) => {
                if lj.points.len() != lj.heights.len() {
                    return Err(CertificateError::BadLifting(format!(
                        "{} points but {} heights",
                        lj.points.len(),
                        lj.heights.len()
                    )));
                }
                let mut heights = BTreeMap::new();
                for (&[x, y], s) in lj.points.iter().zip(&lj.heights) {
                    let h = Rat::from_str(s).map_err(|e| {
                        CertificateError::BadLifting(format!("height {s:?}: {e}"))
                    })?;
                    heights.insert(pt(x, y), h);
                }
                Some(Lifting::new(heights))
            }
        };
        Ok(DegenCertificate {
            region: wire.region,
            cells,
            marked: wire.marked,
            uncovered: wire.uncovered.iter().map(|&[x, y]| pt(x, y)).collect(),
            lifting,
            meta: wire.meta,
        })
    }

    pub fn special_count(&self) -> usize {
        self.marked.len()
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rat;

    fn tri(vs: &[(i64, i64)]) -> LatticePolygon {
        LatticePolygon::new(vs.iter().map(|&(x, y)| pt(x, y)).collect()).unwrap()
    }

    fn sample() -> DegenCertificate {
        let t2 = tri(&[(0, 0), (2, 0), (0, 2)]);
        let points = crate::lattice::enclosed_points(&t2);
        let lifting = Lifting::from_fn(&points, |p| {
            rat(p.x * p.x + p.y * p.y + 1) / rat(3)
        });
        DegenCertificate {
            region: Region::Triangle { d: 2 },
            cells: vec![Cell::special(t2, "E1")],
            marked: vec![0],
            uncovered: vec![],
            lifting: Some(lifting),
            meta: Meta {
                name: "V_2".into(),
                generator: "test".into(),
                block: Some("V_2".into()),
            },
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let cert = sample();
        let bytes = cert.to_json_bytes();
        let back = DegenCertificate::from_json_bytes(&bytes).unwrap();
        assert_eq!(back, cert);
        // Serialization is deterministic byte for byte.
        assert_eq!(back.to_json_bytes(), bytes);
    }

    #[test]
    fn json_shape_matches_schema() {
        let bytes = sample().to_json_bytes();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["region"]["type"], "triangle");
        assert_eq!(v["region"]["d"], 2);
        assert_eq!(v["cells"][0]["tag"], "special");
        assert_eq!(v["cells"][0]["class"], "E1");
        assert_eq!(v["marked"][0], 0);
        assert_eq!(v["lifting"]["heights"][0], "1/3");
        assert_eq!(v["meta"]["block"], "V_2");
        assert!(bytes.ends_with(b"\n"));
    }

    #[test]
    fn region_round_trips_through_polygon() {
        for region in [
            Region::Triangle { d: 7 },
            Region::Rectangle { a: 5, b: 3 },
            Region::Polygon { vertices: vec![[0, 0], [9, 0], [11, 3], [2, 3]] },
        ] {
            let poly = region.polygon().unwrap();
            assert_eq!(Region::from_polygon(&poly), region);
        }
        // A translated rectangle is not origin-anchored: stays a polygon.
        let shifted = tri(&[(1, 1), (2, 1), (2, 2), (1, 2)]);
        assert!(matches!(Region::from_polygon(&shifted), Region::Polygon { .. }));
    }

    #[test]
    fn malformed_certificates_are_rejected() {
        assert!(DegenCertificate::from_json_bytes(b"{").is_err());
        let mut v: serde_json::Value =
            serde_json::from_slice(&sample().to_json_bytes()).unwrap();
        v["cells"][0]["vertices"] = serde_json::json!([[0, 0], [1, 0], [2, 0]]);
        let err = DegenCertificate::from_json_bytes(v.to_string().as_bytes()).unwrap_err();
        assert!(matches!(err, CertificateError::BadCell { index: 0, .. }));
        let mut v: serde_json::Value =
            serde_json::from_slice(&sample().to_json_bytes()).unwrap();
        v["lifting"]["heights"][0] = serde_json::json!("not-a-number");
        assert!(DegenCertificate::from_json_bytes(v.to_string().as_bytes()).is_err());
        assert!(Region::Triangle { d: 0 }.polygon().is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::test_strategies::arb_hull;

        fn arb_region() -> impl Strategy<Value = Region> {
            prop_oneof![
                (1i64..=9).prop_map(|d| Region::Triangle { d }),
                (1i64..=9, 1i64..=9).prop_map(|(a, b)| Region::Rectangle { a, b }),
                arb_hull(4).prop_map(|p| Region::Polygon {
                    vertices: p.vertices().iter().map(|q| [q.x, q.y]).collect(),
                }),
            ]
        }

        /// Structurally well-formed certificates with arbitrary payloads;
        /// geometric soundness is irrelevant to the wire format.
        fn arb_cert() -> impl Strategy<Value = DegenCertificate> {
            (
                arb_region(),
                proptest::collection::vec(arb_hull(3), 1..=4),
                proptest::collection::vec((-5i64..=5, -5i64..=5), 0..=3),
                proptest::option::of(proptest::collection::vec(
                    (-9i64..=9, 1i64..=9),
                    1..=6,
                )),
                "[a-z0-9 _.^-]{0,12}",
                "[a-z-]{1,12}",
                proptest::option::of("[A-Z]_[0-9]{1,2}"),
            )
                .prop_map(|(region, polys, uncovered, heights, name, generator, block)| {
                    let cells: Vec<Cell> = polys
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            if i == 0 {
                                Cell::special(p.clone(), "E1")
                            } else {
                                Cell::tagged(p.clone())
                            }
                        })
                        .collect();
                    let lifting = heights.map(|entries| {
                        let points = crate::lattice::enclosed_points(&polys[0]);
                        Lifting::new(
                            points
                                .iter()
                                .zip(entries.iter().cycle())
                                .map(|(&p, &(n, d))| (p, rat(n) / rat(d)))
                                .collect(),
                        )
                    });
                    DegenCertificate {
                        region,
                        cells,
                        marked: vec![0],
                        uncovered: uncovered.iter().map(|&(x, y)| pt(x, y)).collect(),
                        lifting,
                        meta: Meta { name, generator, block },
                    }
                })
        }

        proptest! {
            #[test]
            fn json_round_trip_is_exact(cert in arb_cert()) {
                let bytes = cert.to_json_bytes();
                let back = DegenCertificate::from_json_bytes(&bytes).unwrap();
                prop_assert_eq!(back, cert);
            }
        }
    }
}
