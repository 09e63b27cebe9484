//! Deterministic SVG rendering of certificates.
//!
//! The picture shows the region's lattice points as dots, every cell of the
//! subdivision as an outlined polygon, special (marked) cells hatched and
//! labeled with their class, and uncovered points circled. Output is a pure
//! function of the certificate: integer pixel arithmetic only, fixed element
//! order, no timestamps — byte-identical across runs and platforms.

use std::fmt::Write as _;

use crate::certificate::{CertificateError, DegenCertificate};
use crate::lattice::{enclosed_points, LatticePoint};
use crate::subdivision::CellTag;

/// Rendering geometry, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Pixels per lattice unit.
    pub scale: i64,
    /// Padding around the region's bounding box.
    pub margin: i64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { scale: 40, margin: 30 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("scale and margin must be positive")]
    BadOptions,
}

/// Renders a certificate to an SVG document.
pub fn render_svg(cert: &DegenCertificate, opts: RenderOptions) -> Result<String, RenderError> {
    if opts.scale <= 0 || opts.margin < 0 {
        return Err(RenderError::BadOptions);
    }
    let region = cert.region.polygon()?;
    let (min, max) = region.bounding_box();
    // Screen coordinates flip the y axis so the lattice reads the usual way.
    let px = |p: LatticePoint| -> (i64, i64) {
        (
            opts.margin + (p.x - min.x) * opts.scale,
            opts.margin + (max.y - p.y) * opts.scale,
        )
    };
    let width = opts.margin * 2 + (max.x - min.x) * opts.scale;
    let height = opts.margin * 2 + (max.y - min.y) * opts.scale;

    let mut svg = String::new();
    let polygon_points = |poly: &crate::lattice::LatticePolygon| -> String {
        poly.vertices()
            .iter()
            .map(|&v| {
                let (x, y) = px(v);
                format!("{x},{y}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         width=\"{width}\" height=\"{height}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<defs><pattern id=\"hatch\" width=\"8\" height=\"8\" \
         patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">\
         <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#6baed6\" stroke-width=\"3\"/>\
         </pattern></defs>"
    )
    .unwrap();
    writeln!(svg, "<title>{}</title>", xml_escape(&cert.meta.name)).unwrap();
    writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>").unwrap();

    // Cells, in certificate order; marked cells hatched.
    let marked: Vec<bool> = {
        let mut m = vec![false; cert.cells.len()];
        for &i in &cert.marked {
            if i < m.len() {
                m[i] = true;
            }
        }
        m
    };
    for (i, cell) in cert.cells.iter().enumerate() {
        let fill = if marked[i] {
            "url(#hatch)"
        } else {
            match cell.tag {
                CellTag::Quadric => "#f5f5f5",
                _ => "none",
            }
        };
        writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"#444444\" stroke-width=\"2\"/>",
            polygon_points(&cell.polygon)
        )
        .unwrap();
    }

    // Class labels at the (rounded) centroid of each marked cell.
    for (i, cell) in cert.cells.iter().enumerate() {
        if !marked[i] {
            continue;
        }
        let Some(class) = &cell.class_id else { continue };
        let vs = cell.polygon.vertices();
        let n = vs.len() as i64;
        let (sx, sy) = vs.iter().fold((0, 0), |(ax, ay), v| {
            let (x, y) = px(*v);
            (ax + x, ay + y)
        });
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"#08519c\">{}</text>",
            sx / n,
            sy / n,
            xml_escape(class)
        )
        .unwrap();
    }

    // Region outline on top of the cell strokes.
    writeln!(
        svg,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"3\"/>",
        polygon_points(&region)
    )
    .unwrap();

    // Lattice points, then the circled uncovered points.
    for p in enclosed_points(&region) {
        let (x, y) = px(p);
        writeln!(svg, "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"#333333\"/>").unwrap();
    }
    let mut uncovered = cert.uncovered.clone();
    uncovered.sort();
    for p in uncovered {
        let (x, y) = px(p);
        writeln!(
            svg,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"9\" fill=\"none\" stroke=\"#a63603\" \
             stroke-width=\"3\"/>"
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
