//! Command-line front end for the toric-interp library.
//!
//! Exit codes: 0 success, 1 malformed input (arguments, vertices, JSON),
//! 2 a verification or reproducibility check failed, 3 I/O failure.

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use toric_interp::certificate::{DegenCertificate, Region};
use toric_interp::classify::{enumerate_classes, Catalog};
use toric_interp::degeneration::{
    base_block, build_p1xp1, build_p2, conclude_dimension, search_block, verify_certificate,
    SystemSpec, VerificationReport, DEFAULT_SEARCH_BUDGET,
};
use toric_interp::fat_points::{generic_dim_oracle, is_empty_after_triple, vdim_polygon};
use toric_interp::lattice::{pt, LatticePoint, LatticePolygon};
use toric_interp::render::{render_svg, RenderOptions};

const EXIT_MALFORMED: u8 = 1;
const EXIT_UNVERIFIED: u8 = 2;
const EXIT_IO: u8 = 3;

/// An error tagged with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CliResult = Result<(), Failure>;

fn malformed(e: impl Display) -> Failure {
    Failure { code: EXIT_MALFORMED, error: anyhow!("{e}") }
}

fn unverified(e: impl Display) -> Failure {
    Failure { code: EXIT_UNVERIFIED, error: anyhow!("{e}") }
}

fn io_failure(e: impl Display) -> Failure {
    Failure { code: EXIT_IO, error: anyhow!("{e}") }
}

#[derive(Parser)]
#[command(
    name = "toric-interp",
    version,
    about = "Lattice-polygon degenerations for linear systems with triple points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Region selection shared by several subcommands: exactly one of a
/// triangle degree, rectangle sides, or an explicit vertex list.
#[derive(Args, Debug)]
struct RegionArgs {
    /// Triangle T(d): degree-d plane curves.
    #[arg(long, value_name = "D", conflicts_with_all = ["rect", "vertices"])]
    triangle: Option<i64>,
    /// Rectangle R(a,b): bidegree-(a,b) curves (`--rect 5,3` or `--rect 5 3`).
    #[arg(long, num_args = 1..=2, value_delimiter = ',', value_names = ["A", "B"],
          conflicts_with = "vertices")]
    rect: Option<Vec<i64>>,
    /// Convex lattice polygon as counter-clockwise "x,y x,y ..." pairs.
    #[arg(long, value_name = "POINTS")]
    vertices: Option<String>,
}

impl RegionArgs {
    fn region(&self) -> Result<Region, Failure> {
        match (&self.triangle, &self.rect, &self.vertices) {
            (Some(d), None, None) => Ok(Region::Triangle { d: *d }),
            (None, Some(ab), None) => {
                if ab.len() != 2 {
                    return Err(malformed("--rect needs two values, e.g. --rect 5,3"));
                }
                Ok(Region::Rectangle { a: ab[0], b: ab[1] })
            }
            (None, None, Some(text)) => {
                let poly = parse_polygon(text)?;
                Ok(Region::from_polygon(&poly))
            }
            _ => Err(malformed("pass exactly one of --triangle, --rect, --vertices")),
        }
    }

    fn polygon(&self) -> Result<LatticePolygon, Failure> {
        self.region()?.polygon().map_err(malformed)
    }
}

fn parse_polygon(text: &str) -> Result<LatticePolygon, Failure> {
    let mut points: Vec<LatticePoint> = Vec::new();
    for pair in text.split_whitespace() {
        let (x, y) = pair
            .split_once(',')
            .ok_or_else(|| malformed(format!("vertex '{pair}' is not of the form x,y")))?;
        let x = x.trim().parse::<i64>().map_err(malformed)?;
        let y = y.trim().parse::<i64>().map_err(malformed)?;
        points.push(pt(x, y));
    }
    LatticePolygon::new(points).map_err(malformed)
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate unimodular classes of polygons with a fixed point count.
    Classify {
        /// Total lattice points per polygon.
        #[arg(long, default_value_t = 6)]
        n_points: usize,
        /// Enumeration box side; results must stabilize at box - 1.
        #[arg(long, default_value_t = 8)]
        box_size: i64,
        #[arg(long)]
        json: bool,
    },
    /// Symbolic triple-point determinant test for a 6-point polygon.
    TripleTest {
        /// Catalog class id (E1..E5, N1..N8).
        #[arg(long, conflicts_with = "vertices")]
        class: Option<String>,
        /// Explicit polygon as counter-clockwise "x,y x,y ..." pairs.
        #[arg(long, value_name = "POINTS")]
        vertices: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Virtual and expected dimension of a system with assigned multiplicities.
    Vdim {
        #[command(flatten)]
        region: RegionArgs,
        /// Multiplicities, comma separated (e.g. 3,3,3).
        #[arg(long, value_delimiter = ',', required = true)]
        mults: Vec<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Exact-rank dimension oracle at seeded random rational points.
    Oracle {
        #[command(flatten)]
        region: RegionArgs,
        /// Multiplicities, comma separated (e.g. 3,3,3).
        #[arg(long, value_delimiter = ',', required = true)]
        mults: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        trials: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Search for a block certificate with a given number of special cells.
    SearchBlock {
        #[command(flatten)]
        region: RegionArgs,
        /// Number of special (triple-point) cells to place.
        #[arg(long, alias = "special")]
        specials: usize,
        /// Backtracking node budget.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        /// Write the certificate JSON here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Build a composed certificate for a whole family member.
    Build {
        /// Plane curves of this degree with the maximal triple points.
        #[arg(long, value_name = "D", conflicts_with = "p1xp1")]
        p2: Option<i64>,
        /// Bidegree (a,b) curves with (a+1)(b+1)/6 triple points
        /// (`--p1xp1 5,3` or `--p1xp1 5 3`).
        #[arg(long, num_args = 1..=2, value_delimiter = ',', value_names = ["A", "B"])]
        p1xp1: Option<Vec<i64>>,
        /// Write the certificate JSON here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Verify certificate files; many files are checked in parallel.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Also print the dimension statement each certificate supports.
        #[arg(long)]
        conclude: bool,
        #[arg(long)]
        json: bool,
    },
    /// Render a certificate file as SVG.
    Render {
        file: PathBuf,
        /// Output path; defaults to the input with extension .svg.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Pixels per lattice unit.
        #[arg(long, default_value_t = 40)]
        scale: i64,
    },
    /// Regenerate the golden certificate corpus (deterministic bytes).
    GoldenRegen {
        /// Directory holding the golden files.
        #[arg(long, default_value = "golden")]
        dir: PathBuf,
        /// Compare only; report and fail on any difference.
        #[arg(long)]
        check: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_MALFORMED);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn catalog() -> Result<Catalog, Failure> {
    enumerate_classes(6, 8).map_err(malformed)
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Classify { n_points, box_size, json } => {
            let catalog = enumerate_classes(n_points, box_size).map_err(malformed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&catalog).map_err(malformed)?);
            } else {
                println!(
                    "{} classes of polygons with {} lattice points (box {}, {} at box {}):",
                    catalog.classes.len(),
                    catalog.n_points,
                    catalog.box_size,
                    catalog.count_at_smaller_box,
                    catalog.box_size - 1
                );
                for class in &catalog.classes {
                    let verts: Vec<String> = class
                        .representative
                        .vertices()
                        .iter()
                        .map(|v| format!("({},{})", v.x, v.y))
                        .collect();
                    println!(
                        "  {:<3} area {:>2}/2, {} edges, longest edge {} points, \
                         triple point {}  [{}]",
                        class.id,
                        class.pick.twice_area,
                        class.edge_count,
                        class.max_edge_points,
                        if class.empty_after_triple { "empties it" } else { "leaves sections" },
                        verts.join(" ")
                    );
                }
            }
            Ok(())
        }
        Command::TripleTest { class, vertices, json } => {
            let poly = match (class, vertices) {
                (Some(id), None) => {
                    let catalog = catalog()?;
                    catalog
                        .class(&id)
                        .ok_or_else(|| malformed(format!("no class '{id}' in the catalog")))?
                        .representative
                        .clone()
                }
                (None, Some(text)) => parse_polygon(&text)?,
                _ => return Err(malformed("pass exactly one of --class, --vertices")),
            };
            let empty = is_empty_after_triple(&poly).map_err(malformed)?;
            if json {
                println!("{}", json!({ "empty_after_triple": empty }));
            } else if empty {
                println!("one general triple point empties the system (determinant nonzero)");
            } else {
                println!("sections survive a general triple point (determinant vanishes)");
            }
            Ok(())
        }
        Command::Vdim { region, mults, json } => {
            let poly = region.polygon()?;
            let (virtual_dim, expected) = vdim_polygon(&poly, &mults);
            if json {
                println!("{}", json!({ "virtual": virtual_dim, "expected": expected }));
            } else {
                println!("virtual dimension {virtual_dim}, expected dimension {expected}");
            }
            Ok(())
        }
        Command::Oracle { region, mults, trials, seed, json } => {
            let poly = region.polygon()?;
            let dim = generic_dim_oracle(&poly, &mults, trials, seed).map_err(malformed)?;
            let (_, expected) = vdim_polygon(&poly, &mults);
            if json {
                println!("{}", json!({ "dimension": dim, "expected": expected }));
            } else {
                println!(
                    "dimension {dim} at seeded general points (expected dimension {expected})"
                );
            }
            Ok(())
        }
        Command::SearchBlock { region, specials, budget, output } => {
            let region = region.region()?;
            let catalog = catalog()?;
            let cert = search_block(&region, specials, &catalog, budget)
                .map_err(|e| unverified(format!("search failed: {e}")))?;
            emit_certificate(&cert, output.as_deref())
        }
        Command::Build { p2, p1xp1, output } => {
            let catalog = catalog()?;
            let cert = match (p2, p1xp1) {
                (Some(d), None) => build_p2(d, &catalog).map_err(unverified)?,
                (None, Some(ab)) if ab.len() == 2 => {
                    build_p1xp1(ab[0], ab[1], &catalog).map_err(unverified)?
                }
                (None, Some(_)) => {
                    return Err(malformed("--p1xp1 needs two values, e.g. --p1xp1 5,3"))
                }
                _ => return Err(malformed("pass exactly one of --p2, --p1xp1")),
            };
            emit_certificate(&cert, output.as_deref())
        }
        Command::Verify { files, conclude, json } => verify_files(&files, conclude, json),
        Command::Render { file, output, scale } => {
            let cert = read_certificate(&file)?;
            let svg = render_svg(&cert, RenderOptions { scale, ..RenderOptions::default() })
                .map_err(malformed)?;
            let out = output.unwrap_or_else(|| file.with_extension("svg"));
            fs::write(&out, svg).map_err(io_failure)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::GoldenRegen { dir, check } => golden_regen(&dir, check),
    }
}

fn emit_certificate(cert: &DegenCertificate, output: Option<&std::path::Path>) -> CliResult {
    let bytes = cert.to_json_bytes();
    match output {
        Some(path) => {
            fs::write(path, bytes).map_err(io_failure)?;
            eprintln!(
                "wrote {} ({}, {} special cells, {} uncovered)",
                path.display(),
                cert.meta.name,
                cert.special_count(),
                cert.uncovered_count()
            );
        }
        None => {
            let text = String::from_utf8(bytes).expect("serialized JSON is UTF-8");
            print!("{text}");
        }
    }
    Ok(())
}

fn read_certificate(path: &std::path::Path) -> Result<DegenCertificate, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| io_failure(format!("reading {}: {e}", path.display())))?;
    DegenCertificate::from_json_bytes(&bytes)
        .map_err(|e| malformed(format!("parsing {}: {e}", path.display())))
}

fn verify_files(files: &[PathBuf], conclude: bool, json: bool) -> CliResult {
    let catalog = catalog()?;
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("TORIC_INTERP_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
        {
            builder = builder.num_threads(n);
        }
        builder.build().map_err(io_failure)?
    };

    enum Outcome {
        Report(Box<DegenCertificate>, VerificationReport),
        Failed(Failure),
    }
    let outcomes: Vec<Outcome> = pool.install(|| {
        use rayon::prelude::*;
        files
            .par_iter()
            .map(|path| match read_certificate(path) {
                Ok(cert) => {
                    let report = verify_certificate(&cert, &catalog);
                    Outcome::Report(Box::new(cert), report)
                }
                Err(f) => Outcome::Failed(f),
            })
            .collect()
    });

    let mut worst: u8 = 0;
    let mut n_bad = 0usize;
    let mut json_items = Vec::new();
    for (path, outcome) in files.iter().zip(outcomes) {
        match outcome {
            Outcome::Failed(f) => {
                worst = worst.max(f.code);
                n_bad += 1;
                if json {
                    json_items.push(json!({
                        "file": path.display().to_string(),
                        "error": format!("{:#}", f.error),
                    }));
                } else {
                    println!("{}: ERROR: {:#}", path.display(), f.error);
                }
            }
            Outcome::Report(cert, report) => {
                if !report.valid {
                    worst = worst.max(EXIT_UNVERIFIED);
                    n_bad += 1;
                }
                let statement = conclude
                    .then(|| conclude_dimension(&report, &SystemSpec::of(&cert)))
                    .map(|r| match r {
                        Ok(s) => s,
                        Err(e) => format!("no conclusion: {e}"),
                    });
                if json {
                    json_items.push(json!({
                        "file": path.display().to_string(),
                        "name": cert.meta.name,
                        "valid": report.valid,
                        "special_cells": report.special_count,
                        "uncovered": report.uncovered_count,
                        "dim_upper_bound": report.dim_upper_bound,
                        "failures": report.failures,
                        "conclusion": statement,
                    }));
                } else if report.valid {
                    println!(
                        "{}: OK ({}, {} special cells, {} uncovered, dim <= {}){}",
                        path.display(),
                        cert.meta.name,
                        report.special_count,
                        report.uncovered_count,
                        report.dim_upper_bound.expect("valid report has a bound"),
                        statement.map(|s| format!("\n    {s}")).unwrap_or_default()
                    );
                } else {
                    let n = report.failures.len();
                    println!(
                        "{}: FAILED ({n} problem{}), first: {}",
                        path.display(),
                        if n == 1 { "" } else { "s" },
                        report.failures.first().map(String::as_str).unwrap_or("?")
                    );
                }
            }
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&json_items).map_err(malformed)?);
    }
    if worst == 0 {
        Ok(())
    } else {
        Err(Failure { code: worst, error: anyhow!("{n_bad} of {} file(s) did not verify cleanly", files.len()) })
    }
}

/// The golden corpus: searched blocks by name plus built triangle degrees.
fn golden_manifest() -> Vec<(&'static str, GoldenSource)> {
    vec![
        ("c2_3.json", GoldenSource::Block("C_2^3")),
        ("c5_3.json", GoldenSource::Block("C_5^3")),
        ("c5_5.json", GoldenSource::Block("C_5^5")),
        ("c5_6.json", GoldenSource::Block("C_5^6")),
        ("c5_8.json", GoldenSource::Block("C_5^8")),
        ("c8_3.json", GoldenSource::Block("C_8^3")),
        ("c8_5.json", GoldenSource::Block("C_8^5")),
        ("c11_2.json", GoldenSource::Block("C_11^2")),
        ("c11_3.json", GoldenSource::Block("C_11^3")),
        ("c11_4.json", GoldenSource::Block("C_11^4")),
        ("c17_4.json", GoldenSource::Block("C_17^4")),
        ("v1.json", GoldenSource::Triangle(1)),
        ("v2.json", GoldenSource::Triangle(2)),
        ("v3.json", GoldenSource::Triangle(3)),
        ("v5.json", GoldenSource::Triangle(5)),
        ("v6.json", GoldenSource::Triangle(6)),
        ("v7.json", GoldenSource::Triangle(7)),
        ("v8.json", GoldenSource::Triangle(8)),
        ("v9.json", GoldenSource::Triangle(9)),
        ("v10.json", GoldenSource::Triangle(10)),
        ("v11.json", GoldenSource::Triangle(11)),
        ("v12.json", GoldenSource::Triangle(12)),
        ("v16.json", GoldenSource::Triangle(16)),
    ]
}

enum GoldenSource {
    Block(&'static str),
    Triangle(i64),
}

fn golden_regen(dir: &std::path::Path, check: bool) -> CliResult {
    let catalog = catalog()?;
    fs::create_dir_all(dir).map_err(io_failure)?;
    let mut mismatches = 0usize;
    for (file, source) in golden_manifest() {
        let cert = match source {
            GoldenSource::Block(name) => base_block(name, &catalog).map_err(unverified)?,
            GoldenSource::Triangle(d) => build_p2(d, &catalog).map_err(unverified)?,
        };
        let bytes = cert.to_json_bytes();
        let path = dir.join(file);
        let existing = fs::read(&path).ok();
        let status = match &existing {
            Some(old) if old == &bytes => "unchanged",
            Some(_) if check => {
                mismatches += 1;
                "DIFFERS"
            }
            None if check => {
                mismatches += 1;
                "MISSING"
            }
            Some(_) => {
                fs::write(&path, &bytes).map_err(io_failure)?;
                "rewrote"
            }
            None => {
                fs::write(&path, &bytes).map_err(io_failure)?;
                "wrote"
            }
        };
        println!("{}: {status}", path.display());
    }
    if mismatches > 0 {
        return Err(unverified(format!(
            "{mismatches} golden file(s) out of date; run golden-regen without --check"
        )));
    }
    Ok(())
}
