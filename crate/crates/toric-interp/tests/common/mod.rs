//! Helpers shared by the integration test binaries.

use std::fs;
use std::path::PathBuf;

use toric_interp::certificate::DegenCertificate;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

/// Loads the whole committed corpus, sorted by file stem.
pub fn load_goldens() -> Vec<(String, DegenCertificate)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(golden_dir()).expect("golden directory exists") {
        let path = entry.expect("directory entry").path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let bytes = fs::read(&path).expect("golden file reads");
        let cert =
            DegenCertificate::from_json_bytes(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        out.push((name, cert));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    assert_eq!(out.len(), 23, "expected the full 23-certificate corpus");
    out
}
