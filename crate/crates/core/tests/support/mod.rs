//! Oracles and generators shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod interp;
pub mod naive;
pub mod small;

use std::path::PathBuf;

pub fn repo_root() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    here.parent().unwrap().parent().unwrap().to_path_buf()
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(repo_root().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every `.odpm`, `.odps` and `.odpt` file under `corpus/` and `fixtures/`,
/// sorted.
pub fn spec_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for dir in ["corpus", "fixtures"] {
        for entry in std::fs::read_dir(repo_root().join(dir)).unwrap() {
            let path = entry.unwrap().path();
            if matches!(
                path.extension().and_then(|e| e.to_str()),
                Some("odpm" | "odps" | "odpt")
            ) {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}
