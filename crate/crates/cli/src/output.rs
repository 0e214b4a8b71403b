//! Artifact writers.
//!
//! Numeric CSVs carry full round-trip precision (17 significant digits);
//! presentation-rounded views are generated separately by table commands.
//! All writers are deterministic for a fixed config and seed; wall-clock
//! timing goes to its own file so the scientific artifacts stay
//! byte-reproducible.

use crate::error::Result;
use hotspot_core::solver::{FieldPair, Mesh};
use hotspot_core::spectral::DomainKind;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant digits: enough for exact f64 round-trips.
pub fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    write_text(path, &text)
}

/// One snapshot. 1D: `x,A,rho` columns. 2D: header `nx ny L t`, then the
/// `A` grid row-major (one mesh row per line), a blank line, then `rho`.
pub fn write_snapshot(path: &Path, snap: &FieldPair, mesh: &Mesh) -> Result<()> {
    let mut s = String::new();
    match mesh.domain.kind {
        DomainKind::Interval => {
            let _ = writeln!(s, "x,A,rho");
            let xs = mesh.axis_centers();
            for i in 0..mesh.n {
                let _ = writeln!(s, "{},{},{}", full(xs[i]), full(snap.a[i]), full(snap.rho[i]));
            }
        }
        DomainKind::Square => {
            let _ = writeln!(s, "{} {} {} {}", mesh.n, mesh.n, mesh.domain.length, full(snap.t));
            for field in [&snap.a, &snap.rho] {
                for j in 0..mesh.n {
                    let row: Vec<String> =
                        (0..mesh.n).map(|i| full(field[j * mesh.n + i])).collect();
                    let _ = writeln!(s, "{}", row.join(" "));
                }
                let _ = writeln!(s);
            }
        }
    }
    write_text(path, &s)
}

/// Index of every artifact a run produced, written last. Paths are
/// relative to the run directory so artifacts stay byte-identical wherever
/// the run lands.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest { command: command.to_string(), files: Vec::new() }
    }

    pub fn add(&mut self, rel_path: &str, kind: &str, t: Option<f64>) {
        self.files.push(ManifestEntry {
            path: rel_path.to_string(),
            kind: kind.to_string(),
            t,
        });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

/// Resolve the output directory: `--out` flag beats `output.dir` beats
/// a default.
pub fn resolve_out_dir(flag: Option<&Path>, cfg_dir: Option<&Path>, fallback: &str) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg_dir.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(fallback))
}
