use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use ngqkd::scan::{BoundaryCurve, Criterion, MaxNoise};
use ngqkd::PhotocountDistribution;

use crate::settings::Source;

pub const CSV_HEADER: [&str; 7] = [
    "T",
    "nu_nongauss",
    "nu_bb84",
    "nu_di",
    "capped_nongauss",
    "capped_bb84",
    "capped_di",
];

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub timestamp: String,
    pub config: BTreeMap<String, Value>,
    pub sources: BTreeMap<String, Source>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_mapping: Option<&'static str>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, Value>,
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        config: BTreeMap<String, Value>,
        sources: BTreeMap<String, Source>,
        effective_mapping: Option<&'static str>,
    ) -> Self {
        RunManifest {
            tool: "ngqkd",
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            sources,
            effective_mapping,
            derived: BTreeMap::new(),
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
    {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

// Empty cells mark criteria that were not scanned or had no coincidences.
fn nu_cell(m: Option<&MaxNoise>) -> String {
    match m {
        Some(m) if !m.undefined => m.nu_star.to_string(),
        _ => String::new(),
    }
}

fn capped_cell(m: Option<&MaxNoise>) -> String {
    match m {
        Some(m) if !m.undefined => m.capped.to_string(),
        _ => String::new(),
    }
}

/// Boundary table with one row per transmittance. Floats use the shortest
/// representation that round-trips.
pub fn boundary_csv(curve: &BoundaryCurve) -> Result<String> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    wtr.write_record(CSV_HEADER)?;
    for r in &curve.records {
        let mut row = vec![r.transmittance.to_string()];
        row.extend(Criterion::ALL.iter().map(|&c| nu_cell(r.get(c))));
        row.extend(Criterion::ALL.iter().map(|&c| capped_cell(r.get(c))));
        wtr.write_record(&row)?;
    }
    Ok(String::from_utf8(wtr.into_inner()?)?)
}

pub fn pmf_text(dist: &PhotocountDistribution, manifest: &RunManifest) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# manifest {}", serde_json::to_string(manifest)?)?;
    writeln!(out, "s,p")?;
    for (s, p) in dist.probs.iter().enumerate() {
        writeln!(out, "{s},{p}")?;
    }
    writeln!(out, "# truncation_tail {:e}", dist.truncation_tail)?;
    Ok(out)
}
