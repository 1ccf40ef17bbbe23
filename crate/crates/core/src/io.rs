//! On-disk formats.
//!
//! A pool is a TOML manifest plus a binary blob:
//!
//! ```toml
//! version = 1
//! dim = 4
//! blob = "pool.bin"          # relative to the manifest's directory
//!
//! [[sequences]]
//! id = "videos/0001"
//! frame_count = 2
//! offset = 0                 # byte offset into the blob
//! ```
//!
//! The blob holds every frame as little-endian IEEE-754 binary32, frame-major
//! then component, with no padding; sequences are stored back to back in
//! manifest order. Values are widened to `f64` on load.
//!
//! Small hand-written pools can also be given as CSV rows of
//! `id,frame_index,c0,c1,...` (lines starting with `#` are skipped).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthbench::BenchReport;
use crate::types::{EmbeddingSet, SelectionConfig, SelectionResult};

pub const MANIFEST_VERSION: u32 = 1;

/// Relative output paths are resolved against this directory when it is set.
pub const OUTPUT_DIR_ENV: &str = "ACTIVESEL_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub frame_count: u64,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolManifest {
    pub version: u32,
    pub dim: u64,
    pub blob: String,
    pub sequences: Vec<ManifestEntry>,
}

impl PoolManifest {
    /// Checks version and that sequences tile the blob contiguously; returns
    /// the expected blob length in bytes.
    pub fn expected_blob_len(&self, path: &Path) -> Result<u64> {
        let parse_err = |message: String| Error::ManifestParse {
            path: path.to_path_buf(),
            message,
        };
        if self.version != MANIFEST_VERSION {
            return Err(parse_err(format!(
                "unsupported version {} (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        if self.dim == 0 {
            return Err(parse_err("dim must be positive".into()));
        }
        let mut next = 0u64;
        for s in &self.sequences {
            if s.offset != next {
                return Err(parse_err(format!(
                    "sequence `{}` starts at byte {} but the previous sequence ends at {next}",
                    s.id, s.offset
                )));
            }
            let bytes = s
                .frame_count
                .checked_mul(self.dim)
                .and_then(|v| v.checked_mul(4))
                .ok_or_else(|| parse_err(format!("sequence `{}` is too large", s.id)))?;
            next = next
                .checked_add(bytes)
                .ok_or_else(|| parse_err("blob size overflows".into()))?;
        }
        Ok(next)
    }
}

pub fn read_manifest(path: &Path) -> Result<PoolManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::ManifestParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads a pool from a manifest, or from CSV when the path ends in `.csv`.
pub fn load_pool(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        return load_csv_pool(path);
    }
    let manifest = read_manifest(path)?;
    let expected = manifest.expected_blob_len(path)?;
    let blob_path = path
        .parent()
        .unwrap_or_else(|| Path::new(""))
        .join(&manifest.blob);
    let bytes = fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
    if bytes.len() as u64 != expected {
        return Err(Error::BlobSizeMismatch {
            path: blob_path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let dim = manifest.dim as usize;
    let mut entries = Vec::with_capacity(manifest.sequences.len());
    for s in &manifest.sequences {
        let start = s.offset as usize;
        let frames = bytes[start..start + s.frame_count as usize * dim * 4]
            .chunks_exact(dim * 4)
            .map(|frame| {
                frame
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                    .collect()
            })
            .collect();
        entries.push((s.id.clone(), frames));
    }
    EmbeddingSet::new(dim, entries)
}

/// Writes `pool` as a manifest at `manifest_path` and a blob next to it
/// (same stem, `.bin`). Components are narrowed to `f32`.
pub fn save_pool(pool: &EmbeddingSet, manifest_path: impl AsRef<Path>) -> Result<()> {
    let manifest_path = manifest_path.as_ref();
    let blob_name = manifest_path
        .with_extension("bin")
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pool.bin".into());
    let dim = pool.dim() as u64;
    let mut blob = Vec::new();
    let mut sequences = Vec::with_capacity(pool.len());
    for (id, seq) in pool.iter() {
        sequences.push(ManifestEntry {
            id: id.to_string(),
            frame_count: seq.frame_count() as u64,
            offset: blob.len() as u64,
        });
        for frame in seq.frames() {
            for &v in frame {
                blob.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    let manifest = PoolManifest {
        version: MANIFEST_VERSION,
        dim,
        blob: blob_name.clone(),
        sequences,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::ManifestParse {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let blob_path = manifest_path.with_file_name(&blob_name);
    fs::write(&blob_path, &blob).map_err(|e| Error::io(&blob_path, e))?;
    fs::write(manifest_path, text).map_err(|e| Error::io(manifest_path, e))
}

pub fn load_csv_pool(path: &Path) -> Result<EmbeddingSet> {
    let parse_err = |message: String| Error::ManifestParse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(e.to_string()))?;

    let mut order: Vec<String> = Vec::new();
    let mut frames: HashMap<String, Vec<Vec<f64>>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let row = line + 1;
        if record.len() < 3 {
            return Err(parse_err(format!(
                "row {row}: need id, frame index and components"
            )));
        }
        let id = record[0].to_string();
        let index: usize = record[1]
            .parse()
            .map_err(|_| parse_err(format!("row {row}: bad frame index `{}`", &record[1])))?;
        let values = record
            .iter()
            .skip(2)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| parse_err(format!("row {row}: bad component `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let d = *dim.get_or_insert(values.len());
        if values.len() != d {
            return Err(Error::DimensionMismatch {
                id,
                frame: index,
                expected: d,
                found: values.len(),
            });
        }
        let seq = frames.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if index != seq.len() {
            return Err(parse_err(format!(
                "row {row}: sequence `{id}` frame index {index}, expected {}",
                seq.len()
            )));
        }
        seq.push(values);
    }
    let dim = dim.ok_or(Error::EmptyPool)?;
    let entries = order
        .into_iter()
        .map(|id| {
            let f = frames.remove(&id).unwrap_or_default();
            (id, f)
        })
        .collect();
    EmbeddingSet::new(dim, entries)
}

fn format_distance(d: Option<f64>) -> String {
    d.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Text form of a selection run.
///
/// ```text
/// # activesel selection v1
/// strategy <s> / budget <B> / seed <S> / interval <a> / frames <m> / metric <name> / exhausted <bool>
/// selected <count>
/// <rank>  <index>  <id>            (one line per selected sample)
/// audit <count>
/// <step>  <candidate>  <min_distance or ->  ACCEPTED|REJECTED  <reason or ->
/// ```
///
/// Header lines are `key<TAB>value`; records are tab-separated.
pub fn format_selection(
    result: &SelectionResult,
    config: &SelectionConfig,
    ids: &[String],
) -> String {
    let mut out = String::new();
    out.push_str("# activesel selection v1\n");
    let _ = writeln!(out, "strategy\t{}", config.strategy);
    let _ = writeln!(out, "budget\t{}", config.budget);
    let _ = writeln!(out, "seed\t{}", config.seed);
    let _ = writeln!(out, "interval\t{}", config.interval);
    let _ = writeln!(out, "frames\t{}", config.frames_per_sequence);
    let _ = writeln!(out, "metric\t{}", config.metric);
    let _ = writeln!(out, "exhausted\t{}", result.exhausted);
    let _ = writeln!(out, "selected\t{}", result.selected.len());
    for (rank, &index) in result.selected.iter().enumerate() {
        let _ = writeln!(out, "{rank}\t{index}\t{}", ids[index]);
    }
    let _ = writeln!(out, "audit\t{}", result.audit.len());
    for a in &result.audit {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            a.step,
            a.candidate,
            format_distance(a.min_distance_to_selected),
            if a.accepted { "ACCEPTED" } else { "REJECTED" },
            a.rejection.map_or("-", |r| r.token())
        );
    }
    out
}

/// Applies [`OUTPUT_DIR_ENV`] to a relative path.
pub fn resolve_output_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn save_selection(
    result: &SelectionResult,
    config: &SelectionConfig,
    ids: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path.as_ref(), &format_selection(result, config, ids))
}

pub fn save_bench_report(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &report.to_text())
}
