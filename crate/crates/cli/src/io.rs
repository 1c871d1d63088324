//! Dataset files.
//!
//! A manifest is a JSON document
//!
//! ```json
//! { "name": "toy", "views": [{ "path": "v0.csv", "format": "csv", "orientation": "rows" }],
//!   "labels_path": "labels.txt", "n_clusters": 3 }
//! ```
//!
//! with paths relative to the manifest's directory. `format` is `csv`
//! (default) or `binary`; `orientation` is `rows` (default, one sample per
//! row) or `columns` (one sample per column).
//!
//! CSV files are comma separated; a first line that does not parse as numbers
//! is treated as a header and lines starting with `#` are skipped. Binary
//! files are the 8 bytes `MVTCF64\0`, then the row and column counts as
//! little-endian `u64`, then `rows * cols` little-endian `f64` values in
//! row-major order. Label files hold one integer per line; blank lines and
//! lines starting with `#` are skipped.

use std::fs;
use std::path::{Path, PathBuf};

use mvtc::{Dataset64, MultiViewDataset};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const BINARY_MAGIC: [u8; 8] = *b"MVTCF64\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// One sample per row.
    #[default]
    Rows,
    /// One sample per column.
    Columns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub views: Vec<ViewEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_clusters: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub dataset: Dataset64,
    pub n_clusters: Option<usize>,
}

/// Reads a matrix file as stored on disk (rows x columns).
fn read_raw(path: &Path, format: Format) -> Result<DMatrix<f64>> {
    match format {
        Format::Csv => read_csv_raw(path),
        Format::Binary => read_binary_raw(path),
    }
}

fn read_csv_raw(path: &Path) -> Result<DMatrix<f64>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::parse(path, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if first.len() != values.len() {
                        return Err(CliError::parse(
                            path,
                            format!("record {} has {} fields, expected {}", line + 1, values.len(), first.len()),
                        ));
                    }
                }
                rows.push(values);
            }
            Err(_) if line == 0 => continue,
            Err(e) => return Err(CliError::parse(path, format!("record {}: {e}", line + 1))),
        }
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(CliError::parse(path, "no numeric records"));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

fn read_binary_raw(path: &Path) -> Result<DMatrix<f64>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() < 24 || bytes[..8] != BINARY_MAGIC {
        return Err(CliError::parse(path, "missing MVTCF64 header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(8) as usize, word(16) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| CliError::parse(path, "header dimensions overflow"))?;
    if bytes.len() - 24 != expected {
        return Err(CliError::parse(
            path,
            format!("header says {rows}x{cols} ({expected} bytes), body has {} bytes", bytes.len() - 24),
        ));
    }
    let values = bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    Ok(DMatrix::from_row_iterator(rows, cols, values))
}

/// Reads one view and returns it as features x samples.
pub fn read_view(path: &Path, format: Format, orientation: Orientation) -> Result<DMatrix<f64>> {
    let raw = read_raw(path, format)?;
    Ok(match orientation {
        Orientation::Rows => raw.transpose(),
        Orientation::Columns => raw,
    })
}

/// Writes a features x samples matrix.
pub fn write_view(path: &Path, data: &DMatrix<f64>, format: Format, orientation: Orientation) -> Result<()> {
    let stored = match orientation {
        Orientation::Rows => data.transpose(),
        Orientation::Columns => data.clone(),
    };
    let bytes = match format {
        Format::Csv => {
            let mut out = String::new();
            for row in stored.row_iter() {
                let fields: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out.into_bytes()
        }
        Format::Binary => {
            let mut out = Vec::with_capacity(24 + 8 * stored.len());
            out.extend_from_slice(&BINARY_MAGIC);
            out.extend_from_slice(&(stored.nrows() as u64).to_le_bytes());
            out.extend_from_slice(&(stored.ncols() as u64).to_le_bytes());
            for row in stored.row_iter() {
                for x in row.iter() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            out
        }
    };
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.parse::<i64>()
                .map_err(|e| CliError::parse(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_labels<L: std::fmt::Display>(path: &Path, labels: &[L]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))?;
    if manifest.views.is_empty() {
        return Err(CliError::parse(path, "manifest lists no views"));
    }
    if manifest.n_clusters == Some(0) {
        return Err(CliError::parse(path, "n_clusters must be positive"));
    }
    Ok(manifest)
}

/// Loads every view and the labels named by a manifest.
pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

    let mut views = Vec::with_capacity(manifest.views.len());
    let mut first: Option<(PathBuf, usize)> = None;
    for entry in &manifest.views {
        let path = resolve(&entry.path);
        let data = read_view(&path, entry.format, entry.orientation)?;
        match &first {
            None => first = Some((path, data.ncols())),
            Some((first_path, n)) if *n != data.ncols() => {
                return Err(CliError::DimensionMismatch {
                    paths: vec![first_path.clone(), path],
                    expected: format!("{n} samples"),
                    actual: format!("{} samples ({}x{} features x samples)", data.ncols(), data.nrows(), data.ncols()),
                });
            }
            Some(_) => {}
        }
        views.push(data);
    }
    let (first_path, n) = first.expect("manifest has views");

    let labels = match &manifest.labels_path {
        Some(p) => {
            let path = resolve(p);
            let labels = read_labels(&path)?;
            if labels.len() != n {
                return Err(CliError::DimensionMismatch {
                    paths: vec![first_path, path],
                    expected: format!("{n} labels"),
                    actual: format!("{} labels", labels.len()),
                });
            }
            Some(labels)
        }
        None => None,
    };
    Ok(LoadedDataset {
        name: manifest.name,
        dataset: MultiViewDataset::new(views, labels)?,
        n_clusters: manifest.n_clusters,
    })
}

/// Writes `view_<v>.{csv,bin}`, `labels.txt` (when labelled) and
/// `manifest.json` into `dir`; returns the manifest path.
pub fn save_dataset(
    dir: &Path,
    name: &str,
    dataset: &Dataset64,
    n_clusters: Option<usize>,
    format: Format,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Binary => "bin",
    };
    let mut entries = Vec::with_capacity(dataset.n_views());
    for view in dataset.views() {
        let file = PathBuf::from(format!("view_{}.{ext}", view.view_id));
        write_view(&dir.join(&file), &view.data, format, Orientation::Rows)?;
        entries.push(ViewEntry {
            path: file,
            format,
            orientation: Orientation::Rows,
        });
    }
    let labels_path = match dataset.labels() {
        Some(labels) => {
            write_labels(&dir.join("labels.txt"), labels)?;
            Some(PathBuf::from("labels.txt"))
        }
        None => None,
    };
    let manifest = DatasetManifest {
        name: name.to_string(),
        views: entries,
        labels_path,
        n_clusters,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let with = dir.path().join("h.csv");
        let without = dir.path().join("n.csv");
        fs::write(&with, "a,b\n1,2\n3,4\n5,6\n").unwrap();
        fs::write(&without, "1,2\n3,4\n5,6\n").unwrap();
        let a = read_view(&with, Format::Csv, Orientation::Rows).unwrap();
        let b = read_view(&without, Format::Csv, Orientation::Rows).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (2, 3));
        assert_eq!(a[(1, 2)], 6.0);
        let c = read_view(&without, Format::Csv, Orientation::Columns).unwrap();
        assert_eq!(c.shape(), (3, 2));
    }

    #[test]
    fn ragged_csv_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_view(&p, Format::Csv, Orientation::Rows), Err(CliError::Parse { .. })));
    }

    #[test]
    fn binary_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        write_view(&p, &m, Format::Binary, Orientation::Columns).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"MVTCF64\0");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2.0);
        assert_eq!(read_view(&p, Format::Binary, Orientation::Columns).unwrap(), m);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.bin");
        let mut bytes = BINARY_MAGIC.to_vec();
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        fs::write(&p, bytes).unwrap();
        assert!(matches!(read_view(&p, Format::Binary, Orientation::Rows), Err(CliError::Parse { .. })));
    }

    #[test]
    fn labels_skip_comments() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.txt");
        fs::write(&p, "# truth\n1\n\n-2\n3\n").unwrap();
        assert_eq!(read_labels(&p).unwrap(), vec![1, -2, 3]);
        fs::write(&p, "1\nx\n").unwrap();
        assert!(matches!(read_labels(&p), Err(CliError::Parse { .. })));
    }
}
