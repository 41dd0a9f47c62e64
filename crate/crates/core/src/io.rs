//! On-disk formats: volumes and masks as a JSON header plus a little-endian
//! raw payload, barcodes/point clouds/features as CSV.
//!
//! Floats in CSV files are written with Rust's shortest round-trip
//! formatting, so `load(save(x)) == x` bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patch::PointCloud;
use crate::persistence::{Bar, Barcode, Barcodes};
use crate::vectorize::{feature_names, FEATURE_LEN};
use crate::volume::{Mask, Volume};

/// JSON sidecar describing a raw payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    #[serde(default = "unit_spacing")]
    pub spacing: [f64; 3],
    pub dtype: String,
    pub data: String,
}

fn unit_spacing() -> [f64; 3] {
    [1.0; 3]
}

fn read_header(path: &Path) -> Result<(VolumeHeader, Vec<u8>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: VolumeHeader = serde_json::from_str(&text).map_err(|e| Error::Header {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let raw_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.data);
    let raw = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    Ok((header, raw))
}

fn decode_samples(dtype: &str, raw: &[u8], expected: usize) -> Result<Vec<f32>> {
    let width = match dtype {
        "f32" => 4,
        "i16" => 2,
        "u8" => 1,
        other => return Err(Error::UnknownDtype(other.to_string())),
    };
    if !raw.len().is_multiple_of(width) || raw.len() / width != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: raw.len() / width,
        });
    }
    Ok(match dtype {
        "f32" => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
        "i16" => raw
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32)
            .collect(),
        _ => raw.iter().map(|&b| b as f32).collect(),
    })
}

/// Loads a volume from its JSON header. `i16` payloads are widened to `f32`.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let (header, raw) = read_header(path)?;
    if header.dtype == "u8" {
        return Err(Error::UnknownDtype(header.dtype));
    }
    let expected = header.dims.iter().product();
    let data = decode_samples(&header.dtype, &raw, expected)?;
    Volume::new(header.dims, header.spacing, data)
}

/// Loads a binary mask. Accepts `u8` in addition to the volume dtypes; every
/// sample must be exactly 0 or 1.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let (header, raw) = read_header(path)?;
    let expected = header.dims.iter().product();
    let samples = decode_samples(&header.dtype, &raw, expected)?;
    let mut data = Vec::with_capacity(samples.len());
    for (i, v) in samples.into_iter().enumerate() {
        data.push(match v {
            0.0 => 0,
            1.0 => 1,
            v => {
                return Err(Error::Format(format!(
                    "{}: mask value {v} at sample {i} is not binary",
                    path.display()
                )))
            }
        });
    }
    Mask::new(header.dims, data)
}

fn raw_sibling(header_path: &Path) -> (PathBuf, String) {
    let stem = header_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "volume".into());
    let name = format!("{stem}.raw");
    let raw = header_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&name);
    (raw, name)
}

fn write_header(path: &Path, header: &VolumeHeader) -> Result<()> {
    let text = serde_json::to_string_pretty(header).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `volume` as `f32` next to `path` (`<stem>.raw`).
pub fn save_volume(volume: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (raw_path, name) = raw_sibling(path);
    let bytes: Vec<u8> = volume.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&raw_path, bytes).map_err(|e| Error::io(&raw_path, e))?;
    write_header(
        path,
        &VolumeHeader {
            dims: volume.dims(),
            spacing: volume.spacing(),
            dtype: "f32".into(),
            data: name,
        },
    )
}

/// Writes `mask` as `u8` next to `path` (`<stem>.raw`).
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (raw_path, name) = raw_sibling(path);
    fs::write(&raw_path, mask.data()).map_err(|e| Error::io(&raw_path, e))?;
    write_header(
        path,
        &VolumeHeader {
            dims: mask.dims(),
            spacing: unit_spacing(),
            dtype: "u8".into(),
            data: name,
        },
    )
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Shortest round-trip decimal form; infinity prints as `inf`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    match field.trim() {
        "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        s => s.parse::<f64>().map_err(|_| {
            Error::Format(format!(
                "{}: line {line}: `{field}` is not a number",
                path.display()
            ))
        }),
    }
}

/// Renders barcodes as the `dim,birth,death` table, one row per bar.
pub fn barcode_csv(barcodes: &Barcodes) -> String {
    let mut out = String::from("dim,birth,death\n");
    for barcode in barcodes.iter() {
        for bar in barcode.bars() {
            out.push_str(&format!(
                "{},{},{}\n",
                barcode.dim(),
                fmt_f64(bar.birth),
                fmt_f64(bar.death)
            ));
        }
    }
    out
}

pub fn save_barcode(barcodes: &Barcodes, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, barcode_csv(barcodes)).map_err(|e| Error::io(path, e))
}

/// Reads a barcode table. Dimensions absent from the file come back empty;
/// at least dimensions 0..=2 are always present.
pub fn load_barcode(path: impl AsRef<Path>) -> Result<Barcodes> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["dim", "birth", "death"] {
        return Err(Error::Format(format!(
            "{}: expected header `dim,birth,death`",
            path.display()
        )));
    }
    let mut by_dim: Vec<Barcode> = (0..3).map(Barcode::new).collect();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != 3 {
            return Err(Error::Format(format!(
                "{}: line {line}: expected 3 fields",
                path.display()
            )));
        }
        let dim: usize = record[0].trim().parse().map_err(|_| {
            Error::Format(format!(
                "{}: line {line}: bad dimension `{}`",
                path.display(),
                &record[0]
            ))
        })?;
        let birth = parse_f64(path, line, &record[1])?;
        let death = parse_f64(path, line, &record[2])?;
        if !birth.is_finite() || death.is_nan() || death < birth {
            return Err(Error::Format(format!(
                "{}: line {line}: invalid bar ({birth}, {death})",
                path.display()
            )));
        }
        while by_dim.len() <= dim {
            by_dim.push(Barcode::new(by_dim.len()));
        }
        by_dim[dim].push(Bar::new(birth, death));
    }
    Ok(Barcodes::from_vec(by_dim))
}

/// Renders a point cloud as CSV with columns `x0,...,x{d-1}`.
pub fn point_cloud_csv(cloud: &PointCloud) -> String {
    let d = cloud.dim();
    let mut out = (0..d)
        .map(|i| format!("x{i}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for p in cloud.points() {
        out.push_str(&p.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn save_point_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, point_cloud_csv(cloud)).map_err(|e| Error::io(path, e))
}

/// Reads a point-cloud CSV into rows of coordinates.
pub fn load_points(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let d = reader.headers().map_err(|e| csv_error(path, e))?.len();
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != d {
            return Err(Error::Format(format!(
                "{}: line {}: expected {d} fields",
                path.display(),
                i + 2
            )));
        }
        let p = record
            .iter()
            .map(|f| parse_f64(path, i + 2, f))
            .collect::<Result<Vec<_>>>()?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "{}: line {}: non-finite coordinate",
                path.display(),
                i + 2
            )));
        }
        points.push(p);
    }
    Ok(points)
}

/// One row of a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub values: Vec<f64>,
    pub label: String,
}

fn column_names(len: usize) -> Vec<String> {
    if len == FEATURE_LEN {
        feature_names().to_vec()
    } else {
        (0..len).map(|i| format!("f{i}")).collect()
    }
}

/// Renders feature rows as CSV with columns `id,<features>,label`.
pub fn features_csv(rows: &[FeatureRow]) -> Result<String> {
    let len = rows.first().map_or(FEATURE_LEN, |r| r.values.len());
    if let Some(r) = rows.iter().find(|r| r.values.len() != len) {
        return Err(Error::InvalidArgument(format!(
            "ragged feature rows: `{}` has {} values, expected {len}",
            r.id,
            r.values.len()
        )));
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
        let mut header = vec!["id".to_string()];
        header.extend(column_names(len));
        header.push("label".into());
        w.write_record(&header)
            .map_err(|e| Error::Format(e.to_string()))?;
        for r in rows {
            let mut rec = vec![r.id.clone()];
            rec.extend(r.values.iter().map(|&v| fmt_f64(v)));
            rec.push(r.label.clone());
            w.write_record(&rec)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
    }
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_features(rows: &[FeatureRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = features_csv(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let n = headers.len();
    if n < 2 || &headers[0] != "id" || &headers[n - 1] != "label" {
        return Err(Error::Format(format!(
            "{}: expected columns `id,...,label`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != n {
            return Err(Error::Format(format!(
                "{}: line {}: expected {n} fields",
                path.display(),
                i + 2
            )));
        }
        let values = (1..n - 1)
            .map(|j| parse_f64(path, i + 2, &record[j]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            id: record[0].to_string(),
            values,
            label: record[n - 1].to_string(),
        });
    }
    Ok(rows)
}

/// Writes `text` to `path`, mapping the error.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
