//! CSV and JSON file formats.
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! reading a file and writing it again reproduces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointKind, PointSet, UnitPoint};
use crate::quadrature::{QuadratureRule, SolverStats};

/// Metadata stored next to a rule file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleMetadata {
    pub exactness_degree: usize,
    /// How the rule was built, e.g. `reference`, `lsq`, `rec`.
    pub construction: String,
    pub seed: Option<u64>,
    pub solver: Option<SolverStats>,
}

/// `rule.csv` -> `rule.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Write rows of numbers under a header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &format_table(header, rows)?)
}

/// CSV text of rows of numbers under a header.
pub fn format_table(header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                found: row.len(),
            });
        }
        push_row(&mut out, row);
    }
    Ok(out)
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

/// Parsed numeric table: header and rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Read a numeric CSV with a header line. Every malformed row is reported
/// with its line number.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == header.len() && v.iter().all(|x| x.is_finite()) => rows.push(v),
            _ => bad.push(line),
        }
    }
    if !bad.is_empty() {
        return Err(malformed(path, &bad));
    }
    Ok(Table { header, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{}: {other:?}", path.display())),
        }
    } else {
        Error::Parse(format!("{}: {e}", path.display()))
    }
}

fn malformed(path: &Path, lines: &[u64]) -> Error {
    let shown: Vec<String> = lines.iter().take(20).map(u64::to_string).collect();
    let more = if lines.len() > 20 {
        format!(" and {} more", lines.len() - 20)
    } else {
        String::new()
    };
    Error::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("{}: malformed rows at lines {}{more}", path.display(), shown.join(", ")),
    ))
}

fn expect_header(path: &Path, header: &[String], allowed: &[&[&str]]) -> Result<usize> {
    allowed
        .iter()
        .position(|h| h.len() == header.len() && h.iter().zip(header).all(|(a, b)| a == b))
        .ok_or_else(|| {
            let opts: Vec<String> = allowed.iter().map(|h| h.join(",")).collect();
            Error::Parse(format!(
                "{}: header '{}' is not one of {}",
                path.display(),
                header.join(","),
                opts.join(" | ")
            ))
        })
}

fn unit_points(path: &Path, rows: &[Vec<f64>]) -> Result<Vec<UnitPoint>> {
    let mut pts = Vec::with_capacity(rows.len());
    let mut bad = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        match UnitPoint::new(r[0], r[1], r[2]) {
            Ok(p) => pts.push(p),
            Err(_) => bad.push(i as u64 + 2),
        }
    }
    if !bad.is_empty() {
        return Err(malformed(path, &bad));
    }
    Ok(pts)
}

/// Node file: `x,y,z` (equal masses) or `x,y,z,v`.
pub fn write_points(path: &Path, set: &PointSet, with_measure: bool) -> Result<()> {
    write_text(path, &points_csv(set, with_measure)?)
}

/// CSV text of [`write_points`].
pub fn points_csv(set: &PointSet, with_measure: bool) -> Result<String> {
    let rows: Vec<Vec<f64>> = set
        .points()
        .iter()
        .zip(set.measure())
        .map(|(p, v)| {
            let mut r = p.coords().to_vec();
            if with_measure {
                r.push(*v);
            }
            r
        })
        .collect();
    let header: &[&str] = if with_measure {
        &["x", "y", "z", "v"]
    } else {
        &["x", "y", "z"]
    };
    format_table(header, &rows)
}

/// Read a node file written by [`write_points`].
pub fn read_points(path: &Path) -> Result<PointSet> {
    let table = read_table(path)?;
    let which = expect_header(path, &table.header, &[&["x", "y", "z"], &["x", "y", "z", "v"]])?;
    let pts = unit_points(path, &table.rows)?;
    if which == 0 {
        PointSet::monte_carlo(pts)
    } else {
        let v = table.rows.iter().map(|r| r[3]).collect();
        PointSet::new(pts, v, PointKind::External)
    }
}

/// Rule file `x,y,z,w` plus a JSON sidecar.
pub fn write_rule(path: &Path, rule: &QuadratureRule, meta: &RuleMetadata) -> Result<()> {
    let rows: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(p, w)| vec![p.x(), p.y(), p.z(), *w])
        .collect();
    write_table(path, &["x", "y", "z", "w"], &rows)?;
    write_json(&sidecar_path(path), meta)
}

/// Read a rule file; the exactness degree comes from the sidecar when it
/// exists and is 0 otherwise.
pub fn read_rule(path: &Path) -> Result<(QuadratureRule, Option<RuleMetadata>)> {
    let table = read_table(path)?;
    expect_header(path, &table.header, &[&["x", "y", "z", "w"]])?;
    let pts = unit_points(path, &table.rows)?;
    let w = table.rows.iter().map(|r| r[3]).collect();
    let side = sidecar_path(path);
    let meta: Option<RuleMetadata> = if side.exists() { Some(read_json(&side)?) } else { None };
    let degree = meta.as_ref().map_or(0, |m| m.exactness_degree);
    Ok((QuadratureRule::new(pts, w, degree)?, meta))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Unit vector for geographic longitude and latitude in degrees.
pub fn lonlat_to_point(lon_deg: f64, lat_deg: f64) -> Result<UnitPoint> {
    if !(-180.0..=180.0).contains(&lon_deg) || !(-90.0..=90.0).contains(&lat_deg) {
        return Err(Error::Domain(format!(
            "longitude {lon_deg} / latitude {lat_deg} out of range"
        )));
    }
    let (lon, lat) = (lon_deg.to_radians(), lat_deg.to_radians());
    UnitPoint::normalize([lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()])
}

/// Read `lon_deg,lat_deg,value` rows into equal-mass nodes and data values.
/// Longitudes in `[-180, 180)` (180 is folded onto -180), latitudes in
/// `[-90, 90]`. Rows repeating a `(lon, lat)` pair are rejected with their
/// line numbers.
pub fn ingest_lonlat(path: &Path) -> Result<(PointSet, Vec<f64>)> {
    let table = read_table(path)?;
    expect_header(path, &table.header, &[&["lon_deg", "lat_deg", "value"]])?;
    let mut bad = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let mut duplicates = Vec::new();
    let mut pts = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len());
    for (i, r) in table.rows.iter().enumerate() {
        let line = i + 2;
        let lon = if r[0] == 180.0 { -180.0 } else { r[0] };
        let lat = r[1];
        let Ok(p) = lonlat_to_point(lon, lat) else {
            bad.push(line as u64);
            continue;
        };
        let key = (lon.to_bits(), lat.to_bits());
        if let Some(first) = seen.insert(key, line) {
            duplicates.push(format!("{line} (same site as line {first})"));
            continue;
        }
        pts.push(p);
        values.push(r[2]);
    }
    if !bad.is_empty() {
        return Err(malformed(path, &bad));
    }
    if !duplicates.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{}: duplicate coordinates at lines {}",
            path.display(),
            duplicates.join(", ")
        )));
    }
    Ok((PointSet::monte_carlo(pts)?, values))
}
