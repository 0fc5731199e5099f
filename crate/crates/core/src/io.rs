//! Point-set files: CSV with header `x,y,z` and JSON arrays of `[x, y, z]`,
//! plus the sidecar manifest written next to sampled configurations.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::SpherePoint;

/// Rows further than this from unit length are rejected by the readers.
pub const UNIT_TOL: f64 = 1e-6;

pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn checked_point(row: usize, x: f64, y: f64, z: f64) -> Result<SpherePoint> {
    let norm = (x * x + y * y + z * z).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Parse(format!(
            "row {row}: ({x}, {y}, {z}) is not on the unit sphere (|p| = {norm})"
        )));
    }
    if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        // keep coordinates bit-exact so write/read round trips are lossless
        return Ok(SpherePoint::verbatim(x, y, z));
    }
    SpherePoint::new(x, y, z)
}

/// Writes `x,y,z` rows with 17 significant digits.
pub fn write_csv<W: Write>(points: &[SpherePoint], mut out: W) -> Result<()> {
    writeln!(out, "x,y,z")?;
    for p in points {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", p.x(), p.y(), p.z())?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SpherePoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() != 3 || &headers[0] != "x" || &headers[1] != "y" || &headers[2] != "z" {
        return Err(Error::Parse(format!("expected header `x,y,z`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for (i, rec) in rdr.deserialize::<(f64, f64, f64)>().enumerate() {
        let (x, y, z) = rec?;
        points.push(checked_point(i + 1, x, y, z)?);
    }
    Ok(points)
}

pub fn write_json<W: Write>(points: &[SpherePoint], out: W) -> Result<()> {
    let rows: Vec<[f64; 3]> = points.iter().map(|p| p.to_array()).collect();
    serde_json::to_writer(out, &rows)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<SpherePoint>> {
    let rows: Vec<[f64; 3]> = serde_json::from_reader(input)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| checked_point(i, r[0], r[1], r[2]))
        .collect()
}

/// Reads a point file, choosing the format from the extension
/// (`.json` is JSON, anything else CSV).
pub fn read_points(path: &Path) -> Result<Vec<SpherePoint>> {
    let file = fs::File::open(path)?;
    if is_json(path) {
        read_json(file)
    } else {
        read_csv(file)
    }
}

pub fn write_points(path: &Path, points: &[SpherePoint]) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    if is_json(path) {
        write_json(points, &mut file)?;
    } else {
        write_csv(points, &mut file)?;
    }
    file.flush()?;
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Provenance written beside every sampled configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub sampler: String,
    pub n: usize,
    pub seed: u64,
    pub software_version: String,
}

/// `out.csv` -> `out.csv.manifest.json`
pub fn manifest_path(points_path: &Path) -> PathBuf {
    let mut s = points_path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
