//! File formats: grid CSV with a JSON sidecar, point lists, and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cone::Vec3;
use crate::convex::BoundaryData;
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Shape, Vec2};

/// Sidecar describing a grid CSV. Rows are the interior nodes in lattice order,
/// followed by `boundary_samples` rows for the boundary values (if any).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub domain: Shape,
    pub resolution: usize,
    pub spacing: f64,
    pub convexity_certified: bool,
    pub nodes: usize,
    pub boundary_samples: usize,
}

/// `17` significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent() {
        if !p.as_os_str().is_empty() {
            fs::create_dir_all(p)?;
        }
    }
    Ok(())
}

/// Writes rows of numbers under a header.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `y1,y2,value` rows and the sidecar; returns both paths.
pub fn write_grid(path: &Path, f: &GridFunction) -> Result<Vec<PathBuf>> {
    let d = f.domain();
    let mut rows: Vec<Vec<f64>> = d.nodes().iter().zip(f.values()).map(|(y, v)| vec![y.x, y.y, *v]).collect();
    let bcount = match f.boundary_values() {
        Some(b) => {
            rows.extend(d.boundary().iter().zip(b).map(|(y, v)| vec![y.x, y.y, *v]));
            b.len()
        }
        None => 0,
    };
    write_rows(path, &["y1", "y2", "value"], rows)?;
    let side = GridSidecar {
        domain: d.shape().clone(),
        resolution: d.resolution(),
        spacing: d.spacing(),
        convexity_certified: f.convexity_certified(),
        nodes: d.len(),
        boundary_samples: bcount,
    };
    let sp = sidecar_path(path);
    write_json(&sp, &side)?;
    Ok(vec![path.to_path_buf(), sp])
}

/// Reads numeric rows; a first row that does not parse is taken as a header.
pub fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() >= width => out.push(v),
            Ok(v) => {
                return Err(Error::InvalidInput(format!(
                    "{}: row {} has {} columns, need {width}",
                    path.display(),
                    i + 1,
                    v.len()
                )))
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::InvalidInput(format!("{}: row {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

/// Reads a grid written by [`write_grid`], checking node positions against the
/// rebuilt domain.
pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let side: GridSidecar = read_json(&sidecar_path(path))?;
    let d = Arc::new(GridDomain::new(side.domain, side.resolution)?);
    if d.len() != side.nodes {
        return Err(Error::InvalidInput(format!("{}: sidecar node count disagrees with the grid", path.display())));
    }
    let rows = read_rows(path, 3)?;
    if rows.len() != side.nodes + side.boundary_samples {
        return Err(Error::InvalidInput(format!("{}: expected {} rows, found {}", path.display(), side.nodes + side.boundary_samples, rows.len())));
    }
    let tol = 1e-9 * d.spacing();
    let check = |p: &Vec2, r: &[f64]| -> Result<()> {
        if (p.x - r[0]).abs() > tol || (p.y - r[1]).abs() > tol {
            return Err(Error::InvalidInput(format!("{}: row at ({}, {}) is off the grid", path.display(), r[0], r[1])));
        }
        Ok(())
    };
    for (p, r) in d.nodes().iter().zip(&rows) {
        check(p, r)?;
    }
    let values = rows[..side.nodes].iter().map(|r| r[2]).collect();
    let boundary = if side.boundary_samples > 0 {
        if side.boundary_samples != d.boundary().len() {
            return Err(Error::InvalidInput(format!("{}: boundary sample count disagrees with the grid", path.display())));
        }
        for (p, r) in d.boundary().iter().zip(&rows[side.nodes..]) {
            check(p, r)?;
        }
        Some(rows[side.nodes..].iter().map(|r| r[2]).collect())
    } else {
        None
    };
    GridFunction::new(d, values, boundary)
}

/// Points `(x1, x2, lambda)`, one per row.
pub fn read_points(path: &Path) -> Result<Vec<Vec3>> {
    Ok(read_rows(path, 3)?.into_iter().map(|r| Vec3::new(r[0], r[1], r[2])).collect())
}

pub fn write_points(path: &Path, header: &[&str], points: &[Vec3]) -> Result<()> {
    write_rows(path, header, points.iter().map(|p| vec![p.x, p.y, p.z]))
}

/// Boundary samples `y1,y2,g`.
pub fn write_boundary(path: &Path, g: &BoundaryData) -> Result<()> {
    write_rows(path, &["y1", "y2", "g"], g.points.iter().zip(&g.values).map(|(p, v)| vec![p.x, p.y, *v]))
}

pub fn read_boundary(path: &Path) -> Result<BoundaryData> {
    let rows = read_rows(path, 3)?;
    BoundaryData::new(rows.iter().map(|r| Vec2::new(r[0], r[1])).collect(), rows.iter().map(|r| r[2]).collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

/// Run record written next to the outputs of every command.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub timings: BTreeMap<String, f64>,
    pub outputs: Vec<OutputEntry>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string());
        Manifest { command: command.to_string(), versions, ..Default::default() }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn timing(&mut self, key: &str, seconds: f64) -> &mut Self {
        self.timings.insert(key.to_string(), seconds);
        self
    }

    /// Hashes and records output files (sorted by path).
    pub fn outputs(&mut self, paths: &[PathBuf]) -> Result<&mut Self> {
        for p in paths {
            self.outputs.push(OutputEntry { path: p.display().to_string(), sha256: sha256_file(p)? });
        }
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(self)
    }

    /// `path -> hash` for comparing runs.
    pub fn hashes(&self) -> BTreeMap<String, String> {
        self.outputs.iter().map(|o| (o.path.clone(), o.sha256.clone())).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}
