use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Lattice};
use crate::pipeline::BlendReport;
use crate::topology::{FilteredGrid, PersistenceDiagram};

/// Contents of the JSON file next to a raw grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub dims: [usize; 3],
    #[serde(rename = "box")]
    pub bbox: Aabb,
}

/// `field.raw` pairs with `field.json`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

/// Samples as little-endian `f32` in x-fastest order, plus a sidecar.
pub fn write_grid(grid: &FilteredGrid, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(4 * grid.values().len());
    for v in grid.values() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let sidecar = GridSidecar {
        dims: grid.dims(),
        bbox: grid.bbox(),
    };
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&side, e))
}

pub fn read_grid(path: &Path) -> Result<FilteredGrid> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: GridSidecar = serde_json::from_str(&text)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let lattice = Lattice::new(sidecar.bbox, sidecar.dims)?;
    if bytes.len() != 4 * lattice.len() {
        return Err(Error::domain(format!(
            "{} holds {} bytes but {:?} needs {}",
            path.display(),
            bytes.len(),
            sidecar.dims,
            4 * lattice.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    FilteredGrid::from_values(lattice, values)
}

pub fn write_diagram(diagram: &PersistenceDiagram, grid: &FilteredGrid, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    diagram.write_csv(grid, &mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_report(report: &BlendReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
