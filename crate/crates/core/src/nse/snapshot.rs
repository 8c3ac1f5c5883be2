//! Field snapshots: one JSON header line, then the amplitudes as raw
//! little-endian `f64` pairs `(re, im)` in row-major axis order.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WaveField;
use crate::grid::{Dim, Grid};

pub const FORMAT: &str = "nslab-snapshot";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub dim: Dim,
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub mass: f64,
    pub time: f64,
}

pub fn write_snapshot<W: Write>(mut out: W, psi: &WaveField, time: f64) -> io::Result<()> {
    let header = SnapshotHeader {
        format: FORMAT.into(),
        version: 1,
        dim: psi.grid().dim(),
        shape: psi.grid().shape(),
        spacing: psi.grid().spacing(),
        mass: psi.mass(),
        time,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * psi.amplitude().len());
    for z in psi.amplitude() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_snapshot<R: BufRead>(mut input: R) -> io::Result<(SnapshotHeader, WaveField)> {
    let invalid = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).map_err(|e| invalid(e.to_string()))?;
    if header.format != FORMAT {
        return Err(invalid(format!("unknown snapshot format {:?}", header.format)));
    }
    let points = *header.shape.first().ok_or_else(|| invalid("empty shape".into()))?;
    let grid = Grid::new(header.dim, points, header.spacing).map_err(|e| invalid(e.to_string()))?;
    if grid.shape() != header.shape {
        return Err(invalid("shape does not match dimension".into()));
    }
    let mut bytes = vec![0u8; 16 * grid.len()];
    input.read_exact(&mut bytes)?;
    let amplitude = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let psi = WaveField::new(grid, amplitude, header.mass).map_err(|e| invalid(e.to_string()))?;
    Ok((header, psi))
}
