//! KVOX binary grid format.
//!
//! Layout: magic `KVOX1` (5 bytes ASCII), kind byte (0 occupancy, 1 sdf),
//! Rx Ry Rz as little-endian u32, origin as 3 little-endian f64,
//! voxel_size as f64, then Rx*Ry*Rz little-endian f32 values, x fastest.

use std::io::{Read, Write};

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::voxel::{GridSpec, SdfGrid, VoxelGrid};

const MAGIC: &[u8; 5] = b"KVOX1";

/// Either payload kind of a KVOX file.
#[derive(Debug, Clone)]
pub enum GridFile {
    Occupancy(VoxelGrid),
    Sdf(SdfGrid),
}

impl GridFile {
    pub fn spec(&self) -> &GridSpec {
        match self {
            GridFile::Occupancy(g) => g.spec(),
            GridFile::Sdf(g) => g.spec(),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            GridFile::Occupancy(g) => g.values(),
            GridFile::Sdf(g) => g.values(),
        }
    }

    pub fn kind_byte(&self) -> u8 {
        match self {
            GridFile::Occupancy(_) => 0,
            GridFile::Sdf(_) => 1,
        }
    }
}

pub fn write_kvox<W: Write>(writer: &mut W, grid: &GridFile) -> std::io::Result<()> {
    let spec = grid.spec();
    writer.write_all(MAGIC)?;
    writer.write_all(&[grid.kind_byte()])?;
    for r in [spec.resolution.0, spec.resolution.1, spec.resolution.2] {
        writer.write_all(&(r as u32).to_le_bytes())?;
    }
    for c in [spec.origin.x, spec.origin.y, spec.origin.z] {
        writer.write_all(&c.to_le_bytes())?;
    }
    writer.write_all(&spec.voxel_size.to_le_bytes())?;
    for &v in grid.values() {
        writer.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_kvox<R: Read>(reader: &mut R) -> Result<GridFile> {
    let io_err = |e: std::io::Error| GeoError::Domain(format!("kvox read failed: {e}"));
    let mut magic = [0u8; 5];
    reader.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(GeoError::Domain(format!("bad magic {magic:?}, expected KVOX1")));
    }
    let mut kind = [0u8; 1];
    reader.read_exact(&mut kind).map_err(io_err)?;
    if kind[0] > 1 {
        return Err(GeoError::Domain(format!("unknown kind byte {}", kind[0])));
    }
    let mut u32buf = [0u8; 4];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        reader.read_exact(&mut u32buf).map_err(io_err)?;
        *d = u32::from_le_bytes(u32buf) as usize;
    }
    let mut f64buf = [0u8; 8];
    let mut origin = [0.0f64; 3];
    for c in &mut origin {
        reader.read_exact(&mut f64buf).map_err(io_err)?;
        *c = f64::from_le_bytes(f64buf);
    }
    reader.read_exact(&mut f64buf).map_err(io_err)?;
    let voxel_size = f64::from_le_bytes(f64buf);

    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| GeoError::Domain("grid dimensions overflow".into()))?;
    let mut payload = vec![0u8; count * 4];
    reader.read_exact(&mut payload).map_err(|_| {
        GeoError::Domain(format!("payload shorter than {count} f32 values"))
    })?;
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();

    let spec = GridSpec {
        resolution: (dims[0], dims[1], dims[2]),
        origin: Vec3::new(origin[0], origin[1], origin[2]),
        voxel_size,
    };
    Ok(match kind[0] {
        0 => GridFile::Occupancy(VoxelGrid::new(spec, values)?),
        _ => GridFile::Sdf(SdfGrid::new(spec, values)?),
    })
}
