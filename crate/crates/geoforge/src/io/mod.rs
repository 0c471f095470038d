//! File formats: OBJ/OFF meshes, KVOX voxel and SDF grids, XYZ pointclouds,
//! and PNG images, plus path-based helpers with error context.

mod kvox;
mod obj;
mod off;
mod png;
mod xyz;

pub use kvox::{read_kvox, write_kvox, GridFile};
pub use obj::{parse_obj, write_obj};
pub use off::{parse_off, write_off};
pub use png::{write_png, write_png_rgba};
pub use xyz::{parse_xyz, write_xyz};

use std::fs;
use std::path::Path;

use crate::error::{GeoError, Result};
use crate::mesh::TriangleMesh;
use crate::pointcloud::PointCloud;

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path).map_err(|e| GeoError::io(path, e))?;
    match extension(path).as_str() {
        "off" => parse_off(&text),
        _ => parse_obj(&text),
    }
}

pub fn save_mesh(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    let text = match extension(path).as_str() {
        "off" => write_off(mesh),
        _ => write_obj(mesh),
    };
    fs::write(path, text).map_err(|e| GeoError::io(path, e))
}

pub fn load_pointcloud(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|e| GeoError::io(path, e))?;
    parse_xyz(&text)
}

pub fn save_pointcloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    fs::write(path, write_xyz(cloud)).map_err(|e| GeoError::io(path, e))
}

pub fn load_grid(path: &Path) -> Result<GridFile> {
    let bytes = fs::read(path).map_err(|e| GeoError::io(path, e))?;
    read_kvox(&mut bytes.as_slice())
}

pub fn save_grid(path: &Path, grid: &GridFile) -> Result<()> {
    let mut bytes = Vec::new();
    write_kvox(&mut bytes, grid).map_err(|e| GeoError::io(path, e))?;
    fs::write(path, bytes).map_err(|e| GeoError::io(path, e))
}

pub fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}
