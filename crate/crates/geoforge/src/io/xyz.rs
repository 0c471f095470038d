//! Plain-text pointclouds: one `x y z` triple per line.

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::pointcloud::PointCloud;

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|_| GeoError::Parse {
                    line: i + 1,
                    message: format!("bad number {s:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if nums.len() < 3 {
            return Err(GeoError::Parse {
                line: i + 1,
                message: "point needs 3 coordinates".into(),
            });
        }
        points.push(Vec3::new(nums[0], nums[1], nums[2]));
    }
    PointCloud::new(points)
}

pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", p.x, p.y, p.z));
    }
    out
}
