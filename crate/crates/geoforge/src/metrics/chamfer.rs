//! Chamfer distance with exact grid-hash nearest neighbors.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::pointcloud::PointCloud;

/// Above this size, nearest-neighbor queries go through the hash grid.
/// Results are identical either way; only the lookup strategy changes.
const BRUTE_FORCE_LIMIT: usize = 1000;

/// Chamfer distance plus the nearest-neighbor assignments both ways.
#[derive(Debug, Clone)]
pub struct ChamferResult {
    /// Mean squared nearest distance A->B plus mean squared B->A.
    pub value: f64,
    /// Index into B of the nearest neighbor of each point of A.
    pub nearest_in_b: Vec<usize>,
    /// Index into A of the nearest neighbor of each point of B.
    pub nearest_in_a: Vec<usize>,
}

/// `CD = (1/|A|) sum_a min_b |a-b|^2 + (1/|B|) sum_b min_a |a-b|^2`.
pub fn chamfer_distance(a: &PointCloud, b: &PointCloud) -> Result<ChamferResult> {
    if a.is_empty() || b.is_empty() {
        return Err(GeoError::Domain("chamfer distance of an empty pointcloud".into()));
    }
    let nearest_in_b = nearest_neighbors(a.points(), b.points());
    let nearest_in_a = nearest_neighbors(b.points(), a.points());
    let forward: f64 = a
        .points()
        .iter()
        .zip(&nearest_in_b)
        .map(|(&p, &j)| (p - b.points()[j]).norm_squared())
        .sum::<f64>()
        / a.len() as f64;
    let backward: f64 = b
        .points()
        .iter()
        .zip(&nearest_in_a)
        .map(|(&p, &j)| (p - a.points()[j]).norm_squared())
        .sum::<f64>()
        / b.len() as f64;
    Ok(ChamferResult {
        value: forward + backward,
        nearest_in_b,
        nearest_in_a,
    })
}

/// Gradients of the Chamfer distance with respect to both point sets,
/// holding the argmin assignments fixed.
pub fn chamfer_distance_vjp(
    a: &PointCloud,
    b: &PointCloud,
    result: &ChamferResult,
    upstream: f64,
) -> (Vec<Vec3>, Vec<Vec3>) {
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let mut grad_a = vec![Vec3::ZERO; a.len()];
    let mut grad_b = vec![Vec3::ZERO; b.len()];
    for (i, &j) in result.nearest_in_b.iter().enumerate() {
        let d = (a.points()[i] - b.points()[j]) * (2.0 * upstream / na);
        grad_a[i] += d;
        grad_b[j] -= d;
    }
    for (j, &i) in result.nearest_in_a.iter().enumerate() {
        let d = (b.points()[j] - a.points()[i]) * (2.0 * upstream / nb);
        grad_b[j] += d;
        grad_a[i] -= d;
    }
    (grad_a, grad_b)
}

/// Exact nearest neighbor in `targets` for every query; ties go to the
/// lowest index on both paths.
pub fn nearest_neighbors(queries: &[Vec3], targets: &[Vec3]) -> Vec<usize> {
    if queries.len().max(targets.len()) <= BRUTE_FORCE_LIMIT {
        queries
            .par_iter()
            .map(|&q| brute_force_nearest(q, targets))
            .collect()
    } else {
        let grid = HashGrid::build(targets);
        queries.par_iter().map(|&q| grid.nearest(q, targets)).collect()
    }
}

fn brute_force_nearest(q: Vec3, targets: &[Vec3]) -> usize {
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for (j, &t) in targets.iter().enumerate() {
        let d2 = (q - t).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best = j;
        }
    }
    best
}

/// Uniform hash grid over the target points. Cell size comes from a median
/// nearest-neighbor estimate on a small subsample; lookups expand rings of
/// cells until the remaining cells cannot beat the best distance, so the
/// result is exact.
struct HashGrid {
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
    cell_size: f64,
}

impl HashGrid {
    fn build(targets: &[Vec3]) -> HashGrid {
        let cell_size = estimate_cell_size(targets);
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in targets.iter().enumerate() {
            cells.entry(Self::key(p, cell_size)).or_default().push(i);
        }
        HashGrid { cells, cell_size }
    }

    #[inline]
    fn key(p: Vec3, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    fn nearest(&self, q: Vec3, targets: &[Vec3]) -> usize {
        // Ring expansion degenerates when the query is many cells away from
        // the data (e.g. far-apart clusters); past this many cell probes,
        // plain brute force is cheaper and equally exact.
        const PROBE_BUDGET: usize = 4096;
        let center = Self::key(q, self.cell_size);
        let mut best = usize::MAX;
        let mut best_d2 = f64::INFINITY;
        let mut probes = 0usize;
        let mut ring = 0i64;
        loop {
            // Cells not yet scanned sit at Chebyshev distance >= ring from
            // the center cell, so their points are >= (ring - 1) * cell_size
            // away.
            if best < usize::MAX && ring >= 1 {
                let safe = (ring - 1) as f64 * self.cell_size;
                if best_d2 <= safe * safe {
                    return best;
                }
            }
            for dz in -ring..=ring {
                for dy in -ring..=ring {
                    for dx in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        probes += 1;
                        if let Some(ids) =
                            self.cells.get(&(center.0 + dx, center.1 + dy, center.2 + dz))
                        {
                            for &j in ids {
                                let d2 = (q - targets[j]).norm_squared();
                                if d2 < best_d2 || (d2 == best_d2 && j < best) {
                                    best_d2 = d2;
                                    best = j;
                                }
                            }
                        }
                    }
                }
            }
            if probes > PROBE_BUDGET {
                return brute_force_nearest(q, targets);
            }
            ring += 1;
        }
    }
}

/// Median nearest-neighbor distance over a deterministic subsample of at
/// most 100 points.
fn estimate_cell_size(targets: &[Vec3]) -> f64 {
    let n = targets.len().min(100);
    let stride = (targets.len() / n).max(1);
    let sample: Vec<Vec3> = targets.iter().step_by(stride).take(n).copied().collect();
    let mut dists: Vec<f64> = sample
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            sample
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite() && *d > 0.0)
        .collect();
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[dists.len() / 2]
}
