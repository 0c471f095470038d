//! Bounding volume hierarchy over mesh triangles.
//!
//! Median-split construction over the longest box axis, leaf size <= 4.
//! Simple and deterministic; queries are branch-and-bound and exact.

use crate::error::{GeoError, Result};
use crate::math::{Aabb, Vec3};
use crate::mesh::TriangleMesh;

use super::triangle::{closest_point_on_triangle, ray_triangle_intersect};

const LEAF_SIZE: usize = 4;
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: `(first, count)` into `triangle_order`. Internal: `count == 0`,
    /// the left child immediately follows this node, and `first` holds the
    /// right child index.
    first: usize,
    count: usize,
}

/// BVH over the faces of one mesh. Holds a copy of the triangle geometry so
/// queries need no access to the source mesh.
#[derive(Debug, Clone)]
pub struct TriangleBvh {
    nodes: Vec<Node>,
    /// Permutation of face indices; leaves reference contiguous ranges.
    triangle_order: Vec<usize>,
    triangles: Vec<[Vec3; 3]>,
    depth: usize,
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestHit {
    pub distance: f64,
    pub face: usize,
    pub point: Vec3,
}

/// One ray-mesh intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub face: usize,
    pub edge_grazing: bool,
}

impl TriangleBvh {
    pub fn build(mesh: &TriangleMesh) -> Result<TriangleBvh> {
        if mesh.num_faces() == 0 {
            return Err(GeoError::Domain("cannot build a BVH over an empty mesh".into()));
        }
        let triangles: Vec<[Vec3; 3]> = (0..mesh.num_faces()).map(|f| mesh.triangle(f)).collect();
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| Aabb::from_points(t.iter().copied()))
            .collect();
        let centroids: Vec<Vec3> = triangles
            .iter()
            .map(|t| (t[0] + t[1] + t[2]) * (1.0 / 3.0))
            .collect();

        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len());
        let mut max_depth = 0;
        build_recursive(
            &mut nodes,
            &mut order,
            &boxes,
            &centroids,
            0,
            triangles.len(),
            1,
            &mut max_depth,
        );
        debug_assert!(max_depth <= MAX_DEPTH);
        Ok(TriangleBvh {
            nodes,
            triangle_order: order,
            triangles,
            depth: max_depth,
        })
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root_bounds(&self) -> &Aabb {
        &self.nodes[0].bounds
    }

    /// Face indices visited by a full traversal; for structural tests.
    pub fn census(&self) -> Vec<usize> {
        let mut seen = Vec::with_capacity(self.triangles.len());
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.count > 0 {
                seen.extend_from_slice(&self.triangle_order[node.first..node.first + node.count]);
            } else {
                stack.push(ni + 1);
                stack.push(node.first);
            }
        }
        seen
    }

    /// True when every node's box contains its children's boxes.
    pub fn boxes_nest(&self) -> bool {
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.count > 0 {
                for &f in &self.triangle_order[node.first..node.first + node.count] {
                    let tb = Aabb::from_points(self.triangles[f].iter().copied());
                    if !node.bounds.contains_box(&tb) {
                        return false;
                    }
                }
            } else {
                for child in [ni + 1, node.first] {
                    if !node.bounds.contains_box(&self.nodes[child].bounds) {
                        return false;
                    }
                    stack.push(child);
                }
            }
        }
        true
    }

    /// Exact minimum-distance point on the mesh (branch-and-bound over the
    /// tree; no approximation). Ties resolve to the lowest face index.
    pub fn closest_point(&self, query: Vec3) -> ClosestHit {
        let mut best = ClosestHit {
            distance: f64::INFINITY,
            face: usize::MAX,
            point: Vec3::ZERO,
        };
        let mut best_d2 = f64::INFINITY;
        // Stack of (node, lower bound d^2), explored best-first-ish by
        // always descending into the nearer child first.
        let mut stack: Vec<(usize, f64)> = vec![(0, self.nodes[0].bounds.distance_squared(query))];
        while let Some((ni, bound)) = stack.pop() {
            if bound > best_d2 {
                continue;
            }
            let node = &self.nodes[ni];
            if node.count > 0 {
                for &f in &self.triangle_order[node.first..node.first + node.count] {
                    let [a, b, c] = self.triangles[f];
                    let p = closest_point_on_triangle(query, a, b, c);
                    let d2 = (p - query).norm_squared();
                    if d2 < best_d2 || (d2 == best_d2 && f < best.face) {
                        best_d2 = d2;
                        best = ClosestHit {
                            distance: 0.0,
                            face: f,
                            point: p,
                        };
                    }
                }
            } else {
                let l = ni + 1;
                let r = node.first;
                let dl = self.nodes[l].bounds.distance_squared(query);
                let dr = self.nodes[r].bounds.distance_squared(query);
                // Push the farther child first so the nearer pops first.
                if dl <= dr {
                    if dr <= best_d2 {
                        stack.push((r, dr));
                    }
                    if dl <= best_d2 {
                        stack.push((l, dl));
                    }
                } else {
                    if dl <= best_d2 {
                        stack.push((l, dl));
                    }
                    if dr <= best_d2 {
                        stack.push((r, dr));
                    }
                }
            }
        }
        best.distance = best_d2.sqrt();
        best
    }

    /// All intersections with `t > RAY_T_EPSILON`, sorted ascending by `t`
    /// (face index breaks ties).
    pub fn ray_intersections(&self, origin: Vec3, direction: Vec3) -> Vec<RayHit> {
        assert!(direction.norm() > 0.0, "ray direction must be non-zero");
        let inv_dir = Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut hits = Vec::new();
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !node.bounds.intersects_ray(origin, inv_dir, 0.0, f64::INFINITY) {
                continue;
            }
            if node.count > 0 {
                for &f in &self.triangle_order[node.first..node.first + node.count] {
                    let [a, b, c] = self.triangles[f];
                    if let Some(h) = ray_triangle_intersect(origin, direction, a, b, c) {
                        hits.push(RayHit {
                            t: h.t,
                            face: f,
                            edge_grazing: h.edge_grazing,
                        });
                    }
                }
            } else {
                stack.push(ni + 1);
                stack.push(node.first);
            }
        }
        hits.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap().then(x.face.cmp(&y.face)));
        hits
    }
}

#[allow(clippy::too_many_arguments)]
fn build_recursive(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    boxes: &[Aabb],
    centroids: &[Vec3],
    first: usize,
    count: usize,
    depth: usize,
    max_depth: &mut usize,
) -> usize {
    *max_depth = (*max_depth).max(depth);
    let mut bounds = Aabb::empty();
    for &f in &order[first..first + count] {
        bounds.merge(&boxes[f]);
    }
    let node_index = nodes.len();
    nodes.push(Node {
        bounds,
        first,
        count,
    });
    if count <= LEAF_SIZE || depth >= MAX_DEPTH {
        return node_index;
    }

    let axis = bounds.longest_axis();
    let mid = first + count / 2;
    // Median split by centroid along the longest axis; face index breaks
    // ties so the build is deterministic.
    order[first..first + count].select_nth_unstable_by(count / 2, |&a, &b| {
        centroids[a][axis]
            .partial_cmp(&centroids[b][axis])
            .unwrap()
            .then(a.cmp(&b))
    });

    let left = build_recursive(nodes, order, boxes, centroids, first, mid - first, depth + 1, max_depth);
    debug_assert_eq!(left, node_index + 1);
    let right = build_recursive(
        nodes,
        order,
        boxes,
        centroids,
        mid,
        first + count - mid,
        depth + 1,
        max_depth,
    );
    nodes[node_index].first = right;
    nodes[node_index].count = 0;
    node_index
}
