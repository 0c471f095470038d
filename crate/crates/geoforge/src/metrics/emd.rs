//! Quadratic Earth-mover's distance approximation: an auction assignment
//! with epsilon scaling on the squared-distance cost matrix, returning the
//! matching together with a certified optimality gap of `n * eps_final`.

use crate::error::{GeoError, Result};
use crate::pointcloud::PointCloud;

/// A perfect matching between two equal-size point sets.
#[derive(Debug, Clone)]
pub struct MatchingResult {
    /// `assignment[i]` is the index in B matched to point i of A.
    pub assignment: Vec<usize>,
    /// Total squared distance over the matching.
    pub cost: f64,
    /// The matching cost exceeds the optimum by at most this much.
    pub gap_bound: f64,
    /// The epsilon the final auction round ran at.
    pub eps_final: f64,
}

/// Run the epsilon-scaled auction down to `epsilon`.
///
/// Deterministic: bidding follows a FIFO queue, ties go to the lowest
/// object index.
pub fn emd_approx(a: &PointCloud, b: &PointCloud, epsilon: f64) -> Result<MatchingResult> {
    if a.is_empty() {
        return Err(GeoError::Domain("EMD of empty pointclouds".into()));
    }
    if a.len() != b.len() {
        return Err(GeoError::Domain(format!(
            "EMD requires equal sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(GeoError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }

    let n = a.len();
    // Dense cost matrix; the auction maximizes value = -cost.
    let mut costs = vec![0.0; n * n];
    let mut max_cost: f64 = 0.0;
    for (i, &pa) in a.points().iter().enumerate() {
        for (j, &pb) in b.points().iter().enumerate() {
            let c = (pa - pb).norm_squared();
            costs[i * n + j] = c;
            max_cost = max_cost.max(c);
        }
    }

    // Epsilon schedule: from the cost scale down to `epsilon` by quarters,
    // ending at exactly `epsilon`. Prices persist across rounds.
    let mut schedule = Vec::new();
    let mut eps = (max_cost / 2.0).max(epsilon);
    while eps > epsilon {
        schedule.push(eps);
        eps /= 4.0;
    }
    schedule.push(epsilon);

    let mut prices = vec![0.0; n];
    let mut person_of_object = vec![usize::MAX; n];
    let mut object_of_person = vec![usize::MAX; n];

    for &eps in &schedule {
        person_of_object.iter_mut().for_each(|p| *p = usize::MAX);
        object_of_person.iter_mut().for_each(|o| *o = usize::MAX);
        let mut queue: std::collections::VecDeque<usize> = (0..n).collect();

        while let Some(person) = queue.pop_front() {
            // Best and second-best net value over objects.
            let row = &costs[person * n..(person + 1) * n];
            let mut best_j = 0;
            let mut best_v = f64::NEG_INFINITY;
            let mut second_v = f64::NEG_INFINITY;
            for (j, (&c, &p)) in row.iter().zip(prices.iter()).enumerate() {
                let v = -c - p;
                if v > best_v {
                    second_v = best_v;
                    best_v = v;
                    best_j = j;
                } else if v > second_v {
                    second_v = v;
                }
            }
            let increment = if second_v.is_finite() {
                best_v - second_v + eps
            } else {
                eps
            };
            prices[best_j] += increment;

            let displaced = person_of_object[best_j];
            person_of_object[best_j] = person;
            object_of_person[person] = best_j;
            if displaced != usize::MAX {
                object_of_person[displaced] = usize::MAX;
                queue.push_back(displaced);
            }
        }
    }

    let assignment = object_of_person;
    let cost: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * n + j])
        .sum();
    Ok(MatchingResult {
        assignment,
        cost,
        gap_bound: n as f64 * epsilon,
        eps_final: epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::rng::Rng;

    #[test]
    fn identical_clouds_match_identically() {
        let pts = vec![
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        let a = PointCloud::new(pts.clone()).unwrap();
        let b = PointCloud::new(pts).unwrap();
        let m = emd_approx(&a, &b, 1e-9).unwrap();
        assert_eq!(m.assignment, vec![0, 1, 2]);
        assert_eq!(m.cost, 0.0);
    }

    #[test]
    fn swapped_pair_finds_zero_cost() {
        let a = PointCloud::new(vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)]).unwrap();
        let b = PointCloud::new(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO]).unwrap();
        let m = emd_approx(&a, &b, 1e-9).unwrap();
        assert_eq!(m.assignment, vec![1, 0]);
        assert!(m.cost < 1e-12);
    }

    #[test]
    fn assignment_is_a_bijection() {
        let mut rng = Rng::new(12);
        let a = PointCloud::new(
            (0..32)
                .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
                .collect(),
        )
        .unwrap();
        let b = PointCloud::new(
            (0..32)
                .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
                .collect(),
        )
        .unwrap();
        let m = emd_approx(&a, &b, 1e-4).unwrap();
        let mut seen = vec![false; 32];
        for &j in &m.assignment {
            assert!(!seen[j], "object {j} assigned twice");
            seen[j] = true;
        }
        assert!((m.gap_bound - 32.0 * 1e-4).abs() < 1e-15);
    }

    #[test]
    fn deterministic_across_runs() {
        let mut rng = Rng::new(9);
        let pts_a: Vec<Vec3> = (0..20)
            .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
            .collect();
        let pts_b: Vec<Vec3> = (0..20)
            .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
            .collect();
        let a = PointCloud::new(pts_a).unwrap();
        let b = PointCloud::new(pts_b).unwrap();
        let m1 = emd_approx(&a, &b, 1e-5).unwrap();
        let m2 = emd_approx(&a, &b, 1e-5).unwrap();
        assert_eq!(m1.assignment, m2.assignment);
        assert_eq!(m1.cost, m2.cost);
    }

    #[test]
    fn size_mismatch_rejected() {
        let a = PointCloud::new(vec![Vec3::ZERO]).unwrap();
        let b = PointCloud::new(vec![Vec3::ZERO, Vec3::ONE]).unwrap();
        assert!(emd_approx(&a, &b, 1e-3).is_err());
        assert!(emd_approx(&a, &a, -1.0).is_err());
    }
}
