use serde::{Deserialize, Serialize};

use crate::error::AnalyticsError;

pub const NOISE: i64 = -1;

/// Cluster id per point, `-1` for noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabels {
    pub labels: Vec<i64>,
}

impl ClusterLabels {
    pub fn noise(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == NOISE)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn neighbours(points: &[Vec<f64>], i: usize, eps2: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&j| dist2(&points[i], &points[j]) <= eps2)
        .collect()
}

/// Density-based clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Clusters are grown from the lowest
/// unvisited core point, so a border point reachable from two clusters joins
/// the one seeded first.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Result<ClusterLabels, AnalyticsError> {
    if !(eps > 0.0) || min_pts < 1 {
        return Err(AnalyticsError::InvalidParameter(format!("eps = {eps}, min_pts = {min_pts}")));
    }
    const UNSET: i64 = i64::MIN;
    let eps2 = eps * eps;
    let n = points.len();
    let hoods: Vec<Vec<usize>> = (0..n).map(|i| neighbours(points, i, eps2)).collect();
    let core: Vec<bool> = hoods.iter().map(|h| h.len() >= min_pts).collect();
    let mut labels = vec![UNSET; n];
    let mut next = 0i64;
    for seed in 0..n {
        if labels[seed] != UNSET || !core[seed] {
            continue;
        }
        labels[seed] = next;
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for &q in &hoods[p] {
                if labels[q] == UNSET {
                    labels[q] = next;
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        next += 1;
    }
    for l in labels.iter_mut() {
        if *l == UNSET {
            *l = NOISE;
        }
    }
    Ok(ClusterLabels { labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Union-find over core points; components are numbered by their lowest
    /// core index and a border point takes the smallest id among its core
    /// neighbours.
    fn oracle(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<i64> {
        let n = points.len();
        let near = |a: usize, b: usize| {
            let d: f64 = points[a].iter().zip(&points[b]).map(|(x, y)| (x - y).powi(2)).sum();
            d.sqrt() <= eps
        };
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for i in 0..n {
            for j in 0..n {
                if core[i] && core[j] && near(i, j) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        // Components numbered by their lowest core index.
        let mut id_of_root = std::collections::BTreeMap::new();
        for i in 0..n {
            if core[i] {
                let r = find(&mut parent, i);
                let next = id_of_root.len() as i64;
                id_of_root.entry(r).or_insert(next);
            }
        }
        (0..n)
            .map(|i| {
                if core[i] {
                    id_of_root[&find(&mut parent, i)]
                } else {
                    (0..n)
                        .filter(|&j| core[j] && near(i, j))
                        .map(|j| id_of_root[&find(&mut parent, j)])
                        .min()
                        .unwrap_or(NOISE)
                }
            })
            .collect()
    }

    #[test]
    fn far_point_is_noise() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(vec![0.0 + i as f64 * 0.01, 0.0]);
            pts.push(vec![10.0 + i as f64 * 0.01, 10.0]);
        }
        pts.push(vec![100.0, -100.0]);
        let l = dbscan(&pts, 0.5, 3).unwrap();
        assert_eq!(l.noise(), vec![10]);
        assert_eq!(l.cluster_count(), 2);
    }

    #[test]
    fn everything_in_one_ball() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.1]).collect();
        let l = dbscan(&pts, 1.0, 6).unwrap();
        assert_eq!(l.labels, vec![0; 6]);
        assert!(dbscan(&pts, 0.0, 2).is_err());
        assert!(dbscan(&pts, 1.0, 0).is_err());
    }

    #[test]
    fn random_points_match_reachability_oracle() {
        for seed in 0..25 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0]).collect();
            let got = dbscan(&pts, 0.8, 3).unwrap();
            assert_eq!(got.labels, oracle(&pts, 0.8, 3), "seed {seed}");
        }
    }

    #[test]
    fn duplicate_of_dense_point_is_not_noise() {
        let mut pts: Vec<Vec<f64>> = (0..8).map(|i| vec![(i as f64) * 0.05, 0.0]).collect();
        pts.push(vec![9.0, 9.0]);
        let before = dbscan(&pts, 0.3, 4).unwrap();
        pts.push(pts[3].clone());
        let after = dbscan(&pts, 0.3, 4).unwrap();
        assert_ne!(after.labels[9], NOISE);
        for i in 0..9 {
            if before.labels[i] != NOISE {
                assert_ne!(after.labels[i], NOISE);
            }
        }
    }

    proptest! {
        #[test]
        fn noise_set_is_order_independent(
            raw in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..40),
            rotate in 0usize..40,
        ) {
            let pts: Vec<Vec<f64>> = raw.iter().map(|(x, y)| vec![*x, *y]).collect();
            let n = pts.len();
            let shift = rotate % n;
            let perm: Vec<usize> = (0..n).rev().map(|i| (i + shift) % n).collect();
            let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
            let a = dbscan(&pts, 0.7, 3).unwrap();
            let b = dbscan(&shuffled, 0.7, 3).unwrap();
            let mut na: Vec<usize> = a.noise();
            let mut nb: Vec<usize> = b.noise().into_iter().map(|k| perm[k]).collect();
            na.sort();
            nb.sort();
            prop_assert_eq!(na, nb);
            prop_assert_eq!(a.cluster_count(), b.cluster_count());
        }
    }
}
