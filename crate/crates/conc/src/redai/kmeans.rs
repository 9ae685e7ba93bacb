//! Lloyd's k-means with k-means++ seeding on 2D points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Partition `points` into at most `k` clusters. Returns member indices per
/// cluster; every point is assigned to its nearest centroid. `k ≥ |points|`
/// degenerates into singleton clusters.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64, max_iter: usize) -> Vec<Vec<usize>> {
    assert!(k >= 1, "k must be at least 1");
    if points.is_empty() {
        return Vec::new();
    }
    if k >= points.len() {
        return (0..points.len()).map(|i| vec![i]).collect();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++: spread the initial centroids proportionally to squared
    // distance from the ones already chosen.
    let mut centroids: Vec<[f64; 2]> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    while centroids.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| centroids.iter().map(|c| dist2(*p, *c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining points coincide with a centroid; pick uniformly.
            rng.gen_range(0..points.len())
        } else {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if u < *w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        };
        centroids.push(points[next]);
    }

    let mut assign = vec![0usize; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| {
                    dist2(*p, centroids[a])
                        .partial_cmp(&dist2(*p, centroids[b]))
                        .expect("finite distances")
                })
                .expect("k >= 1");
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }

        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            sums[assign[i]][0] += p[0];
            sums[assign[i]][1] += p[1];
            counts[assign[i]] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster on the point farthest from its
                // current centroid.
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist2(points[a], centroids[assign[a]])
                            .partial_cmp(&dist2(points[b], centroids[assign[b]]))
                            .expect("finite distances")
                    })
                    .expect("non-empty points");
                centroids[c] = points[far];
                changed = true;
            } else {
                centroids[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
        if !changed {
            break;
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in assign.iter().enumerate() {
        clusters[c].push(i);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// Sum of squared distances from each point to its cluster mean.
pub fn inertia(points: &[[f64; 2]], clusters: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    for members in clusters {
        if members.is_empty() {
            continue;
        }
        let mut c = [0.0, 0.0];
        for &i in members {
            c[0] += points[i][0];
            c[1] += points[i][1];
        }
        c[0] /= members.len() as f64;
        c[1] /= members.len() as f64;
        for &i in members {
            total += dist2(points[i], c);
        }
    }
    total
}
