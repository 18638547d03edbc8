use super::Embedding;
use crate::error::{Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions { restarts: 10, max_iter: 300 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after every Lloyd iteration of the winning restart.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means with default options (10 restarts, 300 iterations).
pub fn kmeans(e: &Embedding, k: usize, seed: RngSeed) -> Result<ClusterAssignment> {
    kmeans_with(&e.coords, k, seed, KMeansOptions::default())
}

/// Lloyd's algorithm on `points`, best of `opts.restarts` runs by inertia.
///
/// Restart `r` seeds its first center uniformly with stream `seed.child(r)`;
/// each further center is the point farthest from the chosen ones (lowest
/// index on ties). Empty clusters keep their previous center.
pub fn kmeans_with(points: &[Vec<f64>], k: usize, seed: RngSeed, opts: KMeansOptions) -> Result<ClusterAssignment> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("need 1 <= k <= n = {n}, got {k}")));
    }
    if opts.restarts == 0 || opts.max_iter == 0 {
        return Err(Error::param("restarts", "restarts and iteration cap must be positive"));
    }
    let mut best: Option<ClusterAssignment> = None;
    for r in 0..opts.restarts {
        let run = lloyd(points, farthest_point_init(points, k, seed.child(r as u64)), opts.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn farthest_point_init(points: &[Vec<f64>], k: usize, seed: RngSeed) -> Vec<Vec<f64>> {
    let mut rng = seed.stream();
    let first = rng.index(points.len());
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let mut pick = 0;
        for (i, &d) in nearest.iter().enumerate() {
            if d > nearest[pick] {
                pick = i;
            }
        }
        centers.push(points[pick].clone());
        let c = centers.last().unwrap();
        for (nd, p) in nearest.iter_mut().zip(points) {
            *nd = nd.min(sq_dist(p, c));
        }
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (p, label) in points.iter().zip(labels.iter_mut()) {
        let mut best = (0usize, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        inertia += best.1;
    }
    inertia
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> ClusterAssignment {
    let dim = points[0].len();
    let k = centers.len();
    let mut labels = vec![usize::MAX; points.len()];
    let mut next = vec![0; points.len()];
    let mut trace = Vec::new();
    let mut inertia = assign(points, &centers, &mut next);
    for _ in 0..max_iter {
        if next == labels {
            break;
        }
        labels.copy_from_slice(&next);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        inertia = assign(points, &centers, &mut next);
        trace.push(inertia);
    }
    ClusterAssignment { labels: next, centers, inertia, inertia_trace: trace }
}
