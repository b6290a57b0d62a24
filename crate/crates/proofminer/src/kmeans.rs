//! Lloyd k-means with deterministic, content-keyed behaviour.
//!
//! Centroids are seeded k-means++ style from a ChaCha stream cipher
//! generator, so a `(vectors, k, seed)` triple always produces the same
//! model. Every data-dependent choice (seeding walks, mean reduction
//! order, tie breaks) is keyed to vector *content* rather than input
//! position, which makes the result equivariant under permutations of
//! distinct input vectors. Cluster ids are canonicalized by centroid
//! order after convergence.
//!
//! The number of clusters comes from the granularity heuristic
//! `k = floor(n / (10 - g))` with `g` between 1 (few large clusters) and
//! 5 (many small clusters), clamped to at least one cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KmeansError {
    #[error("granularity {0} out of range 1..=5")]
    GranularityRange(u8),
    #[error("cannot form {k} clusters from {n} vectors")]
    KTooLarge { k: usize, n: usize },
    #[error("vector of length {got} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Cluster count for `n` objects at granularity `g`.
pub fn choose_k(n_objects: usize, g: u8) -> Result<usize, KmeansError> {
    if !(1..=5).contains(&g) {
        return Err(KmeansError::GranularityRange(g));
    }
    if n_objects == 0 {
        return Ok(0);
    }
    Ok((n_objects / (10 - g as usize)).max(1))
}

/// A fitted clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    /// Vector length.
    pub dims: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster id per input vector, 0-based.
    pub assignment: Vec<usize>,
    /// Closeness of each vector to its centroid, in `[0, 1]`.
    pub proximities: Vec<f64>,
    /// Largest member distance per cluster; the proximity scale.
    pub radii: Vec<f64>,
}

impl ClusterModel {
    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// Members of a cluster in input order.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance where the shorter vector is zero-padded; used when
/// a query vector outgrows the model's grid.
pub fn dist_padded(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut s = 0.0;
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        s += (x - y) * (x - y);
    }
    s.sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Indices sorted by vector content, then input position.
fn content_order(vectors: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&vectors[a], &vectors[b]).then(a.cmp(&b)));
    order
}

/// Nearest centroid by Euclidean distance, ties to the lower cluster id.
pub fn nearest_cluster(v: &[f64], model: &ClusterModel) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in model.centroids.iter().enumerate() {
        let d = dist_padded(v, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Closeness of `v` to the given cluster's centroid:
/// `1 - d / (1 + radius)`, clamped to `[0, 1]`, where `radius` is the
/// largest member distance of the cluster. A vector on the centroid
/// scores 1; larger distances score lower.
pub fn proximity(v: &[f64], model: &ClusterModel, cluster: usize) -> f64 {
    let d = dist_padded(v, &model.centroids[cluster]);
    (1.0 - d / (1.0 + model.radii[cluster])).clamp(0.0, 1.0)
}

const MAX_ITERS: usize = 300;

/// Run k-means. See the module docs for determinism guarantees.
pub fn kmeans(vectors: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterModel, KmeansError> {
    kmeans_with_history(vectors, k, seed).map(|(model, _)| model)
}

/// Like [`kmeans`], also returning the within-cluster sum of squares
/// after each iteration (non-increasing by construction).
pub fn kmeans_with_history(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<(ClusterModel, Vec<f64>), KmeansError> {
    let n = vectors.len();
    if n == 0 && k == 0 {
        return Ok((
            ClusterModel {
                k: 0,
                dims: 0,
                centroids: vec![],
                assignment: vec![],
                proximities: vec![],
                radii: vec![],
            },
            vec![],
        ));
    }
    if k == 0 || k > n {
        return Err(KmeansError::KTooLarge { k, n });
    }
    let dims = vectors[0].len();
    for v in vectors {
        if v.len() != dims {
            return Err(KmeansError::DimensionMismatch { expected: dims, got: v.len() });
        }
    }

    let order = content_order(vectors);
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    let mut centroids = seed_centroids(vectors, k, seed, &order);

    let mut assignment: Vec<usize> = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERS {
        let mut assign: Vec<usize> = vectors
            .iter()
            .map(|v| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (j, c) in centroids.iter().enumerate() {
                    let d = dist2(v, c);
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best
            })
            .collect();

        // an empty cluster captures the farthest point of any multi-member
        // cluster, preferring the content-smallest among ties
        for j in 0..k {
            if assign.contains(&j) {
                continue;
            }
            let mut counts = vec![0usize; k];
            for &c in &assign {
                counts[c] += 1;
            }
            let mut far: Option<usize> = None;
            let mut far_d = -1.0;
            for &i in &order {
                if counts[assign[i]] <= 1 {
                    continue;
                }
                let d = dist2(&vectors[i], &centroids[assign[i]]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                assign[i] = j;
            }
        }

        for (j, centroid) in centroids.iter_mut().enumerate() {
            let mut members: Vec<usize> = (0..n).filter(|&i| assign[i] == j).collect();
            if members.is_empty() {
                continue;
            }
            members.sort_by_key(|&i| rank[i]);
            let mut mean = vec![0.0; dims];
            for &i in &members {
                for (m, x) in mean.iter_mut().zip(&vectors[i]) {
                    *m += x;
                }
            }
            let count = members.len() as f64;
            for m in &mut mean {
                *m /= count;
            }
            *centroid = mean;
        }

        let wcss: f64 = order.iter().map(|&i| dist2(&vectors[i], &centroids[assign[i]])).sum();
        history.push(wcss);

        let converged = assign == assignment;
        assignment = assign;
        if converged {
            break;
        }
    }

    // canonical cluster numbering: order clusters by centroid content so
    // equal inputs get equal ids regardless of seeding history
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_by(|&a, &b| lex_cmp(&centroids[a], &centroids[b]).then(a.cmp(&b)));
    let mut new_of_old = vec![0usize; k];
    for (new_id, &old_id) in perm.iter().enumerate() {
        new_of_old[old_id] = new_id;
    }
    let centroids: Vec<Vec<f64>> = perm.iter().map(|&old| centroids[old].clone()).collect();
    let assignment: Vec<usize> = assignment.iter().map(|&c| new_of_old[c]).collect();

    let mut radii = vec![0.0f64; k];
    for (i, &c) in assignment.iter().enumerate() {
        let d = dist_padded(&vectors[i], &centroids[c]);
        if d > radii[c] {
            radii[c] = d;
        }
    }
    let model = ClusterModel { k, dims, centroids, assignment, proximities: vec![], radii };
    let proximities: Vec<f64> =
        (0..n).map(|i| proximity(&vectors[i], &model, model.assignment[i])).collect();
    let model = ClusterModel { proximities, ..model };
    Ok((model, history))
}

/// k-means++ seeding: the first centroid is a uniformly random point, the
/// rest are drawn with probability proportional to squared distance from
/// the nearest chosen centroid. All draws walk the content order.
fn seed_centroids(vectors: &[Vec<f64>], k: usize, seed: u64, order: &[usize]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = vec![order[rng.random_range(0..n)]];
    while chosen.len() < k {
        let d2: Vec<f64> = vectors
            .iter()
            .map(|v| chosen.iter().map(|&c| dist2(v, &vectors[c])).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = order.iter().map(|&i| d2[i]).sum();
        let next = if total > 0.0 {
            let x = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = None;
            for &i in order {
                cum += d2[i];
                if cum > x {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| {
                *order.iter().rev().find(|&&i| d2[i] > 0.0).expect("total > 0")
            })
        } else {
            // all remaining mass is on duplicates; take the first unchosen
            *order.iter().find(|&&i| !chosen.contains(&i)).expect("k <= n")
        };
        chosen.push(next);
    }
    chosen.into_iter().map(|i| vectors[i].clone()).collect()
}
