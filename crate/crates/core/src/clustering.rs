//! Type B reconstruction: iterative mean clustering followed by the envelope
//! of each cluster.
//!
//! Clustering is plain Lloyd k-means with k-means++ seeding. Each further
//! layer replaces the rows by the previous layer's centers and clusters again.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::envelope::{envelope_stats, TrimMode};
use crate::error::{Error, Result};
use crate::seed;
use crate::segment::{Label, SubjectSegment, TransformedDataset};

/// Euclidean distance.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(libm::sqrt(sq_dist(a, b)))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
    /// Independent seedings; the lowest-SSE run wins.
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-9,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centers: Vec<Vec<f64>>,
    /// Cluster index of each input row.
    pub assignments: Vec<usize>,
    pub sse: f64,
    pub iterations: usize,
    /// SSE after seeding and after every Lloyd iteration.
    pub sse_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn members<'a>(&self, rows: &'a [Vec<f64>], k: usize) -> Vec<&'a Vec<f64>> {
        rows.iter()
            .zip(&self.assignments)
            .filter(|(_, &a)| a == k)
            .map(|(r, _)| r)
            .collect()
    }
}

/// Sum of squared distances of rows to their assigned centers.
pub fn sse(rows: &[Vec<f64>], centers: &[Vec<f64>], assignments: &[usize]) -> f64 {
    rows.iter()
        .zip(assignments)
        .map(|(r, &a)| sq_dist(r, &centers[a]))
        .sum()
}

pub fn kmeans(rows: &[Vec<f64>], q: usize, seed: u64) -> Result<ClusterModel> {
    kmeans_with(rows, q, seed, &KMeansOptions::default())
}

pub fn kmeans_with(rows: &[Vec<f64>], q: usize, seed: u64, opts: &KMeansOptions) -> Result<ClusterModel> {
    if q == 0 || q > rows.len() {
        return Err(Error::InvalidClusterCount { q, rows: rows.len() });
    }
    let n = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let mut best: Option<ClusterModel> = None;
    for restart in 0..opts.restarts.max(1) {
        let model = lloyd(rows, q, seed::derive(seed, restart as u64), opts);
        if best.as_ref().is_none_or(|b| model.sse < b.sse) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_centers(rows: &[Vec<f64>], q: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    let mut chosen = vec![false; rows.len()];
    let first = rng.random_range(0..rows.len());
    chosen[first] = true;
    let mut centers = vec![rows[first].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < q {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total implies a candidate")
        } else {
            // every row coincides with a center: take any unused row
            let free: Vec<usize> = (0..rows.len()).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(rows[pick].clone());
        let c = centers.last().expect("just pushed");
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, c));
        }
    }
    centers
}

fn assign(rows: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<usize> {
    rows.iter()
        .map(|r| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, c) in centers.iter().enumerate() {
                let d = sq_dist(r, c);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fills empty clusters by seizing the row farthest from its own center
/// (among clusters that can spare one). Never increases SSE.
fn repair_empty(rows: &[Vec<f64>], centers: &mut [Vec<f64>], assignments: &mut [usize]) {
    let q = centers.len();
    loop {
        let mut sizes = vec![0usize; q];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, r) in rows.iter().enumerate() {
            let a = assignments[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = sq_dist(r, &centers[a]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("an empty cluster implies a cluster with two rows");
        assignments[i] = empty;
        centers[empty] = rows[i].clone();
    }
}

fn means(rows: &[Vec<f64>], assignments: &[usize], q: usize) -> Vec<Vec<f64>> {
    let n = rows[0].len();
    let mut sums = vec![vec![0.0; n]; q];
    let mut counts = vec![0usize; q];
    for (r, &a) in rows.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(r) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        let c = c as f64;
        for v in s.iter_mut() {
            *v /= c;
        }
    }
    sums
}

fn lloyd(rows: &[Vec<f64>], q: usize, seed: u64, opts: &KMeansOptions) -> ClusterModel {
    let mut centers = seed_centers(rows, q, seed);
    let mut assignments = assign(rows, &centers);
    repair_empty(rows, &mut centers, &mut assignments);
    let mut trace = vec![sse(rows, &centers, &assignments)];
    let mut iterations = 0;
    let mut stable = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let updated = means(rows, &assignments, q);
        let movement = centers
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0, f64::max);
        centers = updated;
        let mut next = assign(rows, &centers);
        repair_empty(rows, &mut centers, &mut next);
        trace.push(sse(rows, &centers, &next));
        stable = next == assignments;
        assignments = next;
        if stable || libm::sqrt(movement) < opts.tol {
            break;
        }
    }
    if !stable {
        centers = means(rows, &assignments, q);
    }
    let sse = sse(rows, &centers, &assignments);
    ClusterModel {
        centers,
        assignments,
        sse,
        iterations,
        sse_trace: trace,
    }
}

/// Rows of one subject split into `Q` clusters at the final clustering layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredSegment {
    pub subject_id: String,
    pub label: Label,
    pub clusters: Vec<Vec<Vec<f64>>>,
}

/// Clusters `rows` into `q` groups, `depth` layers deep. Layer `l + 1` clusters
/// the centers found at layer `l`.
pub fn iterative_mean_clustering(
    rows: &[Vec<f64>],
    q: usize,
    depth: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if depth == 0 {
        return Err(Error::InvalidDepth(depth));
    }
    if q == 0 {
        return Err(Error::InvalidClusterCount { q, rows: rows.len() });
    }
    let mut layer: Vec<Vec<f64>> = rows.to_vec();
    for l in 1..=depth {
        if q > layer.len() {
            return Err(Error::LayerTooSmall {
                q,
                rows: layer.len(),
                layer: l,
            });
        }
        let model = kmeans_with(&layer, q, seed::derive(seed, l as u64), opts)?;
        if l == depth {
            let mut clusters = vec![Vec::new(); q];
            for (r, &a) in layer.into_iter().zip(&model.assignments) {
                clusters[a].push(r);
            }
            return Ok(clusters);
        }
        layer = model.centers;
    }
    unreachable!("depth >= 1")
}

pub fn cluster_segment(
    segment: &SubjectSegment,
    params: &ClusterParams,
    seed: u64,
) -> Result<ClusteredSegment> {
    if segment.rows.is_empty() {
        return Err(Error::EmptySegment(segment.subject_id.clone()));
    }
    let clusters = iterative_mean_clustering(
        &segment.rows,
        params.q,
        params.depth,
        seed::derive_str(seed, &segment.subject_id),
        &params.kmeans,
    )?;
    Ok(ClusteredSegment {
        subject_id: segment.subject_id.clone(),
        label: segment.label,
        clusters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterParams {
    pub q: usize,
    pub depth: usize,
    pub kmeans: KMeansOptions,
}

impl ClusterParams {
    pub fn new(q: usize, depth: usize) -> Self {
        Self {
            q,
            depth,
            kmeans: KMeansOptions::default(),
        }
    }
}

/// Envelope of each cluster, concatenated: `6 * Q` rows for one subject.
pub fn envelope_clusters(clustered: &ClusteredSegment, trim: TrimMode) -> Result<SubjectSegment> {
    let mut rows = Vec::with_capacity(6 * clustered.clusters.len());
    for c in &clustered.clusters {
        rows.extend(envelope_stats(c, trim)?.into_rows());
    }
    Ok(SubjectSegment {
        subject_id: clustered.subject_id.clone(),
        label: clustered.label,
        rows,
    })
}

/// Builds E_s and the clustered dataset Y that Type C consumes.
/// Each subject's clustering seed is derived from `seed` and its id.
pub fn transform_type_b(
    segments: &[SubjectSegment],
    params: &ClusterParams,
    trim: TrimMode,
    seed: u64,
) -> Result<(TransformedDataset, Vec<ClusteredSegment>)> {
    let mut es = Vec::with_capacity(segments.len());
    let mut ys = Vec::with_capacity(segments.len());
    for s in segments {
        let y = cluster_segment(s, params, seed)?;
        es.push(envelope_clusters(&y, trim)?);
        ys.push(y);
    }
    Ok((TransformedDataset { segments: es }, ys))
}
