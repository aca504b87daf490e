//! Two-means clustering and the cluster-vs-label overlap score.

use crate::corpus::Label;
use crate::embedding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::parallel::par_collect;
use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Extra loss-improvement stop; 0 disables it and iteration runs until
    /// the assignment is stable or `max_iters` is hit.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 50,
            max_iters: 300,
            tol: 0.0,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Config("tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Clustering {
    /// Cluster id (0 or 1) per row.
    pub assignment: Vec<u8>,
    pub centroids: [Vec<f64>; 2],
    /// Within-cluster sum of squared distances for the final assignment.
    pub loss: f64,
    pub iterations: usize,
    /// Which restart produced the kept run.
    pub restart: usize,
}

fn row_dot_dense(row: &[(u32, f64)], dense: &[f64]) -> f64 {
    row.iter().map(|&(c, v)| v * dense[c as usize]).sum()
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// ||x - c||^2 via the expansion ||x||^2 - 2<x,c> + ||c||^2, clamped at 0
/// against rounding.
fn sq_dist(row: &[(u32, f64)], row_sq: f64, centroid: &[f64], centroid_sq: f64) -> f64 {
    (row_sq - 2.0 * row_dot_dense(row, centroid) + centroid_sq).max(0.0)
}

struct Run {
    assignment: Vec<u8>,
    loss: f64,
    iterations: usize,
}

fn centroids_of(x: &FeatureMatrix, assignment: &[u8]) -> Result<[Vec<f64>; 2]> {
    let mut sums = [vec![0.0; x.n_cols()], vec![0.0; x.n_cols()]];
    let mut counts = [0usize; 2];
    for (r, &a) in assignment.iter().enumerate() {
        counts[a as usize] += 1;
        let sum = &mut sums[a as usize];
        for &(c, v) in x.row(r) {
            sum[c as usize] += v;
        }
    }
    for cluster in 0..2 {
        if counts[cluster] == 0 {
            return Err(Error::EmptyCluster {
                cluster: cluster as u8,
            });
        }
        let inv = 1.0 / counts[cluster] as f64;
        for v in &mut sums[cluster] {
            *v *= inv;
        }
    }
    Ok(sums)
}

fn loss_of(x: &FeatureMatrix, row_sqs: &[f64], assignment: &[u8], centroids: &[Vec<f64>; 2]) -> f64 {
    let cent_sqs = [sq_norm(&centroids[0]), sq_norm(&centroids[1])];
    let mut loss = 0.0;
    for (r, &a) in assignment.iter().enumerate() {
        loss += sq_dist(x.row(r), row_sqs[r], &centroids[a as usize], cent_sqs[a as usize]);
    }
    loss
}

fn lloyd_run(
    x: &FeatureMatrix,
    row_sqs: &[f64],
    cfg: &KMeansConfig,
    restart: usize,
) -> Run {
    let n = x.n_rows();
    let mut rng = seed::rng_from(cfg.seed, &[seed::DOM_RESTART, restart as u64]);
    // Uniform draw over ordered pairs of rows with distinct vectors. The
    // caller guarantees at least two distinct rows exist; the scan is a
    // deterministic escape hatch against astronomically unlucky streaks.
    let (init_a, init_b) = {
        let mut pick = None;
        for _ in 0..100_000 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j && x.row(i) != x.row(j) {
                pick = Some((i, j));
                break;
            }
        }
        pick.unwrap_or_else(|| {
            let i = 0;
            let j = (1..n).find(|&j| x.row(j) != x.row(i)).expect("distinct row");
            (i, j)
        })
    };
    let mut centroids = [vec![0.0; x.n_cols()], vec![0.0; x.n_cols()]];
    for &(c, v) in x.row(init_a) {
        centroids[0][c as usize] = v;
    }
    for &(c, v) in x.row(init_b) {
        centroids[1][c as usize] = v;
    }
    let mut assignment: Vec<u8> = vec![0; n];
    let mut have_assignment = false;
    let mut iterations = 0usize;
    let mut prev_loss = f64::INFINITY;
    loop {
        let cent_sqs = [sq_norm(&centroids[0]), sq_norm(&centroids[1])];
        let mut next: Vec<u8> = Vec::with_capacity(n);
        let mut dists: Vec<f64> = Vec::with_capacity(n);
        let mut counts = [0usize; 2];
        for (r, &row_sq) in row_sqs.iter().enumerate() {
            let d0 = sq_dist(x.row(r), row_sq, &centroids[0], cent_sqs[0]);
            let d1 = sq_dist(x.row(r), row_sq, &centroids[1], cent_sqs[1]);
            // Ties go to cluster 0.
            let (a, d) = if d1 < d0 { (1u8, d1) } else { (0u8, d0) };
            next.push(a);
            dists.push(d);
            counts[a as usize] += 1;
        }
        for cluster in 0..2u8 {
            if counts[cluster as usize] == 0 {
                // Repair: hand the empty cluster the point farthest from
                // its current centroid, lowest index on ties.
                let mut far = 0usize;
                for r in 1..n {
                    if dists[r] > dists[far] {
                        far = r;
                    }
                }
                counts[next[far] as usize] -= 1;
                counts[cluster as usize] += 1;
                next[far] = cluster;
            }
        }
        if have_assignment && next == assignment {
            break;
        }
        assignment = next;
        have_assignment = true;
        centroids = centroids_of(x, &assignment).expect("both clusters populated");
        let loss = loss_of(x, row_sqs, &assignment, &centroids);
        debug_assert!(loss <= prev_loss + 1e-9 * prev_loss.max(1.0));
        iterations += 1;
        if iterations >= cfg.max_iters {
            break;
        }
        if cfg.tol > 0.0 && prev_loss.is_finite() && prev_loss - loss <= cfg.tol {
            break;
        }
        prev_loss = loss;
    }
    let centroids = centroids_of(x, &assignment).expect("both clusters populated");
    let loss = loss_of(x, row_sqs, &assignment, &centroids);
    Run {
        assignment,
        loss,
        iterations,
    }
}

/// Lloyd's algorithm with k = 2 over `cfg.restarts` independent random
/// initializations; keeps the run with the lowest loss, breaking exact
/// ties toward the earlier restart index.
pub fn kmeans_two(x: &FeatureMatrix, cfg: &KMeansConfig) -> Result<Clustering> {
    cfg.validate()?;
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { n });
    }
    if (1..n).all(|r| x.row(r) == x.row(0)) {
        return Err(Error::NoDistinctRows);
    }
    let row_sqs: Vec<f64> = (0..n).map(|r| x.row_sq_norm(r)).collect();
    let runs = par_collect(cfg.restarts, |r| lloyd_run(x, &row_sqs, cfg, r));
    let mut best = 0usize;
    for r in 1..runs.len() {
        if runs[r].loss < runs[best].loss {
            best = r;
        }
    }
    let run = &runs[best];
    let centroids = centroids_of(x, &run.assignment)?;
    Ok(Clustering {
        assignment: run.assignment.clone(),
        centroids,
        loss: run.loss,
        iterations: run.iterations,
        restart: best,
    })
}

/// Confusion counts and balanced accuracy of a 2-clustering against the
/// class labels, maximized over the two cluster-to-class alignments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapScore {
    pub ba: f64,
    /// Cluster id that the winning alignment maps to class A.
    pub cluster_for_a: u8,
    /// confusion[actual class][aligned prediction], classes ordered A, B.
    pub confusion: [[usize; 2]; 2],
}

pub fn balanced_accuracy(assignment: &[u8], labels: &[Label]) -> Result<OverlapScore> {
    if assignment.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: labels.len(),
        });
    }
    // counts[cluster][class]
    let mut counts = [[0usize; 2]; 2];
    for (&a, &l) in assignment.iter().zip(labels) {
        counts[a as usize][l.index()] += 1;
    }
    let total_a = counts[0][0] + counts[1][0];
    let total_b = counts[0][1] + counts[1][1];
    if total_a == 0 || total_b == 0 {
        return Err(Error::SingleClass);
    }
    let score = |cluster_for_a: usize| -> f64 {
        let sens = counts[cluster_for_a][0] as f64 / total_a as f64;
        let spec = counts[1 - cluster_for_a][1] as f64 / total_b as f64;
        (sens + spec) / 2.0
    };
    // Ties keep alignment 0.
    let cluster_for_a = if score(1) > score(0) { 1u8 } else { 0u8 };
    let m = cluster_for_a as usize;
    let confusion = [
        [counts[m][0], counts[1 - m][0]],
        [counts[m][1], counts[1 - m][1]],
    ];
    Ok(OverlapScore {
        ba: score(m),
        cluster_for_a,
        confusion,
    })
}
