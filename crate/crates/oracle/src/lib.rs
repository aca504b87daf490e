//! Brute-force reference computations for checking the main crate.
//!
//! Everything here trades speed for obviousness and works on plain
//! vectors, deliberately sharing no code or data structures with the
//! implementation under test.

use std::collections::BTreeMap;

/// Dense tf-idf over string documents. Returns (sorted vocabulary, rows
/// aligned to it). `smooth_idf` selects ln((1+n)/(1+df))+1 over
/// ln(n/df)+1; `l2` normalizes rows to unit length.
pub fn dense_tfidf(
    docs: &[Vec<String>],
    n: usize,
    smooth_idf: bool,
    l2: bool,
) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(n >= 1);
    let mut counts: Vec<BTreeMap<String, usize>> = Vec::new();
    for doc in docs {
        let mut m = BTreeMap::new();
        if doc.len() >= n {
            for w in doc.windows(n) {
                *m.entry(w.join(" ")).or_insert(0) += 1;
            }
        }
        counts.push(m);
    }
    let mut vocab: Vec<String> = counts
        .iter()
        .flat_map(|m| m.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    vocab.sort();
    let n_docs = docs.len() as f64;
    let mut rows = Vec::new();
    for m in &counts {
        let mut row = Vec::with_capacity(vocab.len());
        for term in &vocab {
            let tf = *m.get(term).unwrap_or(&0) as f64;
            let df = counts.iter().filter(|c| c.contains_key(term)).count() as f64;
            let idf = if df == 0.0 {
                0.0
            } else if smooth_idf {
                ((1.0 + n_docs) / (1.0 + df)).ln() + 1.0
            } else {
                (n_docs / df).ln() + 1.0
            };
            row.push(tf * idf);
        }
        if l2 {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut row {
                    *v /= norm;
                }
            }
        }
        rows.push(row);
    }
    (vocab, rows)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(rows: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let d = rows[0].len();
    let mut m = vec![0.0; d];
    for &r in members {
        for (j, v) in rows[r].iter().enumerate() {
            m[j] += v;
        }
    }
    for v in &mut m {
        *v /= members.len() as f64;
    }
    m
}

/// Loss of one explicit 2-partition: within-cluster sum of squared
/// distances to the cluster means.
pub fn partition_loss(rows: &[Vec<f64>], assignment: &[u8]) -> f64 {
    let c0: Vec<usize> = (0..rows.len()).filter(|&r| assignment[r] == 0).collect();
    let c1: Vec<usize> = (0..rows.len()).filter(|&r| assignment[r] == 1).collect();
    assert!(!c0.is_empty() && !c1.is_empty());
    let (m0, m1) = (mean_of(rows, &c0), mean_of(rows, &c1));
    c0.iter().map(|&r| sq_dist(&rows[r], &m0)).sum::<f64>()
        + c1.iter().map(|&r| sq_dist(&rows[r], &m1)).sum::<f64>()
}

/// Global optimum of 2-means by enumerating all 2^(n-1) - 1 proper
/// bipartitions. Only for small n.
pub fn best_partition(rows: &[Vec<f64>]) -> (Vec<u8>, f64) {
    let n = rows.len();
    assert!((2..=20).contains(&n), "exhaustive search needs 2 <= n <= 20");
    let mut best: Option<(Vec<u8>, f64)> = None;
    // Fix row 0 in cluster 0 to skip mirror duplicates.
    for mask in 1..(1u32 << (n - 1)) {
        let assignment: Vec<u8> = (0..n)
            .map(|r| {
                if r == 0 {
                    0
                } else {
                    ((mask >> (r - 1)) & 1) as u8
                }
            })
            .collect();
        if assignment.iter().all(|&a| a == 0) || assignment.iter().all(|&a| a == 1) {
            continue;
        }
        let loss = partition_loss(rows, &assignment);
        if best.as_ref().is_none_or(|(_, b)| loss < *b) {
            best = Some((assignment, loss));
        }
    }
    best.expect("at least one proper bipartition")
}

/// Balanced accuracy by direct confusion counting, maximized over both
/// cluster-to-class alignments. Labels are 0 (class A) or 1 (class B).
pub fn balanced_accuracy(assignment: &[u8], labels: &[u8]) -> f64 {
    assert_eq!(assignment.len(), labels.len());
    let mut best = f64::MIN;
    for aligned in 0..2u8 {
        let mut tp = 0.0;
        let mut fn_ = 0.0;
        let mut tn = 0.0;
        let mut fp = 0.0;
        for (&a, &l) in assignment.iter().zip(labels) {
            let pred_a = a == aligned;
            match (l, pred_a) {
                (0, true) => tp += 1.0,
                (0, false) => fn_ += 1.0,
                (_, false) => tn += 1.0,
                (_, true) => fp += 1.0,
            }
        }
        assert!(tp + fn_ > 0.0 && tn + fp > 0.0, "both classes required");
        let ba = (tp / (tp + fn_) + tn / (tn + fp)) / 2.0;
        if ba > best {
            best = ba;
        }
    }
    best
}

/// Materializes the full pairwise difference matrix between the two
/// clusters: one row u - v for every (u, v) with u in cluster 0 and v in
/// cluster 1.
pub fn difference_matrix(rows: &[Vec<f64>], assignment: &[u8]) -> Vec<Vec<f64>> {
    let c0: Vec<usize> = (0..rows.len()).filter(|&r| assignment[r] == 0).collect();
    let c1: Vec<usize> = (0..rows.len()).filter(|&r| assignment[r] == 1).collect();
    let mut out = Vec::with_capacity(c0.len() * c1.len());
    for &u in &c0 {
        for &v in &c1 {
            out.push(rows[u].iter().zip(&rows[v]).map(|(x, y)| x - y).collect());
        }
    }
    out
}

/// Mean row of a matrix.
pub fn mean_row(matrix: &[Vec<f64>]) -> Vec<f64> {
    mean_of(matrix, &(0..matrix.len()).collect::<Vec<_>>())
}

/// First right singular vector of a matrix via power iteration on M^T M.
/// Deterministic: starts from a fixed ramp vector.
pub fn first_principal_axis(matrix: &[Vec<f64>], iters: usize) -> Vec<f64> {
    let d = matrix[0].len();
    let mut v: Vec<f64> = (0..d).map(|j| 1.0 + (j as f64) / (d as f64 + 1.0)).collect();
    normalize(&mut v);
    for _ in 0..iters {
        // w = M^T (M v)
        let mv: Vec<f64> = matrix
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut w = vec![0.0; d];
        for (row, &s) in matrix.iter().zip(&mv) {
            for (j, &x) in row.iter().enumerate() {
                w[j] += x * s;
            }
        }
        normalize(&mut w);
        v = w;
    }
    v
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// |cosine| between two vectors.
pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}

/// Population standard deviation.
pub fn pop_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}
