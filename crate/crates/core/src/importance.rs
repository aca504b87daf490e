//! Per-feature attribution of the cluster separation.
//!
//! The separating axis is the difference of the two cluster centroids in
//! the embedding space; its loadings say how much each feature pulls the
//! clusters apart and toward which side. Cross-validation repeats the
//! clustering over many subsamples and aggregates per-feature loadings by
//! matching vocabulary terms across runs.

use crate::clustering::{balanced_accuracy, kmeans_two, KMeansConfig};
use crate::corpus::{Corpus, Label, Representation, TokenIndex};
use crate::embedding::{tfidf_from_ids, FeatureMatrix, IdfMode, NormMode};
use crate::error::{Error, Result};
use crate::parallel::par_collect;
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatingAxis {
    /// Centroid(cluster 0) - centroid(cluster 1), one entry per column.
    pub loadings: Vec<f64>,
}

impl SeparatingAxis {
    pub fn is_degenerate(&self) -> bool {
        self.loadings.iter().all(|&v| v == 0.0)
    }
}

/// Difference of cluster centroids. Positive loading means the feature
/// sits on the cluster-0 side.
pub fn separating_axis(x: &FeatureMatrix, assignment: &[u8]) -> Result<SeparatingAxis> {
    if assignment.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: x.n_rows(),
        });
    }
    let mut sums = [vec![0.0; x.n_cols()], vec![0.0; x.n_cols()]];
    let mut counts = [0usize; 2];
    for (r, &a) in assignment.iter().enumerate() {
        counts[a as usize] += 1;
        for &(c, v) in x.row(r) {
            sums[a as usize][c as usize] += v;
        }
    }
    for cluster in 0..2u8 {
        if counts[cluster as usize] == 0 {
            return Err(Error::EmptyCluster { cluster });
        }
    }
    let (inv0, inv1) = (1.0 / counts[0] as f64, 1.0 / counts[1] as f64);
    let loadings = sums[0]
        .iter()
        .zip(&sums[1])
        .map(|(s0, s1)| s0 * inv0 - s1 * inv1)
        .collect();
    Ok(SeparatingAxis { loadings })
}

/// Ranks features by squared loading (descending, index ascending on
/// ties) and keeps the shortest prefix whose cumulative share of the
/// total squared loading reaches `level`.
pub fn explained_variance_truncate(loadings: &[f64], level: f64) -> Result<Vec<usize>> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::Config(format!(
            "truncation level must be in (0, 1], got {level}"
        )));
    }
    let total: f64 = loadings.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Err(Error::DegenerateAxis);
    }
    let mut order: Vec<usize> = (0..loadings.len()).collect();
    order.sort_by(|&a, &b| {
        let (qa, qb) = (loadings[a] * loadings[a], loadings[b] * loadings[b]);
        qb.partial_cmp(&qa).unwrap().then(a.cmp(&b))
    });
    let target = level * total - 1e-12 * total;
    let mut kept = Vec::new();
    let mut cum = 0.0;
    for idx in order {
        if loadings[idx] == 0.0 {
            break;
        }
        cum += loadings[idx] * loadings[idx];
        kept.push(idx);
        if cum >= target {
            break;
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbundanceMode {
    /// Mean tf-idf value per cluster.
    Tfidf,
    /// Fraction of rows containing the feature per cluster.
    DocFreq,
}

impl std::fmt::Display for AbundanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbundanceMode::Tfidf => "tfidf",
            AbundanceMode::DocFreq => "docfreq",
        })
    }
}

impl std::str::FromStr for AbundanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(AbundanceMode::Tfidf),
            "docfreq" | "df" => Ok(AbundanceMode::DocFreq),
            _ => Err(Error::Config(format!(
                "unknown abundance mode {s:?} (expected tfidf or docfreq)"
            ))),
        }
    }
}

/// Normalized abundance contrast of one column between the two clusters:
/// (m_own - m_other) / (m_own + m_other), 0 when the feature is absent
/// from both. Lies in [-1, 1].
pub fn abundance(
    x: &FeatureMatrix,
    assignment: &[u8],
    col: u32,
    cluster: u8,
    mode: AbundanceMode,
) -> f64 {
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (r, &a) in assignment.iter().enumerate() {
        counts[a as usize] += 1;
        let v = x.value(r, col);
        sums[a as usize] += match mode {
            AbundanceMode::Tfidf => v,
            AbundanceMode::DocFreq => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
    }
    let mean = |c: usize| {
        if counts[c] == 0 {
            0.0
        } else {
            sums[c] / counts[c] as f64
        }
    };
    let own = mean(cluster as usize);
    let other = mean(1 - cluster as usize);
    if own + other == 0.0 {
        0.0
    } else {
        (own - other) / (own + other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSpec {
    pub representation: Representation,
    pub window: usize,
    pub ngram: usize,
    pub idf: IdfMode,
    pub norm: NormMode,
    pub simulations: usize,
    pub subsample_size: usize,
    pub min_per_class: usize,
    pub kmeans: KMeansConfig,
    /// Cumulative squared-loading share kept in the report, in (0, 1].
    pub ev_level: f64,
    pub abundance: AbundanceMode,
    pub seed: u64,
}

impl ImportanceSpec {
    pub fn new(representation: Representation, window: usize, ngram: usize) -> Self {
        ImportanceSpec {
            representation,
            window,
            ngram,
            idf: IdfMode::Smooth,
            norm: NormMode::L2,
            simulations: 100,
            subsample_size: 250,
            min_per_class: 50,
            kmeans: KMeansConfig::default(),
            ev_level: 0.75,
            abundance: AbundanceMode::Tfidf,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram == 0 {
            return Err(Error::Config("ngram order must be at least 1".into()));
        }
        if self.simulations == 0 {
            return Err(Error::Config("simulations must be at least 1".into()));
        }
        if !(self.ev_level > 0.0 && self.ev_level <= 1.0) {
            return Err(Error::Config(format!(
                "truncation level must be in (0, 1], got {}",
                self.ev_level
            )));
        }
        self.kmeans.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub feature: String,
    /// Mean loading across simulations, absent runs counting as zero.
    pub mean_loading: f64,
    pub std_loading: f64,
    /// Simulations whose vocabulary contained the feature.
    pub present_in: usize,
    /// Class whose cluster the feature pulls toward.
    pub cluster: Label,
    /// Share of total squared mean loading.
    pub ev_share: f64,
    /// Mean abundance contrast toward the feature's own cluster.
    pub abundance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureReport {
    pub representation: Representation,
    pub window: usize,
    pub ngram: usize,
    pub simulations: usize,
    pub ev_level: f64,
    pub abundance_mode: AbundanceMode,
    /// Distinct features seen across all simulations.
    pub n_features_union: usize,
    /// Ranked by |mean loading|, truncated at `ev_level`.
    pub rows: Vec<FeatureRow>,
}

struct SimFeatures {
    terms: Vec<String>,
    /// Raw-frame loadings: positive points at cluster 0.
    loadings: Vec<f64>,
    /// Abundance contrast toward cluster 0, same frame.
    abundances: Vec<f64>,
    /// Which cluster id the class-A labels align with (by BA).
    cluster_for_a: u8,
}

fn importance_sim(
    corpus: &Corpus,
    index: &TokenIndex,
    spec: &ImportanceSpec,
    sim: usize,
) -> Result<SimFeatures> {
    let centers = corpus.subsample(
        spec.subsample_size,
        spec.min_per_class,
        seed::derive_seed(spec.seed, &[seed::DOM_SUBSAMPLE, sim as u64]),
    )?;
    let docs: Vec<Vec<u32>> = centers
        .iter()
        .map(|&c| index.window_doc(c, spec.window))
        .collect();
    let row_labels: Vec<Label> = centers.iter().map(|&c| index.labels()[c]).collect();
    let (matrix, vocab) = tfidf_from_ids(
        &docs,
        row_labels.clone(),
        centers.clone(),
        &index.token_names,
        spec.ngram,
        spec.idf,
        spec.norm,
    )?;
    let cfg = KMeansConfig {
        seed: seed::derive_seed(
            spec.seed,
            &[
                seed::DOM_CELL,
                sim as u64,
                spec.window as u64,
                spec.ngram as u64,
            ],
        ),
        ..spec.kmeans
    };
    let clustering = kmeans_two(&matrix, &cfg)?;
    let axis = separating_axis(&matrix, &clustering.assignment)?;
    let overlap = balanced_accuracy(&clustering.assignment, &row_labels)?;
    let mut abundances = Vec::with_capacity(vocab.len());
    for col in 0..vocab.len() as u32 {
        abundances.push(abundance(
            &matrix,
            &clustering.assignment,
            col,
            0,
            spec.abundance,
        ));
    }
    Ok(SimFeatures {
        terms: vocab.terms,
        loadings: axis.loadings,
        abundances,
        cluster_for_a: overlap.cluster_for_a,
    })
}

/// Repeats subsample + cluster + axis over `simulations` runs and merges
/// per-feature statistics across their vocabularies.
pub fn cross_validated_importance(corpus: &Corpus, spec: &ImportanceSpec) -> Result<FeatureReport> {
    spec.validate()?;
    let index = TokenIndex::build(corpus, spec.representation)?;
    let sims = par_collect(spec.simulations, |sim| {
        importance_sim(corpus, &index, spec, sim)
    });
    let mut runs = Vec::with_capacity(spec.simulations);
    for s in sims {
        runs.push(s?);
    }

    // Union vocabulary in first-seen order across runs.
    let mut slot_of: HashMap<&str, usize> = HashMap::new();
    let mut union_terms: Vec<&str> = Vec::new();
    let mut per_run: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(runs.len());
    for run in &runs {
        let mut entries = Vec::with_capacity(run.terms.len());
        for (t, (&l, &a)) in run
            .terms
            .iter()
            .zip(run.loadings.iter().zip(&run.abundances))
        {
            let slot = *slot_of.entry(t.as_str()).or_insert_with(|| {
                union_terms.push(t.as_str());
                union_terms.len() - 1
            });
            entries.push((slot, l, a));
        }
        per_run.push(entries);
    }
    let n_union = union_terms.len();
    let n_sims = runs.len() as f64;

    // Cluster ids are arbitrary per run, so averaging raw axes would let
    // loadings cancel. Flip each run whose axis anti-correlates with the
    // first run's axis on their shared vocabulary (zero or empty overlap
    // keeps the run as is).
    let mut reference = vec![0.0f64; n_union];
    for &(slot, l, _) in &per_run[0] {
        reference[slot] = l;
    }
    let mut flip_run = vec![false; per_run.len()];
    for (r, entries) in per_run.iter().enumerate().skip(1) {
        let dot: f64 = entries.iter().map(|&(slot, l, _)| l * reference[slot]).sum();
        flip_run[r] = dot < 0.0;
    }

    let mut sum = vec![0.0f64; n_union];
    let mut sum_sq = vec![0.0f64; n_union];
    let mut abund_sum = vec![0.0f64; n_union];
    let mut present = vec![0usize; n_union];
    for (r, entries) in per_run.iter().enumerate() {
        let sign = if flip_run[r] { -1.0 } else { 1.0 };
        for &(slot, l, a) in entries {
            sum[slot] += sign * l;
            sum_sq[slot] += l * l;
            abund_sum[slot] += sign * a;
            present[slot] += 1;
        }
    }

    // In the aligned frame, positive loadings point at cluster 0 of the
    // unflipped runs. Reports anchor sign to the class-A-aligned cluster
    // instead, decided by majority over the runs' BA alignments.
    let a_votes = runs
        .iter()
        .zip(&flip_run)
        .filter(|(run, &flipped)| (run.cluster_for_a == 0) != flipped)
        .count();
    let anchor = if 2 * a_votes >= runs.len() { 1.0 } else { -1.0 };

    let mut mean = vec![0.0f64; n_union];
    let mut std = vec![0.0f64; n_union];
    for slot in 0..n_union {
        mean[slot] = anchor * sum[slot] / n_sims;
        let var = (sum_sq[slot] / n_sims - mean[slot] * mean[slot]).max(0.0);
        std[slot] = var.sqrt();
    }

    let kept = explained_variance_truncate(&mean, spec.ev_level)?;
    let total_sq: f64 = mean.iter().map(|v| v * v).sum();
    let mut rows = Vec::with_capacity(kept.len());
    for slot in kept {
        let m = mean[slot];
        let cluster = if m >= 0.0 { Label::A } else { Label::B };
        let abund_a = anchor * abund_sum[slot] / present[slot] as f64;
        rows.push(FeatureRow {
            feature: union_terms[slot].to_string(),
            mean_loading: m,
            std_loading: std[slot],
            present_in: present[slot],
            cluster,
            ev_share: m * m / total_sq,
            abundance: if cluster == Label::B { -abund_a } else { abund_a },
        });
    }
    // Equal |mean| falls back to term order for a stable listing.
    rows.sort_by(|x, y| {
        y.mean_loading
            .abs()
            .partial_cmp(&x.mean_loading.abs())
            .unwrap()
            .then_with(|| x.feature.cmp(&y.feature))
    });
    Ok(FeatureReport {
        representation: spec.representation,
        window: spec.window,
        ngram: spec.ngram,
        simulations: spec.simulations,
        ev_level: spec.ev_level,
        abundance_mode: spec.abundance,
        n_features_union: n_union,
        rows,
    })
}
