//! Cross-validated sweep of the (window half-width, n-gram order) plane.
//!
//! Each simulation draws a fresh subsample of verse centers, embeds every
//! grid cell, clusters it, and scores the clustering against the class
//! labels. Clustering never looks at labels, a fact the hypothesis tests
//! exploit by re-scoring stored assignments under relabeled sequences.

use crate::clustering::{balanced_accuracy, kmeans_two, KMeansConfig};
use crate::corpus::{Corpus, Label, Representation, TokenIndex};
use crate::embedding::{tfidf_from_ids, IdfMode, NormMode};
use crate::error::{Error, Result};
use crate::parallel::par_collect;
use crate::seed;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub representation: Representation,
    /// Window half-widths to sweep, ascending.
    pub windows: Vec<usize>,
    /// N-gram orders to sweep, ascending.
    pub ngrams: Vec<usize>,
    pub simulations: usize,
    pub subsample_size: usize,
    pub min_per_class: usize,
    pub idf: IdfMode,
    pub norm: NormMode,
    pub kmeans: KMeansConfig,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(representation: Representation) -> Self {
        GridSpec {
            representation,
            windows: (1..=10).collect(),
            ngrams: (1..=10).collect(),
            simulations: 20,
            subsample_size: 250,
            min_per_class: 50,
            idf: IdfMode::Smooth,
            norm: NormMode::L2,
            kmeans: KMeansConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::Config("window range is empty".into()));
        }
        if self.ngrams.is_empty() {
            return Err(Error::Config("ngram range is empty".into()));
        }
        if self.ngrams.contains(&0) {
            return Err(Error::Config("ngram order must be at least 1".into()));
        }
        if self.simulations == 0 {
            return Err(Error::Config("simulations must be at least 1".into()));
        }
        if self.subsample_size == 0 {
            return Err(Error::Config("subsample size must be at least 1".into()));
        }
        self.kmeans.validate()
    }

    pub fn max_window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub window: usize,
    pub ngram: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRef {
    pub window: usize,
    pub ngram: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridResult {
    pub representation: Representation,
    pub windows: Vec<usize>,
    pub ngrams: Vec<usize>,
    pub simulations: usize,
    /// Row = window half-width (in `windows` order), column = n-gram order.
    pub mean_ba: Vec<Vec<f64>>,
    /// Population standard deviation, same layout.
    pub std_ba: Vec<Vec<f64>>,
    /// Highest mean/(std + 1e-6); the headline choice.
    pub optimum: GridCell,
    /// Highest plain mean, reported alongside for comparison.
    pub optimum_by_mean: GridCell,
    /// True when the two selection rules disagree on the cell.
    pub selection_divergence: bool,
    /// Cells whose mean is within one standard deviation of the optimum.
    pub within_one_sigma: Vec<CellRef>,
}

/// The subsample used by simulation `sim` under this spec. Deterministic
/// in (spec.seed, sim) alone, so independent stages can re-derive it.
pub fn subsample_for_sim(corpus: &Corpus, spec: &GridSpec, sim: usize) -> Result<Vec<usize>> {
    corpus.subsample(
        spec.subsample_size,
        spec.min_per_class,
        seed::derive_seed(spec.seed, &[seed::DOM_SUBSAMPLE, sim as u64]),
    )
}

/// Clusters one grid cell and returns the per-row cluster assignment.
/// Labels play no part here.
pub(crate) fn cell_assignment(
    index: &TokenIndex,
    centers: &[usize],
    spec: &GridSpec,
    sim: usize,
    window: usize,
    ngram: usize,
) -> Result<Vec<u8>> {
    let docs: Vec<Vec<u32>> = centers.iter().map(|&c| index.window_doc(c, window)).collect();
    let row_labels: Vec<Label> = centers.iter().map(|&c| index.labels()[c]).collect();
    let (matrix, _) = tfidf_from_ids(
        &docs,
        row_labels,
        centers.to_vec(),
        &index.token_names,
        ngram,
        spec.idf,
        spec.norm,
    )?;
    let cfg = KMeansConfig {
        seed: seed::derive_seed(
            spec.seed,
            &[seed::DOM_CELL, sim as u64, window as u64, ngram as u64],
        ),
        ..spec.kmeans
    };
    Ok(kmeans_two(&matrix, &cfg)?.assignment)
}

fn score_assignment(assignment: &[u8], centers: &[usize], labels: &[Label]) -> Result<f64> {
    let row_labels: Vec<Label> = centers.iter().map(|&c| labels[c]).collect();
    Ok(balanced_accuracy(assignment, &row_labels)?.ba)
}

/// BA matrix of a single simulation against an explicit label sequence.
pub fn grid_once_labeled(
    corpus: &Corpus,
    spec: &GridSpec,
    centers: &[usize],
    sim: usize,
    labels: &[Label],
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if labels.len() != corpus.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: corpus.len(),
        });
    }
    let index = TokenIndex::build(corpus, spec.representation)?;
    let mut out = Vec::with_capacity(spec.windows.len());
    for &w in &spec.windows {
        let mut row = Vec::with_capacity(spec.ngrams.len());
        for &n in &spec.ngrams {
            let assignment = cell_assignment(&index, centers, spec, sim, w, n)?;
            row.push(score_assignment(&assignment, centers, labels)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// BA matrix of a single simulation against the corpus's own labels.
pub fn grid_once(
    corpus: &Corpus,
    spec: &GridSpec,
    centers: &[usize],
    sim: usize,
) -> Result<Vec<Vec<f64>>> {
    grid_once_labeled(corpus, spec, centers, sim, &corpus.labels())
}

pub(crate) struct CellTable {
    pub windows: Vec<usize>,
    pub ngrams: Vec<usize>,
    pub simulations: usize,
    /// sim-major, then window-major, then ngram.
    pub values: Vec<f64>,
}

impl CellTable {
    pub fn mean_std(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (nw, nn, ns) = (self.windows.len(), self.ngrams.len(), self.simulations);
        let cells = nw * nn;
        let mut mean = vec![vec![0.0; nn]; nw];
        let mut std = vec![vec![0.0; nn]; nw];
        for wi in 0..nw {
            for ni in 0..nn {
                let cell = wi * nn + ni;
                let m = (0..ns).map(|s| self.values[s * cells + cell]).sum::<f64>() / ns as f64;
                let var = (0..ns)
                    .map(|s| {
                        let d = self.values[s * cells + cell] - m;
                        d * d
                    })
                    .sum::<f64>()
                    / ns as f64;
                mean[wi][ni] = m;
                std[wi][ni] = var.sqrt();
            }
        }
        (mean, std)
    }
}

/// Per-simulation subsample centers plus the flat per-(sim, cell) row
/// assignments.
pub(crate) type GridClusterings = (Vec<Vec<usize>>, Vec<Vec<u8>>);

/// All (simulation, cell) clusterings under `spec`, in one deterministic
/// flat vector. The expensive label-free half of the sweep.
pub(crate) fn cluster_grid(corpus: &Corpus, spec: &GridSpec) -> Result<GridClusterings> {
    spec.validate()?;
    let index = TokenIndex::build(corpus, spec.representation)?;
    let mut centers_per_sim = Vec::with_capacity(spec.simulations);
    for sim in 0..spec.simulations {
        centers_per_sim.push(subsample_for_sim(corpus, spec, sim)?);
    }
    let cells = spec.windows.len() * spec.ngrams.len();
    let jobs = spec.simulations * cells;
    let results = par_collect(jobs, |job| {
        let sim = job / cells;
        let cell = job % cells;
        let w = spec.windows[cell / spec.ngrams.len()];
        let n = spec.ngrams[cell % spec.ngrams.len()];
        cell_assignment(&index, &centers_per_sim[sim], spec, sim, w, n)
    });
    let mut assignments = Vec::with_capacity(jobs);
    for r in results {
        assignments.push(r?);
    }
    Ok((centers_per_sim, assignments))
}

pub(crate) fn score_grid(
    centers_per_sim: &[Vec<usize>],
    assignments: &[Vec<u8>],
    spec: &GridSpec,
    labels: &[Label],
) -> Result<CellTable> {
    let cells = spec.windows.len() * spec.ngrams.len();
    let mut values = Vec::with_capacity(assignments.len());
    for (job, assignment) in assignments.iter().enumerate() {
        let sim = job / cells;
        values.push(score_assignment(assignment, &centers_per_sim[sim], labels)?);
    }
    Ok(CellTable {
        windows: spec.windows.clone(),
        ngrams: spec.ngrams.clone(),
        simulations: spec.simulations,
        values,
    })
}

/// Ratio-rule selection: argmax mean/(std + 1e-6). Exact score ties fall
/// to the larger mean, then the smaller n-gram order, then the smaller
/// window.
pub fn select_optimum(
    windows: &[usize],
    ngrams: &[usize],
    mean: &[Vec<f64>],
    std: &[Vec<f64>],
) -> GridCell {
    select_by(windows, ngrams, mean, std, |m, s| m / (s + 1e-6))
}

/// Plain argmax of the mean, same tie-breaking tail.
pub fn select_by_mean(
    windows: &[usize],
    ngrams: &[usize],
    mean: &[Vec<f64>],
    std: &[Vec<f64>],
) -> GridCell {
    select_by(windows, ngrams, mean, std, |m, _| m)
}

fn select_by(
    windows: &[usize],
    ngrams: &[usize],
    mean: &[Vec<f64>],
    std: &[Vec<f64>],
    score: impl Fn(f64, f64) -> f64,
) -> GridCell {
    let mut best: Option<(f64, GridCell)> = None;
    for (wi, &w) in windows.iter().enumerate() {
        for (ni, &n) in ngrams.iter().enumerate() {
            let cell = GridCell {
                window: w,
                ngram: n,
                mean: mean[wi][ni],
                std: std[wi][ni],
            };
            let sc = score(cell.mean, cell.std);
            let better = match &best {
                None => true,
                Some((bs, bc)) => {
                    sc > *bs
                        || (sc == *bs
                            && (cell.mean > bc.mean
                                || (cell.mean == bc.mean
                                    && (n < bc.ngram || (n == bc.ngram && w < bc.window)))))
                }
            };
            if better {
                best = Some((sc, cell));
            }
        }
    }
    best.expect("non-empty grid").1
}

fn build_result(spec: &GridSpec, table: &CellTable) -> GridResult {
    let (mean, std) = table.mean_std();
    let optimum = select_optimum(&spec.windows, &spec.ngrams, &mean, &std);
    let optimum_by_mean = select_by_mean(&spec.windows, &spec.ngrams, &mean, &std);
    let cutoff = optimum.mean - optimum.std;
    let mut within_one_sigma = Vec::new();
    for (wi, &w) in spec.windows.iter().enumerate() {
        for (ni, &n) in spec.ngrams.iter().enumerate() {
            if mean[wi][ni] >= cutoff {
                within_one_sigma.push(CellRef { window: w, ngram: n });
            }
        }
    }
    GridResult {
        representation: spec.representation,
        windows: spec.windows.clone(),
        ngrams: spec.ngrams.clone(),
        simulations: spec.simulations,
        selection_divergence: (optimum.window, optimum.ngram)
            != (optimum_by_mean.window, optimum_by_mean.ngram),
        mean_ba: mean,
        std_ba: std,
        optimum,
        optimum_by_mean,
        within_one_sigma,
    }
}

/// Full cross-validated sweep scored against an explicit label sequence.
/// Subsamples and per-cell seeds depend only on (spec, corpus), never on
/// `labels`.
pub fn cross_validated_grid_labeled(
    corpus: &Corpus,
    spec: &GridSpec,
    labels: &[Label],
) -> Result<GridResult> {
    if labels.len() != corpus.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: corpus.len(),
        });
    }
    let (centers_per_sim, assignments) = cluster_grid(corpus, spec)?;
    let table = score_grid(&centers_per_sim, &assignments, spec, labels)?;
    Ok(build_result(spec, &table))
}

/// Full cross-validated sweep against the corpus's own labels.
pub fn cross_validated_grid(corpus: &Corpus, spec: &GridSpec) -> Result<GridResult> {
    cross_validated_grid_labeled(corpus, spec, &corpus.labels())
}

pub(crate) fn result_from_table(spec: &GridSpec, table: &CellTable) -> GridResult {
    build_result(spec, table)
}
