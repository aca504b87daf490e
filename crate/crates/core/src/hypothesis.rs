//! Significance testing of the observed cluster-label overlap.
//!
//! The null model relabels the corpus (cyclic shifts of the whole label
//! sequence, or uniform permutations) and re-runs the optimization. Since
//! clustering ignores labels and every seed derives from (spec, corpus)
//! alone, each relabeling reuses the very same per-cell clusterings and
//! only the scoring step is repeated; results are identical to re-running
//! the full sweep per relabeling, at a fraction of the cost.

use crate::corpus::{cyclic_shift, Corpus, Label};
use crate::error::{Error, Result};
use crate::gridsearch::{cluster_grid, result_from_table, score_grid, GridCell, GridResult, GridSpec};
use crate::seed;
use rand::seq::SliceRandom;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftSchedule {
    pub step: usize,
    /// Strictly increasing multiples of `step`, all < corpus length.
    pub offsets: Vec<usize>,
}

impl ShiftSchedule {
    pub fn n_shifts(&self) -> usize {
        self.offsets.len()
    }
}

/// Shifts spaced two maximal windows apart, so no null document shares a
/// verse neighborhood with its observed counterpart.
pub fn shift_schedule(n_verses: usize, max_window: usize) -> Result<ShiftSchedule> {
    if max_window == 0 {
        return Err(Error::Config("max window must be at least 1".into()));
    }
    let step = 2 * max_window;
    if n_verses <= step {
        return Err(Error::CorpusTooShort {
            n: n_verses,
            step,
        });
    }
    let offsets: Vec<usize> = (1..).map(|m| m * step).take_while(|&o| o < n_verses).collect();
    Ok(ShiftSchedule { step, offsets })
}

/// Every possible shift 1..n; slower, no spacing guarantee.
pub fn dense_schedule(n_verses: usize) -> Result<ShiftSchedule> {
    if n_verses < 2 {
        return Err(Error::CorpusTooShort {
            n: n_verses,
            step: 1,
        });
    }
    Ok(ShiftSchedule {
        step: 1,
        offsets: (1..n_verses).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullKind {
    CyclicShift,
    Permutation,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullDistribution {
    pub kind: NullKind,
    /// One optimized score per relabeling, in schedule order.
    pub values: Vec<f64>,
    /// Shift offsets for the cyclic null; absent for permutations.
    pub offsets: Option<Vec<usize>>,
    pub p_value: f64,
    /// Set when the null collapses to (numerically) a single value, which
    /// makes the p-value uninformative.
    pub degenerate: bool,
}

/// Add-one estimate: (#{null >= threshold} + 1) / (#null + 1).
pub fn p_value(values: &[f64], threshold: f64) -> f64 {
    let hits = values.iter().filter(|&&v| v >= threshold).count();
    (hits + 1) as f64 / (values.len() + 1) as f64
}

fn summarize(kind: NullKind, values: Vec<f64>, offsets: Option<Vec<usize>>, threshold: f64) -> NullDistribution {
    let spread = match (
        values.iter().cloned().reduce(f64::min),
        values.iter().cloned().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    NullDistribution {
        kind,
        p_value: p_value(&values, threshold),
        degenerate: values.len() < 2 || spread < 1e-9,
        values,
        offsets,
    }
}

#[derive(Debug, Clone)]
pub struct HypothesisSpec {
    pub grid: GridSpec,
    /// Overrides the schedule spacing; defaults to the largest grid window.
    pub max_window: Option<usize>,
    /// Use every shift 1..n instead of the spaced schedule.
    pub dense: bool,
    /// Score relabelings at the observed optimum cell instead of
    /// re-optimizing per relabeling.
    pub fixed_cell: bool,
    /// Number of permutation draws; `None` skips the permutation null,
    /// and asking for zero draws is a configuration error.
    pub permutations: Option<usize>,
}

impl HypothesisSpec {
    pub fn new(grid: GridSpec) -> Self {
        HypothesisSpec {
            grid,
            max_window: None,
            dense: false,
            fixed_cell: false,
            permutations: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub observed: GridResult,
    /// Observed optimum mean minus its standard deviation.
    pub threshold: f64,
    pub schedule: ShiftSchedule,
    pub fixed_cell: bool,
    pub cyclic: NullDistribution,
    pub permutation: Option<NullDistribution>,
}

fn class_counts(labels: &[Label]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Runs the full test: observed sweep, cyclic-shift null, optional
/// permutation null, all sharing one set of clusterings.
pub fn run_hypothesis(corpus: &Corpus, spec: &HypothesisSpec) -> Result<HypothesisReport> {
    let grid = &spec.grid;
    if spec.permutations == Some(0) {
        return Err(Error::Config("permutation count must be at least 1".into()));
    }
    let schedule = if spec.dense {
        dense_schedule(corpus.len())?
    } else {
        let mw = spec.max_window.unwrap_or_else(|| grid.max_window());
        shift_schedule(corpus.len(), mw)?
    };
    let (centers_per_sim, assignments) = cluster_grid(corpus, grid)?;
    let base = corpus.labels();
    let base_counts = class_counts(&base);

    let observed_table = score_grid(&centers_per_sim, &assignments, grid, &base)?;
    let observed = result_from_table(grid, &observed_table);
    let threshold = observed.optimum.mean - observed.optimum.std;
    let fixed_ref = (observed.optimum.window, observed.optimum.ngram);

    let score_relabeling = |labels: &[Label]| -> Result<f64> {
        let table = score_grid(&centers_per_sim, &assignments, grid, labels)?;
        let result = result_from_table(grid, &table);
        if spec.fixed_cell {
            let (wi, ni) = cell_position(grid, fixed_ref);
            Ok(result.mean_ba[wi][ni])
        } else {
            Ok(result.optimum.mean)
        }
    };

    let mut cyclic_values = Vec::with_capacity(schedule.offsets.len());
    for &offset in &schedule.offsets {
        let shifted = cyclic_shift(&base, offset);
        assert_eq!(
            class_counts(&shifted),
            base_counts,
            "cyclic shift must conserve the label multiset"
        );
        cyclic_values.push(score_relabeling(&shifted)?);
    }
    let cyclic = summarize(
        NullKind::CyclicShift,
        cyclic_values,
        Some(schedule.offsets.clone()),
        threshold,
    );

    let permutation = match spec.permutations {
        None | Some(0) => None,
        Some(n_perms) => {
            let mut values = Vec::with_capacity(n_perms);
            for p in 0..n_perms {
                let mut labels = base.clone();
                let mut rng = seed::rng_from(grid.seed, &[seed::DOM_PERM, p as u64]);
                labels.shuffle(&mut rng);
                assert_eq!(class_counts(&labels), base_counts);
                values.push(score_relabeling(&labels)?);
            }
            Some(summarize(NullKind::Permutation, values, None, threshold))
        }
    };

    Ok(HypothesisReport {
        observed,
        threshold,
        schedule,
        fixed_cell: spec.fixed_cell,
        cyclic,
        permutation,
    })
}

fn cell_position(grid: &GridSpec, (w, n): (usize, usize)) -> (usize, usize) {
    let wi = grid.windows.iter().position(|&x| x == w).expect("window in grid");
    let ni = grid.ngrams.iter().position(|&x| x == n).expect("ngram in grid");
    (wi, ni)
}

/// Convenience accessor: the observed optimum as a cell.
pub fn observed_optimum(report: &HypothesisReport) -> GridCell {
    report.observed.optimum
}
