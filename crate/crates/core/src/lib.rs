//! Statistical validation of a hypothesized two-way partition of a
//! sequential text corpus.
//!
//! The pipeline embeds sliding verse windows as n-gram tf-idf vectors,
//! clusters them into two groups without looking at labels, and measures
//! how well the clusters recover the hypothesized classes (balanced
//! accuracy). A cross-validated grid search picks the embedding scale,
//! cyclic-shift and permutation nulls attach a significance level to the
//! observed overlap, and centroid-difference loadings attribute the
//! separation to individual features.
//!
//! All randomness flows from one master seed through a derivation tree,
//! so every result is reproducible bit for bit, with any thread count.

#[doc(hidden)]
pub mod bench_support;
pub mod clustering;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod gridsearch;
pub mod hypothesis;
pub mod importance;
pub mod parallel;
pub mod seed;
pub mod synth;

pub use clustering::{balanced_accuracy, kmeans_two, Clustering, KMeansConfig, OverlapScore};
pub use corpus::{
    cyclic_shift, labeling_agreement, load_corpus, window_members, write_jsonl, Block, Corpus,
    Label, LabelMap, Representation, Streams, SuperVerse, TokenIndex, VerseRecord,
};
pub use embedding::{
    extract_ngrams, tfidf_matrix, EmbedConfig, FeatureMatrix, IdfMode, NormMode, Vocabulary,
};
pub use error::{Error, Result};
pub use gridsearch::{
    cross_validated_grid, cross_validated_grid_labeled, grid_once, grid_once_labeled,
    select_by_mean, select_optimum, subsample_for_sim, CellRef, GridCell, GridResult, GridSpec,
};
pub use hypothesis::{
    dense_schedule, p_value, run_hypothesis, shift_schedule, HypothesisReport, HypothesisSpec,
    NullDistribution, NullKind, ShiftSchedule,
};
pub use importance::{
    abundance, cross_validated_importance, explained_variance_truncate, separating_axis,
    AbundanceMode, FeatureReport, FeatureRow, ImportanceSpec, SeparatingAxis,
};
pub use synth::{generate, SynthSpec};
