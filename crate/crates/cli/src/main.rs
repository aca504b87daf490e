//! `textpart`: does a hypothesized two-way partition of a sequential text
//! corpus leave a statistically defensible stylistic trace?
//!
//! The pipeline embeds sliding windows of verses as tf-idf vectors,
//! clusters them unsupervised, scores the clustering against the labeling,
//! and compares the observed overlap to cyclic-shift and permutation nulls.

mod commands;
mod config;
mod out;

use clap::{Parser, Subcommand};
use textpart_core::Error;

#[derive(Parser)]
#[command(
    name = "textpart",
    version,
    about = "Statistical validation of a two-class partition of a sequential text corpus"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a corpus file; print class counts and block statistics.
    Validate(commands::ValidateArgs),
    /// Sweep window and n-gram sizes; report per-cell overlap and the optimum.
    Optimize(commands::OptimizeArgs),
    /// Score the labeling against cyclic-shift (and optional permutation) nulls.
    Test(commands::TestArgs),
    /// Rank features by their loading on the cluster-separating axis.
    Features(commands::FeaturesArgs),
    /// Repeat the grid search with chosen blocks removed.
    BlockRemoval(commands::BlockRemovalArgs),
    /// Generate a synthetic labeled corpus.
    Synth(commands::SynthArgs),
}

/// Exit codes: 0 success; 1 the corpus or labeling failed validation;
/// 2 the request itself was unsatisfiable (bad flags, grids, ranks, or a
/// corpus too small for what was asked); 3 everything else, mostly I/O and
/// degenerate numeric situations.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::BlockRankOutOfRange { .. }
        | Error::CorpusTooShort { .. }
        | Error::SubsampleInfeasible { .. }
        | Error::EmptyDocuments => 2,
        Error::Parse { .. }
        | Error::UnknownLabel { .. }
        | Error::BadToken { .. }
        | Error::DuplicateIndex { .. }
        | Error::NonContiguousIndex { .. }
        | Error::TooFewVerses { .. }
        | Error::StreamUnavailable { .. }
        | Error::SingleClass
        | Error::LengthMismatch { .. } => 1,
        _ => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Validate(a) => commands::validate(a),
        Cmd::Optimize(a) => commands::optimize(a),
        Cmd::Test(a) => commands::test(a),
        Cmd::Features(a) => commands::features(a),
        Cmd::BlockRemoval(a) => commands::block_removal(a),
        Cmd::Synth(a) => commands::synth(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
