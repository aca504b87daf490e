//! Shared fixtures for the criterion benches.

use crate::corpus::Corpus;
use crate::synth::{generate, SynthSpec};

pub fn bench_corpus(verses: usize, seed: u64) -> Corpus {
    generate(&SynthSpec {
        verses,
        tokens_per_verse: 20,
        vocab_size: 80,
        exclusive_per_class: 8,
        divergence: 0.35,
        signal_scale: 1,
        block_len_a: 10.0,
        block_len_b: 10.0,
        seed,
    })
    .expect("valid spec")
}
