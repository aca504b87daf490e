//! Synthetic corpora with a planted two-class signal.
//!
//! Labels come in blocks with geometrically distributed lengths, mimicking
//! the long same-source runs of real interleaved texts. The token signal
//! is injected at one of two scales: divergent unigram distributions, or
//! class-specific bigram transitions whose unigram marginals stay uniform
//! (so only order-2 features can tell the classes apart). Divergence 0
//! makes the classes statistically identical at every scale.

use crate::corpus::{Corpus, Label, LabelMap, Streams, VerseRecord};
use crate::error::{Error, Result};
use crate::seed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub verses: usize,
    pub tokens_per_verse: usize,
    /// Background vocabulary shared by both classes.
    pub vocab_size: usize,
    /// Class-exclusive unigram tokens; only used at signal scale 1.
    pub exclusive_per_class: usize,
    /// Mixing weight of the class-specific component, in [0, 1].
    pub divergence: f64,
    /// 1 = unigram signal, 2 = bigram signal with uniform unigrams.
    pub signal_scale: u8,
    /// Mean label-block length per class, at least 1.
    pub block_len_a: f64,
    pub block_len_b: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            verses: 400,
            tokens_per_verse: 25,
            vocab_size: 60,
            exclusive_per_class: 6,
            divergence: 0.5,
            signal_scale: 1,
            block_len_a: 8.0,
            block_len_b: 8.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.verses < 2 {
            return Err(Error::Config("need at least 2 verses".into()));
        }
        if self.tokens_per_verse == 0 {
            return Err(Error::Config("tokens per verse must be at least 1".into()));
        }
        if self.vocab_size < 2 {
            return Err(Error::Config("vocabulary must hold at least 2 tokens".into()));
        }
        if !(0.0..=1.0).contains(&self.divergence) {
            return Err(Error::Config(format!(
                "divergence must be in [0, 1], got {}",
                self.divergence
            )));
        }
        if self.signal_scale != 1 && self.signal_scale != 2 {
            return Err(Error::Config(format!(
                "signal scale must be 1 or 2, got {}",
                self.signal_scale
            )));
        }
        if self.signal_scale == 2 && self.exclusive_per_class != 0 {
            return Err(Error::Config(
                "bigram signal does not use exclusive tokens; set them to 0".into(),
            ));
        }
        if self.block_len_a < 1.0 || self.block_len_b < 1.0 {
            return Err(Error::Config("mean block length must be at least 1".into()));
        }
        Ok(())
    }
}

fn geometric_len(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 1.0 {
        return 1;
    }
    let p = 1.0 / mean;
    let u: f64 = rng.gen();
    // 1 + Geom(p) via inversion; u is in [0, 1) so ln(1 - u) is finite.
    1 + ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize
}

fn label_sequence(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<Label> {
    let mut labels = Vec::with_capacity(spec.verses);
    let mut current = Label::A;
    while labels.len() < spec.verses {
        let mean = match current {
            Label::A => spec.block_len_a,
            Label::B => spec.block_len_b,
        };
        let len = geometric_len(rng, mean).min(spec.verses - labels.len());
        labels.extend(std::iter::repeat_n(current, len));
        current = current.other();
    }
    // Downstream statistics need both classes; patch the tail if one
    // block swallowed the whole sequence.
    if labels.iter().all(|&l| l == labels[0]) {
        let last = labels.len() - 1;
        labels[last] = labels[0].other();
    }
    labels
}

fn unigram_token(spec: &SynthSpec, label: Label, rng: &mut ChaCha8Rng) -> String {
    let u: f64 = rng.gen();
    if u < spec.divergence {
        if spec.exclusive_per_class > 0 {
            let i = rng.gen_range(0..spec.exclusive_per_class);
            match label {
                Label::A => format!("ax{i}"),
                Label::B => format!("bx{i}"),
            }
        } else {
            // No exclusive tokens: tilt toward one half of the background.
            let half = spec.vocab_size / 2;
            let i = match label {
                Label::A => rng.gen_range(0..half.max(1)),
                Label::B => rng.gen_range(half.min(spec.vocab_size - 1)..spec.vocab_size),
            };
            format!("t{i}")
        }
    } else {
        format!("t{}", rng.gen_range(0..spec.vocab_size))
    }
}

fn bigram_verse(spec: &SynthSpec, label: Label, rng: &mut ChaCha8Rng) -> Vec<String> {
    let v = spec.vocab_size;
    let mut tokens = Vec::with_capacity(spec.tokens_per_verse);
    let mut cur = rng.gen_range(0..v);
    tokens.push(format!("t{cur}"));
    for _ in 1..spec.tokens_per_verse {
        let u: f64 = rng.gen();
        cur = if u < spec.divergence {
            // Class-specific deterministic successor; both permutations
            // preserve the uniform unigram marginal.
            match label {
                Label::A => (cur + 1) % v,
                Label::B => (cur + 2) % v,
            }
        } else {
            rng.gen_range(0..v)
        };
        tokens.push(format!("t{cur}"));
    }
    tokens
}

/// Generates the corpus; identical spec gives identical verses.
pub fn generate(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = seed::rng_from(spec.seed, &[seed::DOM_SYNTH]);
    let labels = label_sequence(spec, &mut rng);
    let mut verses = Vec::with_capacity(spec.verses);
    for (i, &label) in labels.iter().enumerate() {
        let tokens: Vec<String> = match spec.signal_scale {
            1 => (0..spec.tokens_per_verse)
                .map(|_| unigram_token(spec, label, &mut rng))
                .collect(),
            _ => bigram_verse(spec, label, &mut rng),
        };
        verses.push(VerseRecord {
            index: i,
            reference: format!("syn:{}", i + 1),
            label,
            streams: Streams {
                lexeme: tokens.clone(),
                pos_low: tokens.clone(),
                pos_high: tokens,
            },
        });
    }
    Corpus::from_verses("synthetic", LabelMap::default(), verses)
}
