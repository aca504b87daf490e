//! Corpus model: an ordered sequence of verses, each carrying three token
//! streams and a two-way class label.
//!
//! Verses are indexed 0..N contiguously and order is meaningful: windows,
//! blocks, and cyclic shifts are all defined on the original sequence, so
//! subsampled views keep original indices and neighborhoods.

use crate::error::{Error, Result};
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Attempts of rejection sampling before `subsample` gives up.
pub const SUBSAMPLE_ATTEMPT_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn other(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::A => 0,
            Label::B => 1,
        }
    }
}

/// Maps the label strings found in a corpus file onto the two internal
/// classes. Class A is the partition under test ("P" by default).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub class_a: String,
    pub class_b: String,
}

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap {
            class_a: "P".to_string(),
            class_b: "nonP".to_string(),
        }
    }
}

impl LabelMap {
    pub fn new(class_a: impl Into<String>, class_b: impl Into<String>) -> Result<Self> {
        let (class_a, class_b) = (class_a.into(), class_b.into());
        if class_a == class_b || class_a.is_empty() || class_b.is_empty() {
            return Err(Error::Config(format!(
                "label names must be distinct and non-empty, got {class_a:?} and {class_b:?}"
            )));
        }
        Ok(LabelMap { class_a, class_b })
    }

    pub fn parse(&self, s: &str) -> Option<Label> {
        if s == self.class_a {
            Some(Label::A)
        } else if s == self.class_b {
            Some(Label::B)
        } else {
            None
        }
    }

    pub fn name(&self, label: Label) -> &str {
        match label {
            Label::A => &self.class_a,
            Label::B => &self.class_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Lexeme,
    PosLow,
    PosHigh,
}

impl Representation {
    pub const ALL: [Representation; 3] = [
        Representation::Lexeme,
        Representation::PosLow,
        Representation::PosHigh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Lexeme => "lexeme",
            Representation::PosLow => "pos_low",
            Representation::PosHigh => "pos_high",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "lexeme" => Ok(Representation::Lexeme),
            "pos_low" => Ok(Representation::PosLow),
            "pos_high" => Ok(Representation::PosHigh),
            _ => Err(Error::Config(format!(
                "unknown representation {s:?} (expected lexeme, pos_low, or pos_high)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Streams {
    pub lexeme: Vec<String>,
    pub pos_low: Vec<String>,
    pub pos_high: Vec<String>,
}

impl Streams {
    pub fn get(&self, rep: Representation) -> &[String] {
        match rep {
            Representation::Lexeme => &self.lexeme,
            Representation::PosLow => &self.pos_low,
            Representation::PosHigh => &self.pos_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerseRecord {
    pub index: usize,
    pub reference: String,
    pub label: Label,
    pub streams: Streams,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub label_map: LabelMap,
    verses: Vec<VerseRecord>,
}

/// One maximal run of consecutive same-label verses: `indices` is the
/// inclusive range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub label: Label,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A verse plus its symmetric neighborhood, flattened into one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperVerse {
    pub center: usize,
    pub start: usize,
    pub end: usize,
    pub label: Label,
    pub tokens: Vec<String>,
}

impl SuperVerse {
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }
}

/// Inclusive member range of the window of half-width `k` around `center`
/// in a sequence of `n` verses, truncated at the boundaries.
pub fn window_members(n: usize, center: usize, k: usize) -> (usize, usize) {
    debug_assert!(center < n);
    (center.saturating_sub(k), (center + k).min(n - 1))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStreams {
    lexeme: Vec<String>,
    pos_low: Vec<String>,
    pos_high: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerse {
    index: usize,
    #[serde(rename = "ref")]
    reference: String,
    label: String,
    streams: RawStreams,
}

fn check_tokens(line: usize, stream: &'static str, tokens: &[String]) -> Result<()> {
    for t in tokens {
        if t.is_empty() || t.chars().any(|c| c.is_whitespace()) {
            return Err(Error::BadToken {
                line,
                token: t.clone(),
                stream,
            });
        }
    }
    Ok(())
}

/// Reads a JSON-lines corpus file. Blank lines are skipped; everything
/// else must be one verse object per line. Verses may appear in any order
/// in the file but their indices must form 0..N without gaps.
pub fn load_corpus(path: &Path, label_map: &LabelMap) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut verses: Vec<VerseRecord> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawVerse = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let label = label_map.parse(&raw.label).ok_or_else(|| Error::UnknownLabel {
            line: lineno,
            found: raw.label.clone(),
            a: label_map.class_a.clone(),
            b: label_map.class_b.clone(),
        })?;
        check_tokens(lineno, "lexeme", &raw.streams.lexeme)?;
        check_tokens(lineno, "pos_low", &raw.streams.pos_low)?;
        check_tokens(lineno, "pos_high", &raw.streams.pos_high)?;
        verses.push(VerseRecord {
            index: raw.index,
            reference: raw.reference,
            label,
            streams: Streams {
                lexeme: raw.streams.lexeme,
                pos_low: raw.streams.pos_low,
                pos_high: raw.streams.pos_high,
            },
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    Corpus::from_verses(name, label_map.clone(), verses)
}

impl Corpus {
    /// Validates sequence invariants and sorts verses by index.
    pub fn from_verses(
        name: impl Into<String>,
        label_map: LabelMap,
        mut verses: Vec<VerseRecord>,
    ) -> Result<Corpus> {
        verses.sort_by_key(|v| v.index);
        for (expected, v) in verses.iter().enumerate() {
            if v.index < expected {
                return Err(Error::DuplicateIndex { index: v.index });
            }
            if v.index > expected {
                return Err(Error::NonContiguousIndex {
                    expected,
                    found: v.index,
                });
            }
        }
        if verses.len() < 2 {
            return Err(Error::TooFewVerses { n: verses.len() });
        }
        Ok(Corpus {
            name: name.into(),
            label_map,
            verses,
        })
    }

    pub fn len(&self) -> usize {
        self.verses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verses.is_empty()
    }

    pub fn verse(&self, i: usize) -> &VerseRecord {
        &self.verses[i]
    }

    pub fn verses(&self) -> &[VerseRecord] {
        &self.verses
    }

    pub fn labels(&self) -> Vec<Label> {
        self.verses.iter().map(|v| v.label).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for v in &self.verses {
            counts[v.label.index()] += 1;
        }
        counts
    }

    /// A stream can be selected only when every verse has tokens for it.
    pub fn stream_check(&self, rep: Representation) -> Result<()> {
        for v in &self.verses {
            if v.streams.get(rep).is_empty() {
                return Err(Error::StreamUnavailable { rep, verse: v.index });
            }
        }
        Ok(())
    }

    pub fn available_streams(&self) -> Vec<Representation> {
        Representation::ALL
            .into_iter()
            .filter(|&r| self.stream_check(r).is_ok())
            .collect()
    }

    /// Maximal same-label runs of one class, in sequence order.
    pub fn blocks(&self, label: Label) -> Vec<Block> {
        self.all_blocks()
            .into_iter()
            .filter(|b| b.label == label)
            .collect()
    }

    /// Maximal same-label runs of both classes; they tile 0..N exactly.
    pub fn all_blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        let mut start = 0usize;
        for i in 1..=self.verses.len() {
            if i == self.verses.len() || self.verses[i].label != self.verses[start].label {
                out.push(Block {
                    label: self.verses[start].label,
                    start,
                    end: i - 1,
                });
                start = i;
            }
        }
        out
    }

    /// Blocks of `label` ordered by (length desc, start asc); rank 1 is the
    /// longest.
    pub fn ranked_blocks(&self, label: Label) -> Vec<Block> {
        let mut blocks = self.blocks(label);
        blocks.sort_by(|x, y| y.len().cmp(&x.len()).then(x.start.cmp(&y.start)));
        blocks
    }

    /// Removes the blocks of `label` at the given 1-based length ranks and
    /// re-indexes the survivors contiguously. References and labels are
    /// kept verbatim.
    pub fn remove_blocks(&self, label: Label, ranks: &[usize]) -> Result<Corpus> {
        let ranked = self.ranked_blocks(label);
        let mut drop = vec![false; self.verses.len()];
        let mut seen = std::collections::HashSet::new();
        for &rank in ranks {
            if rank == 0 || rank > ranked.len() {
                return Err(Error::BlockRankOutOfRange {
                    rank,
                    count: ranked.len(),
                });
            }
            if !seen.insert(rank) {
                return Err(Error::Config(format!("block rank {rank} given twice")));
            }
            let b = ranked[rank - 1];
            for slot in drop.iter_mut().take(b.end + 1).skip(b.start) {
                *slot = true;
            }
        }
        let mut verses = Vec::new();
        for (i, v) in self.verses.iter().enumerate() {
            if !drop[i] {
                let mut v = v.clone();
                v.index = verses.len();
                verses.push(v);
            }
        }
        Corpus::from_verses(self.name.clone(), self.label_map.clone(), verses)
    }

    /// Draws `size` distinct verse indices uniformly, rejecting draws with
    /// fewer than `min_per_class` of either class. Returns sorted original
    /// indices. Infeasible parameters fail fast instead of burning the
    /// attempt cap.
    pub fn subsample(&self, size: usize, min_per_class: usize, seed: u64) -> Result<Vec<usize>> {
        let n = self.verses.len();
        let counts = self.class_counts();
        if size > n {
            return Err(Error::SubsampleInfeasible {
                reason: format!("size {size} exceeds corpus length {n}"),
            });
        }
        if size < 2 * min_per_class {
            return Err(Error::SubsampleInfeasible {
                reason: format!("size {size} cannot hold {min_per_class} verses of each class"),
            });
        }
        if counts[0] < min_per_class || counts[1] < min_per_class {
            return Err(Error::SubsampleInfeasible {
                reason: format!(
                    "class counts {counts:?} below the per-class minimum {min_per_class}"
                ),
            });
        }
        let mut rng = seed::rng_from(seed, &[]);
        for _ in 0..SUBSAMPLE_ATTEMPT_CAP {
            let draw = rand::seq::index::sample(&mut rng, n, size);
            let mut have = [0usize; 2];
            for i in draw.iter() {
                have[self.verses[i].label.index()] += 1;
            }
            if have[0] >= min_per_class && have[1] >= min_per_class {
                let mut indices = draw.into_vec();
                indices.sort_unstable();
                return Ok(indices);
            }
        }
        Err(Error::SubsampleRejectionCap {
            cap: SUBSAMPLE_ATTEMPT_CAP,
        })
    }

    /// The super-verse around `center`: tokens of the chosen stream from
    /// all member verses in sequence order, labeled by the center.
    pub fn window(&self, center: usize, k: usize, rep: Representation) -> SuperVerse {
        let (start, end) = window_members(self.verses.len(), center, k);
        let mut tokens = Vec::new();
        for v in &self.verses[start..=end] {
            tokens.extend_from_slice(v.streams.get(rep));
        }
        SuperVerse {
            center,
            start,
            end,
            label: self.verses[center].label,
            tokens,
        }
    }

    pub fn cyclic_shift_labels(&self, shift: usize) -> Vec<Label> {
        cyclic_shift(&self.labels(), shift)
    }
}

#[derive(Serialize)]
struct OutStreams<'a> {
    lexeme: &'a [String],
    pos_low: &'a [String],
    pos_high: &'a [String],
}

#[derive(Serialize)]
struct OutVerse<'a> {
    index: usize,
    #[serde(rename = "ref")]
    reference: &'a str,
    label: &'a str,
    streams: OutStreams<'a>,
}

/// Writes the corpus in the JSON-lines format `load_corpus` reads, one
/// verse per line in index order.
pub fn write_jsonl<W: std::io::Write>(corpus: &Corpus, mut w: W) -> Result<()> {
    for v in corpus.verses() {
        let line = serde_json::to_string(&OutVerse {
            index: v.index,
            reference: &v.reference,
            label: corpus.label_map.name(v.label),
            streams: OutStreams {
                lexeme: &v.streams.lexeme,
                pos_low: &v.streams.pos_low,
                pos_high: &v.streams.pos_high,
            },
        })
        .expect("verse serializes");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Rotates a label sequence forward by `shift`: the label of verse `i`
/// moves to verse `(i + shift) mod n`.
pub fn cyclic_shift(labels: &[Label], shift: usize) -> Vec<Label> {
    let n = labels.len();
    if n == 0 {
        return Vec::new();
    }
    let shift = shift % n;
    (0..n).map(|i| labels[(i + n - shift) % n]).collect()
}

/// Fraction of positions where the two sequences agree.
pub fn labeling_agreement(a: &[Label], b: &[Label]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(same as f64 / a.len() as f64)
}

/// One stream of the corpus with tokens interned to dense ids, so window
/// documents can be assembled without string hashing. Ids are assigned in
/// first-occurrence order over verses, making them reproducible.
#[derive(Debug, Clone)]
pub struct TokenIndex {
    pub rep: Representation,
    pub token_names: Vec<String>,
    verse_ids: Vec<Vec<u32>>,
    labels: Vec<Label>,
}

impl TokenIndex {
    pub fn build(corpus: &Corpus, rep: Representation) -> Result<TokenIndex> {
        corpus.stream_check(rep)?;
        let mut names: Vec<String> = Vec::new();
        let mut lookup: HashMap<&str, u32> = HashMap::new();
        let mut verse_ids = Vec::with_capacity(corpus.len());
        for v in corpus.verses() {
            let mut ids = Vec::with_capacity(v.streams.get(rep).len());
            for tok in v.streams.get(rep) {
                let id = *lookup.entry(tok.as_str()).or_insert_with(|| {
                    names.push(tok.clone());
                    (names.len() - 1) as u32
                });
                ids.push(id);
            }
            verse_ids.push(ids);
        }
        Ok(TokenIndex {
            rep,
            token_names: names,
            verse_ids,
            labels: corpus.labels(),
        })
    }

    pub fn n_verses(&self) -> usize {
        self.verse_ids.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn verse_tokens(&self, verse: usize) -> &[u32] {
        &self.verse_ids[verse]
    }

    /// Concatenated token ids of the window around `center`.
    pub fn window_doc(&self, center: usize, k: usize) -> Vec<u32> {
        let (start, end) = window_members(self.verse_ids.len(), center, k);
        let total: usize = self.verse_ids[start..=end].iter().map(Vec::len).sum();
        let mut doc = Vec::with_capacity(total);
        for ids in &self.verse_ids[start..=end] {
            doc.extend_from_slice(ids);
        }
        doc
    }
}
