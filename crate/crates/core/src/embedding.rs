//! N-gram tf-idf embedding of super-verse documents.
//!
//! The vocabulary is rebuilt from scratch for every document set, with
//! column ids assigned in first-occurrence order (scan order over
//! documents, then position), so the same inputs always produce the same
//! matrix bytes. Rows are stored sparse as (column, value) pairs sorted
//! by column.

use crate::corpus::{Label, Representation, SuperVerse};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfMode {
    /// ln((1 + n) / (1 + df)) + 1; never zero, defined for df = n.
    Smooth,
    /// ln(n / df) + 1; the textbook variant.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    L2,
    None,
}

impl fmt::Display for IdfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdfMode::Smooth => "smooth",
            IdfMode::Plain => "plain",
        })
    }
}

impl std::str::FromStr for IdfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(IdfMode::Smooth),
            "plain" => Ok(IdfMode::Plain),
            _ => Err(Error::Config(format!(
                "unknown idf mode {s:?} (expected smooth or plain)"
            ))),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::L2 => "l2",
            NormMode::None => "none",
        })
    }
}

impl std::str::FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(NormMode::L2),
            "none" => Ok(NormMode::None),
            _ => Err(Error::Config(format!(
                "unknown norm mode {s:?} (expected l2 or none)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub representation: Representation,
    pub window_k: usize,
    pub ngram_n: usize,
    pub idf: IdfMode,
    pub norm: NormMode,
}

impl EmbedConfig {
    pub fn new(representation: Representation, window_k: usize, ngram_n: usize) -> Self {
        EmbedConfig {
            representation,
            window_k,
            ngram_n,
            idf: IdfMode::Smooth,
            norm: NormMode::L2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_n == 0 {
            return Err(Error::Config("ngram order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Column metadata for one embedding: display term and document frequency
/// per column. Terms are n-grams joined by a single space, which is
/// unambiguous because tokens never contain whitespace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub df: Vec<u32>,
    pub n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "column\tterm\tdf")?;
        for (col, (term, df)) in self.terms.iter().zip(&self.df).enumerate() {
            writeln!(w, "{col}\t{term}\t{df}")?;
        }
        Ok(())
    }
}

/// Row-sparse feature matrix; every row also remembers the class label
/// and original corpus index of its center verse.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_cols: usize,
    rows: Vec<Vec<(u32, f64)>>,
    row_labels: Vec<Label>,
    row_centers: Vec<usize>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// (column, value) pairs of one row, sorted by column, zeros omitted.
    pub fn row(&self, r: usize) -> &[(u32, f64)] {
        &self.rows[r]
    }

    pub fn value(&self, r: usize, col: u32) -> f64 {
        match self.rows[r].binary_search_by_key(&col, |e| e.0) {
            Ok(pos) => self.rows[r][pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn row_labels(&self) -> &[Label] {
        &self.row_labels
    }

    pub fn row_centers(&self) -> &[usize] {
        &self.row_centers
    }

    pub fn row_sq_norm(&self, r: usize) -> f64 {
        self.rows[r].iter().map(|(_, v)| v * v).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; self.n_cols];
                for &(c, v) in row {
                    dense[c as usize] = v;
                }
                dense
            })
            .collect()
    }

    /// Coordinate-format dump: one `row column value` line per entry,
    /// rows ascending then columns ascending.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row\tcolumn\tvalue")?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                writeln!(w, "{r}\t{c}\t{v}")?;
            }
        }
        Ok(())
    }
}

/// Sliding n-gram counts over one token sequence. Tokens shorter than `n`
/// yield the empty map.
pub fn extract_ngrams(tokens: &[String], n: usize) -> Result<HashMap<String, usize>> {
    if n == 0 {
        return Err(Error::Config("ngram order must be at least 1".into()));
    }
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.join(" ")).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

pub(crate) fn idf_value(mode: IdfMode, n_docs: usize, df: u32) -> f64 {
    match mode {
        IdfMode::Smooth => ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0,
        IdfMode::Plain => (n_docs as f64 / df as f64).ln() + 1.0,
    }
}

/// Embeds documents given as interned token-id sequences. `labels` and
/// `centers` are per-document metadata copied onto the rows.
pub(crate) fn tfidf_from_ids(
    docs: &[Vec<u32>],
    labels: Vec<Label>,
    centers: Vec<usize>,
    token_names: &[String],
    n: usize,
    idf: IdfMode,
    norm: NormMode,
) -> Result<(FeatureMatrix, Vocabulary)> {
    debug_assert_eq!(docs.len(), labels.len());
    debug_assert_eq!(docs.len(), centers.len());
    if n == 0 {
        return Err(Error::Config("ngram order must be at least 1".into()));
    }
    let n_docs = docs.len();
    let mut terms: Vec<String> = Vec::new();
    let mut df: Vec<u32> = Vec::new();
    let mut vocab: HashMap<&[u32], u32> = HashMap::new();
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n_docs);
    for doc in docs {
        let mut counts: HashMap<u32, f64> = HashMap::new();
        if doc.len() >= n {
            for gram in doc.windows(n) {
                let col = *vocab.entry(gram).or_insert_with(|| {
                    let mut name = String::new();
                    for (i, &tok) in gram.iter().enumerate() {
                        if i > 0 {
                            name.push(' ');
                        }
                        name.push_str(&token_names[tok as usize]);
                    }
                    terms.push(name);
                    df.push(0);
                    (terms.len() - 1) as u32
                });
                *counts.entry(col).or_insert(0.0) += 1.0;
            }
        }
        let mut row: Vec<(u32, f64)> = counts.into_iter().collect();
        row.sort_unstable_by_key(|e| e.0);
        for &(col, _) in &row {
            df[col as usize] += 1;
        }
        rows.push(row);
    }
    if rows.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDocuments);
    }
    let idf_table: Vec<f64> = df.iter().map(|&d| idf_value(idf, n_docs, d)).collect();
    for row in &mut rows {
        for (col, v) in row.iter_mut() {
            *v *= idf_table[*col as usize];
        }
        if norm == NormMode::L2 {
            let sq: f64 = row.iter().map(|(_, v)| v * v).sum();
            if sq > 0.0 {
                let inv = 1.0 / sq.sqrt();
                for (_, v) in row.iter_mut() {
                    *v *= inv;
                }
            }
        }
    }
    let n_cols = terms.len();
    Ok((
        FeatureMatrix {
            n_cols,
            rows,
            row_labels: labels,
            row_centers: centers,
        },
        Vocabulary {
            terms,
            df,
            n_docs,
        },
    ))
}

/// Embeds super-verses directly from their string tokens. The heavy path
/// in the pipeline goes through `TokenIndex` instead; this entry point
/// serves callers that already hold materialized windows.
pub fn tfidf_matrix(
    supers: &[SuperVerse],
    config: &EmbedConfig,
) -> Result<(FeatureMatrix, Vocabulary)> {
    config.validate()?;
    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<&str, u32> = HashMap::new();
    let mut docs: Vec<Vec<u32>> = Vec::with_capacity(supers.len());
    for sv in supers {
        let mut ids = Vec::with_capacity(sv.tokens.len());
        for tok in &sv.tokens {
            let id = *lookup.entry(tok.as_str()).or_insert_with(|| {
                names.push(tok.clone());
                (names.len() - 1) as u32
            });
            ids.push(id);
        }
        docs.push(ids);
    }
    let labels = supers.iter().map(|s| s.label).collect();
    let centers = supers.iter().map(|s| s.center).collect();
    tfidf_from_ids(
        &docs,
        labels,
        centers,
        &names,
        config.ngram_n,
        config.idf,
        config.norm,
    )
}
