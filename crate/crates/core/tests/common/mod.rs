#![allow(dead_code)]

use textpart_core::{
    tfidf_matrix, Corpus, EmbedConfig, FeatureMatrix, IdfMode, Label, LabelMap, NormMode,
    Representation, Streams, SuperVerse, VerseRecord,
};

/// Builds a FeatureMatrix with entry (i, j) = counts[i][j] + 1 through
/// the real embedding path: the +1 keeps every column in every document,
/// so df = n and plain idf ln(n/df)+1 = 1, making entries exact integers.
/// The uniform offset is immaterial to Euclidean clustering and cancels
/// in centroid differences, and every oracle comparison reads the
/// materialized matrix, not `counts`.
pub fn matrix_from_counts(counts: &[Vec<usize>]) -> FeatureMatrix {
    let d = counts[0].len();
    let supers: Vec<SuperVerse> = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut tokens = Vec::new();
            for (j, &c) in row.iter().enumerate() {
                // One guaranteed occurrence keeps df = n for every column.
                for _ in 0..c + 1 {
                    tokens.push(format!("c{j}"));
                }
            }
            assert_eq!(row.len(), d);
            SuperVerse {
                center: i,
                start: i,
                end: i,
                label: if i % 2 == 0 { Label::A } else { Label::B },
                tokens,
            }
        })
        .collect();
    let mut config = EmbedConfig::new(Representation::Lexeme, 0, 1);
    config.idf = IdfMode::Plain;
    config.norm = NormMode::None;
    let (m, vocab) = tfidf_matrix(&supers, &config).unwrap();
    assert_eq!(vocab.len(), d);
    m
}

/// Corpus from a label pattern like "PPNNP"; 'P' (or 'A') maps to class A.
/// Every verse gets one unique token plus one shared token, so windows can
/// be told apart by content.
pub fn corpus_from_pattern(pattern: &str) -> Corpus {
    let labels: Vec<Label> = pattern
        .chars()
        .map(|c| if c == 'P' || c == 'A' { Label::A } else { Label::B })
        .collect();
    let tokens: Vec<Vec<String>> = (0..labels.len())
        .map(|i| vec![format!("v{i}"), "sh".to_string()])
        .collect();
    corpus_with_tokens(&labels, &tokens)
}

pub fn corpus_with_tokens(labels: &[Label], tokens: &[Vec<String>]) -> Corpus {
    assert_eq!(labels.len(), tokens.len());
    let verses = labels
        .iter()
        .zip(tokens)
        .enumerate()
        .map(|(i, (&label, toks))| VerseRecord {
            index: i,
            reference: format!("r:{}", i + 1),
            label,
            streams: Streams {
                lexeme: toks.clone(),
                pos_low: toks.clone(),
                pos_high: toks.clone(),
            },
        })
        .collect();
    Corpus::from_verses("test", LabelMap::default(), verses).expect("valid test corpus")
}

pub fn labels_of(pattern: &str) -> Vec<Label> {
    pattern
        .chars()
        .map(|c| if c == 'P' || c == 'A' { Label::A } else { Label::B })
        .collect()
}
