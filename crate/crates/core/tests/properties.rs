mod common;

use common::corpus_with_tokens;
use proptest::prelude::*;
use textpart_core::{
    balanced_accuracy, cyclic_shift, explained_variance_truncate, labeling_agreement, p_value,
    tfidf_matrix, window_members, EmbedConfig, IdfMode, Label, NormMode, Representation,
    SuperVerse,
};

fn to_labels(bits: &[bool]) -> Vec<Label> {
    bits.iter()
        .map(|&b| if b { Label::A } else { Label::B })
        .collect()
}

prop_compose! {
    fn verse_rows()(rows in prop::collection::vec(
        (any::<bool>(), prop::collection::vec("[a-d]", 1..5)),
        2..30,
    )) -> (Vec<Label>, Vec<Vec<String>>) {
        let labels = to_labels(&rows.iter().map(|(b, _)| *b).collect::<Vec<_>>());
        let tokens = rows.iter().map(|(_, t)| t.clone()).collect();
        (labels, tokens)
    }
}

proptest! {
    #[test]
    fn blocks_tile_the_corpus((labels, tokens) in verse_rows()) {
        let corpus = corpus_with_tokens(&labels, &tokens);
        let blocks = corpus.all_blocks();
        let n = labels.len();

        prop_assert!(!blocks.is_empty());
        prop_assert_eq!(blocks[0].start, 0);
        prop_assert_eq!(blocks.last().unwrap().end, n - 1);
        for pair in blocks.windows(2) {
            // Adjacent blocks touch and carry different labels.
            prop_assert_eq!(pair[1].start, pair[0].end + 1);
            prop_assert_ne!(pair[0].label, pair[1].label);
        }
        let mut rebuilt = Vec::with_capacity(n);
        for b in &blocks {
            prop_assert!(!b.is_empty());
            for &l in &labels[b.start..=b.end] {
                prop_assert_eq!(l, b.label);
                rebuilt.push(b.label);
            }
        }
        prop_assert_eq!(rebuilt, labels);
    }

    #[test]
    fn cyclic_shifts_compose_and_preserve_the_multiset(
        bits in prop::collection::vec(any::<bool>(), 1..40),
        a in 0usize..40,
        b in 0usize..40,
    ) {
        let labels = to_labels(&bits);
        let n = labels.len();
        let (a, b) = (a % n, b % n);

        prop_assert_eq!(cyclic_shift(&labels, 0), labels.clone());
        let twice = cyclic_shift(&cyclic_shift(&labels, a), b);
        prop_assert_eq!(twice, cyclic_shift(&labels, (a + b) % n));

        let mut orig: Vec<usize> = labels.iter().map(|l| l.index()).collect();
        let mut shifted: Vec<usize> = cyclic_shift(&labels, a).iter().map(|l| l.index()).collect();
        orig.sort_unstable();
        shifted.sort_unstable();
        prop_assert_eq!(orig, shifted);
    }

    #[test]
    fn window_bounds_are_clipped_and_centered(
        n in 2usize..60,
        center in 0usize..60,
        k in 0usize..12,
    ) {
        let center = center % n;
        let (start, end) = window_members(n, center, k);
        prop_assert!(start <= center && center <= end);
        prop_assert!(end < n);
        let width = end - start + 1;
        prop_assert!(width <= 2 * k + 1);
        if center >= k && center + k < n {
            prop_assert_eq!(width, 2 * k + 1);
        }
        prop_assert_eq!(start, center.saturating_sub(k));
        prop_assert_eq!(end, (center + k).min(n - 1));
    }

    #[test]
    fn window_tokens_concatenate_member_verses(
        (labels, tokens) in verse_rows(),
        center in 0usize..30,
        k in 0usize..4,
    ) {
        let corpus = corpus_with_tokens(&labels, &tokens);
        let center = center % corpus.len();
        let sv = corpus.window(center, k, Representation::Lexeme);
        let (start, end) = window_members(corpus.len(), center, k);
        let expected: usize = (start..=end).map(|i| tokens[i].len()).sum();
        prop_assert_eq!(sv.tokens.len(), expected);
        prop_assert_eq!(sv.label, labels[center]);
        prop_assert_eq!(sv.center, center);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tfidf_matches_the_dense_oracle(
        docs in prop::collection::vec(prop::collection::vec("[a-c]", 0..5), 2..8),
        n in 1usize..=2,
        smooth in any::<bool>(),
        l2 in any::<bool>(),
    ) {
        prop_assume!(docs.iter().any(|d| d.len() >= n));
        let supers: Vec<SuperVerse> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| SuperVerse {
                center: i,
                start: i,
                end: i,
                label: if i % 2 == 0 { Label::A } else { Label::B },
                tokens: d.clone(),
            })
            .collect();
        let config = EmbedConfig {
            representation: Representation::Lexeme,
            window_k: 0,
            ngram_n: n,
            idf: if smooth { IdfMode::Smooth } else { IdfMode::Plain },
            norm: if l2 { NormMode::L2 } else { NormMode::None },
        };
        let (matrix, vocab) = tfidf_matrix(&supers, &config).unwrap();
        let (oracle_terms, oracle_rows) = textpart_oracle::dense_tfidf(&docs, n, smooth, l2);

        prop_assert_eq!(vocab.len(), oracle_terms.len());
        let dense = matrix.to_dense();
        for (col, term) in vocab.terms.iter().enumerate() {
            let ocol = oracle_terms.iter().position(|t| t == term).unwrap();
            for (row, orow) in dense.iter().zip(&oracle_rows) {
                prop_assert!(
                    (row[col] - orow[ocol]).abs() < 1e-12,
                    "term {} row mismatch", term
                );
            }
        }
    }

    #[test]
    fn balanced_accuracy_bounds_and_symmetries(
        pairs in prop::collection::vec((0u8..2, any::<bool>()), 2..60),
    ) {
        let assignment: Vec<u8> = pairs.iter().map(|(a, _)| *a).collect();
        let labels = to_labels(&pairs.iter().map(|(_, b)| *b).collect::<Vec<_>>());
        prop_assume!(labels.contains(&Label::A));
        prop_assume!(labels.contains(&Label::B));

        let score = balanced_accuracy(&assignment, &labels).unwrap();
        prop_assert!(score.ba >= 0.5 && score.ba <= 1.0);

        // Swapping cluster ids changes nothing.
        let swapped: Vec<u8> = assignment.iter().map(|&a| 1 - a).collect();
        let s2 = balanced_accuracy(&swapped, &labels).unwrap();
        prop_assert_eq!(score.ba, s2.ba);
        // The anchor flips with the ids, except when both alignments tie
        // and the tie rule picks alignment 0 on both sides.
        let t_a = labels.iter().filter(|&&l| l == Label::A).count() as f64;
        let t_b = labels.len() as f64 - t_a;
        let n_a0 = assignment
            .iter()
            .zip(&labels)
            .filter(|&(&a, &l)| a == 0 && l == Label::A)
            .count() as f64;
        let n_b1 = assignment
            .iter()
            .zip(&labels)
            .filter(|&(&a, &l)| a == 1 && l == Label::B)
            .count() as f64;
        let s_align0 = (n_a0 / t_a + n_b1 / t_b) / 2.0;
        let s_align1 = ((t_a - n_a0) / t_a + (t_b - n_b1) / t_b) / 2.0;
        if s_align0 != s_align1 {
            prop_assert_eq!(score.cluster_for_a, 1 - s2.cluster_for_a);
        }

        // Swapping class names changes nothing either.
        let flipped: Vec<Label> = labels.iter().map(|l| l.other()).collect();
        let s3 = balanced_accuracy(&assignment, &flipped).unwrap();
        prop_assert_eq!(score.ba, s3.ba);

        // Joint row permutation (here: reversal) is immaterial.
        let rev_a: Vec<u8> = assignment.iter().rev().copied().collect();
        let rev_l: Vec<Label> = labels.iter().rev().copied().collect();
        let s4 = balanced_accuracy(&rev_a, &rev_l).unwrap();
        prop_assert_eq!(score.ba, s4.ba);
    }

    #[test]
    fn truncation_keeps_a_minimal_prefix(
        loadings in prop::collection::vec(-5.0f64..5.0, 1..20),
        level in 0.01f64..=1.0,
    ) {
        let total: f64 = loadings.iter().map(|v| v * v).sum();
        prop_assume!(total > 1e-9);
        let kept = explained_variance_truncate(&loadings, level).unwrap();

        prop_assert!(!kept.is_empty());
        for pair in kept.windows(2) {
            let (q0, q1) = (
                loadings[pair[0]] * loadings[pair[0]],
                loadings[pair[1]] * loadings[pair[1]],
            );
            prop_assert!(q0 > q1 || (q0 == q1 && pair[0] < pair[1]));
        }
        for &i in &kept {
            prop_assert!(loadings[i] != 0.0);
        }
        let target = level * total - 1e-12 * total;
        let cum: f64 = kept.iter().map(|&i| loadings[i] * loadings[i]).sum();
        let nonzero = loadings.iter().filter(|&&v| v != 0.0).count();
        // Either the target is met or every non-zero loading is already in.
        prop_assert!(cum >= target || kept.len() == nonzero);
        if kept.len() > 1 {
            let prefix: f64 = kept[..kept.len() - 1]
                .iter()
                .map(|&i| loadings[i] * loadings[i])
                .sum();
            prop_assert!(prefix < target);
        }
    }

    #[test]
    fn p_value_is_the_add_one_fraction(
        values in prop::collection::vec(0.0f64..=1.0, 0..50),
        threshold in 0.0f64..=1.0,
    ) {
        let p = p_value(&values, threshold);
        let hits = values.iter().filter(|&&v| v >= threshold).count();
        prop_assert_eq!(p, (hits + 1) as f64 / (values.len() + 1) as f64);
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn agreement_is_a_symmetric_fraction(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..50),
    ) {
        let l1 = to_labels(&pairs.iter().map(|(a, _)| *a).collect::<Vec<_>>());
        let l2 = to_labels(&pairs.iter().map(|(_, b)| *b).collect::<Vec<_>>());
        let f = labeling_agreement(&l1, &l2).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, labeling_agreement(&l2, &l1).unwrap());
        prop_assert_eq!(labeling_agreement(&l1, &l1).unwrap(), 1.0);
        let comp: Vec<Label> = l1.iter().map(|l| l.other()).collect();
        prop_assert_eq!(labeling_agreement(&l1, &comp).unwrap(), 0.0);
    }

    #[test]
    fn subsamples_always_respect_the_class_floor(
        (labels, tokens) in verse_rows(),
        size_frac in 0.2f64..=1.0,
        seed in 0u64..1000,
    ) {
        let corpus = corpus_with_tokens(&labels, &tokens);
        let counts = corpus.class_counts();
        prop_assume!(counts[0] > 0 && counts[1] > 0);
        let n = corpus.len();
        let size = ((n as f64 * size_frac) as usize).clamp(2, n);
        let min = 1usize.min(size / 2).min(counts[0]).min(counts[1]);

        let picked = corpus.subsample(size, min, seed).unwrap();
        prop_assert_eq!(picked.len(), size);
        for pair in picked.windows(2) {
            prop_assert!(pair[0] < pair[1]);
        }
        let labs = corpus.labels();
        let a = picked.iter().filter(|&&i| labs[i] == Label::A).count();
        prop_assert!(a >= min && size - a >= min);
        prop_assert_eq!(corpus.subsample(size, min, seed).unwrap(), picked);
    }
}
