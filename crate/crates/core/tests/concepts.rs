mod common;

use std::collections::{BTreeMap, BTreeSet};

use lcd_core::concepts::sizes_histogram;
use lcd_core::oracle::{generate, SynthConfig};
use lcd_core::{
    build_concepts, build_ontology, concepts_from_labels, filter_concepts, frequency_filter,
    phrasal_counts, size_histogram, ConceptSet, EmbeddingDataset, Error, KMeansConfig, Matrix,
    TokenRecord,
};
use rand::Rng;

fn dataset(tokens: Vec<TokenRecord>) -> EmbeddingDataset {
    let n = tokens.len();
    let data = (0..n).map(|i| i as f32).collect();
    EmbeddingDataset::new(0, Matrix::new(n, 1, data).unwrap(), tokens).unwrap()
}

fn words(surfaces: &[String]) -> Vec<TokenRecord> {
    surfaces.iter().enumerate().map(|(i, s)| TokenRecord::word(i, s, Some("L"))).collect()
}

#[test]
fn filter_can_remove_everything() {
    let surfaces: Vec<String> = (0..400).map(|i| format!("s{}", i % 100)).collect();
    let mut counts = BTreeMap::new();
    for s in &surfaces {
        *counts.entry(s.clone()).or_insert(0) += 1;
    }
    assert!(counts.values().all(|&c| c == 4));
    let ds = dataset(words(&surfaces));
    assert!(matches!(frequency_filter(&ds, 5, usize::MAX), Err(Error::Empty(_))));
    assert_eq!(frequency_filter(&ds, 4, 4).unwrap().n_points(), 400);
}

#[test]
fn unbounded_filter_is_the_identity() {
    let data = generate(&SynthConfig::new(500, 3, 5, 1)).unwrap();
    let ds = &data.dataset;
    assert_eq!(&frequency_filter(ds, 0, usize::MAX).unwrap(), ds);
    assert_eq!(&frequency_filter(ds, 1, usize::MAX).unwrap(), ds);
}

#[test]
fn filter_bounds_are_inclusive_and_ids_dense() {
    let mut surfaces = Vec::new();
    for (w, c) in [("a", 1), ("b", 2), ("c", 3), ("d", 4)] {
        surfaces.extend(std::iter::repeat(w.to_string()).take(c));
    }
    let ds = dataset(words(&surfaces));
    let f = frequency_filter(&ds, 2, 3).unwrap();
    let kept: Vec<&str> = f.tokens().iter().map(|t| t.surface.as_str()).collect();
    assert_eq!(kept, ["b", "b", "c", "c", "c"]);
    assert!(f.tokens().iter().enumerate().all(|(i, t)| t.id == i));
    assert_eq!(f.vectors().as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    assert!(frequency_filter(&ds, 3, 2).is_err());
}

#[test]
fn planted_bigrams_are_counted() {
    let mut r = common::rng(6);
    let mut tokens = Vec::new();
    let mut planted = [0usize; 4];
    for i in 0..3000 {
        let mut t = TokenRecord::word(i, &format!("w{}", i % 50), Some("L"));
        t.span_len = if i < 1000 { 2 } else { [1, 3, 4, 5][r.random_range(0..4)] };
        if (2..=5).contains(&t.span_len) {
            planted[t.span_len - 2] += 1;
        }
        tokens.push(t);
    }
    assert_eq!(planted[0], 1000);
    let labels: Vec<usize> = (0..3000).map(|_| r.random_range(0..7)).collect();
    let cs = concepts_from_labels(&labels, &tokens).unwrap();
    let p = phrasal_counts(&cs, &tokens).unwrap();
    assert_eq!(p.count(2), 1000);
    assert_eq!(p.occurrences, planted);
    assert_eq!(p.types[0], 50);
    assert_eq!((p.count(1), p.count(6)), (0, 0));
}

#[test]
fn synthetic_phrasal_rows_are_all_found() {
    let mut cfg = SynthConfig::new(4000, 8, 20, 3);
    cfg.phrasal_fraction = 0.3;
    let data = generate(&cfg).unwrap();
    let ds = &data.dataset;
    let mut want = [0usize; 4];
    for t in ds.tokens() {
        if t.span_len > 1 {
            want[t.span_len - 2] += 1;
        }
    }
    assert_eq!(want.iter().sum::<usize>(), 1200);
    let a = lcd_core::kmeans_fit(ds, &KMeansConfig::new(20).with_restarts(1)).unwrap();
    let cs = build_concepts(&a, ds).unwrap();
    assert_eq!(cs.concepts.iter().map(|c| c.size()).sum::<usize>(), 4000);
    assert_eq!(phrasal_counts(&cs, ds.tokens()).unwrap().occurrences, want);
}

#[test]
fn concepts_partition_the_rows() {
    let data = generate(&SynthConfig::new(3000, 8, 30, 9)).unwrap();
    let ds = &data.dataset;
    let a = lcd_core::kmeans_fit(ds, &KMeansConfig::new(50).with_restarts(1)).unwrap();
    let cs = build_concepts(&a, ds).unwrap();
    let mut seen = BTreeSet::new();
    for c in &cs.concepts {
        for &m in &c.member_ids {
            assert!(seen.insert(m));
            assert_eq!(a.labels[m], c.concept_id);
        }
        let types: BTreeSet<&str> = c.member_ids.iter().map(|&m| ds.tokens()[m].surface.as_str()).collect();
        assert_eq!(types.len(), c.unique_types());
    }
    assert_eq!(seen.len(), 3000);
    assert_eq!(cs.len(), a.distinct_labels());

    let f = filter_concepts(&cs, 5);
    assert!(f.concepts.iter().all(|c| c.unique_types() > 5));
    assert_eq!(
        f.len(),
        cs.concepts.iter().filter(|c| c.unique_types() >= 6).count()
    );
    assert_eq!(filter_concepts(&f, 5), f);
    let h = size_histogram(&cs, 25).unwrap();
    assert_eq!(h.counts.iter().sum::<usize>(), cs.len());
    let ont = build_ontology(ds.tokens()).unwrap();
    assert_eq!(ont.label_count(), 30);
    assert_eq!(ont.labeled_tokens(), 3000);
}

#[test]
fn handcrafted_histogram() {
    let h = sizes_histogram(&[1, 2, 10, 11, 20, 21, 35, 7], 10).unwrap();
    assert_eq!(h.counts, vec![4, 2, 1, 1]);
    assert_eq!((h.median, h.max_size), (10, 35));
    assert_eq!(h.bin_range(2), (21, 30));
    let h = sizes_histogram(&[5], 1).unwrap();
    assert_eq!(h.counts, vec![0, 0, 0, 0, 1]);
    assert!(sizes_histogram(&[], 3).is_err());
    assert!(sizes_histogram(&[3], 0).is_err());
}

#[test]
fn concept_histogram_matches_member_lists() {
    let tokens = words(&(0..60).map(|i| format!("t{i}")).collect::<Vec<_>>());
    let groups = vec![(0..1).collect::<Vec<_>>(), (1..4).collect(), (4..20).collect(), (20..60).collect()];
    let cs = ConceptSet::from_members(groups.into_iter().enumerate(), &tokens).unwrap();
    let h = size_histogram(&cs, 5).unwrap();
    assert_eq!(h.counts, vec![2, 0, 0, 1, 0, 0, 0, 1]);
    assert_eq!(h.median, 3);
}

#[test]
fn overlapping_or_empty_members_are_rejected() {
    let tokens = words(&["a".into(), "b".into(), "c".into()]);
    assert!(ConceptSet::from_members([(0, vec![0, 1]), (1, vec![1, 2])], &tokens).is_err());
    assert!(ConceptSet::from_members([(0, vec![])], &tokens).is_err());
    assert!(ConceptSet::from_members([(0, vec![3])], &tokens).is_err());
    assert!(ConceptSet::from_members([(0, vec![0]), (0, vec![1])], &tokens).is_err());
    assert!(concepts_from_labels(&[0, 1], &tokens).is_err());
}
