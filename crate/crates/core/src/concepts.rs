//! Encoded concepts: clusters projected onto token occurrences, the word-type
//! filter, and size and phrasal diagnostics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{EmbeddingDataset, TokenRecord};
use crate::error::{invalid, Error, Result};
use crate::kmeans::ClusterAssignment;

/// One non-empty cluster as a set of token occurrences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    /// Cluster id.
    pub concept_id: usize,
    /// Member token ids, increasing.
    pub member_ids: Vec<usize>,
    /// Occurrences per surface form.
    pub type_counts: BTreeMap<String, usize>,
}

impl Concept {
    /// Builds a concept from member ids and the token table.
    pub fn new(concept_id: usize, mut member_ids: Vec<usize>, tokens: &[TokenRecord]) -> Result<Self> {
        if member_ids.is_empty() {
            return Err(Error::Empty("concept without members"));
        }
        member_ids.sort_unstable();
        if member_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid!("concept {concept_id} lists a member twice"));
        }
        let mut type_counts = BTreeMap::new();
        for &m in &member_ids {
            let t = tokens
                .get(m)
                .ok_or_else(|| invalid!("member {m} outside the {} tokens", tokens.len()))?;
            *type_counts.entry(t.surface.clone()).or_insert(0) += 1;
        }
        Ok(Self {
            concept_id,
            member_ids,
            type_counts,
        })
    }

    /// Member count.
    pub fn size(&self) -> usize {
        self.member_ids.len()
    }

    /// Distinct surface forms.
    pub fn unique_types(&self) -> usize {
        self.type_counts.len()
    }

    /// The `n` most frequent surfaces, ties alphabetical.
    pub fn top_types(&self, n: usize) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> = self.type_counts.iter().map(|(s, &c)| (s.as_str(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v.truncate(n);
        v
    }
}

/// The encoded concepts of one clustering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSet {
    /// Concepts in increasing id order.
    pub concepts: Vec<Concept>,
    /// Whether the word-type filter has been applied.
    pub filtered: bool,
    /// Threshold of the applied filter (0 when unfiltered).
    pub min_types: usize,
}

impl ConceptSet {
    /// Number of concepts.
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    /// Whether there are no concepts.
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Builds an unfiltered set from explicit member lists, checking that ids
    /// are distinct and members do not overlap.
    pub fn from_members<I>(groups: I, tokens: &[TokenRecord]) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Vec<usize>)>,
    {
        let mut seen = vec![false; tokens.len()];
        let mut concepts: Vec<Concept> = Vec::new();
        for (id, members) in groups {
            let c = Concept::new(id, members, tokens)?;
            for &m in &c.member_ids {
                if core::mem::replace(&mut seen[m], true) {
                    return Err(invalid!("token {m} appears in two concepts"));
                }
            }
            concepts.push(c);
        }
        concepts.sort_by_key(|c| c.concept_id);
        if concepts.windows(2).any(|w| w[0].concept_id == w[1].concept_id) {
            return Err(invalid!("duplicate concept id"));
        }
        Ok(Self {
            concepts,
            filtered: false,
            min_types: 0,
        })
    }
}

/// One concept per non-empty cluster of `assignment`.
pub fn build_concepts(assignment: &ClusterAssignment, ds: &EmbeddingDataset) -> Result<ConceptSet> {
    concepts_from_labels(&assignment.labels, ds.tokens())
}

/// [`build_concepts`] from bare labels and the token record of every point.
pub fn concepts_from_labels(labels: &[usize], tokens: &[TokenRecord]) -> Result<ConceptSet> {
    if labels.is_empty() {
        return Err(Error::Empty("assignment has no labels"));
    }
    if labels.len() != tokens.len() {
        return Err(Error::LengthMismatch {
            expected: tokens.len(),
            got: labels.len(),
        });
    }
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut members = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    ConceptSet::from_members(
        members.into_iter().enumerate().filter(|(_, m)| !m.is_empty()),
        tokens,
    )
}

/// Keeps concepts with strictly more than `min_types` distinct surfaces.
/// Re-filtering with the same threshold changes nothing; a filtered set keeps
/// the larger of the two thresholds.
pub fn filter_concepts(cs: &ConceptSet, min_types: usize) -> ConceptSet {
    ConceptSet {
        concepts: cs
            .concepts
            .iter()
            .filter(|c| c.unique_types() > min_types)
            .cloned()
            .collect(),
        filtered: true,
        min_types: if cs.filtered { cs.min_types.max(min_types) } else { min_types },
    }
}

/// Concept sizes binned by `bin_width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeHistogram {
    /// Bin width; bin `b` covers sizes `b·w + 1 ..= (b + 1)·w`.
    pub bin_width: usize,
    /// Concepts per bin, covering sizes 1 through the largest.
    pub counts: Vec<usize>,
    /// Lower median of the sizes.
    pub median: usize,
    /// Largest size.
    pub max_size: usize,
}

impl SizeHistogram {
    /// Inclusive size range of bin `b`.
    pub fn bin_range(&self, b: usize) -> (usize, usize) {
        (b * self.bin_width + 1, (b + 1) * self.bin_width)
    }
}

/// Histogram of concept sizes.
pub fn size_histogram(cs: &ConceptSet, bin_width: usize) -> Result<SizeHistogram> {
    let sizes: Vec<usize> = cs.concepts.iter().map(Concept::size).collect();
    sizes_histogram(&sizes, bin_width)
}

/// Histogram of an explicit size list.
pub fn sizes_histogram(sizes: &[usize], bin_width: usize) -> Result<SizeHistogram> {
    if sizes.is_empty() {
        return Err(Error::Empty("no concepts to histogram"));
    }
    if bin_width == 0 {
        return Err(invalid!("bin width must be at least 1"));
    }
    if sizes.contains(&0) {
        return Err(invalid!("concept sizes must be at least 1"));
    }
    let max_size = *sizes.iter().max().expect("non-empty");
    let mut counts = vec![0; max_size.div_ceil(bin_width)];
    for &s in sizes {
        counts[(s - 1) / bin_width] += 1;
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    Ok(SizeHistogram {
        bin_width,
        counts,
        median: sorted[(sorted.len() - 1) / 2],
        max_size,
    })
}

/// Phrasal members (span length 2 to 5) across concepts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhrasalCounts {
    /// Occurrences per span length; index 0 is length 2.
    pub occurrences: [usize; 4],
    /// Distinct surfaces per span length.
    pub types: [usize; 4],
}

impl PhrasalCounts {
    /// Occurrences of span length `n` (0 outside 2..=5).
    pub fn count(&self, n: usize) -> usize {
        if (2..=5).contains(&n) {
            self.occurrences[n - 2]
        } else {
            0
        }
    }
}

/// Counts concept members whose span length is 2 to 5.
pub fn phrasal_counts(cs: &ConceptSet, tokens: &[TokenRecord]) -> Result<PhrasalCounts> {
    let mut out = PhrasalCounts::default();
    let mut types: [Vec<&str>; 4] = Default::default();
    for c in &cs.concepts {
        for &m in &c.member_ids {
            let t = tokens
                .get(m)
                .ok_or_else(|| invalid!("member {m} outside the {} tokens", tokens.len()))?;
            if (2..=5).contains(&t.span_len) {
                out.occurrences[t.span_len - 2] += 1;
                types[t.span_len - 2].push(&t.surface);
            }
        }
    }
    for (slot, mut v) in out.types.iter_mut().zip(types) {
        v.sort_unstable();
        v.dedup();
        *slot = v.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::Method;
    use crate::matrix::Matrix;

    fn toks(surfaces: &[&str]) -> Vec<TokenRecord> {
        surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| TokenRecord::word(i, s, None))
            .collect()
    }

    fn ds(surfaces: &[&str]) -> EmbeddingDataset {
        let n = surfaces.len();
        EmbeddingDataset::new(0, Matrix::new(n, 1, vec![0.0; n]).unwrap(), toks(surfaces)).unwrap()
    }

    fn assign(labels: Vec<usize>, k: usize) -> ClusterAssignment {
        ClusterAssignment {
            labels,
            k,
            inertia: 0.0,
            method: Method::KMeans,
            seed: 0,
            iterations_run: 0,
        }
    }

    #[test]
    fn projection() {
        let cs = build_concepts(&assign(vec![0, 0, 1], 2), &ds(&["a", "b", "a"])).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.concepts[0].unique_types(), 2);
        assert_eq!(cs.concepts[1].unique_types(), 1);
        assert!(!cs.filtered);
    }

    #[test]
    fn empty_clusters_vanish() {
        let cs = build_concepts(&assign(vec![4, 0, 2, 2], 5), &ds(&["a", "b", "c", "d"])).unwrap();
        let ids: Vec<usize> = cs.concepts.iter().map(|c| c.concept_id).collect();
        assert_eq!(ids, vec![0, 2, 4]);
        let sizes: usize = cs.concepts.iter().map(Concept::size).sum();
        assert_eq!(sizes, 4);
    }

    #[test]
    fn bad_assignments() {
        assert!(build_concepts(&assign(vec![], 1), &ds(&["a"])).is_err());
        assert!(build_concepts(&assign(vec![0, 0], 1), &ds(&["a"])).is_err());
    }

    #[test]
    fn filter_is_strict() {
        let words = ["a", "b", "c", "d", "e", "f", "a", "b", "c", "d", "e"];
        let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let cs = build_concepts(&assign(labels, 2), &ds(&words)).unwrap();
        let f = filter_concepts(&cs, 5);
        assert_eq!(f.concepts.len(), 1);
        assert_eq!(f.concepts[0].concept_id, 0);
        assert!(f.filtered && f.min_types == 5);
        assert_eq!(filter_concepts(&cs, 0).len(), 2);
        let none = filter_concepts(&cs, 6);
        assert!(none.is_empty() && none.filtered);
        assert_eq!(filter_concepts(&f, 5), f);
    }

    #[test]
    fn medians_and_bins() {
        assert_eq!(sizes_histogram(&[1, 2, 3], 1).unwrap().median, 2);
        assert_eq!(sizes_histogram(&[2, 4], 1).unwrap().median, 2);
        let h = sizes_histogram(&[1, 10, 11, 25], 10).unwrap();
        assert_eq!(h.counts, vec![2, 1, 1]);
        assert_eq!(h.bin_range(1), (11, 20));
        assert!(sizes_histogram(&[], 10).is_err());
    }

    #[test]
    fn phrasal_spans() {
        let mut t = toks(&["a", "b c", "b c", "d e f", "g h i j k", "l m n o p q"]);
        for (r, s) in t.iter_mut().zip([1, 2, 2, 3, 5, 6]) {
            r.span_len = s;
        }
        let cs = ConceptSet::from_members([(0, vec![0, 1, 2]), (1, vec![3, 4, 5])], &t).unwrap();
        let p = phrasal_counts(&cs, &t).unwrap();
        assert_eq!(p.occurrences, [2, 1, 0, 1]);
        assert_eq!(p.types, [1, 1, 0, 1]);
        assert_eq!(p.count(6), 0);
    }

    #[test]
    fn top_types_order() {
        let t = toks(&["x", "y", "y", "z", "z"]);
        let c = Concept::new(0, vec![0, 1, 2, 3, 4], &t).unwrap();
        assert_eq!(c.top_types(2), vec![("y", 2), ("z", 2)]);
    }
}
