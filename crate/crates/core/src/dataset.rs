//! Embedding datasets with token annotations, frequency filtering, and
//! construction of human-defined concepts from labels.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

/// One token occurrence (or pooled phrasal unit) backing a dataset row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    /// Row index of this record; ids are dense and positional.
    pub id: usize,
    /// Index of the source sentence.
    pub sentence_idx: usize,
    /// Position within the sentence.
    pub token_idx: usize,
    /// Surface form. Word-type identity is the exact, case-sensitive string.
    pub surface: String,
    /// Ontology tag, when annotated.
    pub label: Option<String>,
    /// Number of words covered: 1 for a single token, 2..=5 for phrasal units.
    pub span_len: usize,
}

impl TokenRecord {
    /// A single-word record with no sentence position.
    pub fn word(id: usize, surface: &str, label: Option<&str>) -> Self {
        Self {
            id,
            sentence_idx: 0,
            token_idx: id,
            surface: surface.to_string(),
            label: label.map(ToString::to_string),
            span_len: 1,
        }
    }

    fn check(&self, row: usize) -> Result<()> {
        let bad = |reason: &str| Error::InvalidToken {
            row,
            reason: reason.to_string(),
        };
        if self.id != row {
            return Err(Error::InvalidToken {
                row,
                reason: alloc::format!("id {} does not index its own row", self.id),
            });
        }
        if self.surface.is_empty() {
            return Err(bad("empty surface"));
        }
        if self.span_len == 0 {
            return Err(bad("span_len must be at least 1"));
        }
        Ok(())
    }
}

/// An `N × D` matrix of contextualized vectors for one layer, plus the token
/// record behind every row. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    layer_id: u32,
    vectors: Matrix,
    tokens: Vec<TokenRecord>,
}

impl EmbeddingDataset {
    /// Validates and wraps vectors and tokens.
    pub fn new(layer_id: u32, vectors: Matrix, tokens: Vec<TokenRecord>) -> Result<Self> {
        if tokens.len() != vectors.rows() {
            return Err(Error::TokenCountMismatch {
                vectors: vectors.rows(),
                tokens: tokens.len(),
            });
        }
        if let Some((row, col)) = vectors.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        for (row, t) in tokens.iter().enumerate() {
            t.check(row)?;
        }
        Ok(Self {
            layer_id,
            vectors,
            tokens,
        })
    }

    /// N.
    pub fn n_points(&self) -> usize {
        self.vectors.rows()
    }

    /// D.
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    /// Source layer.
    pub fn layer_id(&self) -> u32 {
        self.layer_id
    }

    /// The vectors.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// Token records, one per row.
    pub fn tokens(&self) -> &[TokenRecord] {
        &self.tokens
    }

    /// Consumes the dataset.
    pub fn into_parts(self) -> (u32, Matrix, Vec<TokenRecord>) {
        (self.layer_id, self.vectors, self.tokens)
    }

    /// The rows listed in `rows` (ascending), with ids re-densified.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let vectors = self.vectors.select_rows(rows);
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(new_id, &r)| TokenRecord {
                id: new_id,
                ..self.tokens[r].clone()
            })
            .collect();
        Self::new(self.layer_id, vectors, tokens)
    }
}

/// Human-defined concepts: every label maps to the ids of the token
/// occurrences annotated with it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HumanOntology {
    concepts: BTreeMap<String, Vec<usize>>,
}

impl HumanOntology {
    /// Builds an ontology from explicit label sets. Ids within a set are
    /// sorted and deduplicated; a token may appear under one label only.
    pub fn from_sets<I, S>(sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<usize>)>,
        S: Into<String>,
    {
        let mut concepts = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (label, mut ids) in sets {
            let label = label.into();
            ids.sort_unstable();
            ids.dedup();
            for &id in &ids {
                if seen.insert(id, ()).is_some() {
                    return Err(invalid!("token {id} appears under more than one label"));
                }
            }
            if concepts.insert(label.clone(), ids).is_some() {
                return Err(invalid!("duplicate label {label}"));
            }
        }
        if concepts.is_empty() {
            return Err(Error::NoLabels);
        }
        Ok(Self { concepts })
    }

    /// |C_H|.
    pub fn label_count(&self) -> usize {
        self.concepts.len()
    }

    /// Token ids carrying `label`.
    pub fn get(&self, label: &str) -> Option<&[usize]> {
        self.concepts.get(label).map(Vec::as_slice)
    }

    /// Labels in sorted order, with their token ids.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.concepts
            .iter()
            .map(|(l, ids)| (l.as_str(), ids.as_slice()))
    }

    /// Labels in sorted order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.concepts.keys().map(String::as_str)
    }

    /// Number of labeled tokens.
    pub fn labeled_tokens(&self) -> usize {
        self.concepts.values().map(Vec::len).sum()
    }

    /// Merges label `b` into label `a`.
    pub fn merged(&self, a: &str, b: &str) -> Result<Self> {
        let mut concepts = self.concepts.clone();
        let moved = concepts
            .remove(b)
            .ok_or_else(|| invalid!("unknown label {b}"))?;
        let target = concepts
            .get_mut(a)
            .ok_or_else(|| invalid!("unknown label {a}"))?;
        target.extend(moved);
        target.sort_unstable();
        Ok(Self { concepts })
    }
}

/// Groups labeled tokens into one human-defined concept per distinct label.
/// Unlabeled tokens belong to no concept.
pub fn build_ontology(tokens: &[TokenRecord]) -> Result<HumanOntology> {
    let mut concepts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for t in tokens {
        if let Some(label) = &t.label {
            concepts.entry(label.clone()).or_default().push(t.id);
        }
    }
    if concepts.is_empty() {
        return Err(Error::NoLabels);
    }
    Ok(HumanOntology { concepts })
}

/// Row indices (ascending) whose surface form occurs between `min_occ` and
/// `max_occ` times, inclusive, counting rows.
pub fn frequency_filter_rows(
    tokens: &[TokenRecord],
    min_occ: usize,
    max_occ: usize,
) -> Result<Vec<usize>> {
    if min_occ > max_occ {
        return Err(invalid!("min_occ {min_occ} exceeds max_occ {max_occ}"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.surface.as_str()).or_default() += 1;
    }
    let kept: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let c = counts[t.surface.as_str()];
            min_occ <= c && c <= max_occ
        })
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::Empty("frequency filter removed every point"));
    }
    Ok(kept)
}

/// Keeps the token occurrences whose surface form occurs between `min_occ`
/// and `max_occ` times (inclusive). Row order is preserved and ids are
/// re-densified. Pass `usize::MAX` for an unbounded maximum.
pub fn frequency_filter(
    ds: &EmbeddingDataset,
    min_occ: usize,
    max_occ: usize,
) -> Result<EmbeddingDataset> {
    let rows = frequency_filter_rows(ds.tokens(), min_occ, max_occ)?;
    ds.subset(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ds_from(surfaces: &[&str], labels: &[Option<&str>]) -> EmbeddingDataset {
        let tokens = surfaces
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (s, l))| TokenRecord::word(i, s, *l))
            .collect::<Vec<_>>();
        let data = (0..surfaces.len() * 2).map(|v| v as f32).collect();
        EmbeddingDataset::new(3, Matrix::new(surfaces.len(), 2, data).unwrap(), tokens).unwrap()
    }

    #[test]
    fn declared_sizes_round_trip() {
        let ds = ds_from(&["a", "b", "c"], &[None, None, None]);
        assert_eq!((ds.n_points(), ds.dim(), ds.layer_id()), (3, 2, 3));
    }

    #[test]
    fn rejects_token_count_mismatch() {
        let tokens = vec![TokenRecord::word(0, "a", None), TokenRecord::word(1, "b", None)];
        let err = EmbeddingDataset::new(0, Matrix::new(3, 2, vec![0.0; 6]).unwrap(), tokens);
        assert_eq!(
            err.unwrap_err(),
            Error::TokenCountMismatch {
                vectors: 3,
                tokens: 2
            }
        );
    }

    #[test]
    fn rejects_nan_with_row() {
        let mut data = vec![0.0f32; 20];
        data[15] = f32::NAN;
        let tokens = (0..10).map(|i| TokenRecord::word(i, "w", None)).collect();
        let err = EmbeddingDataset::new(0, Matrix::new(10, 2, data).unwrap(), tokens).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 7, col: 1 });
    }

    #[test]
    fn rejects_bad_records() {
        let mut t = vec![TokenRecord::word(1, "a", None)];
        let m = Matrix::new(1, 1, vec![0.0]).unwrap();
        assert!(EmbeddingDataset::new(0, m.clone(), t.clone()).is_err());
        t[0].id = 0;
        t[0].span_len = 0;
        assert!(EmbeddingDataset::new(0, m.clone(), t.clone()).is_err());
        t[0].span_len = 1;
        t[0].surface.clear();
        assert!(EmbeddingDataset::new(0, m, t).is_err());
    }

    #[test]
    fn ontology_groups_labels() {
        let ds = ds_from(&["x", "y", "z"], &[Some("VBD"), Some("VBD"), Some("NNS")]);
        let ont = build_ontology(ds.tokens()).unwrap();
        assert_eq!(ont.get("VBD"), Some(&[0usize, 1][..]));
        assert_eq!(ont.get("NNS"), Some(&[2usize][..]));
        assert_eq!(ont.label_count(), 2);

        let ds = ds_from(&["p", "q", "r", "s"], &[Some("A"), Some("B"), Some("A"), Some("B")]);
        let ont = build_ontology(ds.tokens()).unwrap();
        assert!(ont.iter().all(|(_, ids)| ids.len() == 2));
    }

    #[test]
    fn ontology_requires_labels() {
        let ds = ds_from(&["a", "b"], &[None, None]);
        assert_eq!(build_ontology(ds.tokens()), Err(Error::NoLabels));
    }

    #[test]
    fn ontology_sizes_sum_to_labeled_tokens() {
        let ds = ds_from(&["a", "b", "c", "d"], &[Some("A"), None, Some("B"), Some("A")]);
        let ont = build_ontology(ds.tokens()).unwrap();
        assert_eq!(ont.labeled_tokens(), 3);
    }

    #[test]
    fn filter_keeps_frequent_rows() {
        let ds = ds_from(&["a", "a", "b"], &[None, None, None]);
        let f = frequency_filter(&ds, 2, 10).unwrap();
        assert_eq!(f.n_points(), 2);
        assert!(f.tokens().iter().all(|t| t.surface == "a"));
        assert_eq!(f.vectors().row(1), ds.vectors().row(1));
        assert_eq!(f.tokens()[1].id, 1);
    }

    #[test]
    fn unbounded_filter_is_identity() {
        let ds = ds_from(&["a", "b", "b", "c"], &[Some("A"), None, None, Some("C")]);
        assert_eq!(frequency_filter(&ds, 1, usize::MAX).unwrap(), ds);
    }

    #[test]
    fn filter_can_empty_the_dataset() {
        let surfaces: Vec<alloc::string::String> =
            (0..400).map(|i| alloc::format!("w{}", i % 100)).collect();
        let refs: Vec<&str> = surfaces.iter().map(|s| s.as_str()).collect();
        let ds = ds_from(&refs, &vec![None; 400]);
        assert_eq!(
            frequency_filter(&ds, 5, 1000).unwrap_err(),
            Error::Empty("frequency filter removed every point")
        );
        assert!(frequency_filter(&ds, 6, 5).is_err());
    }

    #[test]
    fn filter_is_case_sensitive() {
        let ds = ds_from(&["The", "the", "the"], &[None, None, None]);
        let f = frequency_filter(&ds, 2, 2).unwrap();
        assert_eq!(f.n_points(), 2);
    }

    #[test]
    fn merged_labels() {
        let ont = HumanOntology::from_sets([("A", vec![0, 2]), ("B", vec![1])]).unwrap();
        let m = ont.merged("A", "B").unwrap();
        assert_eq!(m.get("A"), Some(&[0usize, 1, 2][..]));
        assert_eq!(m.label_count(), 1);
        assert!(HumanOntology::from_sets([("A", vec![0]), ("B", vec![0])]).is_err());
    }
}
