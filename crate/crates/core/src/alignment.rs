//! θ-alignment between encoded concepts and a human ontology.
//!
//! An encoded concept `C_e` is aligned when some label set `C_h` satisfies
//! `|C_e ∩ C_h| / |C_e| ≥ θ`; a label is covered when some encoded concept
//! satisfies the same inequality for it. The score λ is the mean of the
//! aligned fraction of concepts and the covered fraction of labels. All
//! comparisons and fractions are exact rationals, so θ = 0.95 accepts 19 of
//! 20 members.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_rational::Ratio;

use crate::concepts::ConceptSet;
use crate::dataset::HumanOntology;
use crate::error::{invalid, Error, Result};

/// A threshold in (0, 1] held as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theta(Ratio<u64>);

impl Theta {
    /// `num / den`; must lie in (0, 1].
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(invalid!("theta {num}/{den} outside (0, 1]"));
        }
        Ok(Self(Ratio::new(num, den)))
    }

    /// Reduced numerator.
    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    /// Reduced denominator.
    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `part / whole ≥ θ`, exactly.
    #[inline]
    pub fn admits(&self, part: usize, whole: usize) -> bool {
        (part as u128) * (self.denom() as u128) >= (self.numer() as u128) * (whole as u128)
    }
}

impl Default for Theta {
    fn default() -> Self {
        let (n, d) = crate::defaults::THETA;
        Self(Ratio::new(n, d))
    }
}

impl FromStr for Theta {
    type Err = Error;

    /// Parses decimals (`0.95`, `1`, `1.0`) and fractions (`19/20`) without
    /// going through binary floating point.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || invalid!("cannot parse theta {s:?}");
        if let Some((n, d)) = s.split_once('/') {
            return Theta::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) || int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Theta::new(num, den)
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Denominator of the coverage test for a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverageDenominator {
    /// `|C_e ∩ C_h| / |C_e| ≥ θ`, the same test as alignment.
    #[default]
    EncodedConcept,
    /// `|C_e ∩ C_h| / |C_h| ≥ θ`: the concept must hold most of the label.
    HumanConcept,
}

impl FromStr for CoverageDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encoded" | "ce" => Ok(Self::EncodedConcept),
            "human" | "ch" => Ok(Self::HumanConcept),
            other => Err(invalid!("unknown coverage denominator {other}")),
        }
    }
}

/// Metric settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AlignmentOptions {
    /// Purity threshold.
    pub theta: Theta,
    /// Coverage denominator.
    pub coverage_denominator: CoverageDenominator,
}

/// Exact fraction plus its rendering helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction(pub Ratio<u64>);

impl Fraction {
    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Percentage in tenths of a percent, rounded half to even.
    pub fn percent_tenths(&self) -> u64 {
        let x = *self.0.numer() as u128 * 1000;
        let d = *self.0.denom() as u128;
        let (q, r) = (x / d, x % d);
        let up = 2 * r > d || (2 * r == d && q % 2 == 1);
        (q + up as u128) as u64
    }

    /// Percentage with one decimal, rounded half to even.
    pub fn percent_string(&self) -> String {
        let t = self.percent_tenths();
        alloc::format!("{}.{}", t / 10, t % 10)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Full result of [`theta_alignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    /// Settings used.
    pub options: AlignmentOptions,
    /// Aligned concepts over all concepts.
    pub alignment: Fraction,
    /// Covered labels over all labels.
    pub coverage: Fraction,
    /// Mean of the two.
    pub lambda: Fraction,
    /// Ids of aligned concepts, increasing.
    pub aligned_concept_ids: Vec<usize>,
    /// Covered labels, sorted.
    pub covered_labels: Vec<String>,
    /// For every label, the number of concepts aligned to it.
    pub per_label_aligned_counts: BTreeMap<String, usize>,
    /// Concepts aligned to more than one label (only possible for θ ≤ ½).
    pub multi_aligned: usize,
    /// Number of encoded concepts scored.
    pub n_concepts: usize,
    /// Number of labels.
    pub n_labels: usize,
    /// Whether the concept set was filtered, and with which threshold.
    pub min_types: Option<usize>,
    /// Concept members without a label; they count against alignment.
    pub unlabeled_members: usize,
}

/// Scores `cs` against `ont`.
pub fn theta_alignment(
    cs: &ConceptSet,
    ont: &HumanOntology,
    opts: &AlignmentOptions,
) -> Result<AlignmentReport> {
    if cs.is_empty() {
        return Err(Error::Empty("no encoded concepts to align"));
    }
    if ont.label_count() == 0 {
        return Err(Error::NoLabels);
    }
    let labels: Vec<&str> = ont.labels().collect();
    let label_sizes: Vec<usize> = ont.iter().map(|(_, ids)| ids.len()).collect();
    let max_id = cs
        .concepts
        .iter()
        .filter_map(|c| c.member_ids.last())
        .chain(ont.iter().filter_map(|(_, ids)| ids.iter().max()))
        .copied()
        .max()
        .unwrap_or(0);
    let mut label_of = vec![u32::MAX; max_id + 1];
    for (h, (_, ids)) in ont.iter().enumerate() {
        for &i in ids {
            label_of[i] = h as u32;
        }
    }

    let theta = opts.theta;
    let mut covered = vec![false; labels.len()];
    let mut per_label = vec![0usize; labels.len()];
    let mut aligned_ids = Vec::new();
    let mut multi = 0;
    let mut unlabeled = 0;
    let mut counts = vec![0usize; labels.len()];
    let mut touched = Vec::new();
    for c in &cs.concepts {
        for &m in &c.member_ids {
            let h = label_of[m];
            if h == u32::MAX {
                unlabeled += 1;
                continue;
            }
            let h = h as usize;
            if counts[h] == 0 {
                touched.push(h);
            }
            counts[h] += 1;
        }
        let size = c.size();
        let mut hits = 0;
        for &h in &touched {
            if theta.admits(counts[h], size) {
                hits += 1;
                per_label[h] += 1;
            }
            let cov = match opts.coverage_denominator {
                CoverageDenominator::EncodedConcept => theta.admits(counts[h], size),
                CoverageDenominator::HumanConcept => theta.admits(counts[h], label_sizes[h]),
            };
            covered[h] |= cov;
        }
        if hits > 0 {
            aligned_ids.push(c.concept_id);
        }
        if hits > 1 {
            multi += 1;
        }
        for h in touched.drain(..) {
            counts[h] = 0;
        }
    }

    let e = cs.len() as u64;
    let hn = labels.len() as u64;
    let a = aligned_ids.len() as u64;
    let cv = covered.iter().filter(|&&c| c).count() as u64;
    aligned_ids.sort_unstable();
    Ok(AlignmentReport {
        options: *opts,
        alignment: Fraction(Ratio::new(a, e)),
        coverage: Fraction(Ratio::new(cv, hn)),
        lambda: Fraction(Ratio::new(a * hn + cv * e, 2 * e * hn)),
        aligned_concept_ids: aligned_ids,
        covered_labels: labels
            .iter()
            .zip(&covered)
            .filter(|(_, &c)| c)
            .map(|(l, _)| l.to_string())
            .collect(),
        per_label_aligned_counts: labels
            .iter()
            .zip(&per_label)
            .map(|(l, &n)| (l.to_string(), n))
            .collect(),
        multi_aligned: multi,
        n_concepts: cs.len(),
        n_labels: labels.len(),
        min_types: cs.filtered.then_some(cs.min_types),
        unlabeled_members: unlabeled,
    })
}

/// Labels with at least one aligned concept and their counts, most aligned
/// first (ties alphabetical).
pub fn per_label_breakdown(report: &AlignmentReport) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = report
        .per_label_aligned_counts
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(l, &n)| (l.clone(), n))
        .collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TokenRecord;

    fn setup(words: &[(&str, Option<&str>)], groups: &[&[usize]]) -> (ConceptSet, HumanOntology) {
        let toks: Vec<TokenRecord> = words
            .iter()
            .enumerate()
            .map(|(i, (w, l))| TokenRecord::word(i, w, *l))
            .collect();
        let cs = ConceptSet::from_members(
            groups.iter().enumerate().map(|(i, g)| (i, g.to_vec())),
            &toks,
        )
        .unwrap();
        (cs, crate::dataset::build_ontology(&toks).unwrap())
    }

    #[test]
    fn theta_parsing() {
        assert_eq!("0.95".parse::<Theta>().unwrap(), Theta::new(19, 20).unwrap());
        assert_eq!("1".parse::<Theta>().unwrap(), Theta::new(1, 1).unwrap());
        assert_eq!("1.0".parse::<Theta>().unwrap(), Theta::new(1, 1).unwrap());
        assert_eq!(".5".parse::<Theta>().unwrap(), Theta::new(1, 2).unwrap());
        assert_eq!("19/20".parse::<Theta>().unwrap(), Theta::default());
        for bad in ["0", "1.01", "-0.5", "x", "", "0.9e1", "1/0"] {
            assert!(bad.parse::<Theta>().is_err(), "{bad}");
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let t = Theta::default();
        assert!(t.admits(19, 20));
        assert!(!t.admits(18, 19));
        assert!(t.admits(95, 100));
        assert!(!t.admits(94, 99));
    }

    #[test]
    fn identity() {
        let words = [("a", Some("X")), ("b", Some("X")), ("c", Some("Y"))];
        let (cs, ont) = setup(&words, &[&[0, 1], &[2]]);
        let r = theta_alignment(&cs, &ont, &AlignmentOptions::default()).unwrap();
        assert_eq!(r.lambda.0, Ratio::new(1, 1));
        assert_eq!(per_label_breakdown(&r), vec![("X".into(), 1), ("Y".into(), 1)]);
    }

    #[test]
    fn nineteen_of_twenty() {
        let mut words = vec![("w", Some("VBD")); 19];
        words.push(("z", Some("NN")));
        let all: Vec<usize> = (0..20).collect();
        let (cs, ont) = setup(&words, &[&all]);
        let r = theta_alignment(&cs, &ont, &AlignmentOptions::default()).unwrap();
        assert_eq!(r.aligned_concept_ids, vec![0]);
        assert_eq!(r.covered_labels, vec!["VBD".to_string()]);
        assert_eq!(r.lambda.0, Ratio::new(3, 4));
    }

    #[test]
    fn half_and_half() {
        let mut words = vec![("x", Some("X")); 6];
        words.extend(vec![("x", Some("X")); 6]);
        words.extend(vec![("y", Some("Y")); 6]);
        let e1: Vec<usize> = (0..6).collect();
        let e2: Vec<usize> = (6..18).collect();
        let (cs, ont) = setup(&words, &[&e1, &e2]);
        let r = theta_alignment(&cs, &ont, &AlignmentOptions::default()).unwrap();
        assert_eq!(r.alignment.0, Ratio::new(1, 2));
        assert_eq!(r.coverage.0, Ratio::new(1, 2));
        assert_eq!(r.lambda.0, Ratio::new(1, 2));
        assert_eq!(per_label_breakdown(&r), vec![("X".into(), 1)]);
        assert_eq!(r.multi_aligned, 0);
    }

    #[test]
    fn human_denominator_is_stricter_for_split_labels() {
        let words = vec![("x", Some("X")); 4];
        let (cs, ont) = setup(&words, &[&[0, 1], &[2, 3]]);
        let mut opts = AlignmentOptions::default();
        assert_eq!(theta_alignment(&cs, &ont, &opts).unwrap().coverage.0, Ratio::new(1, 1));
        opts.coverage_denominator = CoverageDenominator::HumanConcept;
        assert_eq!(theta_alignment(&cs, &ont, &opts).unwrap().coverage.0, Ratio::new(0, 1));
    }

    #[test]
    fn unlabeled_members_dilute() {
        let words = [("a", Some("X")), ("b", None)];
        let (cs, ont) = setup(&words, &[&[0, 1]]);
        let r = theta_alignment(&cs, &ont, &AlignmentOptions::default()).unwrap();
        assert_eq!(r.alignment.0, Ratio::new(0, 1));
        assert_eq!(r.unlabeled_members, 1);
    }

    #[test]
    fn low_theta_allows_multi_alignment() {
        let words = [("a", Some("X")), ("b", Some("Y"))];
        let (cs, ont) = setup(&words, &[&[0, 1]]);
        let opts = AlignmentOptions {
            theta: Theta::new(1, 2).unwrap(),
            ..Default::default()
        };
        let r = theta_alignment(&cs, &ont, &opts).unwrap();
        assert_eq!(r.multi_aligned, 1);
        assert_eq!(per_label_breakdown(&r).len(), 2);
    }

    #[test]
    fn percentages_round_half_even() {
        let p = |n, d| Fraction(Ratio::new(n, d)).percent_string();
        assert_eq!(p(1, 2), "50.0");
        assert_eq!(p(1, 3), "33.3");
        assert_eq!(p(2, 3), "66.7");
        assert_eq!(p(1, 16), "6.2");
        assert_eq!(p(3, 16), "18.8");
        assert_eq!(p(1, 1), "100.0");
    }

    #[test]
    fn empty_inputs() {
        let words = [("a", Some("X"))];
        let (cs, ont) = setup(&words, &[&[0]]);
        let empty = crate::concepts::filter_concepts(&cs, 5);
        assert!(theta_alignment(&empty, &ont, &AlignmentOptions::default()).is_err());
    }
}
