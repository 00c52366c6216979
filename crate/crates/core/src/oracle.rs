//! Synthetic data with planted concepts, and slow reference implementations
//! of the metric and of Ward clustering used to check the fast ones.
//!
//! The references deliberately share nothing with the production code beyond
//! the input types: plain member lists, nested loops, and centroids
//! recomputed from scratch at every step.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::concepts::ConceptSet;
use crate::dataset::{EmbeddingDataset, HumanOntology, TokenRecord};
use crate::error::{invalid, Result};
use crate::kmeans::{ClusterAssignment, Method};
use crate::matrix::Matrix;

/// Gaussian-blob generator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Rows to generate.
    pub n_points: usize,
    /// Dimensionality.
    pub dim: usize,
    /// Planted components, one label each.
    pub n_components: usize,
    /// Typical distance between component centres in units of the
    /// per-coordinate noise standard deviation.
    pub separation: f64,
    /// Zipf exponent of component sizes; 0 gives equal sizes.
    pub label_skew: f64,
    /// Fraction of rows turned into phrasal units with span 2 to 5.
    pub phrasal_fraction: f64,
    /// Word types per component relative to its size (at least 8 types).
    pub vocab_ratio: f64,
    /// Seed.
    pub seed: u64,
}

impl SynthConfig {
    /// A well-separated, Zipf-skewed configuration.
    pub fn new(n_points: usize, dim: usize, n_components: usize, seed: u64) -> Self {
        Self {
            n_points,
            dim,
            n_components,
            separation: 50.0,
            label_skew: 1.0,
            phrasal_fraction: 0.0,
            vocab_ratio: 0.05,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.dim == 0 || self.n_components == 0 {
            return Err(invalid!("n_points, dim and n_components must be positive"));
        }
        if self.n_components > self.n_points {
            return Err(invalid!("{} components for {} points", self.n_components, self.n_points));
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(invalid!("separation must be positive"));
        }
        if !(self.label_skew >= 0.0 && self.label_skew.is_finite()) {
            return Err(invalid!("label_skew must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.phrasal_fraction) {
            return Err(invalid!("phrasal_fraction must lie in [0, 1]"));
        }
        if !(self.vocab_ratio >= 0.0 && self.vocab_ratio.is_finite()) {
            return Err(invalid!("vocab_ratio must be non-negative"));
        }
        Ok(())
    }
}

/// Generated data with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthData {
    /// Rows and token records; every token carries its component's label.
    pub dataset: EmbeddingDataset,
    /// Component of every row.
    pub component_of: Vec<usize>,
    /// Rows per component.
    pub component_sizes: Vec<usize>,
}

/// Sizes proportional to `1 / (c + 1)^skew`, at least one each, summing to
/// `n` (largest remainder, ties to the lower index).
pub fn zipf_sizes(n: usize, components: usize, skew: f64) -> Vec<usize> {
    let w: Vec<f64> = (0..components).map(|c| ((c + 1) as f64).powf(-skew)).collect();
    let total: f64 = w.iter().sum();
    let spare = (n - components) as f64;
    let mut sizes: Vec<usize> = Vec::with_capacity(components);
    let mut rem: Vec<(f64, usize)> = Vec::with_capacity(components);
    for (c, wc) in w.iter().enumerate() {
        let share = spare * wc / total;
        let fl = share.floor();
        sizes.push(1 + fl as usize);
        rem.push((share - fl, c));
    }
    let mut left = n - sizes.iter().sum::<usize>();
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in &rem {
        if left == 0 {
            break;
        }
        sizes[c] += 1;
        left -= 1;
    }
    sizes
}

/// Draws the planted dataset.
///
/// Component `c` has centre `N(0, s²I)` with `s = separation / √(2·dim)`, so
/// centres sit about `separation` apart, and rows are the centre plus unit
/// Gaussian noise. Its rows use `max(8, ⌈vocab_ratio · size⌉)` word types:
/// the first rows take every type once and the rest draw types with Zipf(1)
/// weights. Rows are shuffled and the chosen phrasal rows get a span length
/// drawn uniformly from 2 to 5.
pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = zipf_sizes(cfg.n_points, cfg.n_components, cfg.label_skew);
    let spread = cfg.separation / (2.0 * cfg.dim as f64).sqrt();
    let d = cfg.dim;

    let mut rows: Vec<(usize, String, Vec<f32>)> = Vec::with_capacity(cfg.n_points);
    for (c, &size) in sizes.iter().enumerate() {
        let centre: Vec<f64> = (0..d)
            .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let types = ((cfg.vocab_ratio * size as f64).ceil() as usize).max(8);
        let cdf: Vec<f64> = (0..types)
            .scan(0.0, |acc, t| {
                *acc += 1.0 / (t + 1) as f64;
                Some(*acc)
            })
            .collect();
        let total = cdf[types - 1];
        for r in 0..size {
            let t = if r < types {
                r
            } else {
                let u = rng.random::<f64>() * total;
                cdf.partition_point(|&v| v <= u).min(types - 1)
            };
            let v = centre
                .iter()
                .map(|&m| (m + rng.sample::<f64, _>(StandardNormal)) as f32)
                .collect();
            rows.push((c, format!("c{c}w{t}"), v));
        }
    }
    rows.shuffle(&mut rng);

    let n = cfg.n_points;
    let n_phrasal = (cfg.phrasal_fraction * n as f64).round() as usize;
    let mut span = vec![1usize; n];
    for i in rand::seq::index::sample(&mut rng, n, n_phrasal) {
        span[i] = rng.random_range(2..=5);
    }

    let mut data = Vec::with_capacity(n * d);
    let mut tokens = Vec::with_capacity(n);
    let mut component_of = Vec::with_capacity(n);
    for (i, (c, word, v)) in rows.into_iter().enumerate() {
        data.extend_from_slice(&v);
        let mut t = TokenRecord::word(i, &word, Some(&format!("L{c}")));
        t.sentence_idx = i / 20;
        t.token_idx = i % 20;
        t.span_len = span[i];
        tokens.push(t);
        component_of.push(c);
    }
    Ok(SynthData {
        dataset: EmbeddingDataset::new(0, Matrix::new(n, d, data)?, tokens)?,
        component_of,
        component_sizes: sizes,
    })
}

/// Exact fraction `num / den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    /// Numerator.
    pub num: u64,
    /// Denominator.
    pub den: u64,
}

impl Frac {
    fn reduced(num: u64, den: u64) -> Self {
        let (mut a, mut b) = (num, den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        Self {
            num: num / a,
            den: den / a,
        }
    }
}

/// Reference metric values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteLambda {
    /// Aligned concepts over concepts.
    pub alignment: Frac,
    /// Covered labels over labels.
    pub coverage: Frac,
    /// Mean of the two.
    pub lambda: Frac,
}

/// θ-alignment by exhaustive pairwise intersection. `coverage_by_label_size`
/// switches the coverage denominator from the concept to the label.
pub fn brute_force_lambda(
    cs: &ConceptSet,
    ont: &HumanOntology,
    theta_num: u64,
    theta_den: u64,
    coverage_by_label_size: bool,
) -> BruteLambda {
    let encoded: Vec<Vec<usize>> = cs.concepts.iter().map(|c| c.member_ids.clone()).collect();
    let human: Vec<Vec<usize>> = ont.iter().map(|(_, ids)| ids.to_vec()).collect();
    let meets = |inter: usize, whole: usize| inter as u128 * theta_den as u128 >= theta_num as u128 * whole as u128;

    let mut aligned = 0u64;
    for e in &encoded {
        let mut hit = false;
        for h in &human {
            let inter = e.iter().filter(|t| h.contains(t)).count();
            hit |= meets(inter, e.len());
        }
        aligned += hit as u64;
    }
    let mut covered = 0u64;
    for h in &human {
        let mut hit = false;
        for e in &encoded {
            let inter = h.iter().filter(|t| e.contains(t)).count();
            let whole = if coverage_by_label_size { h.len() } else { e.len() };
            hit |= meets(inter, whole);
        }
        covered += hit as u64;
    }
    let (ne, nh) = (encoded.len() as u64, human.len() as u64);
    BruteLambda {
        alignment: Frac::reduced(aligned, ne),
        coverage: Frac::reduced(covered, nh),
        lambda: Frac::reduced(aligned * nh + covered * ne, 2 * ne * nh),
    }
}

/// Largest input accepted by [`brute_force_ward`].
pub const BRUTE_WARD_MAX_POINTS: usize = 64;

/// Ward clustering into `k` clusters by recomputing every pairwise merge cost
/// from cluster means at every step. Among equal costs the pair with the
/// smallest (lower member id, higher member id) wins, where a cluster is
/// named by its smallest member. Labels are numbered by first appearance.
pub fn brute_force_ward(x: &Matrix, k: usize) -> Result<ClusterAssignment> {
    let n = x.rows();
    if n > BRUTE_WARD_MAX_POINTS {
        return Err(invalid!("brute-force Ward is limited to {BRUTE_WARD_MAX_POINTS} points"));
    }
    if k == 0 || k > n {
        return Err(invalid!("k = {k} outside 1..={n}"));
    }
    let mean = |members: &[usize]| -> Vec<f64> {
        let mut m = vec![0.0f64; x.cols()];
        for &i in members {
            for (a, &v) in m.iter_mut().zip(x.row(i)) {
                *a += v as f64;
            }
        }
        m.iter_mut().for_each(|a| *a /= members.len() as f64);
        m
    };
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let means: Vec<Vec<f64>> = clusters.iter().map(|c| mean(c)).collect();
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let d2: f64 = means[a].iter().zip(&means[b]).map(|(p, q)| (p - q) * (p - q)).sum();
                let cost = na * nb / (na + nb) * d2;
                // Clusters are kept sorted by smallest member, so (a, b)
                // order is the (min id, max id) order.
                if best.map_or(true, |(c, _, _)| cost < c) {
                    best = Some((cost, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least two clusters");
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
    }
    let mut labels = vec![usize::MAX; n];
    let mut order: Vec<&Vec<usize>> = clusters.iter().collect();
    order.sort_by_key(|c| c[0]);
    let mut inertia = 0.0;
    for (l, c) in order.iter().enumerate() {
        let m = mean(c);
        for &i in c.iter() {
            labels[i] = l;
            inertia += x.row(i).iter().zip(&m).map(|(&v, &u)| (v as f64 - u).powi(2)).sum::<f64>();
        }
    }
    Ok(ClusterAssignment {
        labels,
        k,
        inertia,
        method: Method::Agglomerative,
        seed: 0,
        iterations_run: n - k,
    })
}
