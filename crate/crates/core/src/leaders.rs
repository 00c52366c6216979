//! The Leaders algorithm: a single seeded pass that compresses the data to
//! leader groups, a search for the radius τ that hits a group budget, and
//! Ward clustering of the group centroids.
//!
//! In the pass every point, in a seeded random order, joins the first leader
//! (in creation order) within distance τ, or becomes a new leader. Groups are
//! stars around their leader, not transitive cliques.
//!
//! The exact mode scans the leaders in creation order but skips any leader
//! that a few pivot distances prove to be farther than τ. The approximate
//! mode only checks leaders proposed by a random-projection forest over the
//! leaders (rebuilt as their number doubles) plus those created since the
//! last rebuild, so it may miss a leader within τ.
//!
//! The number of leaders M(τ) usually falls as τ grows but is not monotone in
//! general: a larger radius can let an early point absorb a neighbour that
//! would otherwise have been a leader covering two later points.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agglomerative::{cut_tree, ward_fit_matrix};
use crate::error::{invalid, Result};
use crate::kmeans::{first_seen_relabel, ClusterAssignment, Method};
use crate::matrix::{sq_euclidean, sq_euclidean_mixed, Matrix};
use crate::rptree::RpForest;

/// How followers look for a leader within τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Checks every leader that could be within τ; never misses.
    #[default]
    Exact,
    /// Checks candidates from a random-projection forest; may miss.
    Approximate,
}

/// Output of one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadersCompression {
    /// Radius used.
    pub tau: f64,
    /// Seed of the pass order.
    pub order_seed: u64,
    /// Leader point ids in increasing order. Row `g` of `centroids` and
    /// `group_sizes[g]` belong to `leader_ids[g]`.
    pub leader_ids: Vec<usize>,
    /// Leader point id of every point; leaders map to themselves.
    pub follower_of: Vec<usize>,
    /// Mean of each group.
    pub centroids: Matrix,
    /// Members per group.
    pub group_sizes: Vec<usize>,
}

impl LeadersCompression {
    /// Number of leaders M.
    pub fn m(&self) -> usize {
        self.leader_ids.len()
    }

    /// Group index of every point (position of its leader in `leader_ids`).
    pub fn group_of(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.follower_of.len()];
        for (g, &l) in self.leader_ids.iter().enumerate() {
            pos[l] = g;
        }
        self.follower_of.iter().map(|&l| pos[l]).collect()
    }
}

/// Budgeted τ search parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSearchConfig {
    /// Desired number of leaders.
    pub target_m: usize,
    /// Accepted relative deviation of M from `target_m`.
    pub rel_band: f64,
    /// Maximum number of passes.
    pub max_probes: usize,
    /// Seed of the pass order.
    pub seed: u64,
    /// Neighbour search mode.
    pub mode: SearchMode,
}

impl TauSearchConfig {
    /// Defaults for everything but the budget.
    pub fn new(target_m: usize) -> Self {
        Self {
            target_m,
            rel_band: crate::defaults::TAU_REL_BAND,
            max_probes: crate::defaults::TAU_MAX_PROBES,
            seed: 0,
            mode: SearchMode::Exact,
        }
    }

    /// Builder-style seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.target_m == 0 {
            return Err(invalid!("leader budget must be at least 1"));
        }
        if self.target_m > n {
            return Err(invalid!("leader budget {} exceeds the {n} points", self.target_m));
        }
        if !(self.rel_band > 0.0 && self.rel_band < 1.0) {
            return Err(invalid!("rel_band must lie in (0, 1)"));
        }
        if self.max_probes == 0 {
            return Err(invalid!("max_probes must be at least 1"));
        }
        Ok(())
    }

    fn accepts(&self, m: usize) -> bool {
        (m as f64 - self.target_m as f64).abs() <= self.rel_band * self.target_m as f64
    }
}

/// One τ probe of the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    /// Radius tried.
    pub tau: f64,
    /// Leaders produced, or `None` when the pass was cut short because M
    /// exceeded the cap.
    pub m: Option<usize>,
}

/// Result of [`tau_binary_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct TauSearch {
    /// Chosen radius.
    pub tau: f64,
    /// Compression at that radius.
    pub compression: LeadersCompression,
    /// Every probe in order.
    pub probes: Vec<Probe>,
    /// Whether M landed inside the accepted band.
    pub accepted: bool,
}

const PIVOTS: usize = 8;
const PIVOT_SLACK: f64 = 1e-4;
const FOREST_TREES: usize = 4;
const FOREST_MIN_BATCH: usize = 64;

/// Per-dataset state shared by all passes with one order seed: the order and
/// pivot distances do not depend on τ.
pub struct PassContext<'a> {
    x: &'a Matrix,
    order_seed: u64,
    order: Vec<usize>,
    pivot_dist: Vec<f32>,
    n_pivots: usize,
    slack: f32,
}

impl<'a> PassContext<'a> {
    /// Draws the pass order and pivot distances.
    pub fn new(x: &'a Matrix, order_seed: u64) -> Self {
        let n = x.rows();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(order_seed));

        // Farthest-point pivots starting from the first point of the pass.
        let n_pivots = PIVOTS.min(n);
        let mut pivot_dist = vec![0.0f32; n * n_pivots];
        let mut min_d = vec![f32::INFINITY; n];
        let mut pivot = order.first().copied().unwrap_or(0);
        for p in 0..n_pivots {
            let c = x.row(pivot);
            let mut far = (pivot, -1.0f32);
            for i in 0..n {
                let d = sq_euclidean(x.row(i), c).sqrt();
                pivot_dist[i * n_pivots + p] = d;
                min_d[i] = min_d[i].min(d);
                if min_d[i] > far.1 {
                    far = (i, min_d[i]);
                }
            }
            pivot = far.0;
        }
        let slack = (PIVOT_SLACK * x.bounding_diagonal()) as f32;
        Self {
            x,
            order_seed,
            order,
            pivot_dist,
            n_pivots,
            slack,
        }
    }

    /// Pass order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Runs the pass; returns `None` as soon as more than `cap` leaders exist.
    pub fn pass(&self, tau: f64, mode: SearchMode, cap: usize) -> Option<LeadersCompression> {
        let n = self.x.rows();
        if tau == 0.0 {
            return self.zero_radius_pass(cap);
        }
        let tau_sq = (tau * tau) as f32;
        let tau_f = tau as f32 + self.slack;
        let p = self.n_pivots;
        let mut leaders: Vec<usize> = Vec::new();
        let mut leader_pd: Vec<f32> = Vec::new();
        let mut follower_of = vec![usize::MAX; n];

        let mut forest = RpForest::empty();
        let mut forest_rng = ChaCha8Rng::seed_from_u64(self.order_seed ^ 0x5eed_f0e5);
        let mut cand = Vec::new();

        for &i in &self.order {
            let xi = self.x.row(i);
            let pd = &self.pivot_dist[i * p..(i + 1) * p];
            let within = |g: usize| {
                let lp = &leader_pd[g * p..(g + 1) * p];
                pd.iter().zip(lp).all(|(a, b)| (a - b).abs() <= tau_f)
                    && sq_euclidean(xi, self.x.row(leaders[g])) <= tau_sq
            };
            let found = match mode {
                SearchMode::Exact => (0..leaders.len()).find(|&g| within(g)),
                SearchMode::Approximate => {
                    forest.candidates(xi, &mut cand);
                    cand.iter()
                        .map(|&g| g as usize)
                        .chain(forest.len()..leaders.len())
                        .find(|&g| within(g))
                }
            };
            match found {
                Some(g) => follower_of[i] = leaders[g],
                None => {
                    if leaders.len() == cap {
                        return None;
                    }
                    follower_of[i] = i;
                    leaders.push(i);
                    leader_pd.extend_from_slice(pd);
                    if mode == SearchMode::Approximate
                        && leaders.len() - forest.len() >= FOREST_MIN_BATCH.max(forest.len())
                    {
                        let x = self.x;
                        let ids = &leaders;
                        forest = RpForest::build(
                            leaders.len(),
                            |g| x.row(ids[g as usize]),
                            x.cols(),
                            FOREST_TREES,
                            &mut forest_rng,
                        );
                    }
                }
            }
        }
        Some(finish(self.x, tau, self.order_seed, follower_of))
    }

    /// τ = 0 groups identical vectors; sorting finds them without a scan.
    fn zero_radius_pass(&self, cap: usize) -> Option<LeadersCompression> {
        let n = self.x.rows();
        let key = |i: usize| -> Vec<u32> {
            // -0.0 and 0.0 are at distance zero; compare them equal.
            self.x.row(i).iter().map(|&v| (v + 0.0).to_bits()).collect()
        };
        let mut rank = vec![0usize; n];
        for (r, &i) in self.order.iter().enumerate() {
            rank[i] = r;
        }
        let mut by_key: Vec<(Vec<u32>, usize)> = (0..n).map(|i| (key(i), rank[i])).collect();
        by_key.sort_unstable();
        let mut follower_of = vec![usize::MAX; n];
        let mut m = 0;
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && by_key[end].0 == by_key[start].0 {
                end += 1;
            }
            let leader = self.order[by_key[start].1];
            for e in &by_key[start..end] {
                follower_of[self.order[e.1]] = leader;
            }
            m += 1;
            if m > cap {
                return None;
            }
            start = end;
        }
        Some(finish(self.x, 0.0, self.order_seed, follower_of))
    }
}

fn finish(x: &Matrix, tau: f64, order_seed: u64, follower_of: Vec<usize>) -> LeadersCompression {
    let n = x.rows();
    let d = x.cols();
    let leader_ids: Vec<usize> = (0..n).filter(|&i| follower_of[i] == i).collect();
    let mut pos = vec![usize::MAX; n];
    for (g, &l) in leader_ids.iter().enumerate() {
        pos[l] = g;
    }
    let m = leader_ids.len();
    let mut sums = vec![0.0f64; m * d];
    let mut group_sizes = vec![0usize; m];
    for i in 0..n {
        let g = pos[follower_of[i]];
        group_sizes[g] += 1;
        for (s, &v) in sums[g * d..(g + 1) * d].iter_mut().zip(x.row(i)) {
            *s += v as f64;
        }
    }
    let mut data = Vec::with_capacity(m * d);
    for g in 0..m {
        let inv = 1.0 / group_sizes[g] as f64;
        data.extend(sums[g * d..(g + 1) * d].iter().map(|&s| (s * inv) as f32));
    }
    LeadersCompression {
        tau,
        order_seed,
        leader_ids,
        follower_of,
        centroids: Matrix::new(m, d, data).expect("m >= 1, d >= 1"),
        group_sizes,
    }
}

/// One pass over `x` with radius `tau` in the order drawn from `order_seed`.
pub fn leaders_pass(x: &Matrix, tau: f64, order_seed: u64, mode: SearchMode) -> Result<LeadersCompression> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid!("tau must be finite and non-negative, got {tau}"));
    }
    Ok(PassContext::new(x, order_seed)
        .pass(tau, mode, usize::MAX)
        .expect("uncapped pass"))
}

/// Bisects τ until the pass yields `target_m` leaders within the band, or
/// returns the probe closest to the target after `max_probes` passes.
///
/// τ = 0 is probed first. The upper end starts at twice the largest distance
/// from the data mean (slightly inflated), where a single leader is
/// guaranteed.
pub fn tau_binary_search(x: &Matrix, cfg: &TauSearchConfig) -> Result<TauSearch> {
    let n = x.rows();
    cfg.validate(n)?;
    let ctx = PassContext::new(x, cfg.seed);
    // Passes producing far more leaders than wanted are cut short; they only
    // tell the search to grow τ.
    let cap = ((cfg.target_m as f64 * (1.0 + cfg.rel_band)).ceil() as usize)
        .saturating_mul(4)
        .max(cfg.target_m + 1);
    let mut probes = Vec::new();
    let mut best: Option<(usize, LeadersCompression)> = None;
    let keep = |comp: LeadersCompression, best: &mut Option<(usize, LeadersCompression)>| {
        let dist = comp.m().abs_diff(cfg.target_m);
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            *best = Some((dist, comp));
        }
    };

    let mean = x.column_means();
    let radius = x
        .iter_rows()
        .map(|r| sq_euclidean_mixed(r, &mean))
        .fold(0.0f64, f64::max)
        .sqrt();
    let mut lo = 0.0f64;
    let mut hi = 2.0 * radius * 1.01 + f64::MIN_POSITIVE;

    let first = ctx.pass(0.0, cfg.mode, cap);
    probes.push(Probe {
        tau: 0.0,
        m: first.as_ref().map(|c| c.m()),
    });
    if let Some(comp) = first {
        if cfg.accepts(comp.m()) || comp.m() < cfg.target_m {
            let accepted = cfg.accepts(comp.m());
            return Ok(TauSearch {
                tau: 0.0,
                compression: comp,
                probes,
                accepted,
            });
        }
        keep(comp, &mut best);
    }
    while probes.len() < cfg.max_probes {
        let tau = 0.5 * (lo + hi);
        if tau <= lo || tau >= hi {
            break;
        }
        let comp = ctx.pass(tau, cfg.mode, cap);
        probes.push(Probe {
            tau,
            m: comp.as_ref().map(|c| c.m()),
        });
        let Some(comp) = comp else {
            lo = tau;
            continue;
        };
        let m = comp.m();
        if cfg.accepts(m) {
            return Ok(TauSearch {
                tau,
                compression: comp,
                probes,
                accepted: true,
            });
        }
        if m > cfg.target_m {
            lo = tau;
        } else {
            hi = tau;
        }
        keep(comp, &mut best);
    }
    let comp = match best {
        Some((_, c)) => c,
        None => {
            // Every probe hit the cap; fall back to the guaranteed end.
            let c = ctx.pass(hi, cfg.mode, usize::MAX).expect("uncapped pass");
            probes.push(Probe { tau: hi, m: Some(c.m()) });
            c
        }
    };
    Ok(TauSearch {
        tau: comp.tau,
        accepted: cfg.accepts(comp.m()),
        compression: comp,
        probes,
    })
}

/// Ward-clusters the group centroids into `k` clusters and gives every point
/// the cluster of its group. Inertia is measured on the original points.
pub fn leaders_ward(
    x: &Matrix,
    comp: &LeadersCompression,
    k: usize,
    memory_budget: u64,
) -> Result<ClusterAssignment> {
    let m = comp.m();
    if k == 0 || k > m {
        return Err(invalid!("k = {k} outside 1..={m} leaders"));
    }
    let group_label = if m == 1 {
        vec![0]
    } else {
        cut_tree(&ward_fit_matrix(&comp.centroids, memory_budget)?, k)?.labels
    };
    let group_of = comp.group_of();
    let raw: Vec<usize> = group_of.iter().map(|&g| group_label[g]).collect();
    let labels = first_seen_relabel(&raw, k);
    Ok(ClusterAssignment {
        inertia: partition_sse(x, &labels, k),
        labels,
        k,
        method: Method::Leaders,
        seed: comp.order_seed,
        iterations_run: 0,
    })
}

/// Searches τ for the budget, then clusters the compressed data.
pub fn leaders_cluster(
    x: &Matrix,
    cfg: &TauSearchConfig,
    k: usize,
    memory_budget: u64,
) -> Result<(ClusterAssignment, TauSearch)> {
    let search = tau_binary_search(x, cfg)?;
    let mut a = leaders_ward(x, &search.compression, k, memory_budget)?;
    a.iterations_run = search.probes.len();
    Ok((a, search))
}

/// Sum of squared distances of points to their cluster means.
pub(crate) fn partition_sse(x: &Matrix, labels: &[usize], k: usize) -> f64 {
    let d = x.cols();
    let mut sums = vec![0.0f64; k * d];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.iter_rows().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l * d..(l + 1) * d].iter_mut().zip(row) {
            *s += v as f64;
        }
    }
    for l in 0..k {
        if counts[l] > 0 {
            let inv = 1.0 / counts[l] as f64;
            sums[l * d..(l + 1) * d].iter_mut().for_each(|s| *s *= inv);
        }
    }
    x.iter_rows()
        .zip(labels)
        .map(|(row, &l)| sq_euclidean_mixed(row, &sums[l * d..(l + 1) * d]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f32]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    /// Pass in the given order rather than a seeded one.
    fn pass_in_order(x: &Matrix, tau: f64, order: Vec<usize>) -> LeadersCompression {
        let mut ctx = PassContext::new(x, 0);
        ctx.order = order;
        ctx.pass(tau, SearchMode::Exact, usize::MAX).unwrap()
    }

    #[test]
    fn zero_radius_keeps_every_distinct_point() {
        let x = mat(&[&[0.0], &[1.0], &[10.0]]);
        let c = leaders_pass(&x, 0.0, 4, SearchMode::Exact).unwrap();
        assert_eq!(c.leader_ids, vec![0, 1, 2]);
        assert_eq!(c.centroids, x);
        let dup = mat(&[&[1.0, -0.0], &[2.0, 2.0], &[1.0, 0.0]]);
        let c = pass_in_order(&dup, 0.0, vec![2, 1, 0]);
        assert_eq!(c.follower_of, vec![2, 1, 2]);
    }

    #[test]
    fn hand_simulated_pass() {
        let x = mat(&[&[0.0], &[1.0], &[10.0]]);
        let c = pass_in_order(&x, 2.0, vec![0, 1, 2]);
        assert_eq!(c.leader_ids, vec![0, 2]);
        assert_eq!(c.follower_of, vec![0, 0, 2]);
        assert_eq!(c.centroids, mat(&[&[0.5], &[10.0]]));
        assert_eq!(c.group_sizes, vec![2, 1]);
    }

    #[test]
    fn huge_radius_gives_one_leader_at_the_mean() {
        let x = mat(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 4.0]]);
        let c = pass_in_order(&x, 100.0, vec![1, 0, 2]);
        assert_eq!(c.leader_ids, vec![1]);
        assert_eq!(c.follower_of, vec![1, 1, 1]);
        assert_eq!(c.centroids.row(0), &[2.0 / 3.0, 4.0 / 3.0]);
    }

    #[test]
    fn first_leader_wins_over_nearest() {
        let x = mat(&[&[0.0], &[3.0], &[2.9]]);
        let c = pass_in_order(&x, 3.0, vec![0, 1, 2]);
        assert_eq!(c.follower_of, vec![0, 0, 0]);
    }

    #[test]
    fn leader_count_is_not_monotone_in_tau() {
        // A larger radius lets A absorb B, whose own leadership would have
        // covered C and D.
        let x = mat(&[&[0.0, 0.0], &[1.4, 0.0], &[1.4, 1.0], &[1.4, -1.0]]);
        let order = vec![0, 1, 2, 3];
        assert_eq!(pass_in_order(&x, 1.0, order.clone()).m(), 2);
        assert_eq!(pass_in_order(&x, 1.5, order).m(), 3);
    }

    #[test]
    fn approximate_mode_respects_radius() {
        let mut rows = Vec::new();
        for i in 0..400 {
            let t = i as f32 * 0.37;
            rows.push([t.sin() * 5.0, t.cos() * 5.0, (i % 7) as f32]);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        for mode in [SearchMode::Exact, SearchMode::Approximate] {
            let c = leaders_pass(&x, 1.5, 3, mode).unwrap();
            for (i, &l) in c.follower_of.iter().enumerate() {
                assert!(sq_euclidean(x.row(i), x.row(l)) <= 2.25);
                assert_eq!(c.follower_of[l], l);
            }
            assert_eq!(c.group_sizes.iter().sum::<usize>(), 400);
        }
    }

    #[test]
    fn search_extremes() {
        let x = mat(&[&[0.0], &[1.0], &[3.0], &[7.0], &[15.0]]);
        let s = tau_binary_search(&x, &TauSearchConfig::new(5)).unwrap();
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.probes.len(), 1);
        let s = tau_binary_search(&x, &TauSearchConfig::new(1)).unwrap();
        assert_eq!(s.compression.m(), 1);
        assert!(s.accepted);
        assert!(tau_binary_search(&x, &TauSearchConfig::new(6)).is_err());
        assert!(tau_binary_search(&x, &TauSearchConfig::new(0)).is_err());
    }

    #[test]
    fn far_pairs_through_centroids() {
        let x = mat(&[
            &[0.0, 0.0],
            &[0.1, 0.0],
            &[100.0, 0.0],
            &[100.1, 0.0],
            &[0.0, 100.0],
            &[0.1, 100.0],
            &[100.0, 100.0],
            &[100.1, 100.0],
        ]);
        let (a, s) = leaders_cluster(&x, &TauSearchConfig::new(4), 2, u64::MAX).unwrap();
        assert_eq!(s.compression.m(), 4);
        let l = &a.labels;
        for p in 0..4 {
            assert_eq!(l[2 * p], l[2 * p + 1]);
        }
        assert_eq!(a.distinct_labels(), 2);
    }

    #[test]
    fn identical_points_need_k_one() {
        let x = mat(&[&[2.0], &[2.0], &[2.0]]);
        let (a, s) = leaders_cluster(&x, &TauSearchConfig::new(1), 1, u64::MAX).unwrap();
        assert_eq!(s.compression.m(), 1);
        assert_eq!(a.labels, vec![0, 0, 0]);
        assert_eq!(a.inertia, 0.0);
        assert!(leaders_ward(&x, &s.compression, 2, u64::MAX).is_err());
    }

    #[test]
    fn zero_radius_matches_direct_ward() {
        let x = mat(&[&[0.0, 1.0], &[5.0, 1.0], &[0.5, 1.2], &[5.2, 0.0], &[9.0, 9.0]]);
        let c = leaders_pass(&x, 0.0, 11, SearchMode::Exact).unwrap();
        let via = leaders_ward(&x, &c, 3, u64::MAX).unwrap();
        let direct = cut_tree(&ward_fit_matrix(&x, u64::MAX).unwrap(), 3).unwrap();
        assert_eq!(via.labels, direct.labels);
    }
}
