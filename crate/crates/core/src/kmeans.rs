//! K-Means with sampled seeds and random restarts.
//!
//! Each run is Lloyd's algorithm seeded with greedy k-means++ (several
//! D²-sampled candidates per step, keeping the one that lowers the potential
//! most). Uniformly sampled seeds are available through [`Init::Random`].
//!
//! The assignment step filters with triangle-inequality bounds: centroids are
//! split into groups of about ten, and every point keeps an upper bound on the
//! distance to its centroid plus one lower bound per group. A group is only
//! rescanned when its bound fails to clear the upper bound by a small
//! scale-relative slack, so ties and near-ties are always resolved on
//! computed distances with the lowest-index rule and the result equals plain
//! Lloyd.
//!
//! Memory is `O(N·(D + K/10))` on top of the data. Restarts run one after
//! another; the assignment step is data-parallel over points.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::EmbeddingDataset;
use crate::error::{invalid, Error, Result};
use crate::matrix::{sq_euclidean, sq_euclidean_mixed, Matrix};
use crate::par;

/// Clustering backend that produced an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// K-Means.
    KMeans,
    /// Ward agglomerative clustering.
    Agglomerative,
    /// Leaders compression followed by Ward.
    Leaders,
}

impl Method {
    /// Wire name used in assignment files.
    pub fn as_str(self) -> &'static str {
        match self {
            Method::KMeans => "kmeans",
            Method::Agglomerative => "agglomerative",
            Method::Leaders => "leaders",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" | "k-means" => Ok(Method::KMeans),
            "agglomerative" | "agglo" | "ward" => Ok(Method::Agglomerative),
            "leaders" => Ok(Method::Leaders),
            other => Err(invalid!("unknown method {other}")),
        }
    }
}

/// Per-point cluster ids with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster id of every point, in `0..k`.
    pub labels: Vec<usize>,
    /// Number of clusters requested.
    pub k: usize,
    /// Sum of squared Euclidean distances to the assigned cluster centre.
    pub inertia: f64,
    /// Producing backend.
    pub method: Method,
    /// Seed (K-Means restarts, Leaders pass order); 0 for plain Ward.
    pub seed: u64,
    /// Lloyd iterations of the winning run, merges applied for Ward, or τ
    /// probes for Leaders.
    pub iterations_run: usize,
}

impl ClusterAssignment {
    /// Number of points.
    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct labels in use.
    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.k];
        self.labels.iter().for_each(|&l| seen[l] = true);
        seen.into_iter().filter(|&s| s).count()
    }

    /// Points per cluster id.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.labels.iter().for_each(|&l| sizes[l] += 1);
        sizes
    }

    /// Checks labels against `k`.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid!("assignment with k = 0"));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.k) {
            return Err(invalid!("label {bad} outside 0..{}", self.k));
        }
        if !(self.inertia >= 0.0) {
            return Err(invalid!("negative inertia {}", self.inertia));
        }
        Ok(())
    }
}

/// Relabels `labels` so ids appear in first-seen order.
pub(crate) fn first_seen_relabel(labels: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect()
}

/// Centroid seeding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// D²-weighted sampling of data rows (k-means++), the scikit-learn default.
    KMeansPlusPlus,
    /// Uniform sampling of `k` distinct data rows.
    Random,
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k-means++" | "kmeans++" | "plusplus" => Ok(Init::KMeansPlusPlus),
            "random" | "uniform" => Ok(Init::Random),
            other => Err(invalid!("unknown init {other}")),
        }
    }
}

/// K-Means parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    /// Number of clusters K.
    pub k: usize,
    /// Independent runs; the lowest-inertia run wins.
    pub restarts: usize,
    /// Iteration cap per run.
    pub max_iter: usize,
    /// A run stops once no centroid moves farther than `rel_tol` times the
    /// largest feature range of the data.
    pub rel_tol: f64,
    /// Master seed; run seeds are drawn from it.
    pub seed: u64,
    /// Seeding strategy.
    pub init: Init,
}

impl KMeansConfig {
    /// Defaults for everything but `k`.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: crate::defaults::RESTARTS,
            max_iter: crate::defaults::MAX_ITER,
            rel_tol: crate::defaults::REL_TOL,
            seed: 0,
            init: Init::KMeansPlusPlus,
        }
    }

    /// Builder-style seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Builder-style restarts.
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    /// Builder-style init.
    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(invalid!("k must be at least 1"));
        }
        if self.k > n {
            return Err(invalid!("k = {} exceeds the {n} points", self.k));
        }
        if self.restarts == 0 {
            return Err(invalid!("restarts must be at least 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(invalid!("rel_tol must be non-negative"));
        }
        Ok(())
    }

    /// Seeds of the individual runs.
    pub fn run_seeds(&self) -> Vec<u64> {
        let mut master = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.restarts).map(|_| master.next_u64()).collect()
    }
}

/// Summary of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Seed of this run.
    pub seed: u64,
    /// Final inertia.
    pub inertia: f64,
    /// Centroid updates performed.
    pub iterations: usize,
    /// Whether the tolerance was met before `max_iter`.
    pub converged: bool,
    /// Inertia after every assignment step, ending with the final one.
    pub inertia_trace: Vec<f64>,
}

/// Result of [`kmeans_fit_matrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    /// Winning assignment.
    pub assignment: ClusterAssignment,
    /// Final centroids of the winning run.
    pub centroids: Matrix,
    /// Every run, in restart order.
    pub runs: Vec<RunReport>,
    /// Index of the winning run.
    pub best_run: usize,
}

/// Clusters the dataset's vectors into `cfg.k` groups, keeping the best of
/// `cfg.restarts` runs.
pub fn kmeans_fit(ds: &EmbeddingDataset, cfg: &KMeansConfig) -> Result<ClusterAssignment> {
    kmeans_fit_matrix(ds.vectors(), cfg).map(|m| m.assignment)
}

/// [`kmeans_fit`] on a bare matrix, returning centroids and per-run detail.
pub fn kmeans_fit_matrix(x: &Matrix, cfg: &KMeansConfig) -> Result<KMeansModel> {
    cfg.validate(x.rows())?;
    let scale = x.max_feature_range();
    let tol = cfg.rel_tol * scale;
    let slack = (BOUND_SLACK * x.bounding_diagonal()) as f32;

    let mut best: Option<(usize, Vec<usize>, Vec<f64>)> = None;
    let mut runs = Vec::with_capacity(cfg.restarts);
    for (r, seed) in cfg.run_seeds().into_iter().enumerate() {
        let mut run = Run::new(x, cfg.k, slack);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match cfg.init {
            Init::KMeansPlusPlus => run.init_plus_plus(&mut rng),
            Init::Random => run.init_random(&mut rng),
        }
        let report = run.lloyd(seed, cfg.max_iter, tol);
        let better = best
            .as_ref()
            .map_or(true, |(b, _, _)| report.inertia < runs_inertia(&runs, *b));
        if better {
            best = Some((r, run.labels(), run.centers));
        }
        runs.push(report);
    }
    let (best_run, labels, centers) = best.expect("restarts >= 1");
    let centroids = Matrix::new(
        cfg.k,
        x.cols(),
        centers.iter().map(|&c| c as f32).collect(),
    )?;
    Ok(KMeansModel {
        assignment: ClusterAssignment {
            labels,
            k: cfg.k,
            inertia: runs[best_run].inertia,
            method: Method::KMeans,
            seed: cfg.seed,
            iterations_run: runs[best_run].iterations,
        },
        centroids,
        runs,
        best_run,
    })
}

fn runs_inertia(runs: &[RunReport], i: usize) -> f64 {
    runs[i].inertia
}

/// Maps every point to its nearest centroid (Euclidean; ties go to the lowest
/// centroid index).
pub fn assign_to_centroids(points: &Matrix, centroids: &Matrix) -> Result<Vec<usize>> {
    if points.cols() != centroids.cols() {
        return Err(Error::DimensionMismatch {
            expected: points.cols(),
            got: centroids.cols(),
        });
    }
    if centroids.rows() == 0 {
        return Err(Error::Empty("no centroids"));
    }
    Ok(par::map_collect(points.rows(), |i| {
        let p = points.row(i);
        let mut best = 0;
        let mut best_d = sq_euclidean(p, centroids.row(0));
        for j in 1..centroids.rows() {
            let d = sq_euclidean(p, centroids.row(j));
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        best
    }))
}

/// Bounds must prove a candidate farther by this fraction of the data's
/// bounding diagonal before it is skipped; covers `f32` rounding in the
/// kernel and in the bound updates.
const BOUND_SLACK: f64 = 1e-4;

/// Centroids per bound group.
const GROUP_SIZE: usize = 10;

#[derive(Debug, Clone, Copy)]
struct PointState {
    label: u32,
    /// Upper bound on the distance to the assigned centroid.
    upper: f32,
}

/// Lloyd iterations with Yinyang filtering: centroids are partitioned once
/// into groups and every point keeps an upper bound on the distance to its
/// centroid and, per group, a lower bound on the distance to the group's
/// other centroids. Only groups whose bound does not clear the upper bound
/// are rescanned.
struct Run<'a> {
    x: &'a Matrix,
    k: usize,
    /// `k × d` centroids in f64; the `f32` copy feeds the distance kernel.
    centers: Vec<f64>,
    centers32: Vec<f32>,
    state: Vec<PointState>,
    /// `n × groups` lower bounds on the distance to every centroid of a
    /// group other than the assigned one.
    lower: Vec<f32>,
    group_of: Vec<u32>,
    /// Centroid ids per group, increasing.
    groups: Vec<Vec<u32>>,
    /// Half the distance from each centroid to its nearest other centroid.
    half_min: Vec<f32>,
    slack: f32,
}

impl<'a> Run<'a> {
    fn new(x: &'a Matrix, k: usize, slack: f32) -> Self {
        let n = x.rows();
        let d = x.cols();
        Self {
            x,
            k,
            centers: vec![0.0; k * d],
            centers32: vec![0.0; k * d],
            state: vec![
                PointState {
                    label: 0,
                    upper: f32::INFINITY
                };
                n
            ],
            lower: Vec::new(),
            group_of: Vec::new(),
            groups: Vec::new(),
            half_min: vec![0.0; k],
            slack,
        }
    }

    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn center32(&self, j: usize) -> &[f32] {
        let d = self.dim();
        &self.centers32[j * d..(j + 1) * d]
    }

    fn set_center_from_row(&mut self, j: usize, row: usize) {
        let d = self.dim();
        let src = self.x.row(row);
        self.centers32[j * d..(j + 1) * d].copy_from_slice(src);
        for (c, &v) in self.centers[j * d..(j + 1) * d].iter_mut().zip(src) {
            *c = v as f64;
        }
    }

    fn labels(&self) -> Vec<usize> {
        self.state.iter().map(|s| s.label as usize).collect()
    }

    fn init_random(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.x.rows();
        let rows = rand::seq::index::sample(rng, n, self.k).into_vec();
        for (j, &r) in rows.iter().enumerate() {
            self.set_center_from_row(j, r);
        }
        let cc: Vec<Vec<f32>> = (0..self.k)
            .map(|a| (0..a).map(|b| sq_euclidean(self.center32(a), self.center32(b)).sqrt()).collect())
            .collect();
        self.setup_bounds(&cc, None);
    }

    fn init_plus_plus(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.x.rows();
        let k = self.k;
        let slack = self.slack;
        let x = self.x;
        let trials = 2 + (k as f64).ln() as usize;
        let first = rng.random_range(0..n);
        self.set_center_from_row(0, first);
        let c0 = self.center32(0).to_vec();
        // (label, squared distance, distance)
        let mut near: Vec<(u32, f32, f32)> = par::map_collect(n, |i| {
            let s = sq_euclidean(x.row(i), &c0);
            (0, s, s.sqrt())
        });
        let mut members: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
        let mut radius = vec![near.iter().map(|t| t.2).fold(0.0f32, f32::max)];
        let mut pot = vec![near.iter().map(|t| t.1 as f64).sum::<f64>()];
        // Centre-centre distances, row `a` holds `d(a, j)` for `j < a`.
        let mut cc: Vec<Vec<f32>> = vec![Vec::new()];

        let mut picks = Vec::with_capacity(trials);
        let mut best_changes: Vec<(u32, f32)> = Vec::new();
        let mut changes: Vec<Vec<(u32, f32)>> = vec![Vec::new(); trials];
        let mut gains = vec![0.0f64; trials];
        let mut to_cand = vec![0.0f32; trials * k];
        for m in 1..k {
            let total: f64 = pot.iter().sum();
            picks.clear();
            if total > 0.0 {
                let mut targets: Vec<f64> = (0..trials).map(|_| rng.random::<f64>() * total).collect();
                targets.sort_by(f64::total_cmp);
                let mut acc = 0.0;
                let mut t = 0;
                let mut last_positive = None;
                'clusters: for a in 0..m {
                    if pot[a] <= 0.0 {
                        continue;
                    }
                    if t < trials && acc + pot[a] <= targets[t] {
                        acc += pot[a];
                        continue;
                    }
                    for &i in &members[a] {
                        let s = near[i as usize].1;
                        if s > 0.0 {
                            acc += s as f64;
                            last_positive = Some(i as usize);
                            while t < trials && acc > targets[t] {
                                picks.push(i as usize);
                                t += 1;
                            }
                            if t == trials {
                                break 'clusters;
                            }
                        }
                    }
                }
                let fallback = last_positive.unwrap_or_else(|| rng.random_range(0..n));
                picks.resize(trials, fallback);
            } else {
                picks.extend((0..trials).map(|_| rng.random_range(0..n)));
            }

            // All trials are scored in one sweep over the members so each
            // point row is loaded once per seeding step.
            for t in 0..trials {
                let (b, _, db) = near[picks[t]];
                let b = b as usize;
                let cv = x.row(picks[t]);
                for a in 0..m {
                    let cut = 2.0 * radius[a] + slack;
                    let ab = match a.cmp(&b) {
                        core::cmp::Ordering::Less => cc[b][a],
                        core::cmp::Ordering::Greater => cc[a][b],
                        core::cmp::Ordering::Equal => 0.0,
                    };
                    to_cand[t * k + a] = if ab - db >= cut {
                        f32::INFINITY
                    } else if a == b {
                        db
                    } else {
                        sq_euclidean(self.center32(a), cv).sqrt()
                    };
                }
                changes[t].clear();
            }
            gains.iter_mut().for_each(|g| *g = 0.0);
            let mut live = Vec::with_capacity(trials);
            for a in 0..m {
                let cut = 2.0 * radius[a] + slack;
                live.clear();
                live.extend((0..trials).filter(|&t| to_cand[t * k + a] < cut));
                if live.is_empty() {
                    continue;
                }
                for &i in &members[a] {
                    let (_, si, di) = near[i as usize];
                    let p = x.row(i as usize);
                    for &t in &live {
                        if to_cand[t * k + a] >= 2.0 * di + slack {
                            continue;
                        }
                        let s = sq_euclidean(p, x.row(picks[t]));
                        if s < si {
                            gains[t] += (si - s) as f64;
                            changes[t].push((i, s));
                        }
                    }
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for t in 0..trials {
                if best.map_or(true, |(_, g)| gains[t] > g) {
                    best = Some((t, gains[t]));
                }
            }
            let (best_t, _) = best.expect("at least two trials");
            let pick = picks[best_t];
            core::mem::swap(&mut best_changes, &mut changes[best_t]);
            // Ascending ids keep later sweeps close to sequential in memory.
            best_changes.sort_unstable_by_key(|c| c.0);
            self.set_center_from_row(m, pick);
            let cm = self.center32(m).to_vec();
            cc.push((0..m).map(|j| sq_euclidean(self.center32(j), &cm).sqrt()).collect());

            let mut touched = Vec::new();
            for &(i, s) in &best_changes {
                let old = near[i as usize].0 as usize;
                if touched.last() != Some(&old) && !touched.contains(&old) {
                    touched.push(old);
                }
                near[i as usize] = (m as u32, s, s.sqrt());
            }
            for &a in &touched {
                members[a].retain(|&i| near[i as usize].0 as usize == a);
                radius[a] = members[a].iter().map(|&i| near[i as usize].2).fold(0.0, f32::max);
                pot[a] = members[a].iter().map(|&i| near[i as usize].1 as f64).sum();
            }
            members.push(best_changes.iter().map(|c| c.0).collect());
            radius.push(best_changes.iter().map(|c| c.1.sqrt()).fold(0.0, f32::max));
            pot.push(best_changes.iter().map(|c| c.1 as f64).sum());
        }

        self.setup_bounds(&cc, Some(&near));
    }

    /// Groups the centroids, then derives every bound from the centroid
    /// distances `cc` (row `a` holds `d(a, j)` for `j < a`) and, when known,
    /// each point's nearest seed and distance. Without them the first
    /// assignment scans every centroid.
    fn setup_bounds(&mut self, cc: &[Vec<f32>], near: Option<&[(u32, f32, f32)]>) {
        let k = self.k;
        let dist = |a: usize, b: usize| match a.cmp(&b) {
            core::cmp::Ordering::Less => cc[b][a],
            core::cmp::Ordering::Greater => cc[a][b],
            core::cmp::Ordering::Equal => 0.0,
        };
        for a in 0..k {
            let m = (0..k)
                .filter(|&b| b != a)
                .map(|b| dist(a, b))
                .fold(f32::INFINITY, f32::min);
            self.half_min[a] = if m.is_finite() { 0.5 * m } else { f32::INFINITY };
        }

        // A few k-medoid rounds over the seeds, started from the first seeds
        // (already spread out by the seeding).
        let mut group_of = vec![0u32; k];
        let mut heads: Vec<usize> = (0..k.div_ceil(GROUP_SIZE)).collect();
        for _ in 0..5 {
            for (a, g) in group_of.iter_mut().enumerate() {
                let mut best = (0, f32::INFINITY);
                for (h, &c) in heads.iter().enumerate() {
                    let dd = dist(a, c);
                    if dd < best.1 {
                        best = (h, dd);
                    }
                }
                *g = best.0 as u32;
            }
            for (h, c) in heads.iter_mut().enumerate() {
                let members: Vec<usize> = (0..k).filter(|&a| group_of[a] as usize == h).collect();
                let spread = |p: usize| members.iter().map(|&r| dist(p, r)).sum::<f32>();
                if let Some(&m) = members.iter().min_by(|&&p, &&q| spread(p).total_cmp(&spread(q))) {
                    *c = m;
                }
            }
        }
        let mut groups = vec![Vec::new(); heads.len()];
        for a in 0..k {
            groups[group_of[a] as usize].push(a as u32);
        }
        groups.retain(|m| !m.is_empty());
        for (h, m) in groups.iter().enumerate() {
            for &a in m {
                group_of[a as usize] = h as u32;
            }
        }
        let g = groups.len();

        let mut gmin = vec![f32::INFINITY; k * g];
        for a in 0..k {
            for (h, m) in groups.iter().enumerate() {
                gmin[a * g + h] = m
                    .iter()
                    .filter(|&&b| b as usize != a)
                    .map(|&b| dist(a, b as usize))
                    .fold(f32::INFINITY, f32::min);
            }
        }
        let n = self.x.rows();
        self.lower = vec![0.0; n * g];
        if let Some(near) = near {
            let gmin = &gmin;
            par::zip_chunks_for_each(&mut self.state, &mut self.lower, g, |i, st, lower| {
                let (a, _, u) = near[i];
                *st = PointState { label: a, upper: u };
                for (l, &m) in lower.iter_mut().zip(&gmin[a as usize * g..(a as usize + 1) * g]) {
                    *l = m - u;
                }
            });
        }
        self.group_of = group_of;
        self.groups = groups;
    }

    fn assign_step(&mut self) {
        let d = self.dim();
        let g = self.groups.len();
        let x = self.x;
        let centers = &self.centers32;
        let half_min = &self.half_min;
        let groups = &self.groups;
        let group_of = &self.group_of;
        let slack = self.slack;
        par::zip_chunks_for_each(&mut self.state, &mut self.lower, g, |i, st, lower| {
            let a = st.label as usize;
            let global = lower.iter().copied().fold(f32::INFINITY, f32::min);
            let bound = half_min[a].max(global);
            if st.upper + slack < bound {
                return;
            }
            let p = x.row(i);
            let center = |j: usize| &centers[j * d..(j + 1) * d];
            let s_a = sq_euclidean(p, center(a));
            st.upper = s_a.sqrt();
            if st.upper + slack < bound {
                return;
            }
            let (mut best, mut best_s) = (a, s_a);
            // Nearest member and runner-up distance of the winner's group.
            let mut winner_group = (usize::MAX, f32::INFINITY);
            let mut old_group_seen = false;
            for h in 0..g {
                if lower[h] > best_s.sqrt() + slack {
                    continue;
                }
                old_group_seen |= h == group_of[a] as usize;
                let (mut m1, mut m1_j, mut m2) = (f32::INFINITY, usize::MAX, f32::INFINITY);
                for &j in &groups[h] {
                    let j = j as usize;
                    let s = if j == a { s_a } else { sq_euclidean(p, center(j)) };
                    if s < best_s || (s == best_s && j < best) {
                        best = j;
                        best_s = s;
                    }
                    if s < m1 {
                        m2 = m1;
                        m1 = s;
                        m1_j = j;
                    } else if s < m2 {
                        m2 = s;
                    }
                }
                lower[h] = m1.sqrt();
                if group_of[best] as usize == h {
                    winner_group = (m1_j, m2.sqrt());
                }
            }
            let gb = group_of[best] as usize;
            if winner_group.0 == best {
                lower[gb] = winner_group.1;
            }
            if best != a && !old_group_seen {
                let ga = group_of[a] as usize;
                lower[ga] = lower[ga].min(st.upper);
            }
            *st = PointState {
                label: best as u32,
                upper: best_s.sqrt(),
            };
        });
    }

    /// Exact squared distance of each point to its assigned f64 centroid.
    fn point_costs(&self) -> Vec<f64> {
        let d = self.dim();
        par::map_collect(self.x.rows(), |i| {
            let a = self.state[i].label as usize;
            sq_euclidean_mixed(self.x.row(i), &self.centers[a * d..(a + 1) * d])
        })
    }

    /// Gives every empty cluster the point farthest from its own centroid.
    /// Returns the moved points.
    fn repair_empty(&mut self, costs: &mut [f64], counts: &mut [usize]) -> Vec<usize> {
        let mut moved = Vec::new();
        for e in 0..self.k {
            if counts[e] > 0 {
                continue;
            }
            let mut far: Option<(usize, f64)> = None;
            for (i, &c) in costs.iter().enumerate() {
                let from = self.state[i].label as usize;
                if counts[from] >= 2 && c > 0.0 && far.map_or(true, |(_, fc)| c > fc) {
                    far = Some((i, c));
                }
            }
            let Some((i, _)) = far else { break };
            let from = self.state[i].label as usize;
            counts[from] -= 1;
            counts[e] = 1;
            self.state[i].label = e as u32;
            costs[i] = 0.0;
            moved.push(i);
        }
        moved
    }

    fn lloyd(&mut self, seed: u64, max_iter: usize, tol: f64) -> RunReport {
        let n = self.x.rows();
        let d = self.dim();
        let k = self.k;
        let g = self.groups.len();
        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        for _ in 0..max_iter {
            self.assign_step();
            let mut costs = self.point_costs();
            trace.push(costs.iter().sum::<f64>());

            let mut counts = vec![0usize; k];
            self.state.iter().for_each(|s| counts[s.label as usize] += 1);
            let moved = self.repair_empty(&mut costs, &mut counts);

            let mut sums = vec![0.0f64; k * d];
            for i in 0..n {
                let a = self.state[i].label as usize;
                for (s, &v) in sums[a * d..(a + 1) * d].iter_mut().zip(self.x.row(i)) {
                    *s += v as f64;
                }
            }
            let mut drift = vec![0.0f64; k];
            for j in 0..k {
                if counts[j] == 0 {
                    continue;
                }
                let inv = 1.0 / counts[j] as f64;
                let mut moved_sq = 0.0;
                for t in 0..d {
                    let new = sums[j * d + t] * inv;
                    let delta = new - self.centers[j * d + t];
                    moved_sq += delta * delta;
                    self.centers[j * d + t] = new;
                    self.centers32[j * d + t] = new as f32;
                }
                drift[j] = moved_sq.sqrt();
            }
            iterations += 1;

            let top = drift.iter().copied().fold(0.0f64, f64::max);
            let drift32: Vec<f32> = drift.iter().map(|&v| v as f32).collect();
            let group_drift: Vec<f32> = self
                .groups
                .iter()
                .map(|m| m.iter().map(|&j| drift32[j as usize]).fold(0.0, f32::max))
                .collect();
            par::zip_chunks_for_each(&mut self.state, &mut self.lower, g, |_, st, lower| {
                st.upper += drift32[st.label as usize];
                for (l, &gd) in lower.iter_mut().zip(&group_drift) {
                    *l -= gd;
                }
            });
            for &i in &moved {
                self.state[i].upper = 0.0;
                self.lower[i * g..(i + 1) * g].iter_mut().for_each(|l| *l = 0.0);
            }
            // d(a, b) shrinks by at most drift(a) + drift(b).
            let top32 = top as f32;
            for (h, &v) in self.half_min.iter_mut().zip(&drift32) {
                *h -= 0.5 * (v + top32);
            }

            if top <= tol {
                converged = true;
                break;
            }
        }
        self.assign_step();
        let inertia: f64 = self.point_costs().iter().sum();
        trace.push(inertia);
        RunReport {
            seed,
            inertia,
            iterations,
            converged,
            inertia_trace: trace,
        }
    }
}
