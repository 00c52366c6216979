//! Ward-linkage agglomerative clustering and tree cuts.
//!
//! Pairwise merge costs live in a condensed `f64` matrix and are updated with
//! the Lance–Williams recurrence for Ward's criterion. The merge loop keeps a
//! cached nearest neighbour per active cluster (over higher-numbered
//! clusters only) and picks the global minimum from those caches, so every
//! step merges the cheapest pair exactly as a naive search would, including
//! ties: the pair with the smallest `(cost, min_id, max_id)` wins, where a
//! cluster's id is its smallest member point.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::EmbeddingDataset;
use crate::error::{invalid, Error, Result};
use crate::kmeans::{ClusterAssignment, Method};
use crate::matrix::{sq_euclidean_f64, Matrix};
use crate::par;

/// Default cap on the condensed distance matrix, 16 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 16 << 30;

/// One merge in scipy linkage convention: nodes `0..N` are points and merge
/// `t` creates node `N + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Node containing the smaller point index.
    pub a: usize,
    /// The other node.
    pub b: usize,
    /// Increase of the total within-cluster sum of squares.
    pub cost: f64,
    /// Points under the new node.
    pub size: usize,
}

/// Full merge tree over `leaf_count` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    /// `leaf_count - 1` merges in the order they were applied.
    pub merges: Vec<Merge>,
    /// Number of points.
    pub leaf_count: usize,
}

impl Dendrogram {
    /// Checks the structural invariants: every node merged once, sizes add
    /// up, costs are non-negative.
    pub fn validate(&self) -> Result<()> {
        let n = self.leaf_count;
        if n == 0 || self.merges.len() + 1 != n {
            return Err(invalid!(
                "{} merges for {} leaves",
                self.merges.len(),
                n
            ));
        }
        let mut size = vec![1usize; n];
        size.resize(2 * n - 1, 0);
        let mut used = vec![false; 2 * n - 1];
        for (t, m) in self.merges.iter().enumerate() {
            let node = n + t;
            for c in [m.a, m.b] {
                if c >= node || used[c] {
                    return Err(invalid!("merge {t} reuses or forward-references node {c}"));
                }
                used[c] = true;
            }
            if size[m.a] + size[m.b] != m.size {
                return Err(invalid!("merge {t} has size {} not {}", m.size, size[m.a] + size[m.b]));
            }
            if !(m.cost >= 0.0) {
                return Err(invalid!("merge {t} has cost {}", m.cost));
            }
            size[node] = m.size;
        }
        Ok(())
    }
}

/// Bytes of the condensed `f64` cost matrix for `n` points.
pub fn condensed_bytes(n: usize) -> u64 {
    let n = n as u64;
    8 * (n * n.saturating_sub(1) / 2)
}

/// Builds the full Ward tree of the dataset's vectors.
pub fn ward_fit(ds: &EmbeddingDataset, memory_budget: u64) -> Result<Dendrogram> {
    ward_fit_matrix(ds.vectors(), memory_budget)
}

#[inline]
fn cidx(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// [`ward_fit`] on a bare matrix.
pub fn ward_fit_matrix(x: &Matrix, memory_budget: u64) -> Result<Dendrogram> {
    let n = x.rows();
    if n < 2 {
        return Err(invalid!("Ward clustering needs at least 2 points, got {n}"));
    }
    let required = condensed_bytes(n);
    if required > memory_budget {
        return Err(Error::MemoryBudget {
            required,
            budget: memory_budget,
        });
    }

    let mut dist = vec![0.0f64; n * (n - 1) / 2];
    {
        let mut rows: Vec<&mut [f64]> = Vec::with_capacity(n - 1);
        let mut rest = dist.as_mut_slice();
        for i in 0..n - 1 {
            let (head, tail) = rest.split_at_mut(n - 1 - i);
            rows.push(head);
            rest = tail;
        }
        par::for_each_mut(&mut rows, |i, row| {
            let xi = x.row(i);
            for (o, v) in row.iter_mut().enumerate() {
                *v = 0.5 * sq_euclidean_f64(xi, x.row(i + 1 + o));
            }
        });
    }

    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node = (0..n).collect::<Vec<_>>();
    // nn[i]: cheapest active j > i, lowest j on ties.
    let mut nn = vec![usize::MAX; n];
    let mut nn_cost = vec![f64::INFINITY; n];
    let scan = |dist: &[f64], active: &[bool], i: usize| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        let base = cidx(n, i, i + 1);
        for j in i + 1..n {
            if active[j] {
                let d = dist[base + j - i - 1];
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        best
    };
    for i in 0..n - 1 {
        (nn[i], nn_cost[i]) = scan(&dist, &active, i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && (a == usize::MAX || nn_cost[i] < best) {
                a = i;
                best = nn_cost[i];
            }
        }
        let b = nn[a];
        let (na, nb) = (size[a] as f64, size[b] as f64);
        let d_ab = best;
        merges.push(Merge {
            a: node[a],
            b: node[b],
            cost: d_ab,
            size: size[a] + size[b],
        });

        active[b] = false;
        nn[b] = usize::MAX;
        for j in 0..n {
            if !active[j] || j == a {
                continue;
            }
            let nj = size[j] as f64;
            let ia = if j < a { cidx(n, j, a) } else { cidx(n, a, j) };
            let ib = if j < b { cidx(n, j, b) } else { cidx(n, b, j) };
            dist[ia] = ((na + nj) * dist[ia] + (nb + nj) * dist[ib] - nj * d_ab) / (na + nb + nj);
        }
        size[a] += size[b];
        node[a] = n + t;

        (nn[a], nn_cost[a]) = scan(&dist, &active, a);
        for i in 0..n {
            if !active[i] || i == a {
                continue;
            }
            if nn[i] == a || nn[i] == b {
                (nn[i], nn_cost[i]) = scan(&dist, &active, i);
            } else if i < a {
                let d = dist[cidx(n, i, a)];
                if d < nn_cost[i] || (d == nn_cost[i] && a < nn[i]) {
                    nn[i] = a;
                    nn_cost[i] = d;
                }
            }
        }
    }
    Ok(Dendrogram {
        merges,
        leaf_count: n,
    })
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Cuts the tree into `k` clusters by applying its first `N − k` merges.
///
/// Labels are numbered in order of first appearance over the points, and
/// the inertia is the sum of the applied merge costs.
pub fn cut_tree(dg: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dg.leaf_count;
    if k == 0 || k > n {
        return Err(invalid!("k = {k} outside 1..={n}"));
    }
    if dg.merges.len() + 1 != n {
        return Err(invalid!("dendrogram has {} merges for {n} leaves", dg.merges.len()));
    }
    let steps = n - k;
    // Union-find over nodes: each merge node points at its representative leaf.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut rep = (0..n).collect::<Vec<_>>();
    let mut inertia = 0.0;
    for m in &dg.merges[..steps] {
        let ra = find(&mut parent, rep[m.a]);
        let rb = find(&mut parent, rep[m.b]);
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
        rep.push(lo);
        inertia += m.cost;
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect();
    Ok(ClusterAssignment {
        labels,
        k,
        inertia,
        method: Method::Agglomerative,
        seed: 0,
        iterations_run: steps,
    })
}
