//! Helpers shared by the integration tests. Nothing here calls the crate's
//! clustering or metric code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use lcd_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in `[-scale, scale)^d`.
pub fn random_matrix(r: &mut impl Rng, n: usize, d: usize, scale: f32) -> Matrix {
    let data = (0..n * d).map(|_| r.random_range(-scale..scale)).collect();
    Matrix::new(n, d, data).unwrap()
}

/// Whether two labelings induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut ab = BTreeMap::new();
    let mut ba = BTreeMap::new();
    a.iter().zip(b).all(|(&x, &y)| {
        *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x
    })
}

/// Sum of squared distances to the cluster means, from scratch in f64.
pub fn sse(x: &Matrix, labels: &[usize]) -> f64 {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups.values().map(|m| group_sse(x, m)).sum()
}

pub fn group_sse(x: &Matrix, members: &[usize]) -> f64 {
    let d = x.cols();
    let mut mean = vec![0.0f64; d];
    for &i in members {
        for (m, &v) in mean.iter_mut().zip(x.row(i)) {
            *m += v as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= members.len() as f64);
    members
        .iter()
        .map(|&i| x.row(i).iter().zip(&mean).map(|(&v, m)| (v as f64 - m).powi(2)).sum::<f64>())
        .sum()
}

pub fn dist2(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&p, &q)| (p as f64 - q as f64).powi(2)).sum()
}
