//! Random-projection forest for approximate neighbour candidates.
//!
//! Each tree splits its items by the hyperplane equidistant from two randomly
//! chosen items, recursing until leaves are small. A query descends one path
//! per tree and returns the union of the leaves it lands in.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

const LEAF_SIZE: usize = 24;

enum Node {
    Split {
        normal: Vec<f32>,
        offset: f32,
        left: usize,
        right: usize,
    },
    Leaf(Vec<u32>),
}

struct Tree {
    nodes: Vec<Node>,
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Tree {
    fn build<'v, V>(items: Vec<u32>, vec_of: &V, dim: usize, rng: &mut ChaCha8Rng) -> Self
    where
        V: Fn(u32) -> &'v [f32],
    {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(items, vec_of, dim, rng);
        tree
    }

    fn grow<'v, V>(&mut self, items: Vec<u32>, vec_of: &V, dim: usize, rng: &mut ChaCha8Rng) -> usize
    where
        V: Fn(u32) -> &'v [f32],
    {
        let id = self.nodes.len();
        if items.len() <= LEAF_SIZE {
            self.nodes.push(Node::Leaf(items));
            return id;
        }
        let i = rng.random_range(0..items.len());
        let mut j = rng.random_range(0..items.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (vec_of(items[i]), vec_of(items[j]));
        let mut normal = vec![0.0f32; dim];
        let mut mid = vec![0.0f32; dim];
        for t in 0..dim {
            normal[t] = a[t] - b[t];
            mid[t] = 0.5 * (a[t] + b[t]);
        }
        let mut offset = dot(&normal, &mid);
        let (mut left, mut right): (Vec<u32>, Vec<u32>) =
            items.iter().partition(|&&it| dot(&normal, vec_of(it)) <= offset);
        if left.is_empty() || right.is_empty() {
            // Coincident items: split arbitrarily so recursion terminates.
            let mut all = if left.is_empty() { right } else { left };
            let half = all.split_off(all.len() / 2);
            left = all;
            right = half;
            normal.iter_mut().for_each(|v| *v = 0.0);
            offset = 0.0;
        }
        self.nodes.push(Node::Leaf(Vec::new()));
        let l = self.grow(left, vec_of, dim, rng);
        let r = self.grow(right, vec_of, dim, rng);
        self.nodes[id] = Node::Split {
            normal,
            offset,
            left: l,
            right: r,
        };
        id
    }

    fn leaf_for(&self, q: &[f32]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(items) => return items,
                Node::Split {
                    normal,
                    offset,
                    left,
                    right,
                } => {
                    at = if dot(normal, q) <= *offset { *left } else { *right };
                }
            }
        }
    }
}

/// A small forest over item ids `0..len`.
pub(crate) struct RpForest {
    trees: Vec<Tree>,
    len: usize,
}

impl RpForest {
    pub(crate) fn empty() -> Self {
        Self {
            trees: Vec::new(),
            len: 0,
        }
    }

    /// Builds `n_trees` trees over items `0..len`.
    pub(crate) fn build<'v, V>(
        len: usize,
        vec_of: V,
        dim: usize,
        n_trees: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self
    where
        V: Fn(u32) -> &'v [f32],
    {
        let trees = (0..n_trees)
            .map(|_| Tree::build((0..len as u32).collect(), &vec_of, dim, rng))
            .collect();
        Self { trees, len }
    }

    /// Items indexed by this forest.
    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Sorted, deduplicated candidate items near `q`.
    pub(crate) fn candidates(&self, q: &[f32], out: &mut Vec<u32>) {
        out.clear();
        for t in &self.trees {
            out.extend_from_slice(t.leaf_for(q));
        }
        out.sort_unstable();
        out.dedup();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn every_item_finds_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f32; 3]> = (0..500)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let forest = RpForest::build(pts.len(), |i| &pts[i as usize][..], 3, 3, &mut rng);
        let mut out = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            forest.candidates(p, &mut out);
            assert!(out.binary_search(&(i as u32)).is_ok());
            assert!(out.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn duplicates_do_not_recurse_forever() {
        let pts = vec![[1.0f32, 1.0]; 200];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let forest = RpForest::build(pts.len(), |i| &pts[i as usize][..], 2, 2, &mut rng);
        let mut out = Vec::new();
        forest.candidates(&[1.0, 1.0], &mut out);
        assert!(!out.is_empty());
    }
}
