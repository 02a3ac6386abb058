//! Brute-force reference answers, computed by direct traversal.

use std::collections::VecDeque;

use crate::monoid::Monoid;

/// An explicit weighted forest answering queries by search.
#[derive(Clone, Debug)]
pub struct OracleForest {
    adj: Vec<Vec<(u32, i64)>>,
    weights: Vec<i64>,
}

impl OracleForest {
    pub fn new(n: u32, edges: &[(u32, u32, i64)], weights: &[i64]) -> Self {
        let mut adj = vec![Vec::new(); n as usize];
        for &(u, v, w) in edges {
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        let mut weights = weights.to_vec();
        weights.resize(n as usize, 0);
        OracleForest { adj, weights }
    }

    /// BFS parent pointers from `root` over its component.
    fn parents(&self, root: u32) -> Vec<Option<(u32, i64)>> {
        let mut parent = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[root as usize] = true;
        let mut q = VecDeque::from([root]);
        while let Some(x) = q.pop_front() {
            for &(y, w) in &self.adj[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    parent[y as usize] = Some((x, w));
                    q.push_back(y);
                }
            }
        }
        parent
    }

    /// Component label per vertex: the smallest vertex of the component.
    pub fn components(&self) -> Vec<u32> {
        let mut comp = vec![u32::MAX; self.adj.len()];
        for s in 0..self.adj.len() as u32 {
            if comp[s as usize] != u32::MAX {
                continue;
            }
            comp[s as usize] = s;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &(y, _) in &self.adj[x as usize] {
                    if comp[y as usize] == u32::MAX {
                        comp[y as usize] = s;
                        q.push_back(y);
                    }
                }
            }
        }
        comp
    }

    pub fn connected(&self, u: u32, v: u32) -> bool {
        u == v || self.parents(u)[v as usize].is_some()
    }

    /// Edges on the path from `u` to `v` as `(a, b, weight)` with `a < b`,
    /// or `None` when disconnected.
    pub fn path(&self, u: u32, v: u32) -> Option<Vec<(u32, u32, i64)>> {
        let parent = self.parents(v);
        let mut out = Vec::new();
        let mut x = u;
        while x != v {
            let (p, w) = parent[x as usize]?;
            out.push((x.min(p), x.max(p), w));
            x = p;
        }
        Some(out)
    }

    /// Heaviest edge on the path, ties to the largest endpoint pair; the
    /// inner `None` is the empty path.
    pub fn path_max(&self, u: u32, v: u32) -> Option<Option<(i64, (u32, u32))>> {
        let path = self.path(u, v)?;
        Some(path.into_iter().map(|(a, b, w)| (w, (a, b))).max())
    }

    /// Weight of `u`'s subtree with the component rooted at `r`, by DFS.
    pub fn subtree_sum(&self, r: u32, u: u32) -> Option<i64> {
        if !self.connected(r, u) {
            return None;
        }
        let parent = self.parents(r);
        let mut sum = 0i64;
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            sum = sum.wrapping_add(self.weights[x as usize]);
            for &(y, _) in &self.adj[x as usize] {
                if parent[x as usize].map(|p| p.0) != Some(y) {
                    stack.push(y);
                }
            }
        }
        Some(sum)
    }
}

/// Fold of `items` by direct left-to-right combination.
pub fn fold<M: Monoid>(monoid: &M, items: &[M::T]) -> M::T {
    items
        .iter()
        .fold(monoid.identity(), |acc, x| monoid.combine(&acc, x))
}
