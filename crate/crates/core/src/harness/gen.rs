//! Seeded input generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

/// Shape of a generated tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// `0 - 1 - ... - (n-1)`.
    Path,
    /// Uniform attachment: vertex `v` picks its parent uniformly among
    /// `0..v`, skipping parents already at the degree cap if one is set.
    RandomTree,
    /// Every other vertex attached to vertex 0.
    Star,
    /// Vertex `v > 0` has parent `(v - 1) / 2`.
    BinaryTree,
}

impl FromStr for Structure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "path" => Ok(Structure::Path),
            "random-tree" | "random" => Ok(Structure::RandomTree),
            "star" => Ok(Structure::Star),
            "binary-tree" | "binary" => Ok(Structure::BinaryTree),
            _ => Err(format!(
                "unknown structure {s:?} (path, random-tree, star, binary-tree)"
            )),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Path => "path",
            Structure::RandomTree => "random-tree",
            Structure::Star => "star",
            Structure::BinaryTree => "binary-tree",
        })
    }
}

/// Edges `(parent, child)` of a spanning tree on `0..n`, unweighted.
pub fn tree(
    structure: Structure,
    n: u32,
    max_degree: Option<u32>,
    rng: &mut impl Rng,
) -> Vec<(u32, u32)> {
    match structure {
        Structure::Path => (1..n).map(|v| (v - 1, v)).collect(),
        Structure::Star => (1..n).map(|v| (0, v)).collect(),
        Structure::BinaryTree => (1..n).map(|v| ((v - 1) / 2, v)).collect(),
        Structure::RandomTree => {
            let mut degree = vec![0u32; n as usize];
            let mut open: Vec<u32> = Vec::with_capacity(n as usize);
            let mut edges = Vec::with_capacity(n.saturating_sub(1) as usize);
            for v in 0..n {
                if v > 0 {
                    let p = match max_degree {
                        None => rng.gen_range(0..v),
                        Some(cap) => {
                            // open holds the vertices still below the cap
                            let k = rng.gen_range(0..open.len());
                            let p = open[k];
                            if degree[p as usize] + 1 >= cap {
                                open.swap_remove(k);
                            }
                            p
                        }
                    };
                    degree[p as usize] += 1;
                    degree[v as usize] += 1;
                    edges.push((p, v));
                }
                if max_degree.is_none_or(|cap| degree[v as usize] < cap) {
                    open.push(v);
                }
            }
            edges
        }
    }
}

/// Attaches uniform random weights in `lo..hi`.
pub fn weighted(
    edges: &[(u32, u32)],
    lo: i64,
    hi: i64,
    rng: &mut impl Rng,
) -> Vec<(u32, u32, i64)> {
    edges
        .iter()
        .map(|&(u, v)| (u, v, rng.gen_range(lo..hi)))
        .collect()
}

/// `k` distinct items chosen uniformly.
pub fn sample<T: Clone>(items: &[T], k: usize, rng: &mut impl Rng) -> Vec<T> {
    items
        .choose_multiple(rng, k.min(items.len()))
        .cloned()
        .collect()
}

/// Node ids `0..n` split into random chains; each chain is a shuffled run.
pub fn chains(n: u32, count: usize, rng: &mut impl Rng) -> Vec<Vec<u32>> {
    let mut ids: Vec<u32> = (0..n).collect();
    ids.shuffle(rng);
    let mut cuts: Vec<usize> = (1..n as usize)
        .collect::<Vec<_>>()
        .choose_multiple(rng, count.saturating_sub(1))
        .copied()
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([n as usize]) {
        out.push(ids[start..c].to_vec());
        start = c;
    }
    out.retain(|c| !c.is_empty());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::oracle::OracleForest;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trees_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in [
            Structure::Path,
            Structure::RandomTree,
            Structure::Star,
            Structure::BinaryTree,
        ] {
            let edges = tree(s, 100, None, &mut rng);
            assert_eq!(edges.len(), 99);
            let w: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 0)).collect();
            assert!(
                OracleForest::new(100, &w, &[])
                    .components()
                    .iter()
                    .all(|&c| c == 0),
                "{s}"
            );
            assert_eq!(s.to_string().parse::<Structure>(), Ok(s));
        }
    }

    #[test]
    fn degree_cap_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let edges = tree(Structure::RandomTree, 1000, Some(3), &mut rng);
        let mut deg = vec![0; 1000];
        for (u, v) in edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        assert!(deg.iter().all(|&d| d <= 3));
    }

    #[test]
    fn chains_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = chains(50, 7, &mut rng);
        assert_eq!(c.len(), 7);
        let mut all: Vec<u32> = c.concat();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }
}
