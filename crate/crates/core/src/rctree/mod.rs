//! Rake-compress forests over a dynamic tree contraction, and queries on
//! them.
//!
//! Every internal vertex `x` forms one cluster when it is deleted: its own
//! base vertex, the clusters raked into it, and the one or two edges it
//! holds at that round (base edges, or binary clusters left behind by
//! compresses). Finalize gives a nullary root, rake a unary cluster, and
//! compress a binary one.

mod cluster;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use cluster::edge_key;
pub use cluster::{Child, Cluster, ClusterKind, EdgeKey, PathSummary, RcForest};

use crate::engine::RestrictedReport;
use crate::treecontract::{TreeContraction, TreeError, UpdateReport};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(u32, u32),
    #[error("expected {expected} vertex weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Heaviest edge on a path: its weight and original endpoints, ascending.
/// Ties go to the lexicographically largest endpoint pair.
pub type PathMax = Option<(i64, (u32, u32))>;

/// Answers of a batch representative query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchRepr {
    pub reprs: Vec<u32>,
    /// Distinct base vertices and clusters visited.
    pub touched: usize,
}

/// A weighted forest under batches of links and cuts, with connectivity,
/// subtree-sum and path-max queries.
pub struct DynamicForest {
    tc: TreeContraction,
    rc: RcForest,
}

impl DynamicForest {
    pub fn new(
        n: u32,
        edges: &[(u32, u32, i64)],
        weights: Vec<i64>,
        seed: u64,
    ) -> Result<Self, ForestError> {
        Self::with_threads(n, edges, weights, seed, 1)
    }

    pub fn with_threads(
        n: u32,
        edges: &[(u32, u32, i64)],
        weights: Vec<i64>,
        seed: u64,
        threads: usize,
    ) -> Result<Self, ForestError> {
        if weights.len() != n as usize {
            return Err(ForestError::WeightCount {
                expected: n as usize,
                got: weights.len(),
            });
        }
        let tc = TreeContraction::build_with_threads(n, edges, seed, threads)?;
        let rc = RcForest::build(&tc, weights);
        Ok(DynamicForest { tc, rc })
    }

    pub fn contraction(&self) -> &TreeContraction {
        &self.tc
    }

    pub fn rc(&self) -> &RcForest {
        &self.rc
    }

    pub fn vertex_count(&self) -> u32 {
        self.tc.vertex_count()
    }

    pub fn batch_link(&mut self, edges: &[(u32, u32, i64)]) -> Result<UpdateReport, ForestError> {
        let report = self.tc.batch_link(edges)?;
        self.rc.update(&self.tc, &report.propagation.touched);
        Ok(report)
    }

    pub fn batch_cut(&mut self, edges: &[(u32, u32)]) -> Result<UpdateReport, ForestError> {
        let report = self.tc.batch_cut(edges)?;
        self.rc.update(&self.tc, &report.propagation.touched);
        Ok(report)
    }

    fn check(&self, v: u32) -> Result<(), ForestError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(ForestError::UnknownVertex(v))
        }
    }

    fn root_cluster(&self, v: u32) -> u32 {
        let mut x = v;
        while let Some(p) = self.rc.cluster(x).parent {
            x = p;
        }
        x
    }

    /// Representative of `v`'s component: the original vertex owning the
    /// root cluster.
    pub fn find_repr(&self, v: u32) -> Result<u32, ForestError> {
        self.check(v)?;
        Ok(self.tc.forest().owner(self.root_cluster(v)))
    }

    /// Representatives for a batch. Walks go up from each base vertex; the
    /// first walk to reach a node claims it, and later walks stop there and
    /// reuse its answer.
    pub fn batch_find_repr(&self, batch: &[u32]) -> Result<BatchRepr, ForestError> {
        for &v in batch {
            self.check(v)?;
        }
        // answer per claimed cluster; base vertex v is claimed via `base`
        let mut answer: FxHashMap<u32, u32> = FxHashMap::default();
        let mut base: FxHashMap<u32, u32> = FxHashMap::default();
        let mut reprs = Vec::with_capacity(batch.len());
        let mut path = Vec::new();
        for &v in batch {
            if let Some(&r) = base.get(&v) {
                reprs.push(r);
                continue;
            }
            path.clear();
            let mut x = v;
            let r = loop {
                if let Some(&r) = answer.get(&x) {
                    break r;
                }
                path.push(x);
                match self.rc.cluster(x).parent {
                    Some(p) => x = p,
                    None => break self.tc.forest().owner(x),
                }
            };
            for &y in &path {
                answer.insert(y, r);
            }
            base.insert(v, r);
            reprs.push(r);
        }
        Ok(BatchRepr {
            reprs,
            touched: base.len() + answer.len(),
        })
    }

    pub fn connected(&self, u: u32, v: u32) -> Result<bool, ForestError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.root_cluster(u) == self.root_cluster(v))
    }

    pub fn batch_connected(&self, pairs: &[(u32, u32)]) -> Result<Vec<bool>, ForestError> {
        let flat: Vec<u32> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
        let r = self.batch_find_repr(&flat)?;
        Ok(r.reprs.chunks(2).map(|p| p[0] == p[1]).collect())
    }

    /// Ancestors of base vertex `s`, each with the path from `s` to its
    /// representative.
    fn ancestor_paths(&self, s: u32) -> Vec<(u32, PathSummary)> {
        let mut out = vec![(s, PathSummary::EMPTY)];
        let mut cur = s;
        let mut to: SmallVec<[(u32, PathSummary); 2]> = self
            .rc
            .cluster(s)
            .edge_children
            .iter()
            .map(|&(c, t)| (t, self.rc.child_path(&self.tc, c, s)))
            .collect();
        while let Some(p) = self.rc.cluster(cur).parent {
            let at = to
                .iter()
                .find(|b| b.0 == p)
                .expect("parent is a boundary of its child")
                .1;
            to = self
                .rc
                .cluster(p)
                .edge_children
                .iter()
                .map(|&(c, t)| match c {
                    Child::Cluster(y) if y == cur => {
                        *to.iter().find(|b| b.0 == t).expect("shared boundary")
                    }
                    _ => (t, at.then(self.rc.child_path(&self.tc, c, p))),
                })
                .collect();
            out.push((p, at));
            cur = p;
        }
        out
    }

    /// Summary of the path from `u` to `v`, oriented from `u`.
    fn path(&self, u: u32, v: u32) -> Result<PathSummary, ForestError> {
        self.check(u)?;
        self.check(v)?;
        let from_u: FxHashMap<u32, PathSummary> = self.ancestor_paths(u).into_iter().collect();
        for (x, to_v) in self.ancestor_paths(v) {
            if let Some(to_u) = from_u.get(&x) {
                return Ok(to_u.then(to_v.reversed()));
            }
        }
        Err(ForestError::Disconnected(u, v))
    }

    /// Heaviest edge on the path from `u` to `v`; `None` when `u == v`.
    pub fn path_max(&self, u: u32, v: u32) -> Result<PathMax, ForestError> {
        Ok(self.path(u, v)?.max.map(|(w, a, b)| (w, (a, b))))
    }

    /// Total weight of the component containing `v`.
    pub fn component_sum(&self, v: u32) -> Result<i64, ForestError> {
        self.check(v)?;
        Ok(self.rc.cluster(self.root_cluster(v)).sum)
    }

    /// Total weight of `u`'s subtree when its component is rooted at `r`.
    pub fn subtree_sum(&self, r: u32, u: u32) -> Result<i64, ForestError> {
        let path = self.path(u, r)?;
        let Some((a, b)) = path.first else {
            return self.component_sum(u);
        };
        let e = self.tc.forest().real_edge(a, b).expect("path edges exist");
        let (near, far) = if e.u == u { (e.a, e.b) } else { (e.b, e.a) };
        Ok(self.side_sum(near, far))
    }

    /// Weight on `near`'s side of the internal edge `near`-`far`. Walks up
    /// from the edge, crediting each newly absorbed representative (with
    /// its other children) to the side of the edge it sits on.
    fn side_sum(&self, near: u32, far: u32) -> i64 {
        let k = edge_key(near, far);
        let mut side: SmallVec<[(u32, bool); 2]> =
            SmallVec::from_slice(&[(near, true), (far, false)]);
        let mut cur = Child::Edge(k);
        let mut parent = self.rc.edge_parent(k);
        let mut total = 0i64;
        while let Some(p) = parent {
            let on_near = side
                .iter()
                .find(|s| s.0 == p)
                .expect("parent is a boundary")
                .1;
            let cl = self.rc.cluster(p);
            if on_near {
                let mut add = self.rc.vertex_weight(p);
                for &c in &cl.raked {
                    if Child::Cluster(c) != cur {
                        add = add.wrapping_add(self.rc.cluster(c).sum);
                    }
                }
                for &(c, _) in &cl.edge_children {
                    if c != cur {
                        add = add.wrapping_add(self.rc.child_sum(c));
                    }
                }
                total = total.wrapping_add(add);
            }
            side = cl
                .edge_children
                .iter()
                .map(|&(c, t)| {
                    if c == cur {
                        *side.iter().find(|s| s.0 == t).expect("shared boundary")
                    } else {
                        (t, on_near)
                    }
                })
                .collect();
            cur = Child::Cluster(p);
            parent = cl.parent;
        }
        total
    }

    pub fn restricted(&self) -> RestrictedReport {
        self.tc.restricted()
    }

    /// Checks the contraction against a fresh run, the forest's structure
    /// against the record, and the incrementally maintained forest against
    /// one built from scratch.
    pub fn check_consistency(&self) -> Result<(), String> {
        self.tc.check_consistency()?;
        self.rc.audit(&self.tc)?;
        let fresh = RcForest::build(&self.tc, self.rc_weights());
        if fresh != self.rc {
            return Err("incremental RC forest differs from a fresh build".into());
        }
        Ok(())
    }

    fn rc_weights(&self) -> Vec<i64> {
        (0..self.vertex_count())
            .map(|v| self.rc.vertex_weight(v))
            .collect()
    }
}
