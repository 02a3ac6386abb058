//! Clusters derived from a contraction record, with incremental refresh.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::engine::Round;
use crate::treecontract::{Slot, TreeContraction};

/// Internal edge key, endpoints ascending.
pub type EdgeKey = (u32, u32);

pub(crate) fn edge_key(a: u32, b: u32) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A child on the path side of a cluster: a base edge, or the binary
/// cluster formed by a compress.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Child {
    Edge(EdgeKey),
    Cluster(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    Nullary,
    Unary,
    Binary,
}

/// Heaviest edge on a path plus its first and last real edges, oriented.
/// Edges are named by their original endpoints, ascending.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PathSummary {
    pub max: Option<(i64, u32, u32)>,
    pub first: Option<(u32, u32)>,
    pub last: Option<(u32, u32)>,
}

impl PathSummary {
    pub const EMPTY: PathSummary = PathSummary {
        max: None,
        first: None,
        last: None,
    };

    pub fn reversed(self) -> Self {
        PathSummary {
            max: self.max,
            first: self.last,
            last: self.first,
        }
    }

    /// Path `self` followed by path `next`.
    pub fn then(self, next: PathSummary) -> Self {
        PathSummary {
            max: self.max.max(next.max),
            first: self.first.or(next.first),
            last: next.last.or(self.last),
        }
    }
}

/// The cluster whose representative is internal vertex `rep`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub rep: u32,
    /// Round in which `rep` was deleted.
    pub round: Round,
    pub kind: ClusterKind,
    /// Edge-side children, each with its boundary vertex other than `rep`.
    /// In slot order; the boundary of the cluster is the list of those
    /// vertices.
    pub edge_children: SmallVec<[(Child, u32); 2]>,
    /// Unary clusters raked into `rep`, in order of arrival.
    pub raked: SmallVec<[u32; 3]>,
    pub parent: Option<u32>,
    /// Total vertex weight inside the cluster.
    pub sum: i64,
    /// For binary clusters, the path between the two boundary vertices,
    /// oriented from the first to the second.
    pub path: PathSummary,
}

impl Cluster {
    pub fn boundary(&self) -> SmallVec<[u32; 2]> {
        self.edge_children.iter().map(|c| c.1).collect()
    }
}

/// The rake-compress forest over the internal vertices of a contraction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RcForest {
    clusters: Vec<Option<Cluster>>,
    edge_parent: FxHashMap<EdgeKey, u32>,
    /// Weight of every original vertex.
    weights: Vec<i64>,
}

impl RcForest {
    pub fn build(tc: &TreeContraction, weights: Vec<i64>) -> Self {
        let mut rc = RcForest {
            weights,
            ..Default::default()
        };
        let all: Vec<u32> = (0..tc.internal_count()).collect();
        rc.update(tc, &all);
        rc
    }

    pub fn cluster(&self, x: u32) -> &Cluster {
        self.clusters[x as usize]
            .as_ref()
            .expect("every internal vertex forms a cluster")
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().flatten()
    }

    pub fn edge_parent(&self, e: EdgeKey) -> Option<u32> {
        self.edge_parent.get(&e).copied()
    }

    pub fn base_edge_count(&self) -> usize {
        self.edge_parent.len()
    }

    /// Base vertices, base edges, and composite clusters.
    pub fn node_count(&self) -> usize {
        2 * self.clusters.len() + self.edge_parent.len()
    }

    pub fn roots(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters().filter(|c| c.parent.is_none())
    }

    /// Weight of an internal vertex: chain heads carry the original
    /// vertex's weight, extra chain vertices carry none.
    pub fn vertex_weight(&self, x: u32) -> i64 {
        self.weights.get(x as usize).copied().unwrap_or(0)
    }

    pub fn child_sum(&self, c: Child) -> i64 {
        match c {
            Child::Edge(_) => 0,
            Child::Cluster(x) => self.cluster(x).sum,
        }
    }

    /// Path through child `c` from boundary `from` to its other end.
    pub fn child_path(&self, tc: &TreeContraction, c: Child, from: u32) -> PathSummary {
        match c {
            Child::Edge((a, b)) => match tc.forest().real_between(a, b) {
                Some(e) => PathSummary {
                    max: Some((e.weight, e.u, e.v)),
                    first: Some((e.u, e.v)),
                    last: Some((e.u, e.v)),
                },
                None => PathSummary::EMPTY,
            },
            Child::Cluster(x) => {
                let cl = self.cluster(x);
                if cl.edge_children[0].1 == from {
                    cl.path
                } else {
                    cl.path.reversed()
                }
            }
        }
    }

    /// Re-derives the clusters of `touched` internal vertices from the
    /// record, fixes parent links, and recomputes payloads upward for as
    /// long as they change.
    pub fn update(&mut self, tc: &TreeContraction, touched: &[u32]) {
        let total = tc.internal_count() as usize;
        if self.clusters.len() < total {
            self.clusters.resize(total, None);
        }
        for &x in touched {
            let Some(old) = self.clusters[x as usize].take() else {
                continue;
            };
            for &(c, _) in &old.edge_children {
                self.detach(c, x);
            }
            for &c in &old.raked {
                self.detach(Child::Cluster(c), x);
            }
            self.clusters[x as usize] = Some(old);
        }
        let mut heap = BinaryHeap::new();
        let mut queued = FxHashSet::default();
        for &x in touched {
            let mut fresh = derive(tc, x);
            if let Some(old) = &self.clusters[x as usize] {
                // keep the old payload so the refresh below can tell
                // whether it moved
                (fresh.parent, fresh.sum, fresh.path) = (old.parent, old.sum, old.path);
            }
            self.clusters[x as usize] = Some(fresh);
        }
        for &x in touched {
            let cl = self.cluster(x).clone();
            for &(c, _) in &cl.edge_children {
                self.attach(c, x);
            }
            for &c in &cl.raked {
                self.attach(Child::Cluster(c), x);
            }
            if queued.insert(x) {
                heap.push(Reverse((cl.round, x)));
            }
        }
        // children die strictly before their parent, so round order is a
        // bottom-up order
        while let Some(Reverse((_, x))) = heap.pop() {
            let (sum, path) = self.payload(tc, x);
            let cl = self.clusters[x as usize].as_mut().expect("cluster");
            let changed = cl.sum != sum || cl.path != path;
            cl.sum = sum;
            cl.path = path;
            if changed {
                if let Some(p) = cl.parent {
                    if queued.insert(p) {
                        heap.push(Reverse((self.cluster(p).round, p)));
                    }
                }
            }
        }
    }

    fn detach(&mut self, c: Child, from: u32) {
        match c {
            Child::Edge(k) => {
                if self.edge_parent.get(&k) == Some(&from) {
                    self.edge_parent.remove(&k);
                }
            }
            Child::Cluster(y) => {
                if let Some(cl) = self.clusters[y as usize].as_mut() {
                    if cl.parent == Some(from) {
                        cl.parent = None;
                    }
                }
            }
        }
    }

    fn attach(&mut self, c: Child, to: u32) {
        match c {
            Child::Edge(k) => {
                self.edge_parent.insert(k, to);
            }
            Child::Cluster(y) => {
                self.clusters[y as usize]
                    .as_mut()
                    .expect("child cluster")
                    .parent = Some(to);
            }
        }
    }

    fn payload(&self, tc: &TreeContraction, x: u32) -> (i64, PathSummary) {
        let cl = self.cluster(x);
        let mut sum = self.vertex_weight(x);
        for &c in &cl.raked {
            sum = sum.wrapping_add(self.cluster(c).sum);
        }
        for &(c, _) in &cl.edge_children {
            sum = sum.wrapping_add(self.child_sum(c));
        }
        let path = match cl.edge_children[..] {
            [(c0, t0), (c1, _)] => self.child_path(tc, c0, t0).then(self.child_path(tc, c1, x)),
            _ => PathSummary::EMPTY,
        };
        (sum, path)
    }

    /// Re-derives every cluster from the record and checks it against the
    /// stored one; recomputes boundaries from cluster contents; checks that
    /// every base node has exactly one parent and every payload is current.
    pub fn audit(&self, tc: &TreeContraction) -> Result<(), String> {
        let total = tc.internal_count();
        if self.clusters.len() != total as usize {
            return Err(format!(
                "{} clusters for {total} vertices",
                self.clusters.len()
            ));
        }
        let mut child_of: FxHashMap<Child, u32> = FxHashMap::default();
        for x in 0..total {
            let cl = self.clusters[x as usize]
                .as_ref()
                .ok_or(format!("vertex {x} has no cluster"))?;
            let want = derive(tc, x);
            if (&want.edge_children, &want.raked, want.round, want.kind)
                != (&cl.edge_children, &cl.raked, cl.round, cl.kind)
            {
                return Err(format!("cluster {x} differs from the record"));
            }
            if (cl.sum, cl.path) != self.payload(tc, x) {
                return Err(format!("cluster {x} has a stale payload"));
            }
            let kids = cl
                .edge_children
                .iter()
                .map(|c| c.0)
                .chain(cl.raked.iter().map(|&c| Child::Cluster(c)));
            for c in kids {
                if child_of.insert(c, x).is_some() {
                    return Err(format!("{c:?} has two parents"));
                }
            }
        }
        for x in 0..total {
            if self.cluster(x).parent != child_of.get(&Child::Cluster(x)).copied() {
                return Err(format!("cluster {x} has a wrong parent link"));
            }
        }
        let mut edges = 0;
        for x in 0..total {
            for s in tc.forest().slots(x).iter().flatten() {
                let k = edge_key(x, s.0);
                if x < s.0 {
                    edges += 1;
                    if self.edge_parent(k) != child_of.get(&Child::Edge(k)).copied()
                        || self.edge_parent(k).is_none()
                    {
                        return Err(format!("base edge {k:?} has no single parent"));
                    }
                }
            }
        }
        if edges != self.edge_parent.len() {
            return Err("stale base edges".into());
        }
        self.audit_boundaries(total)
    }

    fn audit_boundaries(&self, total: u32) -> Result<(), String> {
        let mut order: Vec<u32> = (0..total).collect();
        order.sort_by_key(|&x| self.cluster(x).round);
        let mut verts: Vec<FxHashSet<u32>> = vec![FxHashSet::default(); total as usize];
        let mut edges: Vec<Vec<EdgeKey>> = vec![Vec::new(); total as usize];
        for x in order {
            let cl = self.cluster(x);
            let mut vs = FxHashSet::from_iter([x]);
            let mut es = Vec::new();
            let kids = cl
                .edge_children
                .iter()
                .map(|c| c.0)
                .chain(cl.raked.iter().map(|&c| Child::Cluster(c)));
            for c in kids {
                match c {
                    Child::Edge(k) => es.push(k),
                    Child::Cluster(y) => {
                        vs.extend(verts[y as usize].iter().copied());
                        es.extend(edges[y as usize].iter().copied());
                    }
                }
            }
            let mut boundary: Vec<u32> = es
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .filter(|v| !vs.contains(v))
                .collect();
            boundary.sort_unstable();
            boundary.dedup();
            let mut stored = cl.boundary().to_vec();
            stored.sort_unstable();
            if boundary != stored || boundary.len() > 2 {
                return Err(format!(
                    "cluster {x}: boundary {stored:?}, contents give {boundary:?}"
                ));
            }
            verts[x as usize] = vs;
            edges[x as usize] = es;
        }
        Ok(())
    }
}

/// The cluster of internal vertex `x` as the record describes it.
fn derive(tc: &TreeContraction, x: u32) -> Cluster {
    let d = tc.death(x);
    let mut raked = SmallVec::new();
    for i in 1..=d {
        let slots = tc.slots_at(i, x).expect("live until death");
        raked.extend(slots.iter().filter_map(|s| match s {
            Slot::Empty { raked: Some(c) } => Some(*c),
            _ => None,
        }));
    }
    let slots = tc.slots_at(d, x).expect("live at death");
    let edge_children: SmallVec<[(Child, u32); 2]> = slots
        .iter()
        .filter_map(Slot::edge)
        .map(|e| {
            let c = match e.rep {
                None => Child::Edge(edge_key(x, e.neighbor)),
                Some(r) => Child::Cluster(r),
            };
            (c, e.neighbor)
        })
        .collect();
    let kind = match edge_children.len() {
        0 => ClusterKind::Nullary,
        1 => ClusterKind::Unary,
        _ => ClusterKind::Binary,
    };
    Cluster {
        rep: x,
        round: d,
        kind,
        edge_children,
        raked,
        parent: None,
        sum: 0,
        path: PathSummary::EMPTY,
    }
}
