//! Round-0 forest of bounded degree, with every original vertex expanded
//! into a chain of internal vertices.

use rustc_hash::FxHashMap;

use super::program::SLOTS;

pub type SlotArray = [Option<(u32, u8)>; SLOTS];

/// An edge of the original forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RealEdge {
    /// Original endpoints, `u < v`.
    pub u: u32,
    pub v: u32,
    /// Internal endpoints: `a` belongs to `u`'s chain, `b` to `v`'s.
    pub a: u32,
    pub b: u32,
    pub weight: i64,
}

pub(crate) fn ordered(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Internal bounded-degree forest plus the map back to original vertices.
///
/// Original vertex `v` is represented by the chain `chains[v]`, whose first
/// element is `v` itself. Extra chain vertices get ids from `n` upward and
/// are joined by virtual edges that carry no weight. Chains only grow.
#[derive(Clone, Debug, Default)]
pub struct ReducedForest {
    pub(crate) adj: Vec<SlotArray>,
    pub(crate) owner: Vec<u32>,
    pub(crate) chains: Vec<Vec<u32>>,
    /// Chain members that may have a free slot (checked on use).
    free: Vec<Vec<u32>>,
    pub(crate) real: FxHashMap<(u32, u32), RealEdge>,
    /// Internal endpoints (ordered) of every real edge -> original key.
    pub(crate) by_internal: FxHashMap<(u32, u32), (u32, u32)>,
}

impl ReducedForest {
    /// Splits every vertex of degree above three into a chain with one
    /// real edge per chain vertex. Vertices of degree at most three map to
    /// themselves. Edges are assumed valid (checked by the caller).
    pub fn reduce(n: u32, edges: &[(u32, u32, i64)]) -> Self {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
        for (k, &(u, v, _)) in edges.iter().enumerate() {
            incident[u as usize].push(k);
            incident[v as usize].push(k);
        }
        let mut f = ReducedForest {
            adj: vec![[None; SLOTS]; n as usize],
            owner: (0..n).collect(),
            chains: (0..n).map(|v| vec![v]).collect(),
            free: vec![Vec::new(); n as usize],
            ..Default::default()
        };
        // endpoint of edge k at original vertex v
        let mut attach: FxHashMap<(usize, u32), u32> = FxHashMap::default();
        for v in 0..n {
            let inc = &incident[v as usize];
            if inc.len() <= SLOTS {
                for &k in inc {
                    attach.insert((k, v), v);
                }
                continue;
            }
            let mut prev = v;
            attach.insert((inc[0], v), v);
            for &k in &inc[1..] {
                let x = f.push_vertex(v);
                f.connect(prev, x);
                attach.insert((k, v), x);
                prev = x;
            }
        }
        for (k, &(u, v, w)) in edges.iter().enumerate() {
            let a = attach[&(k, u)];
            let b = attach[&(k, v)];
            f.add_real(u, v, a, b, w);
        }
        for v in 0..f.adj.len() as u32 {
            if f.degree(v) < SLOTS {
                let o = f.owner[v as usize];
                f.free[o as usize].push(v);
            }
        }
        f
    }

    pub fn original_count(&self) -> u32 {
        self.chains.len() as u32
    }

    pub fn internal_count(&self) -> u32 {
        self.adj.len() as u32
    }

    pub fn slots(&self, x: u32) -> &SlotArray {
        &self.adj[x as usize]
    }

    pub fn degree(&self, x: u32) -> usize {
        self.adj[x as usize].iter().flatten().count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.internal_count())
            .map(|x| self.degree(x))
            .max()
            .unwrap_or(0)
    }

    pub fn owner(&self, x: u32) -> u32 {
        self.owner[x as usize]
    }

    pub fn chain(&self, v: u32) -> &[u32] {
        &self.chains[v as usize]
    }

    pub fn real_edge(&self, u: u32, v: u32) -> Option<&RealEdge> {
        self.real.get(&ordered(u, v))
    }

    pub fn real_edges(&self) -> impl Iterator<Item = &RealEdge> {
        self.real.values()
    }

    /// The real edge between two internal vertices, if they are joined by one.
    pub fn real_between(&self, a: u32, b: u32) -> Option<&RealEdge> {
        self.by_internal
            .get(&ordered(a, b))
            .and_then(|k| self.real.get(k))
    }

    fn push_vertex(&mut self, owner: u32) -> u32 {
        let x = self.adj.len() as u32;
        self.adj.push([None; SLOTS]);
        self.owner.push(owner);
        self.chains[owner as usize].push(x);
        x
    }

    fn free_slot(&self, x: u32) -> Option<usize> {
        self.adj[x as usize].iter().position(Option::is_none)
    }

    /// Joins two internal vertices through their lowest free slots.
    fn connect(&mut self, a: u32, b: u32) {
        let ja = self.free_slot(a).expect("free slot");
        let jb = self.free_slot(b).expect("free slot");
        self.adj[a as usize][ja] = Some((b, jb as u8));
        self.adj[b as usize][jb] = Some((a, ja as u8));
    }

    fn add_real(&mut self, u: u32, v: u32, a: u32, b: u32, weight: i64) {
        self.connect(a, b);
        let (key, a, b) = if u < v {
            ((u, v), a, b)
        } else {
            ((v, u), b, a)
        };
        self.real.insert(
            key,
            RealEdge {
                u: key.0,
                v: key.1,
                a,
                b,
                weight,
            },
        );
        self.by_internal.insert(ordered(a, b), key);
    }

    /// An internal vertex of `v`'s chain with a free slot, growing the chain
    /// if needed. Every internal vertex whose slots change is pushed to
    /// `touched`; a newly created vertex also goes to `created`.
    fn attach_point(&mut self, v: u32, touched: &mut Vec<u32>, created: &mut Vec<u32>) -> u32 {
        while let Some(&x) = self.free[v as usize].last() {
            if self.free_slot(x).is_some() {
                return x;
            }
            self.free[v as usize].pop();
        }
        // every chain vertex is full: move one real edge of the chain's
        // last vertex t onto a new vertex x, and hang x off t
        let t = *self.chains[v as usize].last().expect("non-empty chain");
        let (j, (w, p)) = self.adj[t as usize]
            .iter()
            .enumerate()
            .find_map(|(j, s)| {
                s.filter(|(w, _)| self.by_internal.contains_key(&ordered(t, *w)))
                    .map(|s| (j, s))
            })
            .expect("full chain tail has a real edge");
        let x = self.push_vertex(v);
        self.adj[t as usize][j] = Some((x, 0));
        self.adj[w as usize][p as usize] = Some((x, 1));
        self.adj[x as usize][0] = Some((t, j as u8));
        self.adj[x as usize][1] = Some((w, p));
        let key = self.by_internal.remove(&ordered(t, w)).expect("real edge");
        let e = self.real.get_mut(&key).expect("real edge");
        if e.a == t {
            e.a = x;
        } else {
            e.b = x;
        }
        self.by_internal.insert(ordered(x, w), key);
        self.free[v as usize].push(x);
        touched.extend([t, w, x]);
        created.push(x);
        x
    }

    /// Adds a real edge between original vertices. The caller guarantees the
    /// edge is new and keeps the forest acyclic.
    pub(crate) fn link(
        &mut self,
        u: u32,
        v: u32,
        weight: i64,
        touched: &mut Vec<u32>,
        created: &mut Vec<u32>,
    ) {
        let a = self.attach_point(u, touched, created);
        let b = self.attach_point(v, touched, created);
        self.add_real(u, v, a, b, weight);
        touched.extend([a, b]);
    }

    /// Removes an existing real edge.
    pub(crate) fn cut(&mut self, u: u32, v: u32, touched: &mut Vec<u32>) {
        let e = self.real.remove(&ordered(u, v)).expect("existing edge");
        self.by_internal.remove(&ordered(e.a, e.b));
        for (x, y) in [(e.a, e.b), (e.b, e.a)] {
            let slot = self.adj[x as usize]
                .iter()
                .position(|s| matches!(s, Some((n, _)) if *n == y))
                .expect("slot");
            self.adj[x as usize][slot] = None;
            let o = self.owner[x as usize];
            self.free[o as usize].push(x);
            touched.push(x);
        }
    }

    /// Checks slot reciprocity, degree bounds, and chain structure.
    pub fn check(&self) -> Result<(), String> {
        for (x, slots) in self.adj.iter().enumerate() {
            for (j, s) in slots.iter().enumerate() {
                if let Some((y, p)) = s {
                    if self.adj[*y as usize][*p as usize] != Some((x as u32, j as u8)) {
                        return Err(format!("slot {x}[{j}] -> {y}[{p}] is not reciprocal"));
                    }
                    let real = self.by_internal.contains_key(&ordered(x as u32, *y));
                    let same_chain = self.owner[x] == self.owner[*y as usize];
                    if !real && !same_chain {
                        return Err(format!("edge {x}-{y} is neither real nor a chain edge"));
                    }
                }
            }
        }
        for e in self.real.values() {
            if self.owner[e.a as usize] != e.u || self.owner[e.b as usize] != e.v {
                return Err(format!("edge {}-{} attached to wrong chains", e.u, e.v));
            }
        }
        Ok(())
    }
}
