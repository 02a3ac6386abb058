use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};

use dynamize::harness::io::{self, BatchOp, Query};
use dynamize::rctree::DynamicForest;

use crate::report;
use crate::{ForestInput, Global};

/// Parses `u,v` or `u,v,weight`.
pub fn parse_edge(s: &str) -> Result<(u32, u32, i64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let id = |t: &str| t.parse::<u32>().map_err(|_| format!("bad vertex {t:?}"));
    match parts[..] {
        [u, v] => Ok((id(u)?, id(v)?, 0)),
        [u, v, w] => Ok((
            id(u)?,
            id(v)?,
            w.parse().map_err(|_| format!("bad weight {w:?}"))?,
        )),
        _ => Err(format!("expected u,v[,weight], got {s:?}")),
    }
}

fn load(g: &Global, input: &ForestInput) -> anyhow::Result<DynamicForest> {
    let file = io::parse_forest(&io::read(&input.input)?)
        .with_context(|| input.input.display().to_string())?;
    let weights = match &input.weights {
        Some(p) => {
            io::parse_weights(&io::read(p)?, file.n).with_context(|| p.display().to_string())?
        }
        None => vec![0; file.n as usize],
    };
    Ok(DynamicForest::with_threads(
        file.n,
        &file.edges,
        weights,
        g.seed,
        g.threads(),
    )?)
}

fn check(g: &Global, f: &DynamicForest) -> anyhow::Result<()> {
    if g.check_consistency() {
        f.check_consistency()
            .map_err(|e| anyhow::anyhow!("consistency check failed: {e}"))?;
    }
    Ok(())
}

fn save(f: &DynamicForest, output: Option<&Path>) -> anyhow::Result<()> {
    if let Some(p) = output {
        let mut edges: Vec<(u32, u32, i64)> = f
            .contraction()
            .edges()
            .map(|e| (e.u, e.v, e.weight))
            .collect();
        edges.sort_unstable();
        std::fs::write(p, io::write_forest(f.vertex_count(), &edges))
            .with_context(|| p.display().to_string())?;
    }
    Ok(())
}

pub fn build(g: &Global, input: &ForestInput) -> anyhow::Result<()> {
    let f = load(g, input)?;
    check(g, &f)?;
    let tc = f.contraction();
    report::fields(
        g.format,
        &[
            ("vertices", f.vertex_count().to_string()),
            ("edges", tc.edges().count().to_string()),
            ("components", f.rc().roots().count().to_string()),
            ("internal", tc.internal_count().to_string()),
            ("rounds", tc.rounds().to_string()),
            (
                "computations",
                tc.build_report().total_computations().to_string(),
            ),
        ],
    );
    Ok(())
}

pub fn link(
    g: &Global,
    input: &ForestInput,
    edges: &[(u32, u32, i64)],
    output: Option<&Path>,
) -> anyhow::Result<()> {
    let mut f = load(g, input)?;
    let r = f.batch_link(edges)?;
    check(g, &f)?;
    report::propagation(g.format, "link", edges.len(), &r.propagation);
    save(&f, output)
}

pub fn cut(
    g: &Global,
    input: &ForestInput,
    edges: &[(u32, u32, i64)],
    output: Option<&Path>,
) -> anyhow::Result<()> {
    let mut f = load(g, input)?;
    let pairs: Vec<(u32, u32)> = edges.iter().map(|e| (e.0, e.1)).collect();
    let r = f.batch_cut(&pairs)?;
    check(g, &f)?;
    report::propagation(g.format, "cut", pairs.len(), &r.propagation);
    save(&f, output)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QueryType {
    Connected,
    Repr,
    Subtree,
    Pathmax,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[command(flatten)]
    forest: ForestInput,
    /// Updates applied before querying: `+ u v [w]` links, `- u v` cuts.
    /// Cuts go first, then links.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Query file, one query per line.
    #[arg(long, conflicts_with = "kind")]
    queries: Option<PathBuf>,
    #[arg(long = "type", value_enum, requires = "vertices")]
    kind: Option<QueryType>,
    /// Vertices of a single query; `subtree` takes the root first.
    vertices: Vec<u32>,
}

fn apply_batch(g: &Global, f: &mut DynamicForest, path: &Path) -> anyhow::Result<()> {
    let ops = io::parse_batch(&io::read(path)?).with_context(|| path.display().to_string())?;
    let cuts: Vec<(u32, u32)> = ops
        .iter()
        .filter_map(|op| {
            if let BatchOp::Cut(u, v) = *op {
                Some((u, v))
            } else {
                None
            }
        })
        .collect();
    let links: Vec<(u32, u32, i64)> = ops
        .iter()
        .filter_map(|op| {
            if let BatchOp::Link(u, v, w) = *op {
                Some((u, v, w))
            } else {
                None
            }
        })
        .collect();
    if !cuts.is_empty() {
        f.batch_cut(&cuts)?;
        check(g, f)?;
    }
    if !links.is_empty() {
        f.batch_link(&links)?;
        check(g, f)?;
    }
    Ok(())
}

fn single(kind: QueryType, v: &[u32]) -> anyhow::Result<Query> {
    Ok(match (kind, v) {
        (QueryType::Connected, &[a, b]) => Query::Connected(a, b),
        (QueryType::Repr, &[a]) => Query::Repr(a),
        (QueryType::Subtree, &[root, vertex]) => Query::Subtree { root, vertex },
        (QueryType::Pathmax, &[a, b]) => Query::PathMax(a, b),
        (QueryType::Repr, _) => bail!("repr takes one vertex"),
        _ => bail!("{kind:?} takes two vertices"),
    })
}

fn label(q: &Query) -> String {
    match *q {
        Query::Connected(u, v) => format!("connected {u} {v}"),
        Query::Repr(v) => format!("repr {v}"),
        Query::Subtree { root, vertex } => format!("subtree {root} {vertex}"),
        Query::PathMax(u, v) => format!("pathmax {u} {v}"),
    }
}

pub fn query(g: &Global, args: &QueryArgs) -> anyhow::Result<()> {
    let queries = match (&args.queries, args.kind) {
        (Some(p), _) => {
            io::parse_queries(&io::read(p)?).with_context(|| p.display().to_string())?
        }
        (None, Some(kind)) => vec![single(kind, &args.vertices)?],
        (None, None) => bail!("give --type with vertices, or --queries"),
    };
    let mut f = load(g, &args.forest)?;
    check(g, &f)?;
    if let Some(p) = &args.batch {
        apply_batch(g, &mut f, p)?;
    }
    // representative and connectivity queries go through one batch walk
    let mut flat = Vec::new();
    for q in &queries {
        match *q {
            Query::Connected(u, v) => flat.extend([u, v]),
            Query::Repr(v) => flat.push(v),
            _ => {}
        }
    }
    let mut reprs = f.batch_find_repr(&flat)?.reprs.into_iter();
    let mut rows = Vec::with_capacity(queries.len());
    for q in &queries {
        let answer = match *q {
            Query::Connected(..) => {
                let (a, b) = (reprs.next(), reprs.next());
                (a == b).to_string()
            }
            Query::Repr(_) => reprs.next().expect("one answer per vertex").to_string(),
            Query::Subtree { root, vertex } => f.subtree_sum(root, vertex)?.to_string(),
            Query::PathMax(u, v) => match f.path_max(u, v)? {
                Some((w, (a, b))) => format!("{w} {a} {b}"),
                None => "none".to_string(),
            },
        };
        rows.push((label(q), answer));
    }
    report::answers(g.format, &rows);
    Ok(())
}
