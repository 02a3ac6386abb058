use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};

use dynamize::engine::PropagationReport;
use dynamize::harness::io;
use dynamize::listseq::Sequences;
use dynamize::monoid::{Max, Min, Monoid, Sum};

use crate::report;
use crate::{Global, Op};

#[derive(Args, Debug)]
pub struct SeqArgs {
    /// Chains file: one sequence per line, tokens `id:value`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Op::Sum)]
    op: Op,
    #[command(subcommand)]
    action: SeqAction,
}

#[derive(Subcommand, Debug)]
enum SeqAction {
    /// Build and print contraction statistics.
    Build,
    /// Append the sequence headed by each `v` after the one ending at `u`;
    /// takes pairs `u v`.
    Join {
        #[arg(required = true, num_args = 2..)]
        nodes: Vec<u32>,
    },
    /// Break each sequence right after each given node.
    Split {
        #[arg(required = true)]
        nodes: Vec<u32>,
    },
    /// Fold of the values from `u` through `v`.
    Query { u: u32, v: u32 },
    /// Set node values; takes `id=value` pairs.
    Update {
        #[arg(required = true, value_parser = parse_assignment)]
        values: Vec<(u32, i64)>,
    },
}

pub fn parse_assignment(s: &str) -> Result<(u32, i64), String> {
    let (i, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected id=value, got {s:?}"))?;
    Ok((
        i.trim().parse().map_err(|_| format!("bad id {i:?}"))?,
        v.trim().parse().map_err(|_| format!("bad value {v:?}"))?,
    ))
}

pub fn run(g: &Global, args: &SeqArgs) -> anyhow::Result<()> {
    match args.op {
        Op::Sum => run_with(g, args, Sum),
        Op::Max => run_with(g, args, Max),
        Op::Min => run_with(g, args, Min),
    }
}

/// Current sequences in the chains format.
fn chains<M: Monoid<T = i64>>(s: &Sequences<M>) -> anyhow::Result<Vec<String>> {
    let mut out = Vec::new();
    for head in 0..s.len() as u32 {
        if s.prev(head)?.is_some() {
            continue;
        }
        let mut line = Vec::new();
        let mut x = Some(head);
        while let Some(u) = x {
            line.push(format!("{u}:{}", s.value(u)?));
            x = s.next(u)?;
        }
        out.push(line.join(" "));
    }
    Ok(out)
}

fn run_with<M: Monoid<T = i64>>(g: &Global, args: &SeqArgs, monoid: M) -> anyhow::Result<()> {
    let path = args.input.as_ref().context("--input is required")?;
    let parsed = io::parse_chains(&io::read(path)?).with_context(|| path.display().to_string())?;
    let mut s = Sequences::from_chains_with_threads(&parsed, monoid, g.seed, g.threads())?;
    let check = |s: &Sequences<M>| -> anyhow::Result<()> {
        if g.check_consistency() {
            s.check_consistency()
                .map_err(|e| anyhow::anyhow!("consistency check failed: {e}"))?;
        }
        Ok(())
    };
    check(&s)?;
    let updated =
        |s: &Sequences<M>, op: &str, k: usize, r: &PropagationReport| -> anyhow::Result<()> {
            check(s)?;
            report::propagation(g.format, op, k, r);
            for line in chains(s)? {
                println!("{line}");
            }
            Ok(())
        };
    match &args.action {
        SeqAction::Build => report::fields(
            g.format,
            &[
                ("nodes", s.len().to_string()),
                (
                    "sequences",
                    parsed.iter().filter(|c| !c.is_empty()).count().to_string(),
                ),
                ("rounds", s.rounds().to_string()),
                (
                    "computations",
                    s.build_report().total_computations().to_string(),
                ),
            ],
        ),
        SeqAction::Join { nodes } => {
            anyhow::ensure!(nodes.len() % 2 == 0, "join takes pairs `u v`");
            let pairs: Vec<(u32, u32)> = nodes.chunks(2).map(|p| (p[0], p[1])).collect();
            let r = s.batch_join(&pairs)?;
            updated(&s, "join", pairs.len(), &r)?;
        }
        SeqAction::Split { nodes } => {
            let r = s.batch_split(nodes)?;
            updated(&s, "split", nodes.len(), &r)?;
        }
        SeqAction::Query { u, v } => println!("{}", s.query(*u, *v)?),
        SeqAction::Update { values } => {
            let r = s.batch_update_value(values)?;
            updated(&s, "update", values.len(), &r)?;
        }
    }
    Ok(())
}
