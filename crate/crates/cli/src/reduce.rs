use std::path::PathBuf;

use anyhow::Context;
use clap::Args;

use dynamize::harness::io;
use dynamize::mapreduce::MapReduce;
use dynamize::monoid::{Max, Min, Monoid, Sum};

use crate::report::{self, Format};
use crate::{Global, Op};

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Whitespace-separated integers.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Op::Sum)]
    op: Op,
    /// Element updates `index=value`, applied as one batch.
    #[arg(long = "update", value_parser = parse_update)]
    updates: Vec<(usize, i64)>,
    /// Inclusive index range to fold after the updates.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    range: Option<Vec<usize>>,
}

fn parse_update(s: &str) -> Result<(usize, i64), String> {
    crate::seq::parse_assignment(s).map(|(i, v)| (i as usize, v))
}

pub fn run(g: &Global, args: &ReduceArgs) -> anyhow::Result<()> {
    match args.op {
        Op::Sum => run_with(g, args, Sum),
        Op::Max => run_with(g, args, Max),
        Op::Min => run_with(g, args, Min),
    }
}

fn run_with<M: Monoid<T = i64>>(g: &Global, args: &ReduceArgs, monoid: M) -> anyhow::Result<()> {
    let values = io::parse_values(&io::read(&args.input)?)
        .with_context(|| args.input.display().to_string())?;
    let mut m = MapReduce::build(
        values,
        monoid,
        (|x: &i64| *x) as fn(&i64) -> i64,
        g.threads(),
    )?;
    let check = |m: &MapReduce<M>| -> anyhow::Result<()> {
        if g.check_consistency() {
            m.check_consistency()
                .map_err(|e| anyhow::anyhow!("consistency check failed: {e}"))?;
        }
        Ok(())
    };
    check(&m)?;
    if !args.updates.is_empty() {
        let r = m.update(&args.updates)?;
        check(&m)?;
        report::propagation(g.format, "update", args.updates.len(), &r);
    }
    let mut out = vec![("total".to_string(), m.total().to_string())];
    if let Some(r) = &args.range {
        out.push((
            format!("range {} {}", r[0], r[1]),
            m.range(r[0], r[1])?.to_string(),
        ));
    }
    match g.format {
        Format::Text => out.iter().for_each(|(k, v)| println!("{k} {v}")),
        Format::Csv => report::answers(g.format, &out),
    }
    Ok(())
}
