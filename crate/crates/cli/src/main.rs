use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod forest;
mod reduce;
mod report;
mod scale;
mod selftest;
mod seq;

use report::Format;

/// Batch-dynamic forests, sequences and reductions by change propagation.
#[derive(Parser, Debug)]
#[command(name = "dynamize", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for the contraction coins and generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for large rounds.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Check every update against a from-scratch run (always on in debug
    /// builds).
    #[arg(long, global = true)]
    pub debug_consistency: bool,
}

impl Global {
    pub fn check_consistency(&self) -> bool {
        self.debug_consistency || cfg!(debug_assertions)
    }

    pub fn threads(&self) -> usize {
        self.threads as usize
    }
}

#[derive(Args, Debug)]
pub struct ForestInput {
    /// Forest file: header `n m`, then `u v [weight]` per edge.
    #[arg(long)]
    pub input: PathBuf,
    /// Vertex weights: `v w` per line.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a forest and print contraction statistics.
    Build(ForestInput),
    /// Link edges into a forest.
    Link {
        #[command(flatten)]
        forest: ForestInput,
        /// Edge `u,v[,weight]`; repeatable.
        #[arg(long = "edge", required = true, value_parser = forest::parse_edge)]
        edges: Vec<(u32, u32, i64)>,
        /// Write the updated forest here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cut edges from a forest.
    Cut {
        #[command(flatten)]
        forest: ForestInput,
        /// Edge `u,v`; repeatable.
        #[arg(long = "edge", required = true, value_parser = forest::parse_edge)]
        edges: Vec<(u32, u32, i64)>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Answer connectivity, representative, subtree and path queries.
    Query(forest::QueryArgs),
    /// Sequences under joins and splits.
    Seq(seq::SeqArgs),
    /// Maintained reduction over an array.
    Mapreduce(reduce::ReduceArgs),
    /// Measure update costs across batch sizes and write CSV.
    Scale(scale::ScaleArgs),
    /// Run randomized trials against brute-force oracles.
    Selftest(selftest::SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Sum,
    Max,
    Min,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Build(input) => forest::build(g, &input),
        Command::Link {
            forest: input,
            edges,
            output,
        } => forest::link(g, &input, &edges, output.as_deref()),
        Command::Cut {
            forest: input,
            edges,
            output,
        } => forest::cut(g, &input, &edges, output.as_deref()),
        Command::Query(args) => forest::query(g, &args),
        Command::Seq(args) => seq::run(g, &args),
        Command::Mapreduce(args) => reduce::run(g, &args),
        Command::Scale(args) => scale::run(g, &args),
        Command::Selftest(args) => selftest::run(g, &args),
    }
}

fn main() -> ExitCode {
    // usage errors exit with status 2 inside `parse`
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
