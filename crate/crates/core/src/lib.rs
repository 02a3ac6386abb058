pub mod coin;
pub mod engine;
pub mod harness;
pub mod listseq;
pub mod mapreduce;
pub mod monoid;
pub mod rctree;
pub mod treecontract;
