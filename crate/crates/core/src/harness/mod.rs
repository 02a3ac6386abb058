//! Test oracles, input generators, file formats, randomized trials, and
//! the scaling runner.

pub mod gen;
pub mod io;
pub mod oracle;
pub mod scaling;
pub mod trials;
