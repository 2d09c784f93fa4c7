//! Library side of the `ordlab` binary: table rendering, one function per
//! subcommand, and the aggregated check suites. Kept as a lib so integration
//! tests can drive the same code paths the binary does.

pub mod commands;
pub mod suites;
pub mod table;
