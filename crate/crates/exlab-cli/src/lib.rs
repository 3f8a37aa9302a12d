//! Library half of the `exlab` binary: the experiment-config schema, the
//! run dispatcher, and report assembly. Kept as a library so integration
//! tests can parse and compare reports with the same types the binary
//! writes.

pub mod config;
pub mod report;
pub mod run;
