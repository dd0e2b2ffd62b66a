//! Randomized LP-rounding algorithms for the prize-collecting ordered TSP
//! and the prize-collecting multi-path TSP.
//!
//! The main entry points are [`pcotsp::solve`] for ordered terminals and
//! [`multipath::solve_multipath`] for terminal pairs. Both solve a stroll
//! relaxation ([`lp`]), decompose each component into a distribution over
//! trees ([`decomp`]) and round. [`oracle`] holds exact solvers for small
//! instances and [`bench`] the experiment harness.

pub mod bench;
pub mod decomp;
pub mod error;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod multipath;
pub mod oracle;
pub mod pcotsp;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
