//! Experiment harness: test-matrix generation, MatrixMarket I/O, and
//! comparison runs of the pivoted QR drivers against a Jacobi SVD oracle.

pub mod config;
pub mod gen;
pub mod mm;
pub mod report;
pub mod suite;

pub use config::{GenSpec, Input, RunConfig};
pub use report::{compare_run, grid_sweep, ComparisonRow, CompareOptions, SweepRow};
