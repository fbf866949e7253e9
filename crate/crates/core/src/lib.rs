//! Rank-revealing QR factorizations.
//!
//! [`rrqr::qrp`] is classical column pivoting. [`rrqr::qrdm`] and
//! [`rrqr::qrdm2`] pick whole blocks of pivots per step with Deviation
//! Maximization ([`dm`]) and update the trailing matrix with compact WY
//! blocks ([`householder`]). [`oracle`] holds a Jacobi SVD and checks for
//! the singular-value bounds involved.

pub mod dm;
pub mod error;
pub mod householder;
pub mod matrix;
pub mod oracle;
pub mod rrqr;

pub use dm::{DmParams, DmSelection};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, MatrixView, MatrixViewMut, Permutation};
pub use rrqr::{qrdm, qrdm2, qrp, Algorithm, RRQRResult, StepRecord, StopCriterion};
