//! Numerical toolkit for log-Sobolev and hypercontractivity inequalities of
//! the n-qubit depolarizing semigroup.
//!
//! Operators are dense `2^n x 2^n` complex matrices ([`DenseOperator`]) with
//! qubit 0 as the most significant tensor factor. The normalized trace
//! `tau = tr / 2^n` is used throughout, so `||I||_p = 1`.

pub mod applications;
pub mod error;
pub mod harness;
pub mod hyperc;
pub mod io;
pub mod operator;
pub mod report;
pub mod semigroup;
pub mod sobolev;
pub mod spectral;

#[cfg(test)]
pub(crate) mod testutil;

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 12;

pub use error::{Error, Result};
pub use operator::{DenseOperator, MultiIndex, PauliCoefficients, C64};
pub use report::{CheckReport, ReportBundle, Table, Verdict};
