//! Market model for goods whose value to a customer grows with the number of
//! other buyers.
//!
//! Customers have an idiosyncratic willingness to pay drawn from a unimodal
//! law ([`distribution`]) plus a social term `j * eta` proportional to the
//! fraction of buyers. The crate solves the customers' equilibria
//! ([`demand`]), the monopolist's pricing program ([`supply`]), traces the
//! phase diagrams of both problems ([`phase`]), evaluates the closed-form
//! expansions near the critical points ([`asymptotics`]) and runs dynamic
//! pricing scenarios ([`simulate`]).
//!
//! All prices and willingness-to-pay values are normalized by the spread of
//! the idiosyncratic law and measured net of the unit production cost.
//!
//! The crate is `no_std` and only needs an allocator.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod demand;
pub mod distribution;
mod error;
mod market;
pub mod phase;
pub mod roots;
pub mod simulate;
pub mod supply;

pub use distribution::{Distribution, GammaFunctions, Gaussian, Iwp, Logistic, Tabulated};
pub use error::{Error, Result};
pub use market::{Market, SupplyApex};

/// Smallest fraction of buyers the solvers resolve; `1 - ETA_CLAMP` is the largest.
pub const ETA_CLAMP: f64 = 1e-12;
