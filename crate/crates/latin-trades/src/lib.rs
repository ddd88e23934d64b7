//! Construction, verification, planning and exhaustive search for mu-way
//! k-homogeneous Latin trades.
//!
//! A mu-way Latin trade is a collection of mu partial Latin squares on a
//! common shape such that every filled cell holds mu pairwise distinct
//! entries (one per layer) and, layer to layer, every row and every column
//! carries the same symbol set. It is k-homogeneous of order m, written
//! (mu, k, m), when every row and column holds exactly k filled cells and
//! every symbol occurs exactly k times in each layer.
//!
//! All indices and symbols are 0-based inside the library; every JSON and
//! text interface is 1-based.

mod error;

pub mod trade;
pub mod circulant;
pub mod field;
pub mod mols;
pub mod compose;
pub mod catalog;
pub mod planner;
pub mod search;
pub mod label347;

pub use error::Error;
pub use trade::{Cell, Rule, Trade, VerificationReport, Violation};

pub type Result<T> = std::result::Result<T, Error>;

/// Upper bound on grid orders accepted anywhere in the crate. Everything in
/// scope lives at desk scale; the bound keeps hostile inputs from driving
/// quadratic verification work.
pub const MAX_ORDER: usize = 2048;
