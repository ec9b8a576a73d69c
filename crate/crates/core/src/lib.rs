//! Computational laboratory for additive twists of Hecke eigenvalues by the
//! Möbius function and by primes.
//!
//! The crate computes exact coefficients of level-one eigenforms, tabulates
//! arithmetic functions, evaluates the associated exponential sums with
//! exact accumulation, and checks the identities and inequalities that
//! connect them.

pub mod error;
pub mod numeric;
pub mod series;
pub mod sieve;
pub mod cuspform;
pub mod hecke;
pub mod expsums;
pub mod diophantine;
pub mod vaughan;
pub mod characters;
pub mod circle;
pub mod fit;
pub mod config;
pub mod verify;

pub use error::{Error, Result};
