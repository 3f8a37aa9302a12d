//! Exact, desk-scale laboratory for randomness extraction under
//! number-on-forehead leakage.
//!
//! The crate has three layers. At the bottom, [`gf2k`] provides binary
//! field cores and [`distkit`] an exact-rational probability toolkit
//! (distributions, pushforwards, statistical distance, min-entropy).
//! On top of those, [`nofsim`] simulates number-on-forehead protocols and
//! their cylinder-intersection structure, and [`extract`] builds the
//! field-multiplication condenser/extractor compositions. [`verify`]
//! closes the loop: brute-force oracles that measure extraction and
//! leakage distances exactly and check them against the claimed bounds.
//!
//! Everything that feeds a verdict is computed in exact rational
//! arithmetic; floating point appears only in logarithmic report fields.
//! Exhaustive operations estimate their cost up front and refuse to start
//! past the configured budget ([`error::Budget`]).

pub mod bits;
pub mod distkit;
pub mod error;
pub mod extract;
pub mod fixtures;
pub mod gf2k;
pub mod nofsim;
pub mod oracle;
pub mod ratio;
pub mod rng;
pub mod verify;

pub use error::{Budget, Error, Result};
