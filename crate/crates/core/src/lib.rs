//! Adversarial point sets for universal TSP orders on the unit square.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: points, discrete-slope lines, strips, rectangles and dyadic squares.
//! - [`orders`]: total orders on grid cells (space-filling curves and explicit rank tables).
//! - [`tsp`]: cost of a set under an order, exact and bounded open-path TSP.
//! - [`cyclewalk`]: the zig-zag / confinement dichotomy for ±1 walks on the M-cycle.
//! - [`adversary`]: spiral chains, backtracks, zig-zag sets and backtracking sets.
//! - [`harness`]: configuration, records, plotting and the command entry points.

pub mod adversary;
pub mod cyclewalk;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod orders;
pub mod tsp;

pub use error::{Error, Result};
