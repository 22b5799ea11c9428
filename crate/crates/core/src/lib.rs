//! Zero-area families of unit needles.
//!
//! A one-square-per-row pattern on an `m x m` grid generates a self-similar
//! set `F` in the unit square. Reading each point `(a, b)` of `F` as the line
//! `y = a + b x` gives a line family of zero area that still contains a line
//! of every slope in `[0, 1]`. Choosing, for each slope `t`, the leftmost
//! point of `F` on row `t` (a lower semicontinuous selector) picks out one
//! unit needle per slope.
//!
//! Modules, bottom up:
//! - [`quaternary`]: exact `p / m^k` rationals and digit expansions
//! - [`pattern`]: the pattern, its level-`n` squares, membership and projections
//! - [`envelope`]: the left-envelope selector, brackets, oracles and continuous approximants
//! - [`geometry`]: needles, the Hausdorff metric on segments, the 8-piece direction atlas
//! - [`measure`]: stabbing queries, exact slice lengths and finite-depth area bounds

pub mod envelope;
pub mod error;
pub mod geometry;
pub mod interval;
pub mod measure;
pub mod oracle;
pub mod pattern;
pub mod quaternary;
pub mod rng;

pub use error::{Error, PatternError, Result};
pub use interval::IntervalSet;
pub use pattern::{Axis, Pattern, RowOrientation, SquareAddress};
pub use quaternary::{expansions, geometric_tail, Expansion, GridRational, Tail};
