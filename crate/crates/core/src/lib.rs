//! Linear preferential-attachment trees grown from arbitrary seed trees.
//!
//! The crate covers the growth engine and its couplings, the limiting laws
//! of normalized degrees, exact and asymptotic tail probabilities, the
//! pattern-weighted maximum degree, local-limit ball statistics, and a
//! Monte-Carlo harness that lower-bounds the total-variation distance
//! between trees grown from two different seeds.

// `!(x > 0.0)` rejects NaN along with non-positive values; quadrature
// nodes keep their tabulated digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod ahu;
pub mod error;
pub mod growth;
pub mod harness;
pub mod limit;
pub mod local;
mod matching;
pub mod quad;
pub mod rng;
pub mod special;
pub mod tail;
pub mod tree;
pub mod umax;

pub use ahu::{ahu_code, trees_isomorphic, RootedBallCode};
pub use error::{Error, GrowthError, NumericError, Result, TreeError};
pub use growth::{grow, grow_forest, GrowthState, Trajectory};
pub use tree::{parse_tree, parse_tree_spec, DegreeProfile, Tree};
