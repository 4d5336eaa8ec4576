//! Belief-propagation decoding and density evolution for SUDOKU-constraint
//! codes on the q-ary erasure channel.
//!
//! A SUDOKU code is the set of q-ary words in which every constraint node
//! sees pairwise distinct values on its `d_c` attached variables. Classic
//! 9×9 Sudoku is one instance (rows, columns and boxes); long codes with
//! random interleavers are another.
//!
//! The crate is organised as:
//!
//! - [`model`]: alphabet subsets, cardinality pmfs, code parameters.
//! - [`codegraph`]: factor graphs, codeword sampling, the erasure channel.
//! - [`subset_bp`]: the set-valued message-passing decoder.
//! - [`soft_bp`]: probability-vector node rules and the matrix permanent.
//! - [`density_evolution`]: exact cardinality kernels, the DE recursion,
//!   thresholds and rate estimates.
//! - [`simulator`]: Monte Carlo campaigns on finite graphs.
//! - [`puzzles`]: bundled 9×9 test grids.

pub mod codegraph;
pub mod density_evolution;
mod error;
pub mod model;
pub mod puzzles;
pub mod seed;
pub mod simulator;
pub mod soft_bp;
pub mod subset_bp;

pub use error::{Error, Result};
pub use model::{CardinalityPmf, CodeParams, Permutation, Rational, SymbolSet};
