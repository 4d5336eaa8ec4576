//! Density evolution over message-cardinality distributions.
//!
//! By alphabet symmetry the distribution of message *cardinalities* is
//! enough to track the decoder on a tree-like graph. Node kernels are built
//! exactly with rationals ([`kernel`]); the recursion itself runs in `f64`
//! ([`recursion`]).

pub mod kernel;
pub mod recursion;

pub use kernel::{
    build_constraint_table, build_constraint_table_with, build_variable_table, count_nondecreasing, multiplicity,
    nondecreasing_tuples, reachability_histogram, ConditionalTable, KernelMethod, NodeKind, TableRow,
};
pub use recursion::{
    apply_channel, cn_map, de_iterate, de_iterate_with, find_threshold, find_threshold_with,
    rate_k, rate_limit, vn_map, DeConfig, DeKernels, DeOutcome, DeTrace, RateEstimate,
    ThresholdResult,
};
