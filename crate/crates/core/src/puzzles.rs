//! Bundled 9×9 puzzles in the grid text format.

use crate::codegraph::{parse_grid, ReceivedWord};
use crate::Result;

/// Solvable by constraint propagation alone.
pub const EASY_9X9: &str = include_str!("../data/easy_9x9.txt");

/// Needs search; propagation stalls with many cells open.
pub const HARD_9X9: &str = include_str!("../data/hard_9x9.txt");

pub fn easy() -> Result<ReceivedWord> {
    parse_grid(EASY_9X9, 9)
}

pub fn hard() -> Result<ReceivedWord> {
    parse_grid(HARD_9X9, 9)
}
