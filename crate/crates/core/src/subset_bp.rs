//! Message passing with alphabet-subset messages for the q-ary erasure
//! channel.
//!
//! A subset message stands for the uniform distribution over its members.
//! Variable nodes intersect; constraint nodes remove every value covered by
//! a *tight* group of inputs, i.e. `k` inputs whose union has exactly `k`
//! values (the naked-subset rule of Sudoku solvers).

use serde::Serialize;

use crate::codegraph::{FactorGraph, ReceivedWord};
use crate::model::SymbolSet;
use crate::{Error, Result};

/// Extrinsic variable-node rule: `channel ∩ incoming[0] ∩ incoming[1] ∩ ...`.
///
/// An empty result is returned as-is; callers treat it as a contradiction.
/// Panics if the alphabets differ.
pub fn variable_update(channel: SymbolSet, incoming: &[SymbolSet]) -> SymbolSet {
    incoming.iter().fold(channel, |acc, &m| acc & m)
}

/// Extrinsic constraint-node rule over the `d_c - 1` incoming messages.
///
/// Returns `{1..q}` minus the union of every `∪_{j∈J} incoming[j]` with
/// `|∪| = |J|`, over all nonempty index subsets `J`.
pub fn constraint_update(incoming: &[SymbolSet], q: usize) -> Result<SymbolSet> {
    if !(2..=crate::model::MAX_Q).contains(&q) {
        return Err(Error::InvalidParams(format!("alphabet size {q} unsupported")));
    }
    if incoming.len() >= q {
        return Err(Error::InvalidParams(format!(
            "{} incoming messages need d_c = {} > q = {q}",
            incoming.len(),
            incoming.len() + 1
        )));
    }
    let mut bits = Vec::with_capacity(incoming.len());
    for m in incoming {
        if m.q() != q {
            return Err(Error::AlphabetMismatch { left: q, right: m.q() });
        }
        if m.is_empty() {
            return Err(Error::InvalidParams("empty incoming message".into()));
        }
        bits.push(m.bits());
    }
    let removed = tight_union(&bits);
    SymbolSet::from_bits(q, !removed & SymbolSet::full(q).bits())
}

/// Union of all tight index subsets of `sets`, as a bit word.
pub(crate) fn tight_union(sets: &[u64]) -> u64 {
    let mut removed = 0u64;
    walk_subsets(sets, 0, 0, 0, &mut removed);
    removed
}

fn walk_subsets(sets: &[u64], i: usize, union: u64, count: u32, removed: &mut u64) {
    // the union never shrinks and at most sets.len() - i more members can join
    if union.count_ones() > count + (sets.len() - i) as u32 {
        return;
    }
    if i == sets.len() {
        if count > 0 && union.count_ones() == count {
            *removed |= union;
        }
        return;
    }
    walk_subsets(sets, i + 1, union, count, removed);
    walk_subsets(sets, i + 1, union | sets[i], count + 1, removed);
}

/// Whether the inputs admit pairwise-distinct representatives, one from
/// each set, none equal to `v` (exhaustive matching search).
pub fn sdr_feasible(incoming: &[SymbolSet], v: usize) -> bool {
    fn search(sets: &[SymbolSet], i: usize, used: u64) -> bool {
        if i == sets.len() {
            return true;
        }
        let mut free = sets[i].bits() & !used;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            if search(sets, i + 1, used | bit) {
                return true;
            }
            free &= free - 1;
        }
        false
    }
    let forbidden = if (1..=64).contains(&v) { 1u64 << (v - 1) } else { 0 };
    search(incoming, 0, forbidden)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStatus {
    Solved,
    Stalled,
    MaxIterations,
    Contradiction,
}

impl std::fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeStatus::Solved => "solved",
            DecodeStatus::Stalled => "stalled",
            DecodeStatus::MaxIterations => "max_iterations",
            DecodeStatus::Contradiction => "contradiction",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    pub iterations: usize,
    /// Channel message intersected with every incoming constraint message.
    pub posteriors: Vec<SymbolSet>,
    /// A variable touched by an empty message, when `status` is `Contradiction`.
    pub contradiction: Option<usize>,
}

impl DecodeResult {
    pub fn unresolved(&self) -> usize {
        self.posteriors.iter().filter(|p| p.cardinality() != 1).count()
    }

    /// Decoded values, `None` where the posterior is not a singleton.
    pub fn decisions(&self) -> Vec<Option<usize>> {
        self.posteriors.iter().map(|p| p.single_value()).collect()
    }
}

/// Edge messages after a completed iteration, indexed by edge id.
pub struct MessageState<'a> {
    pub iteration: usize,
    pub var_to_con: &'a [SymbolSet],
    pub con_to_var: &'a [SymbolSet],
    pub posteriors: &'a [SymbolSet],
}

/// Flooding-schedule decode.
///
/// Iteration 0 sends the channel messages outward. Each later iteration
/// updates every constraint-to-variable message, then every
/// variable-to-constraint message.
pub fn decode(graph: &FactorGraph, received: &ReceivedWord, max_iters: usize) -> Result<DecodeResult> {
    decode_observed(graph, received, max_iters, |_| {})
}

/// [`decode`], calling `observer` with the message state after iteration 0
/// and after every later iteration.
pub fn decode_observed(
    graph: &FactorGraph,
    received: &ReceivedWord,
    max_iters: usize,
    mut observer: impl FnMut(&MessageState<'_>),
) -> Result<DecodeResult> {
    if received.len() != graph.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: graph.n_vars(),
            got: received.len(),
        });
    }
    let q = graph.params().q();
    let channel = received.channel_messages(q)?;
    let edges = graph.edges();
    let full = SymbolSet::full(q);

    let mut v2c: Vec<SymbolSet> = edges.iter().map(|e| channel[e.var]).collect();
    let mut c2v = vec![full; edges.len()];
    let mut posteriors = channel.clone();
    observer(&MessageState {
        iteration: 0,
        var_to_con: &v2c,
        con_to_var: &c2v,
        posteriors: &posteriors,
    });
    if posteriors.iter().all(|p| p.cardinality() == 1) {
        return Ok(finish(DecodeStatus::Solved, 0, posteriors, None));
    }

    let mut scratch = Vec::with_capacity(graph.params().dc());
    for iteration in 1..=max_iters {
        let mut changed = false;
        let mut empty_at: Option<usize> = None;

        for c in 0..graph.n_cons() {
            let range = graph.con_edges(c);
            for out in range.clone() {
                scratch.clear();
                scratch.extend(range.clone().filter(|&e| e != out).map(|e| v2c[e].bits()));
                let msg = SymbolSet::from_bits(q, !tight_union(&scratch) & full.bits())?;
                if msg.is_empty() && empty_at.is_none() {
                    empty_at = Some(edges[out].var);
                }
                changed |= msg != c2v[out];
                c2v[out] = msg;
            }
        }

        for v in 0..graph.n_vars() {
            let ve = graph.var_edges(v);
            let mut post = channel[v];
            for &e in ve {
                post = post & c2v[e];
            }
            posteriors[v] = post;
            for &out in ve {
                let msg = ve
                    .iter()
                    .filter(|&&e| e != out)
                    .fold(channel[v], |acc, &e| acc & c2v[e]);
                if msg.is_empty() && empty_at.is_none() {
                    empty_at = Some(v);
                }
                changed |= msg != v2c[out];
                v2c[out] = msg;
            }
            if post.is_empty() && empty_at.is_none() {
                empty_at = Some(v);
            }
        }

        observer(&MessageState {
            iteration,
            var_to_con: &v2c,
            con_to_var: &c2v,
            posteriors: &posteriors,
        });

        if empty_at.is_some() {
            return Ok(finish(DecodeStatus::Contradiction, iteration, posteriors, empty_at));
        }
        if posteriors.iter().all(|p| p.cardinality() == 1) {
            return Ok(finish(DecodeStatus::Solved, iteration, posteriors, None));
        }
        if !changed {
            return Ok(finish(DecodeStatus::Stalled, iteration, posteriors, None));
        }
    }
    Ok(finish(DecodeStatus::MaxIterations, max_iters, posteriors, None))
}

fn finish(
    status: DecodeStatus,
    iterations: usize,
    posteriors: Vec<SymbolSet>,
    contradiction: Option<usize>,
) -> DecodeResult {
    DecodeResult {
        status,
        iterations,
        posteriors,
        contradiction,
    }
}
