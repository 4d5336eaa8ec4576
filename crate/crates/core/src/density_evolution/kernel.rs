//! Exact cardinality kernels of the variable and constraint nodes.
//!
//! A kernel row fixes the cardinalities of the `d - 1` incoming messages
//! (as a non-decreasing tuple) and gives the exact distribution of the
//! outgoing cardinality, averaged over every combination of incoming sets
//! of those cardinalities that is consistent with the transmitted values.
//!
//! Variable node: the transmitted value is 1, so every incoming set
//! contains 1. Constraint node: the output goes to a variable holding 1 and
//! input `i` (0-based) comes from a variable holding `i + 2`, so it contains
//! `i + 2`. By alphabet symmetry the assignment of tuple positions to source
//! values does not affect the row.

use num_bigint::BigInt;
use num_integer::binomial;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{format_rational, rational_to_f64, Rational, MAX_Q};
use crate::subset_bp::tight_union;
use crate::{CardinalityPmf, Error, Result};

/// Number of non-decreasing tuples of length `b` over `1..=a`.
///
/// `N(a, 1) = a` and `N(a, b) = Σ_{k=1..a} N(k, b - 1)`.
pub fn count_nondecreasing(a: u64, b: u64) -> u64 {
    assert!(a >= 1 && b >= 1, "N(a, b) needs a, b >= 1");
    // row[k - 1] = N(k, level)
    let mut row: Vec<u64> = (1..=a).collect();
    for _ in 1..b {
        let mut acc = 0u64;
        for x in row.iter_mut() {
            acc += *x;
            *x = acc;
        }
    }
    row[a as usize - 1]
}

/// Number of distinct orderings of a multiset: `n! / Π_i (#{x_m = i})!`.
pub fn multiplicity(tuple: &[usize]) -> u64 {
    let mut sorted = tuple.to_vec();
    sorted.sort_unstable();
    let mut result = 1u64;
    let mut placed = 0u64;
    for run in sorted.chunk_by(|a, b| a == b) {
        let r = run.len() as u64;
        result *= binomial(placed + r, r);
        placed += r;
    }
    result
}

/// All non-decreasing tuples of length `len` over `1..=q`, lexicographic.
pub fn nondecreasing_tuples(q: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(q: usize, len: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for k in min..=q {
            cur.push(k);
            rec(q, len, k, cur, out);
            cur.pop();
        }
    }
    rec(q, len, 1, &mut cur, &mut out);
    out
}

/// Bit masks of all `card`-subsets of `{1..q}` that contain `value`.
fn subsets_containing(q: usize, value: usize, card: usize) -> Vec<u64> {
    let must = 1u64 << (value - 1);
    let others: Vec<u64> = (1..=q).filter(|&v| v != value).map(|v| 1u64 << (v - 1)).collect();
    let mut out = Vec::new();
    fn rec(others: &[u64], start: usize, left: usize, acc: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..=others.len().saturating_sub(left) {
            rec(others, i + 1, left - 1, acc | others[i], out);
        }
    }
    if card >= 1 && card <= q {
        rec(&others, 0, card - 1, must, &mut out);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Variable,
    Constraint,
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NodeKind::Variable => "variable",
            NodeKind::Constraint => "constraint",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    /// Non-decreasing incoming cardinalities.
    pub inputs: Vec<usize>,
    pub multiplicity: u64,
    /// `pmf[k - 1]` = P(output cardinality = k | inputs).
    pub pmf: Vec<Rational>,
}

/// Exact conditional output-cardinality table of one node type.
#[derive(Clone, Debug)]
pub struct ConditionalTable {
    kind: NodeKind,
    q: usize,
    degree: usize,
    rows: Vec<TableRow>,
    // (multiplicity, pmf) converted once for the recursion
    float_rows: Vec<(f64, Vec<f64>)>,
}

impl ConditionalTable {
    fn new(kind: NodeKind, q: usize, degree: usize, rows: Vec<TableRow>) -> Self {
        let float_rows = rows
            .iter()
            .map(|r| (r.multiplicity as f64, r.pmf.iter().map(rational_to_f64).collect()))
            .collect();
        Self {
            kind,
            q,
            degree,
            rows,
            float_rows,
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Node degree; rows have `degree - 1` inputs.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn row(&self, inputs: &[usize]) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.inputs == inputs)
    }

    /// Multiplicity-weighted contraction with an i.i.d. input pmf:
    /// `out(k) = Σ_rows Γ(row) · table(k | row) · Π_m pmf(j_m)`.
    pub fn map(&self, pmf: &CardinalityPmf) -> Result<CardinalityPmf> {
        if pmf.q() != self.q {
            return Err(Error::DimensionMismatch {
                expected: self.q,
                got: pmf.q(),
            });
        }
        let p = pmf.as_slice();
        let mut out = vec![0.0; self.q];
        for (row, (mult, probs)) in self.rows.iter().zip(&self.float_rows) {
            let weight = mult * row.inputs.iter().map(|&j| p[j - 1]).product::<f64>();
            if weight == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(probs) {
                *o += weight * t;
            }
        }
        Ok(CardinalityPmf::from_raw(out))
    }

    /// CSV: `in1,...,in{d-1},multiplicity,p1,...,pq` with `num/den` entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let ins: Vec<String> = (1..self.degree).map(|i| format!("in{i}")).collect();
        let ps: Vec<String> = (1..=self.q).map(|k| format!("p{k}")).collect();
        out.push_str(&format!("{},multiplicity,{}\n", ins.join(","), ps.join(",")));
        for r in &self.rows {
            let ins: Vec<String> = r.inputs.iter().map(|x| x.to_string()).collect();
            let ps: Vec<String> = r.pmf.iter().map(format_rational).collect();
            out.push_str(&format!("{},{},{}\n", ins.join(","), r.multiplicity, ps.join(",")));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "node": self.kind,
            "q": self.q,
            "degree": self.degree,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "inputs": r.inputs,
                "multiplicity": r.multiplicity,
                "pmf": r.pmf.iter().map(format_rational).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn check_q(q: usize) -> Result<()> {
    if !(2..=MAX_Q).contains(&q) {
        return Err(Error::InvalidParams(format!("q = {q} outside 2..={MAX_Q}")));
    }
    Ok(())
}

/// Histogram of output cardinalities over the cartesian product of
/// `choices`, with `out_of` mapping a combination to its output set.
fn histogram(q: usize, choices: &[Vec<u64>], out_of: &(impl Fn(&[u64]) -> u64 + Sync)) -> Vec<u128> {
    fn rec(
        choices: &[Vec<u64>],
        picked: &mut Vec<u64>,
        out_of: &impl Fn(&[u64]) -> u64,
        hist: &mut [u128],
    ) {
        let i = picked.len();
        if i == choices.len() {
            hist[out_of(picked).count_ones() as usize] += 1;
            return;
        }
        for &s in &choices[i] {
            picked.push(s);
            rec(choices, picked, out_of, hist);
            picked.pop();
        }
    }
    if choices.is_empty() {
        let mut hist = vec![0u128; q + 1];
        hist[out_of(&[]).count_ones() as usize] += 1;
        return hist;
    }
    // split on the first input so large rows spread over threads
    choices[0]
        .par_iter()
        .map(|&first| {
            let mut hist = vec![0u128; q + 1];
            let mut picked = Vec::with_capacity(choices.len());
            picked.push(first);
            rec(choices, &mut picked, out_of, &mut hist);
            hist
        })
        .reduce(
            || vec![0u128; q + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn to_pmf(hist: &[u128]) -> Result<Vec<Rational>> {
    if hist[0] != 0 {
        return Err(Error::Internal("kernel produced an empty output message".into()));
    }
    let total: u128 = hist.iter().sum();
    Ok(hist[1..]
        .iter()
        .map(|&c| Rational::new(BigInt::from(c), BigInt::from(total)))
        .collect())
}

/// Variable-node kernel for alphabet `q` and degree `d_v`.
pub fn build_variable_table(q: usize, dv: usize) -> Result<ConditionalTable> {
    check_q(q)?;
    if dv < 2 {
        return Err(Error::InvalidParams(format!("d_v = {dv} must be at least 2")));
    }
    let by_card: Vec<Vec<u64>> = (0..=q).map(|c| subsets_containing(q, 1, c)).collect();
    let full = crate::SymbolSet::full(q).bits();
    let rows = nondecreasing_tuples(q, dv - 1)
        .into_par_iter()
        .map(|inputs| {
            let choices: Vec<Vec<u64>> = inputs.iter().map(|&c| by_card[c].clone()).collect();
            let hist = histogram(q, &choices, &|sets: &[u64]| sets.iter().fold(full, |a, &s| a & s));
            Ok(TableRow {
                multiplicity: multiplicity(&inputs),
                pmf: to_pmf(&hist)?,
                inputs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalTable::new(NodeKind::Variable, q, dv, rows))
}

/// How constraint-kernel rows are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMethod {
    /// Apply the constraint rule to every combination of incoming sets.
    Enumerate,
    /// Count reachability structures of the input digraph (see
    /// [`reachability_histogram`]).
    Reachability,
}

/// Largest `q` for which [`build_constraint_table`] enumerates.
pub const ENUMERATE_MAX_Q: usize = 6;

/// Constraint-node kernel for alphabet `q` and degree `d_c <= q`.
///
/// Enumerates for `q <= 6` and counts reachability structures above.
pub fn build_constraint_table(q: usize, dc: usize) -> Result<ConditionalTable> {
    let method = if q <= ENUMERATE_MAX_Q {
        KernelMethod::Enumerate
    } else {
        KernelMethod::Reachability
    };
    build_constraint_table_with(q, dc, method)
}

pub fn build_constraint_table_with(q: usize, dc: usize, method: KernelMethod) -> Result<ConditionalTable> {
    check_q(q)?;
    if dc < 2 || dc > q {
        return Err(Error::InvalidParams(format!("d_c = {dc} must lie in 2..=q = {q}")));
    }
    if method == KernelMethod::Reachability && q > REACHABILITY_MAX_Q {
        return Err(Error::InvalidParams(format!(
            "reachability counting is supported up to q = {REACHABILITY_MAX_Q}"
        )));
    }
    let rows = nondecreasing_tuples(q, dc - 1)
        .into_par_iter()
        .map(|inputs| {
            let hist = match method {
                KernelMethod::Enumerate => {
                    let order: Vec<usize> = (0..inputs.len()).collect();
                    constraint_histogram(q, &inputs, &order)
                }
                KernelMethod::Reachability => reachability_histogram(q, &inputs),
            };
            Ok(TableRow {
                multiplicity: multiplicity(&inputs),
                pmf: to_pmf(&hist)?,
                inputs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalTable::new(NodeKind::Constraint, q, dc, rows))
}

/// Output-cardinality histogram of a constraint node where the input with
/// cardinality `cards[i]` comes from the variable holding `source[i] + 2`.
pub(crate) fn constraint_histogram(q: usize, cards: &[usize], source: &[usize]) -> Vec<u128> {
    let full = crate::SymbolSet::full(q).bits();
    let choices: Vec<Vec<u64>> = cards
        .iter()
        .zip(source)
        .map(|(&c, &s)| subsets_containing(q, s + 2, c))
        .collect();
    histogram(q, &choices, &|sets: &[u64]| full & !tight_union(sets))
}

/// Largest `q` accepted by [`reachability_histogram`]; keeps counts in `u128`.
pub const REACHABILITY_MAX_Q: usize = 16;

/// Output-cardinality histogram of a constraint row by counting, without
/// enumerating incoming sets.
///
/// With consistent inputs, value `v` survives the constraint rule iff the
/// inputs have distinct representatives avoiding `v`. Values that are not
/// the source of any input (the output's value 1 and any value above `d_c`)
/// therefore always survive. The source value of input `i` survives iff,
/// in the digraph with an arc `i -> j` whenever input `i`'s set holds the
/// source of `j`, some input holding a non-source value is reachable from
/// `i` (an augmenting path). The output cardinality is
/// `q - d_c + 1 + |A|`, where `A` is the set of inputs that reach one.
///
/// Inputs are split into BFS layers by distance to the non-source values.
/// Given the layer sizes, the number of `(c_i - 1)`-subsets an input may
/// have is a difference of binomials, so the histogram follows from a
/// dynamic program over (assigned inputs, last layer).
pub fn reachability_histogram(q: usize, cards: &[usize]) -> Vec<u128> {
    let n = cards.len();
    assert!(n < q && q <= REACHABILITY_MAX_Q);
    let sinks = q - n;
    let picks: Vec<u64> = cards.iter().map(|&c| c as u64 - 1).collect();
    let choose = |from: usize, k: u64| -> u128 {
        if k as usize > from {
            0
        } else {
            u128::from(binomial(from as u64, k))
        }
    };
    let others = n - 1;
    let full = (1usize << n) - 1;
    let mut hist = vec![0u128; q + 1];

    // (assigned, last layer) -> number of weighted layerings so far
    let mut frontier: std::collections::BTreeMap<(usize, usize), u128> = Default::default();

    // no input reaches a non-source value
    let none: u128 = picks.iter().map(|&k| choose(others, k)).product();
    hist[sinks] += none;

    for first in 1..=full {
        let w: u128 = (0..n)
            .filter(|i| first & (1 << i) != 0)
            .map(|i| choose(others + sinks, picks[i]) - choose(others, picks[i]))
            .product();
        if w != 0 {
            *frontier.entry((first, first)).or_default() += w;
        }
    }
    while !frontier.is_empty() {
        let mut next: std::collections::BTreeMap<(usize, usize), u128> = Default::default();
        for (&(assigned, last), &w) in &frontier {
            let reached = assigned.count_ones() as usize;
            // close: every unassigned input avoids non-sources and all of A
            let rest = full & !assigned;
            let close: u128 = (0..n)
                .filter(|i| rest & (1 << i) != 0)
                .map(|i| choose(others - reached, picks[i]))
                .product();
            hist[sinks + reached] += w * close;

            let earlier = reached - last.count_ones() as usize;
            let allowed = others - earlier;
            let last_len = last.count_ones() as usize;
            let mut layer = rest;
            while layer != 0 {
                let lw: u128 = (0..n)
                    .filter(|i| layer & (1 << i) != 0)
                    .map(|i| choose(allowed, picks[i]) - choose(allowed - last_len, picks[i]))
                    .product();
                if lw != 0 {
                    *next.entry((assigned | layer, layer)).or_default() += w * lw;
                }
                layer = (layer - 1) & rest;
            }
        }
        frontier = next;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn nondecreasing_counts() {
        assert_eq!(count_nondecreasing(4, 2), 10);
        assert_eq!(count_nondecreasing(4, 3), 20);
        for a in 1..8 {
            assert_eq!(count_nondecreasing(a, 1), a);
        }
        // N(6,5) = C(10,5)
        assert_eq!(count_nondecreasing(6, 5), 252);
        for a in 1..6 {
            for b in 1..5 {
                assert_eq!(count_nondecreasing(a as u64, b as u64) as usize, nondecreasing_tuples(a, b).len());
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&[2, 3]), 2);
        assert_eq!(multiplicity(&[2, 2]), 1);
        assert_eq!(multiplicity(&[1, 2, 3]), 6);
        assert_eq!(multiplicity(&[1, 1, 3]), 3);
        assert_eq!(multiplicity(&[3, 1, 3, 1]), 6);
    }

    #[test]
    fn multiplicities_count_ordered_tuples() {
        for (q, len) in [(4, 2), (4, 3), (5, 4), (6, 5)] {
            let total: u64 = nondecreasing_tuples(q, len).iter().map(|t| multiplicity(t)).sum();
            assert_eq!(total, (q as u64).pow(len as u32));
        }
    }

    #[test]
    fn subset_lists() {
        assert_eq!(subsets_containing(4, 1, 2), vec![0b0011, 0b0101, 0b1001]);
        assert_eq!(subsets_containing(4, 3, 1), vec![0b0100]);
        assert_eq!(subsets_containing(5, 2, 3).len(), 6);
        assert!(subsets_containing(4, 1, 0).is_empty());
    }

    #[test]
    fn variable_rows_spot_check() {
        let t = build_variable_table(4, 3).unwrap();
        assert_eq!(t.rows().len(), 10);
        assert_eq!(t.row(&[2, 3]).unwrap().pmf, vec![r(1, 3), r(2, 3), r(0, 1), r(0, 1)]);
        assert_eq!(t.row(&[2, 2]).unwrap().pmf, vec![r(2, 3), r(1, 3), r(0, 1), r(0, 1)]);
        for k in 1..=4 {
            assert_eq!(t.row(&[1, k]).unwrap().pmf, vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1)]);
        }
    }

    #[test]
    fn constraint_rows_spot_check() {
        let t = build_constraint_table(4, 4).unwrap();
        assert_eq!(t.rows().len(), 20);
        assert_eq!(t.row(&[1, 2, 3]).unwrap().pmf, vec![r(2, 9), r(2, 9), r(5, 9), r(0, 1)]);
        assert_eq!(t.row(&[2, 2, 2]).unwrap().pmf, vec![r(8, 27), r(1, 9), r(0, 1), r(16, 27)]);
        assert_eq!(t.row(&[1, 1, 1]).unwrap().pmf, vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1)]);
    }

    #[test]
    fn source_assignment_does_not_change_rows() {
        for (q, dc) in [(4, 4), (5, 4), (5, 3)] {
            for inputs in nondecreasing_tuples(q, dc - 1) {
                let base = constraint_histogram(q, &inputs, &(0..dc - 1).collect::<Vec<_>>());
                let reversed: Vec<usize> = (0..dc - 1).rev().collect();
                assert_eq!(constraint_histogram(q, &inputs, &reversed), base, "{inputs:?}");
            }
        }
    }

    #[test]
    fn reachability_matches_enumeration() {
        for q in 2..=6 {
            for dc in 2..=q {
                let a = build_constraint_table_with(q, dc, KernelMethod::Enumerate).unwrap();
                let b = build_constraint_table_with(q, dc, KernelMethod::Reachability).unwrap();
                for (x, y) in a.rows().iter().zip(b.rows()) {
                    assert_eq!(x, y, "q={q} d_c={dc}");
                }
            }
        }
    }

    #[test]
    #[ignore = "enumerates ~1.3e9 combinations; run with --release --ignored"]
    fn reachability_matches_enumeration_q7() {
        let a = build_constraint_table_with(7, 7, KernelMethod::Enumerate).unwrap();
        let b = build_constraint_table_with(7, 7, KernelMethod::Reachability).unwrap();
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn invalid_degrees() {
        assert!(build_constraint_table(4, 5).is_err());
        assert!(build_constraint_table(4, 1).is_err());
        assert!(build_variable_table(4, 1).is_err());
        assert!(build_variable_table(1, 3).is_err());
    }

    #[test]
    fn map_rejects_wrong_alphabet() {
        let t = build_variable_table(4, 3).unwrap();
        assert!(t.map(&CardinalityPmf::atomic(3, 1)).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = build_variable_table(3, 3).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("in1,in2,multiplicity,p1,p2,p3"));
        assert_eq!(lines.next(), Some("1,1,1,1,0,0"));
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.contains("2,2,1,1/2,1/2,0"));
    }
}
