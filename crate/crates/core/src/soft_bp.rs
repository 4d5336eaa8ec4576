//! Probability-vector node rules for general channels.
//!
//! These are node-level reference operations, used to check the subset
//! decoder: with erasure-channel inputs (uniform distributions over subsets)
//! the supports of the outputs here coincide with the subset rules.

use crate::model::{SymbolSet, MAX_Q};
use crate::{Error, Result};

/// Unnormalised mass below which a node output is treated as all-zero.
pub const ZERO_MASS: f64 = 1e-300;

/// A length-`q` vector of nonnegative weights over the values `1..=q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionMessage {
    probs: Vec<f64>,
}

impl DistributionMessage {
    /// Nonnegative finite weights; not required to sum to one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.len() > MAX_Q {
            return Err(Error::InvalidParams(format!(
                "message length {} outside 1..={MAX_Q}",
                probs.len()
            )));
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(Self { probs })
    }

    pub fn uniform(q: usize) -> Self {
        Self {
            probs: vec![1.0 / q as f64; q],
        }
    }

    /// Unit mass on `value`.
    pub fn atomic(q: usize, value: usize) -> Result<Self> {
        Self::uniform_over(&SymbolSet::singleton(q, value)?)
    }

    /// Uniform distribution over the members of a nonempty set.
    pub fn uniform_over(set: &SymbolSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Contradiction);
        }
        let w = 1.0 / set.cardinality() as f64;
        Ok(Self {
            probs: (1..=set.q()).map(|v| if set.contains(v) { w } else { 0.0 }).collect(),
        })
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    /// Weight of value `v` (1-based).
    pub fn get(&self, v: usize) -> f64 {
        self.probs[v - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    fn normalized(probs: Vec<f64>, on_zero: Error) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if total.is_nan() || total < ZERO_MASS {
            return Err(on_zero);
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    /// Apply an alphabet permutation: the weight of `v` moves to `pi(v)`.
    pub fn permute(&self, pi: &crate::Permutation) -> Result<Self> {
        if pi.len() != self.q() {
            return Err(Error::AlphabetMismatch {
                left: self.q(),
                right: pi.len(),
            });
        }
        let mut probs = vec![0.0; self.q()];
        for (i, &p) in self.probs.iter().enumerate() {
            probs[pi.apply(i + 1) - 1] = p;
        }
        Ok(Self { probs })
    }
}

/// The `d_c` incoming messages of a constraint node stacked as rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageMatrix {
    rows: Vec<DistributionMessage>,
}

impl MessageMatrix {
    pub fn new(rows: Vec<DistributionMessage>) -> Result<Self> {
        let q = rows.first().map(|r| r.q()).ok_or_else(|| {
            Error::InvalidParams("message matrix needs at least one row".into())
        })?;
        if let Some(r) = rows.iter().find(|r| r.q() != q) {
            return Err(Error::AlphabetMismatch { left: q, right: r.q() });
        }
        if rows.len() > q {
            return Err(Error::InvalidParams(format!(
                "{} rows exceed the alphabet size {q}",
                rows.len()
            )));
        }
        Ok(Self { rows })
    }

    pub fn q(&self) -> usize {
        self.rows[0].q()
    }

    pub fn degree(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[DistributionMessage] {
        &self.rows
    }

    fn dense(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.probs.clone()).collect()
    }
}

/// Permanent of a square matrix given as rows.
///
/// Direct cofactor expansion up to 4×4, Ryser's inclusion–exclusion formula
/// with Gray-code column order beyond. The 0×0 permanent is 1.
pub fn permanent(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if let Some(r) = m.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    Ok(if n <= 4 {
        let cols: Vec<usize> = (0..n).collect();
        expand(m, 0, &cols)
    } else {
        ryser(m)
    })
}

fn expand(m: &[Vec<f64>], row: usize, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let mut total = 0.0;
    for (k, &c) in cols.iter().enumerate() {
        let a = m[row][c];
        if a != 0.0 {
            let rest: Vec<usize> = cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &c)| c).collect();
            total += a * expand(m, row + 1, &rest);
        }
    }
    total
}

fn ryser(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    // row_sums[i] = sum of m[i][j] over the columns j in the current subset
    let mut row_sums = vec![0.0; n];
    let mut total = 0.0;
    let mut gray = 0u64;
    for k in 1u64..(1u64 << n) {
        let flip = k.trailing_zeros() as usize;
        let adding = gray & (1 << flip) == 0;
        gray ^= 1 << flip;
        for (s, row) in row_sums.iter_mut().zip(m) {
            if adding {
                *s += row[flip];
            } else {
                *s -= row[flip];
            }
        }
        let prod: f64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Variable-node rule: entrywise product of the channel posterior and all
/// incoming messages, renormalised.
pub fn soft_variable_update(
    channel_posterior: &DistributionMessage,
    incoming: &[DistributionMessage],
) -> Result<DistributionMessage> {
    let q = channel_posterior.q();
    let mut probs = channel_posterior.probs.clone();
    for m in incoming {
        if m.q() != q {
            return Err(Error::AlphabetMismatch { left: q, right: m.q() });
        }
        for (p, x) in probs.iter_mut().zip(&m.probs) {
            *p *= x;
        }
    }
    DistributionMessage::normalized(probs, Error::Contradiction)
}

/// Unnormalised extrinsic weights of a constraint node: entry `j` sums,
/// over every injective assignment of distinct values other than `j` to the
/// incoming edges, the product of the corresponding incoming weights.
///
/// Computed as a permanent after padding with all-ones rows.
fn extrinsic_weights(incoming: &[DistributionMessage], q: usize) -> Result<Vec<f64>> {
    if incoming.len() >= q {
        return Err(Error::InvalidParams(format!(
            "{} incoming messages need d_c > q = {q}",
            incoming.len()
        )));
    }
    if let Some(m) = incoming.iter().find(|m| m.q() != q) {
        return Err(Error::AlphabetMismatch { left: q, right: m.q() });
    }
    let pad = q - 1 - incoming.len();
    let scale = factorial(pad);
    (1..=q)
        .map(|j| {
            let mut minor: Vec<Vec<f64>> = incoming
                .iter()
                .map(|m| {
                    m.probs
                        .iter()
                        .enumerate()
                        .filter(|&(c, _)| c + 1 != j)
                        .map(|(_, &p)| p)
                        .collect()
                })
                .collect();
            minor.extend(std::iter::repeat_n(vec![1.0; q - 1], pad));
            Ok(permanent(&minor)? / scale)
        })
        .collect()
}

/// Extrinsic constraint-node output from the `d_c - 1` other incoming messages.
pub fn soft_constraint_extrinsic(incoming: &[DistributionMessage], q: usize) -> Result<DistributionMessage> {
    let w = extrinsic_weights(incoming, q)?;
    DistributionMessage::normalized(w, Error::InfeasibleConstraint)
}

/// Constraint-node output on edge `out_edge`: entry `j` is proportional to
/// `p[out_edge][j]` times the extrinsic weight of `j` from the other rows.
/// For `d_c = q` this is `p_ij · perm(P_ij) / perm(P)`.
pub fn soft_constraint_update(p: &MessageMatrix, out_edge: usize) -> Result<DistributionMessage> {
    if out_edge >= p.degree() {
        return Err(Error::DimensionMismatch {
            expected: p.degree(),
            got: out_edge,
        });
    }
    let others: Vec<DistributionMessage> = p
        .rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != out_edge)
        .map(|(_, r)| r.clone())
        .collect();
    let w = extrinsic_weights(&others, p.q())?;
    let probs = w
        .iter()
        .zip(&p.rows[out_edge].probs)
        .map(|(a, b)| a * b)
        .collect();
    DistributionMessage::normalized(probs, Error::InfeasibleConstraint)
}

/// Full output matrix `Q[i][j] = p_ij · perm(P_ij) / perm(P)` of a
/// constraint node with `d_c = q`.
pub fn posterior_matrix(p: &MessageMatrix) -> Result<Vec<Vec<f64>>> {
    let q = p.q();
    if p.degree() != q {
        return Err(Error::NotSquare {
            rows: p.degree(),
            cols: q,
        });
    }
    let dense = p.dense();
    let total = permanent(&dense)?;
    if total.is_nan() || total < ZERO_MASS {
        return Err(Error::InfeasibleConstraint);
    }
    let minor = |i: usize, j: usize| -> Vec<Vec<f64>> {
        dense
            .iter()
            .enumerate()
            .filter(|&(r, _)| r != i)
            .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
            .collect()
    };
    (0..q)
        .map(|i| {
            (0..q)
                .map(|j| Ok(dense[i][j] * permanent(&minor(i, j))? / total))
                .collect()
        })
        .collect()
}

/// Values with weight strictly above `tol`.
pub fn support_of(m: &DistributionMessage, tol: f64) -> SymbolSet {
    let mut set = SymbolSet::empty(m.q());
    for (i, &p) in m.probs.iter().enumerate() {
        if p > tol {
            set.insert(i + 1).expect("index within alphabet");
        }
    }
    set
}
