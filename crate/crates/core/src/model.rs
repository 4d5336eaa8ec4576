//! Shared domain types: code parameters, alphabet subsets, alphabet
//! permutations and cardinality distributions.

use std::fmt;
use std::ops::{BitAnd, BitOr};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported alphabet; a [`SymbolSet`] is a single machine word.
pub const MAX_Q: usize = 64;

/// Exact rational used for density-evolution kernels.
pub type Rational = num_rational::BigRational;

/// Render a rational as `num/den`, or just `num` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &num_bigint::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Alphabet size and node degrees of a regular SUDOKU code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    q: usize,
    dv: usize,
    dc: usize,
}

impl CodeParams {
    pub fn new(q: usize, dv: usize, dc: usize) -> Result<Self> {
        if !(2..=MAX_Q).contains(&q) {
            return Err(Error::InvalidParams(format!("q = {q} must lie in 2..={MAX_Q}")));
        }
        if dv < 2 {
            return Err(Error::InvalidParams(format!("d_v = {dv} must be at least 2")));
        }
        if dc < 2 {
            return Err(Error::InvalidParams(format!("d_c = {dc} must be at least 2")));
        }
        if dc > q {
            return Err(Error::InvalidParams(format!(
                "d_c = {dc} exceeds the alphabet size q = {q}"
            )));
        }
        Ok(Self { q, dv, dc })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dc(&self) -> usize {
        self.dc
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, d_v={}, d_c={})", self.q, self.dv, self.dc)
    }
}

/// A subset of the alphabet `{1, ..., q}`.
///
/// Bit `i - 1` of the word stores membership of value `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolSet {
    bits: u64,
    q: u8,
}

fn mask(q: usize) -> u64 {
    if q == 64 {
        u64::MAX
    } else {
        (1u64 << q) - 1
    }
}

impl SymbolSet {
    fn check_q(q: usize) {
        assert!((1..=MAX_Q).contains(&q), "alphabet size {q} out of range");
    }

    pub fn empty(q: usize) -> Self {
        Self::check_q(q);
        Self { bits: 0, q: q as u8 }
    }

    pub fn full(q: usize) -> Self {
        Self::check_q(q);
        Self {
            bits: mask(q),
            q: q as u8,
        }
    }

    pub fn singleton(q: usize, value: usize) -> Result<Self> {
        Self::from_values(q, [value])
    }

    pub fn from_values(q: usize, values: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(q);
        for v in values {
            set.insert(v)?;
        }
        Ok(set)
    }

    /// Build from a raw bit word; bits above `q` are rejected.
    pub fn from_bits(q: usize, bits: u64) -> Result<Self> {
        Self::check_q(q);
        if bits & !mask(q) != 0 {
            return Err(Error::ValueOutOfRange {
                value: 64 - bits.leading_zeros() as usize,
                q,
            });
        }
        Ok(Self { bits, q: q as u8 })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn q(&self) -> usize {
        self.q as usize
    }

    pub fn insert(&mut self, value: usize) -> Result<()> {
        if value == 0 || value > self.q() {
            return Err(Error::ValueOutOfRange { value, q: self.q() });
        }
        self.bits |= 1 << (value - 1);
        Ok(())
    }

    pub fn remove(&mut self, value: usize) {
        if value >= 1 && value <= self.q() {
            self.bits &= !(1 << (value - 1));
        }
    }

    pub fn contains(&self, value: usize) -> bool {
        value >= 1 && value <= self.q() && self.bits & (1 << (value - 1)) != 0
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &SymbolSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// The single member, if the set is a singleton.
    pub fn single_value(&self) -> Option<usize> {
        (self.cardinality() == 1).then(|| self.bits.trailing_zeros() as usize + 1)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let mut bits = self.bits;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize + 1;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    pub fn intersect(&self, other: &SymbolSet) -> Result<SymbolSet> {
        self.same_alphabet(other)?;
        Ok(Self {
            bits: self.bits & other.bits,
            q: self.q,
        })
    }

    pub fn union(&self, other: &SymbolSet) -> Result<SymbolSet> {
        self.same_alphabet(other)?;
        Ok(Self {
            bits: self.bits | other.bits,
            q: self.q,
        })
    }

    pub fn complement(&self) -> SymbolSet {
        Self {
            bits: !self.bits & mask(self.q()),
            q: self.q,
        }
    }

    /// Relabel every member `v` as `pi(v)`.
    pub fn permute(&self, pi: &Permutation) -> Result<SymbolSet> {
        if pi.len() != self.q() {
            return Err(Error::AlphabetMismatch {
                left: self.q(),
                right: pi.len(),
            });
        }
        let mut out = Self::empty(self.q());
        for v in self.iter() {
            out.bits |= 1 << (pi.apply(v) - 1);
        }
        Ok(out)
    }

    fn same_alphabet(&self, other: &SymbolSet) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                left: self.q(),
                right: other.q(),
            })
        }
    }
}

/// Intersection; panics if the alphabets differ.
impl BitAnd for SymbolSet {
    type Output = SymbolSet;

    fn bitand(self, rhs: SymbolSet) -> SymbolSet {
        assert_eq!(self.q, rhs.q, "alphabet size mismatch");
        SymbolSet {
            bits: self.bits & rhs.bits,
            q: self.q,
        }
    }
}

/// Union; panics if the alphabets differ.
impl BitOr for SymbolSet {
    type Output = SymbolSet;

    fn bitor(self, rhs: SymbolSet) -> SymbolSet {
        assert_eq!(self.q, rhs.q, "alphabet size mismatch");
        SymbolSet {
            bits: self.bits | rhs.bits,
            q: self.q,
        }
    }
}

impl fmt::Debug for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/q{}", self.q)
    }
}

impl fmt::Display for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A bijection on `{1, ..., q}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// `image[i]` is the image of value `i + 1`.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let q = image.len();
        let mut seen = vec![false; q];
        for &v in &image {
            if v == 0 || v > q || std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::NotAPermutation(q));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(q: usize) -> Self {
        Self {
            image: (1..=q).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, value: usize) -> usize {
        self.image[value - 1]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { image: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }
}

/// Distribution of message cardinalities over `1..=q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalityPmf {
    // probs[k - 1] = P(cardinality = k)
    probs: Vec<f64>,
}

/// Tolerance on the total mass of a [`CardinalityPmf`].
pub const PMF_SUM_TOL: f64 = 1e-12;

impl CardinalityPmf {
    /// `probs[k - 1]` is the probability of cardinality `k`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.len() > MAX_Q {
            return Err(Error::InvalidParams(format!(
                "pmf length {} outside 1..={MAX_Q}",
                probs.len()
            )));
        }
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidParams(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Build without validation; callers guarantee the invariants.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn atomic(q: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= q, "cardinality {k} outside 1..={q}");
        let mut probs = vec![0.0; q];
        probs[k - 1] = 1.0;
        Self { probs }
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    /// P(cardinality = k); zero for k = 0 or k > q.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 || k > self.q() {
            0.0
        } else {
            self.probs[k - 1]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// P(cardinality > 1), summed directly rather than as `1 - P(1)`.
    pub fn unresolved_mass(&self) -> f64 {
        self.probs[1..].iter().sum()
    }

    pub fn sup_distance(&self, other: &CardinalityPmf) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn renormalize(&mut self) {
        let total = self.total();
        if total > 0.0 {
            for p in &mut self.probs {
                *p = (*p / total).clamp(0.0, 1.0);
            }
        }
    }
}
