//! Factor graphs for SUDOKU codes, codeword sampling and the erasure channel.
//!
//! Edges are stored in constraint-socket order: edge `e` attaches to
//! constraint `e / d_c` at socket `e % d_c`. Each variable additionally
//! records its `d_v` edges in variable-socket order.
//!
//! Random regular graphs are drawn by a Fisher–Yates shuffle (ChaCha8,
//! see [`crate::seed`]) of the variable-socket list, which is then cut into
//! consecutive blocks of `d_c`. Shuffles that place one variable twice in a
//! block are discarded and redrawn from the same generator.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::SymbolSet;
use crate::{seed, CodeParams, Error, Result};

/// Shuffle attempts before [`build_regular`] gives up.
pub const MAX_INTERLEAVER_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub var: usize,
    pub con: usize,
    pub var_socket: usize,
    pub con_socket: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorGraph {
    params: CodeParams,
    n_vars: usize,
    n_cons: usize,
    edges: Vec<Edge>,
    // var_edges[v * d_v + s] = edge at variable socket s of v
    var_edges: Vec<usize>,
    seed: Option<u64>,
}

impl FactorGraph {
    /// Assemble a graph from the variable attached to each constraint
    /// socket, `socket_vars[c * d_c + s]`.
    pub fn from_socket_vars(
        params: CodeParams,
        n_vars: usize,
        socket_vars: &[usize],
        seed: Option<u64>,
    ) -> Result<Self> {
        let (dv, dc) = (params.dv(), params.dc());
        if socket_vars.len() != n_vars * dv {
            return Err(Error::DimensionMismatch {
                expected: n_vars * dv,
                got: socket_vars.len(),
            });
        }
        if !socket_vars.len().is_multiple_of(dc) {
            return Err(Error::SocketDivisibility {
                sockets: socket_vars.len(),
                dc,
            });
        }
        let n_cons = socket_vars.len() / dc;
        let mut fill = vec![0usize; n_vars];
        let mut var_edges = vec![usize::MAX; n_vars * dv];
        let mut edges = Vec::with_capacity(socket_vars.len());
        for (e, &var) in socket_vars.iter().enumerate() {
            if var >= n_vars {
                return Err(Error::InvalidParams(format!("variable index {var} >= {n_vars}")));
            }
            let var_socket = fill[var];
            if var_socket >= dv {
                return Err(Error::InvalidParams(format!(
                    "variable {var} has more than d_v = {dv} edges"
                )));
            }
            fill[var] += 1;
            var_edges[var * dv + var_socket] = e;
            edges.push(Edge {
                var,
                con: e / dc,
                var_socket,
                con_socket: e % dc,
            });
        }
        if let Some(v) = fill.iter().position(|&f| f != dv) {
            return Err(Error::InvalidParams(format!(
                "variable {v} has {} edges, expected {dv}",
                fill[v]
            )));
        }
        let graph = Self {
            params,
            n_vars,
            n_cons,
            edges,
            var_edges,
            seed,
        };
        if let Some(c) = (0..n_cons).find(|&c| !graph.constraint_is_simple(c)) {
            return Err(Error::InvalidParams(format!(
                "constraint {c} attaches the same variable twice"
            )));
        }
        Ok(graph)
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_cons(&self) -> usize {
        self.n_cons
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Edge ids of constraint `c`, in socket order.
    pub fn con_edges(&self, c: usize) -> std::ops::Range<usize> {
        let dc = self.params.dc();
        c * dc..(c + 1) * dc
    }

    /// Edge ids of variable `v`, in socket order.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        let dv = self.params.dv();
        &self.var_edges[v * dv..(v + 1) * dv]
    }

    /// Variables attached to constraint `c`, in socket order.
    pub fn con_vars(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.con_edges(c).map(move |e| self.edges[e].var)
    }

    fn constraint_is_simple(&self, c: usize) -> bool {
        let vars: Vec<usize> = self.con_vars(c).collect();
        vars.iter()
            .enumerate()
            .all(|(i, v)| !vars[i + 1..].contains(v))
    }

    /// Sorted, deduplicated variables sharing at least one constraint with `v`.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .var_edges(v)
            .iter()
            .flat_map(|&e| self.con_vars(self.edges[e].con))
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// On-disk JSON layout of a [`FactorGraph`].
#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    q: usize,
    dv: usize,
    dc: usize,
    n_vars: usize,
    n_cons: usize,
    edges: Vec<[usize; 2]>,
    seed: Option<u64>,
}

impl From<&FactorGraph> for GraphFile {
    fn from(g: &FactorGraph) -> Self {
        Self {
            q: g.params.q(),
            dv: g.params.dv(),
            dc: g.params.dc(),
            n_vars: g.n_vars,
            n_cons: g.n_cons,
            edges: g.edges.iter().map(|e| [e.var, e.con]).collect(),
            seed: g.seed,
        }
    }
}

impl TryFrom<GraphFile> for FactorGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        let params = CodeParams::new(f.q, f.dv, f.dc)?;
        for (e, &[_, con]) in f.edges.iter().enumerate() {
            if con != e / f.dc {
                return Err(Error::InvalidParams(format!(
                    "edge {e} lists constraint {con}; edges must be in socket order"
                )));
            }
        }
        let socket_vars: Vec<usize> = f.edges.iter().map(|&[v, _]| v).collect();
        let g = FactorGraph::from_socket_vars(params, f.n_vars, &socket_vars, f.seed)?;
        if g.n_cons != f.n_cons {
            return Err(Error::DimensionMismatch {
                expected: f.n_cons,
                got: g.n_cons,
            });
        }
        Ok(g)
    }
}

/// Random `(d_v, d_c)`-regular graph on `n_vars` variables with no
/// repeated variable inside any constraint.
pub fn build_regular(params: CodeParams, n_vars: usize, seed: u64) -> Result<FactorGraph> {
    let (dv, dc) = (params.dv(), params.dc());
    let sockets = n_vars * dv;
    if n_vars == 0 || !sockets.is_multiple_of(dc) {
        return Err(Error::SocketDivisibility { sockets, dc });
    }
    let mut rng = seed::rng(seed);
    let mut socket_vars: Vec<usize> = (0..n_vars).flat_map(|v| std::iter::repeat_n(v, dv)).collect();
    for _ in 0..MAX_INTERLEAVER_ATTEMPTS {
        socket_vars.shuffle(&mut rng);
        let simple = socket_vars.chunks(dc).all(|block| {
            block
                .iter()
                .enumerate()
                .all(|(i, v)| !block[i + 1..].contains(v))
        });
        if simple {
            return FactorGraph::from_socket_vars(params, n_vars, &socket_vars, Some(seed));
        }
    }
    Err(Error::ResampleLimit(MAX_INTERLEAVER_ATTEMPTS))
}

/// Random `(d_v, d_c)`-regular graph drawn together with a codeword of it.
///
/// Variables receive values in a balanced random pattern, then every
/// constraint socket block is filled with variables of pairwise distinct
/// values. For `d_c = q` each constraint takes one variable of every value,
/// which requires `q | n_vars`; for `d_c < q` blocks are filled greedily,
/// choosing value classes with probability proportional to their unused
/// sockets, and dead ends are redrawn from the same generator.
pub fn build_planted(params: CodeParams, n_vars: usize, seed: u64) -> Result<(FactorGraph, Codeword)> {
    let (q, dv, dc) = (params.q(), params.dv(), params.dc());
    let sockets = n_vars * dv;
    if n_vars == 0 || !sockets.is_multiple_of(dc) {
        return Err(Error::SocketDivisibility { sockets, dc });
    }
    if dc == q && !n_vars.is_multiple_of(q) {
        return Err(Error::InvalidParams(format!(
            "d_c = q = {q} needs n_vars divisible by q, got {n_vars}"
        )));
    }
    let n_cons = sockets / dc;
    let mut rng = seed::rng(seed);
    let mut symbols: Vec<usize> = (0..n_vars).map(|v| v % q + 1).collect();
    symbols.shuffle(&mut rng);

    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (v, &x) in symbols.iter().enumerate() {
        classes[x - 1].extend(std::iter::repeat_n(v, dv));
    }

    for _ in 0..MAX_INTERLEAVER_ATTEMPTS {
        let mut socket_vars = Vec::with_capacity(sockets);
        if dc == q {
            for class in &mut classes {
                class.shuffle(&mut rng);
            }
            for c in 0..n_cons {
                let start = socket_vars.len();
                socket_vars.extend(classes.iter().map(|class| class[c]));
                socket_vars[start..].shuffle(&mut rng);
            }
        } else if !fill_greedy(&classes, n_cons, dc, &mut rng, &mut socket_vars) {
            continue;
        }
        let graph = FactorGraph::from_socket_vars(params, n_vars, &socket_vars, Some(seed))?;
        return Ok((graph, Codeword { symbols }));
    }
    Err(Error::ResampleLimit(MAX_INTERLEAVER_ATTEMPTS))
}

fn fill_greedy(
    classes: &[Vec<usize>],
    n_cons: usize,
    dc: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    socket_vars: &mut Vec<usize>,
) -> bool {
    let mut pools: Vec<Vec<usize>> = classes.to_vec();
    for _ in 0..n_cons {
        let mut picked = 0u64;
        for _ in 0..dc {
            let total: usize = pools
                .iter()
                .enumerate()
                .filter(|(i, _)| picked & (1 << i) == 0)
                .map(|(_, p)| p.len())
                .sum();
            if total == 0 {
                return false;
            }
            let mut r = rng.random_range(0..total);
            let class = (0..pools.len())
                .filter(|i| picked & (1 << i) == 0)
                .find(|&i| {
                    if r < pools[i].len() {
                        true
                    } else {
                        r -= pools[i].len();
                        false
                    }
                })
                .expect("weighted pick within total");
            picked |= 1 << class;
            let pool = &mut pools[class];
            let k = rng.random_range(0..pool.len());
            socket_vars.push(pool.swap_remove(k));
        }
    }
    true
}

/// Standard Sudoku graph with `box_rows × box_cols` boxes.
///
/// Variable `r * q + c` is the cell in row `r`, column `c`. Constraints
/// `0..q` are rows, `q..2q` columns and `2q..3q` boxes (row-major box order).
pub fn build_classic_sudoku(box_rows: usize, box_cols: usize) -> Result<FactorGraph> {
    if box_rows < 2 || box_cols < 2 {
        return Err(Error::InvalidParams(format!(
            "box dimensions {box_rows}x{box_cols} must both be at least 2"
        )));
    }
    let q = box_rows * box_cols;
    let params = CodeParams::new(q, 3, q)?;
    let mut socket_vars = Vec::with_capacity(3 * q * q);
    for r in 0..q {
        socket_vars.extend((0..q).map(|c| r * q + c));
    }
    for c in 0..q {
        socket_vars.extend((0..q).map(|r| r * q + c));
    }
    // q / box_cols = box_rows boxes across, box_cols boxes down
    for b in 0..q {
        let (band, stack) = (b / box_rows, b % box_rows);
        for i in 0..box_rows {
            for j in 0..box_cols {
                socket_vars.push((band * box_rows + i) * q + stack * box_cols + j);
            }
        }
    }
    FactorGraph::from_socket_vars(params, q * q, &socket_vars, None)
}

/// An assignment of values `1..=q` to every variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword {
    pub symbols: Vec<usize>,
}

impl Codeword {
    /// First constraint whose attached variables are not pairwise distinct
    /// (or hold a value outside the alphabet).
    pub fn first_violation(&self, graph: &FactorGraph) -> Option<usize> {
        if self.symbols.len() != graph.n_vars() {
            return Some(0);
        }
        let q = graph.params().q();
        (0..graph.n_cons()).find(|&c| {
            let mut seen = 0u64;
            graph.con_vars(c).any(|v| {
                let x = self.symbols[v];
                if x == 0 || x > q {
                    return true;
                }
                let bit = 1u64 << (x - 1);
                let dup = seen & bit != 0;
                seen |= bit;
                dup
            })
        })
    }

    pub fn is_valid(&self, graph: &FactorGraph) -> bool {
        self.first_violation(graph).is_none()
    }
}

/// Channel output: `Some(value)` if received, `None` for an erasure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReceivedWord {
    pub observations: Vec<Option<usize>>,
}

impl ReceivedWord {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn erasures(&self) -> usize {
        self.observations.iter().filter(|o| o.is_none()).count()
    }

    /// Per-variable channel message: the observed singleton or the full set.
    pub fn channel_messages(&self, q: usize) -> Result<Vec<SymbolSet>> {
        self.observations
            .iter()
            .map(|o| match o {
                Some(v) => SymbolSet::singleton(q, *v),
                None => Ok(SymbolSet::full(q)),
            })
            .collect()
    }
}

/// q-ary erasure channel: each symbol independently erased with probability `delta`.
pub fn erase(cw: &Codeword, delta: f64, seed: u64) -> Result<ReceivedWord> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::ProbabilityOutOfRange(delta));
    }
    let mut rng = seed::rng(seed);
    let observations = cw
        .symbols
        .iter()
        .map(|&x| (rng.random::<f64>() >= delta).then_some(x))
        .collect();
    Ok(ReceivedWord { observations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleOptions {
    /// Node expansions allowed per restart.
    pub budget: u64,
    pub restarts: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            restarts: 100,
        }
    }
}

/// Draw a codeword with [`SampleOptions::default`].
pub fn sample_codeword(graph: &FactorGraph, seed: u64) -> Result<Codeword> {
    sample_codeword_with(graph, seed, SampleOptions::default())
}

/// Randomised backtracking search for a valid assignment.
///
/// Variables are chosen by minimum remaining values with forward checking;
/// candidate values are tried in a seeded random order. After `budget`
/// expansions the search restarts with a seed derived from `seed` and the
/// restart index.
pub fn sample_codeword_with(graph: &FactorGraph, seed: u64, opts: SampleOptions) -> Result<Codeword> {
    let neighbours: Vec<Vec<usize>> = (0..graph.n_vars()).map(|v| graph.neighbours(v)).collect();
    for restart in 0..opts.restarts.max(1) {
        let mut search = Search::new(graph, &neighbours, seed::derive(seed, &[restart as u64]), opts.budget);
        match search.run() {
            Outcome::Found => {
                let symbols = search.value.iter().map(|&x| x as usize).collect();
                return Ok(Codeword { symbols });
            }
            Outcome::Exhausted => return Err(Error::GraphInfeasible),
            Outcome::OutOfBudget => continue,
        }
    }
    Err(Error::NoCodewordFound {
        restarts: opts.restarts.max(1),
        budget: opts.budget,
    })
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    neighbours: &'a [Vec<usize>],
    domain: Vec<u64>,
    value: Vec<u8>,
    // (variable, removed bit) pairs for undo
    trail: Vec<(usize, u64)>,
    rng: rand_chacha::ChaCha8Rng,
    budget: u64,
    expansions: u64,
    unassigned: usize,
}

impl<'a> Search<'a> {
    fn new(graph: &FactorGraph, neighbours: &'a [Vec<usize>], seed: u64, budget: u64) -> Self {
        let full = SymbolSet::full(graph.params().q()).bits();
        Self {
            neighbours,
            domain: vec![full; graph.n_vars()],
            value: vec![0; graph.n_vars()],
            trail: Vec::new(),
            rng: seed::rng(seed),
            budget,
            expansions: 0,
            unassigned: graph.n_vars(),
        }
    }

    fn pick_variable(&mut self) -> usize {
        let mut best = usize::MAX;
        let mut best_size = u32::MAX;
        let mut ties = 0u32;
        for v in 0..self.value.len() {
            if self.value[v] != 0 {
                continue;
            }
            let size = self.domain[v].count_ones();
            if size < best_size {
                best = v;
                best_size = size;
                ties = 1;
            } else if size == best_size {
                // reservoir sampling among equally constrained variables
                ties += 1;
                if self.rng.random_range(0..ties) == 0 {
                    best = v;
                }
            }
        }
        best
    }

    fn run(&mut self) -> Outcome {
        if self.unassigned == 0 {
            return Outcome::Found;
        }
        let v = self.pick_variable();
        let mut candidates: Vec<u8> = SymbolSet::from_bits(64, self.domain[v])
            .map(|s| s.iter().map(|x| x as u8).collect())
            .unwrap_or_default();
        candidates.shuffle(&mut self.rng);
        for x in candidates {
            self.expansions += 1;
            if self.expansions > self.budget {
                return Outcome::OutOfBudget;
            }
            let mark = self.trail.len();
            if self.assign(v, x) {
                match self.run() {
                    Outcome::Exhausted => {}
                    other => return other,
                }
            }
            self.undo(v, mark);
        }
        Outcome::Exhausted
    }

    /// Assign and forward-check; false on a wiped-out neighbour domain.
    fn assign(&mut self, v: usize, x: u8) -> bool {
        self.value[v] = x;
        self.unassigned -= 1;
        let bit = 1u64 << (x - 1);
        for &u in &self.neighbours[v] {
            if self.value[u] == 0 && self.domain[u] & bit != 0 {
                self.domain[u] &= !bit;
                self.trail.push((u, bit));
                if self.domain[u] == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn undo(&mut self, v: usize, mark: usize) {
        for (u, bit) in self.trail.drain(mark..) {
            self.domain[u] |= bit;
        }
        self.value[v] = 0;
        self.unassigned += 1;
    }
}

/// Character for value `v` in the grid text format.
pub fn value_char(v: usize) -> char {
    match v {
        1..=9 => char::from(b'0' + v as u8),
        10..=35 => char::from(b'A' + (v - 10) as u8),
        _ => '?',
    }
}

fn char_value(c: char) -> Option<usize> {
    match c {
        '1'..='9' => Some(c as usize - '0' as usize),
        'A'..='Z' => Some(c as usize - 'A' as usize + 10),
        'a'..='z' => Some(c as usize - 'a' as usize + 10),
        _ => None,
    }
}

/// Parse a row-major grid of `q * q` cells; `.` marks an erasure and
/// whitespace is ignored.
pub fn parse_grid(text: &str, q: usize) -> Result<ReceivedWord> {
    let mut observations = Vec::with_capacity(q * q);
    for c in text.chars().filter(|c| !c.is_whitespace()) {
        if c == '.' {
            observations.push(None);
            continue;
        }
        match char_value(c) {
            Some(v) if v <= q => observations.push(Some(v)),
            _ => {
                return Err(Error::MalformedGrid(format!(
                    "character '{c}' is not a value in 1..={q} or '.'"
                )))
            }
        }
    }
    if observations.len() != q * q {
        return Err(Error::MalformedGrid(format!(
            "expected {} cells, found {}",
            q * q,
            observations.len()
        )));
    }
    Ok(ReceivedWord { observations })
}

/// Render cells as `q` lines of `q` characters.
pub fn format_grid(cells: &[Option<usize>], q: usize) -> String {
    let mut out = String::with_capacity(q * (q + 1));
    for row in cells.chunks(q) {
        out.extend(row.iter().map(|c| c.map_or('.', value_char)));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(q: usize, dv: usize, dc: usize) -> CodeParams {
        CodeParams::new(q, dv, dc).unwrap()
    }

    #[test]
    fn tiny_regular_graph_counts() {
        let g = build_regular(p(4, 3, 4), 4, 1).unwrap();
        assert_eq!(g.n_cons(), 3);
        assert_eq!(g.n_edges(), 12);
        for c in 0..3 {
            let mut vars: Vec<_> = g.con_vars(c).collect();
            vars.sort();
            assert_eq!(vars, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn regular_graph_invariants() {
        let g = build_regular(p(3, 3, 3), 300, 99).unwrap();
        assert_eq!(g.n_cons(), 300);
        assert_eq!(g.n_edges(), 900);
        assert_eq!(g.n_vars() * 3, g.n_cons() * 3);
        for v in 0..g.n_vars() {
            assert_eq!(g.var_edges(v).len(), 3);
            for (s, &e) in g.var_edges(v).iter().enumerate() {
                assert_eq!(g.edges()[e].var, v);
                assert_eq!(g.edges()[e].var_socket, s);
            }
        }
        assert!((0..g.n_cons()).all(|c| g.constraint_is_simple(c)));
    }

    #[test]
    fn regular_graph_is_deterministic() {
        let a = build_regular(p(4, 3, 4), 120, 5).unwrap();
        let b = build_regular(p(4, 3, 4), 120, 5).unwrap();
        let c = build_regular(p(4, 3, 4), 120, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn divisibility_is_checked() {
        assert!(matches!(
            build_regular(p(4, 3, 4), 5, 0),
            Err(Error::SocketDivisibility { sockets: 15, dc: 4 })
        ));
    }

    #[test]
    fn impossible_dense_graph_hits_resample_limit() {
        // d_c = n_vars forces every constraint to hold all variables; with
        // d_v = 2 and 3 variables, 2 constraints of degree 3 over 3 vars are
        // possible, but 6 variables of degree 5 into constraints of degree 6
        // practically never shuffle into simple blocks.
        let r = build_regular(p(6, 5, 6), 6, 0);
        assert!(matches!(r, Err(Error::ResampleLimit(MAX_INTERLEAVER_ATTEMPTS))));
    }

    #[test]
    fn small_regular_graphs_have_sampleable_codewords() {
        // every constraint of a (4,3,4) graph on 4 variables holds all of them
        let g = build_regular(p(4, 3, 4), 4, 8).unwrap();
        let cw = sample_codeword(&g, 8).unwrap();
        assert!(cw.is_valid(&g));
        assert_eq!(cw, sample_codeword(&g, 8).unwrap());
    }

    #[test]
    fn planted_graphs_carry_their_codeword() {
        for (params, n) in [(p(4, 3, 4), 1200), (p(3, 3, 3), 300), (p(6, 3, 4), 200), (p(5, 2, 3), 150)] {
            let (g, cw) = build_planted(params, n, 21).unwrap();
            assert_eq!(g.n_vars() * params.dv(), g.n_cons() * params.dc());
            assert!(cw.is_valid(&g));
            let mut counts = vec![0usize; params.q()];
            for &x in &cw.symbols {
                counts[x - 1] += 1;
            }
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        let a = build_planted(p(4, 3, 4), 120, 4).unwrap();
        assert_eq!(a, build_planted(p(4, 3, 4), 120, 4).unwrap());
        assert!(build_planted(p(4, 3, 4), 6, 4).is_err());
    }

    #[test]
    fn classic_shapes() {
        for (r, c, q) in [(3, 3, 9), (2, 2, 4), (2, 3, 6)] {
            let g = build_classic_sudoku(r, c).unwrap();
            assert_eq!(g.params().q(), q);
            assert_eq!(g.params().dc(), q);
            assert_eq!(g.n_vars(), q * q);
            assert_eq!(g.n_cons(), 3 * q);
            for v in 0..g.n_vars() {
                assert_eq!(g.var_edges(v).len(), 3);
            }
        }
        assert!(build_classic_sudoku(1, 3).is_err());
    }

    #[test]
    fn classic_boxes_are_rectangles() {
        let g = build_classic_sudoku(2, 3).unwrap();
        // box 1 is rows 0..2, columns 3..6
        let mut vars: Vec<_> = g.con_vars(2 * 6 + 1).collect();
        vars.sort();
        assert_eq!(vars, vec![3, 4, 5, 9, 10, 11]);
        // box 2 is rows 2..4, columns 0..3
        let mut vars: Vec<_> = g.con_vars(2 * 6 + 2).collect();
        vars.sort();
        assert_eq!(vars, vec![12, 13, 14, 18, 19, 20]);
    }

    #[test]
    fn sampled_classic_grid_is_valid_and_deterministic() {
        let g = build_classic_sudoku(2, 2).unwrap();
        let a = sample_codeword(&g, 11).unwrap();
        assert!(a.is_valid(&g));
        assert_eq!(a, sample_codeword(&g, 11).unwrap());
        let g9 = build_classic_sudoku(3, 3).unwrap();
        assert!(sample_codeword(&g9, 3).unwrap().is_valid(&g9));
    }

    #[test]
    fn ring_of_three_constraints() {
        // three constraints of degree 3 over three variables: every
        // constraint holds all of them, so the codewords are the 3! permutations
        let params = p(3, 3, 3);
        let g = FactorGraph::from_socket_vars(params, 3, &[0, 1, 2, 1, 2, 0, 2, 0, 1], None).unwrap();
        let mut oracle = 0;
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 1..=3 {
                    if (Codeword { symbols: vec![a, b, c] }).is_valid(&g) {
                        oracle += 1;
                    }
                }
            }
        }
        assert_eq!(oracle, 6);
        assert!(sample_codeword(&g, 0).unwrap().is_valid(&g));
    }

    #[test]
    fn infeasible_graph_is_reported_as_such() {
        // two constraints of degree 2 over alphabet 2 forming a triangle of
        // "different" relations: x0 != x1, x1 != x2, x2 != x0 is not 2-colourable
        let params = p(2, 2, 2);
        let g = FactorGraph::from_socket_vars(params, 3, &[0, 1, 1, 2, 2, 0], None).unwrap();
        assert!(matches!(sample_codeword(&g, 0), Err(Error::GraphInfeasible)));
    }

    #[test]
    fn erasure_extremes() {
        let cw = Codeword {
            symbols: vec![1, 2, 3, 4],
        };
        let none = erase(&cw, 0.0, 1).unwrap();
        assert_eq!(none.observations, vec![Some(1), Some(2), Some(3), Some(4)]);
        assert_eq!(erase(&cw, 1.0, 1).unwrap().erasures(), 4);
        assert!(erase(&cw, 1.5, 1).is_err());
        assert!(erase(&cw, -0.1, 1).is_err());
    }

    #[test]
    fn erasure_rate_concentrates() {
        let cw = Codeword {
            symbols: vec![1; 100_000],
        };
        let r = erase(&cw, 0.5, 2024).unwrap();
        let frac = r.erasures() as f64 / 1e5;
        // 6 sigma = 6 * sqrt(0.25 / 1e5) ~ 0.0095
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
        assert!(r
            .observations
            .iter()
            .all(|o| o.is_none() || *o == Some(1)));
    }

    #[test]
    fn json_round_trip() {
        let g = build_regular(p(4, 3, 4), 40, 17).unwrap();
        let text = g.to_json().unwrap();
        assert!(text.contains("\"n_cons\":30"));
        assert_eq!(FactorGraph::from_json(&text).unwrap(), g);
        let bad = text.replacen("\"dc\":4", "\"dc\":5", 1);
        assert!(FactorGraph::from_json(&bad).is_err());
    }

    #[test]
    fn grid_text_format() {
        let text = "12..\n..12\n21..\n..21\n";
        let rw = parse_grid(text, 4).unwrap();
        assert_eq!(rw.erasures(), 8);
        assert_eq!(format_grid(&rw.observations, 4), text);
        assert!(parse_grid("12..", 4).is_err());
        assert!(parse_grid(&"5".repeat(16), 4).is_err());
        assert!(parse_grid(&"x".repeat(16), 4).is_err());
        assert_eq!(value_char(12), 'C');
    }
}
