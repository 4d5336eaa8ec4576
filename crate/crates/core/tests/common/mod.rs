//! Golden tables and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use sudoku_codes::codegraph::FactorGraph;
use sudoku_codes::SymbolSet;

/// `(inputs, multiplicity, pmf)` with pmf entries as `"num/den"` strings.
pub type GoldenRow = (&'static [usize], u64, [&'static str; 4]);

/// Variable node, q = 4, d_v = 3.
pub const VARIABLE_4_3: [GoldenRow; 10] = [
    (&[1, 1], 1, ["1", "0", "0", "0"]),
    (&[1, 2], 2, ["1", "0", "0", "0"]),
    (&[1, 3], 2, ["1", "0", "0", "0"]),
    (&[1, 4], 2, ["1", "0", "0", "0"]),
    (&[2, 2], 1, ["2/3", "1/3", "0", "0"]),
    (&[2, 3], 2, ["1/3", "2/3", "0", "0"]),
    (&[2, 4], 2, ["0", "1", "0", "0"]),
    (&[3, 3], 1, ["0", "2/3", "1/3", "0"]),
    (&[3, 4], 2, ["0", "0", "1", "0"]),
    (&[4, 4], 1, ["0", "0", "0", "1"]),
];

/// Constraint node, q = 4, d_c = 4.
pub const CONSTRAINT_4_4: [GoldenRow; 20] = [
    (&[1, 1, 1], 1, ["1", "0", "0", "0"]),
    (&[1, 1, 2], 3, ["2/3", "1/3", "0", "0"]),
    (&[1, 1, 3], 3, ["1/3", "2/3", "0", "0"]),
    (&[1, 1, 4], 3, ["0", "1", "0", "0"]),
    (&[1, 2, 2], 3, ["4/9", "2/9", "1/3", "0"]),
    (&[1, 2, 3], 6, ["2/9", "2/9", "5/9", "0"]),
    (&[1, 2, 4], 6, ["0", "1/3", "2/3", "0"]),
    (&[1, 3, 3], 3, ["1/9", "0", "8/9", "0"]),
    (&[1, 3, 4], 6, ["0", "0", "1", "0"]),
    (&[1, 4, 4], 3, ["0", "0", "1", "0"]),
    (&[2, 2, 2], 1, ["8/27", "1/9", "0", "16/27"]),
    (&[2, 2, 3], 3, ["4/27", "2/27", "0", "7/9"]),
    (&[2, 2, 4], 3, ["0", "1/9", "0", "8/9"]),
    (&[2, 3, 3], 3, ["2/27", "0", "0", "25/27"]),
    (&[2, 3, 4], 6, ["0", "0", "0", "1"]),
    (&[2, 4, 4], 3, ["0", "0", "0", "1"]),
    (&[3, 3, 3], 1, ["1/27", "0", "0", "26/27"]),
    (&[3, 3, 4], 3, ["0", "0", "0", "1"]),
    (&[3, 4, 4], 3, ["0", "0", "0", "1"]),
    (&[4, 4, 4], 1, ["0", "0", "0", "1"]),
];

/// Golden pmf entries as f64.
pub fn golden_f64(row: &GoldenRow) -> [f64; 4] {
    row.2.map(|s| match s.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    })
}

/// Whether some assignment of pairwise-distinct values, one from each set,
/// exists (optionally also avoiding `avoid`). Plain depth-first search.
pub fn brute_distinct(sets: &[SymbolSet], avoid: Option<usize>) -> bool {
    fn go(sets: &[SymbolSet], used: &mut Vec<usize>) -> bool {
        let Some((first, rest)) = sets.split_first() else {
            return true;
        };
        for x in first.iter() {
            if !used.contains(&x) {
                used.push(x);
                if go(rest, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    let mut used: Vec<usize> = avoid.into_iter().collect();
    go(sets, &mut used)
}

/// Values `v` such that the sets plus `{v}` admit distinct representatives.
pub fn brute_constraint(sets: &[SymbolSet], q: usize) -> SymbolSet {
    SymbolSet::from_values(q, (1..=q).filter(|&v| brute_distinct(sets, Some(v)))).unwrap()
}

/// Every nonempty subset of `{1..q}`.
pub fn nonempty_subsets(q: usize) -> Vec<SymbolSet> {
    (1u64..(1 << q)).map(|b| SymbolSet::from_bits(q, b).unwrap()).collect()
}

/// Every tuple of `len` nonempty subsets of `{1..q}`.
pub fn all_tuples(q: usize, len: usize) -> Vec<Vec<SymbolSet>> {
    let subsets = nonempty_subsets(q);
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                subsets.iter().map(move |s| {
                    let mut t = t.clone();
                    t.push(*s);
                    t
                })
            })
            .collect();
    }
    out
}

/// Backtracking solver over a factor graph: returns up to `limit` solutions
/// consistent with the given cells.
pub fn backtrack_solutions(graph: &FactorGraph, cells: &[Option<usize>], limit: usize) -> Vec<Vec<usize>> {
    let q = graph.params().q();
    let neighbours: Vec<Vec<usize>> = (0..graph.n_vars()).map(|v| graph.neighbours(v)).collect();
    let mut value: Vec<usize> = cells.iter().map(|c| c.unwrap_or(0)).collect();
    let mut out = Vec::new();

    fn go(
        q: usize,
        neighbours: &[Vec<usize>],
        value: &mut Vec<usize>,
        limit: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= limit {
            return;
        }
        let Some(v) = value.iter().position(|&x| x == 0) else {
            out.push(value.clone());
            return;
        };
        for x in 1..=q {
            if neighbours[v].iter().all(|&u| value[u] != x) {
                value[v] = x;
                go(q, neighbours, value, limit, out);
                value[v] = 0;
            }
        }
    }

    let clash = (0..value.len())
        .any(|v| value[v] != 0 && neighbours[v].iter().any(|&u| u != v && value[u] == value[v]));
    if !clash {
        go(q, &neighbours, &mut value, limit, &mut out);
    }
    out
}
