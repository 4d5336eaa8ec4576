//! The DE recursion, threshold search and rate estimates.

use serde::Serialize;

use super::kernel::{build_constraint_table, build_variable_table, ConditionalTable, NodeKind};
use crate::{CardinalityPmf, CodeParams, Error, Result};

/// Largest alphabet for which kernels are built on demand.
pub const MAX_DE_Q: usize = 8;

/// Total-mass drift tolerated before the recursion reports an internal error.
const DRIFT_TOL: f64 = 1e-9;

fn check_kind(table: &ConditionalTable, kind: NodeKind) -> Result<()> {
    if table.kind() != kind {
        return Err(Error::InvalidParams(format!(
            "expected a {kind} table, got a {} table",
            table.kind()
        )));
    }
    Ok(())
}

/// Variable-node map on i.i.d. incoming cardinalities (channel excluded).
pub fn vn_map(table: &ConditionalTable, pmf_in: &CardinalityPmf) -> Result<CardinalityPmf> {
    check_kind(table, NodeKind::Variable)?;
    table.map(pmf_in)
}

/// Constraint-node map on i.i.d. incoming cardinalities.
pub fn cn_map(table: &ConditionalTable, pmf_in: &CardinalityPmf) -> Result<CardinalityPmf> {
    check_kind(table, NodeKind::Constraint)?;
    table.map(pmf_in)
}

/// Intersect with the channel message: a singleton with probability
/// `1 - delta`, the full alphabet with probability `delta`.
pub fn apply_channel(pmf: &CardinalityPmf, delta: f64) -> Result<CardinalityPmf> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::ProbabilityOutOfRange(delta));
    }
    let mut out: Vec<f64> = pmf.as_slice().iter().map(|p| delta * p).collect();
    out[0] += 1.0 - delta;
    Ok(CardinalityPmf::from_raw(out))
}

/// Both node kernels for one code.
#[derive(Clone, Debug)]
pub struct DeKernels {
    pub params: CodeParams,
    pub variable: ConditionalTable,
    pub constraint: ConditionalTable,
}

impl DeKernels {
    pub fn build(params: CodeParams) -> Result<Self> {
        if params.q() > MAX_DE_Q {
            return Err(Error::InvalidParams(format!(
                "exact kernels are supported up to q = {MAX_DE_Q}, got {}",
                params.q()
            )));
        }
        Ok(Self {
            params,
            variable: build_variable_table(params.q(), params.dv())?,
            constraint: build_constraint_table(params.q(), params.dc())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeConfig {
    pub max_iters: usize,
    /// Converged once P(cardinality > 1) is at most this.
    pub tol: f64,
    /// Stalled once the sup-norm step falls below this.
    pub stall_tol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-10,
            stall_tol: 1e-14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeOutcome {
    Converged,
    Stalled,
    Budget,
}

impl std::fmt::Display for DeOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeOutcome::Converged => "converged",
            DeOutcome::Stalled => "stalled",
            DeOutcome::Budget => "budget",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeTrace {
    pub delta: f64,
    /// Variable-to-constraint pmfs; entry 0 is the initial channel message.
    pub var_to_con: Vec<CardinalityPmf>,
    /// Constraint-to-variable pmfs; entry `t - 1` belongs to iteration `t`.
    pub con_to_var: Vec<CardinalityPmf>,
    pub outcome: DeOutcome,
    pub iterations: usize,
}

impl DeTrace {
    pub fn final_pmf(&self) -> &CardinalityPmf {
        self.var_to_con.last().expect("trace holds the initial pmf")
    }

    /// Messages in emission order: `(iteration, "v2c" | "c2v", pmf)`.
    pub fn messages(&self) -> impl Iterator<Item = (usize, &'static str, &CardinalityPmf)> {
        let first = std::iter::once((0, "v2c", &self.var_to_con[0]));
        let rest = self
            .con_to_var
            .iter()
            .zip(&self.var_to_con[1..])
            .enumerate()
            .flat_map(|(i, (c, v))| [(i + 1, "c2v", c), (i + 1, "v2c", v)]);
        first.chain(rest)
    }

    /// CSV: `iteration,message,p1,...,pq`, message is `v2c` or `c2v`.
    /// Values use the shortest exact decimal form.
    pub fn to_csv(&self) -> String {
        let q = self.final_pmf().q();
        let ps: Vec<String> = (1..=q).map(|k| format!("p{k}")).collect();
        let mut out = format!("iteration,message,{}\n", ps.join(","));
        for (t, tag, p) in self.messages() {
            let vals: Vec<String> = p.as_slice().iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{t},{tag},{}\n", vals.join(",")));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .messages()
            .map(|(t, tag, p)| serde_json::json!({ "iteration": t, "message": tag, "pmf": p.as_slice() }))
            .collect();
        serde_json::json!({
            "delta": self.delta,
            "outcome": self.outcome,
            "iterations": self.iterations,
            "messages": rows,
        })
    }
}

fn check_drift(pmf: &mut CardinalityPmf) -> Result<()> {
    let total = pmf.total();
    if (total - 1.0).abs() > DRIFT_TOL {
        return Err(Error::Internal(format!("pmf mass drifted to {total}")));
    }
    pmf.renormalize();
    Ok(())
}

/// Run the recursion from the all-erased-or-known channel message.
///
/// Each iteration computes `c2v = cn_map(v2c)` then
/// `v2c = apply_channel(vn_map(c2v), delta)`.
pub fn de_iterate(params: CodeParams, delta: f64, max_iters: usize, tol: f64) -> Result<DeTrace> {
    let kernels = DeKernels::build(params)?;
    de_iterate_with(
        &kernels,
        delta,
        DeConfig {
            max_iters,
            tol,
            ..DeConfig::default()
        },
    )
}

pub fn de_iterate_with(kernels: &DeKernels, delta: f64, cfg: DeConfig) -> Result<DeTrace> {
    let mut trace = DeTrace {
        delta,
        var_to_con: Vec::new(),
        con_to_var: Vec::new(),
        outcome: DeOutcome::Budget,
        iterations: 0,
    };
    let (outcome, iterations) = run(kernels, delta, cfg, |c2v, v2c| {
        if let Some(c) = c2v {
            trace.con_to_var.push(c.clone());
        }
        trace.var_to_con.push(v2c.clone());
    })?;
    trace.outcome = outcome;
    trace.iterations = iterations;
    Ok(trace)
}

fn run(
    kernels: &DeKernels,
    delta: f64,
    cfg: DeConfig,
    mut record: impl FnMut(Option<&CardinalityPmf>, &CardinalityPmf),
) -> Result<(DeOutcome, usize)> {
    let q = kernels.params.q();
    let mut v2c = apply_channel(&CardinalityPmf::atomic(q, q), delta)?;
    record(None, &v2c);
    for t in 1..=cfg.max_iters {
        let mut c2v = cn_map(&kernels.constraint, &v2c)?;
        check_drift(&mut c2v)?;
        let mut next = apply_channel(&vn_map(&kernels.variable, &c2v)?, delta)?;
        check_drift(&mut next)?;
        record(Some(&c2v), &next);
        if next.unresolved_mass() <= cfg.tol {
            return Ok((DeOutcome::Converged, t));
        }
        if next.sup_distance(&v2c) < cfg.stall_tol {
            return Ok((DeOutcome::Stalled, t));
        }
        v2c = next;
    }
    Ok((DeOutcome::Budget, cfg.max_iters))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub theta: f64,
    /// Largest erasure probability seen to converge.
    pub lower: f64,
    /// Smallest erasure probability seen not to converge.
    pub upper: f64,
    pub iterations_cap: usize,
    pub convergence_tol: f64,
}

/// Bisection on `delta` for the largest erasure probability at which the
/// recursion converges, to bracket width `precision`.
pub fn find_threshold(params: CodeParams, precision: f64) -> Result<ThresholdResult> {
    find_threshold_with(&DeKernels::build(params)?, precision, DeConfig::default())
}

pub fn find_threshold_with(kernels: &DeKernels, precision: f64, cfg: DeConfig) -> Result<ThresholdResult> {
    if !(precision > 0.0 && precision < 1.0) {
        return Err(Error::InvalidParams(format!("precision {precision} must lie in (0, 1)")));
    }
    let (mut lower, mut upper) = (0.0_f64, 1.0_f64);
    while upper - lower > precision {
        let mid = 0.5 * (lower + upper);
        let (outcome, _) = run(kernels, mid, cfg, |_, _| {})?;
        if outcome == DeOutcome::Converged {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    Ok(ThresholdResult {
        theta: 0.5 * (lower + upper),
        lower,
        upper,
        iterations_cap: cfg.max_iters,
        convergence_tol: cfg.tol,
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Rate estimate from counting value patterns on a depth-`k` tree:
/// `log_q(d_c! · ((d_c - 1)!)^(k (d_v - 1))) / (d_c + k (d_c - 1)(d_v - 1))`.
pub fn rate_k(params: CodeParams, k: usize) -> f64 {
    let (q, dv, dc) = (params.q() as f64, params.dv(), params.dc());
    let branches = (k * (dv - 1)) as f64;
    let num = ln_factorial(dc) + branches * ln_factorial(dc - 1);
    let den = dc as f64 + branches * (dc - 1) as f64;
    num / q.ln() / den
}

/// Limit of [`rate_k`] as `k` grows: `log_q((d_c - 1)!) / (d_c - 1)`.
pub fn rate_limit(params: CodeParams) -> f64 {
    let (q, dc) = (params.q() as f64, params.dc());
    ln_factorial(dc - 1) / q.ln() / (dc - 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub k: Option<usize>,
    pub r_k: Option<f64>,
    pub r_limit: f64,
}

impl RateEstimate {
    pub fn new(params: CodeParams, k: Option<usize>) -> Self {
        Self {
            k,
            r_k: k.map(|k| rate_k(params, k)),
            r_limit: rate_limit(params),
        }
    }
}
