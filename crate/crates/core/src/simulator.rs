//! Monte Carlo erasure-channel campaigns on finite graphs.
//!
//! Every trial draws its randomness from `seed::derive(base, [delta index,
//! trial index])`, so a campaign is a pure function of its [`SimConfig`]
//! regardless of how trials are scheduled across threads.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::codegraph::{
    build_classic_sudoku, build_planted, build_regular, erase, sample_codeword, Codeword, FactorGraph,
};
use crate::subset_bp::{decode, DecodeStatus};
use crate::{seed, CodeParams, Error, Permutation, Result};

/// Where a campaign's graph and codewords come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphSource {
    /// One planted graph per campaign; each trial transmits a uniformly
    /// random alphabet relabelling of the planted codeword.
    Planted,
    /// One random interleaver graph per campaign; each trial samples a
    /// codeword by backtracking. Only practical for small graphs.
    Regular,
    /// Classic Sudoku grid; each trial samples a fresh solved grid.
    Classic { box_rows: usize, box_cols: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: CodeParams,
    pub n_vars: usize,
    pub deltas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub source: GraphSource,
}

impl SimConfig {
    pub fn new(params: CodeParams, n_vars: usize, deltas: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            params,
            n_vars,
            deltas,
            trials,
            seed,
            max_iters: 1000,
            source: GraphSource::Planted,
        }
    }

    /// Classic Sudoku campaign; parameters follow from the box shape.
    pub fn classic(box_rows: usize, box_cols: usize, deltas: Vec<f64>, trials: usize, seed: u64) -> Result<Self> {
        let q = box_rows * box_cols;
        Ok(Self {
            params: CodeParams::new(q, 3, q)?,
            n_vars: q * q,
            deltas,
            trials,
            seed,
            max_iters: 1000,
            source: GraphSource::Classic { box_rows, box_cols },
        })
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if let Some(&d) = self.deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::ProbabilityOutOfRange(d));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaStats {
    pub delta: f64,
    pub trials: usize,
    pub word_fail: f64,
    pub sym_unresolved: f64,
    pub mean_iters: f64,
    pub solved: usize,
    pub stalled: usize,
    pub budget: usize,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimStats {
    pub config: SimConfig,
    pub rows: Vec<DeltaStats>,
}

/// Wilson score interval for `k` successes in `n` trials at 95%.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct Campaign {
    graph: FactorGraph,
    planted: Option<Codeword>,
}

impl Campaign {
    fn build(cfg: &SimConfig) -> Result<Self> {
        match cfg.source {
            GraphSource::Planted => {
                let (graph, cw) = build_planted(cfg.params, cfg.n_vars, cfg.seed)?;
                Ok(Self {
                    graph,
                    planted: Some(cw),
                })
            }
            GraphSource::Regular => Ok(Self {
                graph: build_regular(cfg.params, cfg.n_vars, cfg.seed)?,
                planted: None,
            }),
            GraphSource::Classic { box_rows, box_cols } => {
                let graph = build_classic_sudoku(box_rows, box_cols)?;
                if graph.params() != cfg.params || graph.n_vars() != cfg.n_vars {
                    return Err(Error::InvalidParams(format!(
                        "classic {box_rows}x{box_cols} grid has parameters {} on {} cells",
                        graph.params(),
                        graph.n_vars()
                    )));
                }
                Ok(Self { graph, planted: None })
            }
        }
    }

    fn codeword(&self, seed: u64) -> Result<Codeword> {
        match &self.planted {
            Some(cw) => {
                let q = self.graph.params().q();
                let mut image: Vec<usize> = (1..=q).collect();
                image.shuffle(&mut seed::rng(seed));
                let pi = Permutation::new(image)?;
                Ok(Codeword {
                    symbols: cw.symbols.iter().map(|&x| pi.apply(x)).collect(),
                })
            }
            None => sample_codeword(&self.graph, seed),
        }
    }
}

struct TrialOutcome {
    status: DecodeStatus,
    iterations: usize,
    unresolved: usize,
}

fn run_trial(campaign: &Campaign, cfg: &SimConfig, delta: f64, trial_seed: u64) -> Result<TrialOutcome> {
    let cw = campaign.codeword(seed::derive(trial_seed, &[0]))?;
    let rx = erase(&cw, delta, seed::derive(trial_seed, &[1]))?;
    let result = decode(&campaign.graph, &rx, cfg.max_iters)?;
    if result.status == DecodeStatus::Contradiction {
        return Err(Error::Internal(format!(
            "decoder contradicted on a valid codeword at variable {:?}",
            result.contradiction
        )));
    }
    Ok(TrialOutcome {
        status: result.status,
        iterations: result.iterations,
        unresolved: result.unresolved(),
    })
}

/// Run every trial at every erasure probability of the grid.
pub fn run_campaign(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let campaign = Campaign::build(cfg)?;
    let n = campaign.graph.n_vars();
    let mut rows = Vec::with_capacity(cfg.deltas.len());
    for (di, &delta) in cfg.deltas.iter().enumerate() {
        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(&campaign, cfg, delta, seed::derive(cfg.seed, &[di as u64, t as u64])))
            .collect::<Result<Vec<_>>>()?;
        let count = |s: DecodeStatus| outcomes.iter().filter(|o| o.status == s).count();
        let solved = count(DecodeStatus::Solved);
        let stalled = count(DecodeStatus::Stalled);
        let budget = count(DecodeStatus::MaxIterations);
        let failures = cfg.trials - solved;
        let unresolved: usize = outcomes.iter().map(|o| o.unresolved).sum();
        let iters: usize = outcomes.iter().map(|o| o.iterations).sum();
        let (wilson_lo, wilson_hi) = wilson_interval(failures, cfg.trials);
        rows.push(DeltaStats {
            delta,
            trials: cfg.trials,
            word_fail: failures as f64 / cfg.trials as f64,
            sym_unresolved: unresolved as f64 / (cfg.trials * n) as f64,
            mean_iters: iters as f64 / cfg.trials as f64,
            solved,
            stalled,
            budget,
            wilson_lo,
            wilson_hi,
        });
    }
    Ok(SimStats {
        config: cfg.clone(),
        rows,
    })
}

pub const CSV_HEADER: &str = "delta,trials,word_fail,sym_unresolved,mean_iters,solved,stalled,budget,wilson_lo,wilson_hi";

/// Fixed-point decimal with at least six significant digits.
pub fn format_sig6(x: f64) -> String {
    let decimals = if x == 0.0 || !x.is_finite() {
        6
    } else {
        (5 - x.abs().log10().floor() as i32).max(6) as usize
    };
    format!("{x:.decimals$}")
}

impl SimStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [
                format_sig6(r.delta),
                r.trials.to_string(),
                format_sig6(r.word_fail),
                format_sig6(r.sym_unresolved),
                format_sig6(r.mean_iters),
                r.solved.to_string(),
                r.stalled.to_string(),
                r.budget.to_string(),
                format_sig6(r.wilson_lo),
                format_sig6(r.wilson_hi),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON mirror of [`SimStats::to_csv`]; rates carry the same rounding.
    pub fn to_json(&self) -> Result<String> {
        let round = |x: f64| format_sig6(x).parse::<f64>().unwrap_or(x);
        let rows: Vec<DeltaStats> = self
            .rows
            .iter()
            .map(|r| DeltaStats {
                delta: round(r.delta),
                word_fail: round(r.word_fail),
                sym_unresolved: round(r.sym_unresolved),
                mean_iters: round(r.mean_iters),
                wilson_lo: round(r.wilson_lo),
                wilson_hi: round(r.wilson_hi),
                ..r.clone()
            })
            .collect();
        Ok(serde_json::to_string_pretty(&SimStats {
            config: self.config.clone(),
            rows,
        })?)
    }
}

pub fn write_csv(stats: &SimStats, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(stats.to_csv().as_bytes())?;
    Ok(())
}
