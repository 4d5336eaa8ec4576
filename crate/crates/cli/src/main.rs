use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sudoku_codes::codegraph::{build_classic_sudoku, format_grid, parse_grid, sample_codeword};
use sudoku_codes::density_evolution::{
    build_constraint_table, build_variable_table, de_iterate, find_threshold, RateEstimate,
};
use sudoku_codes::simulator::{run_campaign, GraphSource, SimConfig};
use sudoku_codes::subset_bp::{decode, DecodeStatus};
use sudoku_codes::{CodeParams, Error};

/// Belief propagation and density evolution for SUDOKU-constraint codes.
#[derive(Parser)]
#[command(name = "sudoku-codes", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Base seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Node {
    Variable,
    Constraint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Planted,
    Regular,
    Classic,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    q: usize,
    /// Variable-node degree.
    #[arg(long, default_value_t = 3)]
    dv: usize,
    /// Constraint-node degree; defaults to q.
    #[arg(long)]
    dc: Option<usize>,
}

impl CodeArgs {
    fn params(&self) -> sudoku_codes::Result<CodeParams> {
        CodeParams::new(self.q, self.dv, self.dc.unwrap_or(self.q))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact conditional output-cardinality table of one node type.
    Tables {
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum)]
        node: Node,
        #[arg(long, required_if_eq("node", "variable"))]
        dv: Option<usize>,
        #[arg(long, required_if_eq("node", "constraint"))]
        dc: Option<usize>,
    },
    /// Density-evolution threshold by bisection.
    Threshold {
        #[command(flatten)]
        code: CodeArgs,
        /// Final bracket width.
        #[arg(long, default_value_t = 1e-6)]
        precision: f64,
    },
    /// Density-evolution trace at one erasure probability.
    De {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
    },
    /// Rate estimates from tree counting.
    Rate {
        #[command(flatten)]
        code: CodeArgs,
        /// Tree depth for the finite estimate.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Monte Carlo decoding campaign over a grid of erasure probabilities.
    Sim {
        #[command(flatten)]
        code: CodeArgs,
        /// Number of variable nodes.
        #[arg(long, default_value_t = 1200)]
        n: usize,
        /// Comma-separated erasure probabilities.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long, value_enum, default_value_t = Source::Planted)]
        source: Source,
        /// Box shape for `--source classic`.
        #[arg(long, default_value_t = 3)]
        box_rows: usize,
        #[arg(long, default_value_t = 3)]
        box_cols: usize,
    },
    /// Classic Sudoku grids.
    #[command(subcommand)]
    Sudoku(SudokuCommand),
}

#[derive(Subcommand)]
enum SudokuCommand {
    /// Decode a puzzle file ('.' marks an empty cell).
    Solve {
        grid: PathBuf,
        /// Box shape; inferred for square alphabet sizes.
        #[arg(long)]
        box_rows: Option<usize>,
        #[arg(long)]
        box_cols: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
    },
    /// Print a uniformly shuffled solved grid.
    Sample {
        #[arg(long, default_value_t = 3)]
        box_rows: usize,
        #[arg(long, default_value_t = 3)]
        box_cols: usize,
    },
}

/// Bad input that the parser could not catch.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidParams(_)
            | Error::ProbabilityOutOfRange(_)
            | Error::ValueOutOfRange { .. }
            | Error::SocketDivisibility { .. }
            | Error::MalformedGrid(_)
            | Error::NotSquare { .. },
        ) => 2,
        _ => 1,
    }
}

fn render(format: Format, csv: impl FnOnce() -> String, json: serde_json::Value) -> anyhow::Result<String> {
    Ok(match format {
        Format::Csv => csv(),
        Format::Json => serde_json::to_string_pretty(&json)? + "\n",
    })
}

fn tables(format: Format, q: usize, node: Node, dv: Option<usize>, dc: Option<usize>) -> anyhow::Result<String> {
    let table = match node {
        Node::Variable => build_variable_table(q, dv.unwrap_or(3))?,
        Node::Constraint => build_constraint_table(q, dc.unwrap_or(q))?,
    };
    render(format, || table.to_csv(), table.to_json())
}

fn threshold(format: Format, params: CodeParams, precision: f64) -> anyhow::Result<String> {
    let r = find_threshold(params, precision)?;
    let theta: f64 = format!("{:.5}", r.theta).parse()?;
    render(
        format,
        || {
            format!(
                "q,dv,dc,theta,lower,upper,precision\n{},{},{},{theta:.5},{},{},{precision}\n",
                params.q(),
                params.dv(),
                params.dc(),
                r.lower,
                r.upper
            )
        },
        json!({
            "q": params.q(), "dv": params.dv(), "dc": params.dc(),
            "theta": theta, "lower": r.lower, "upper": r.upper, "precision": precision,
        }),
    )
}

fn rate(format: Format, params: CodeParams, k: Option<usize>) -> anyhow::Result<String> {
    let est = RateEstimate::new(params, k);
    let opt = |x: Option<String>| x.unwrap_or_default();
    render(
        format,
        || {
            format!(
                "q,dv,dc,k,r_k,r_limit\n{},{},{},{},{},{}\n",
                params.q(),
                params.dv(),
                params.dc(),
                opt(est.k.map(|k| k.to_string())),
                opt(est.r_k.map(|r| r.to_string())),
                est.r_limit
            )
        },
        json!({
            "q": params.q(), "dv": params.dv(), "dc": params.dc(),
            "k": est.k, "r_k": est.r_k, "r_limit": est.r_limit,
        }),
    )
}

fn infer_boxes(q: usize, rows: Option<usize>, cols: Option<usize>) -> anyhow::Result<(usize, usize)> {
    let root = (1..=q).find(|r| r * r >= q).unwrap_or(1);
    match (rows, cols) {
        (Some(r), Some(c)) => Ok((r, c)),
        (Some(r), None) if r > 0 && q.is_multiple_of(r) => Ok((r, q / r)),
        (None, Some(c)) if c > 0 && q.is_multiple_of(c) => Ok((q / c, c)),
        (None, None) if root * root == q => Ok((root, root)),
        _ => Err(Usage(format!("cannot infer the box shape of a {q}x{q} grid; pass --box-rows and --box-cols")).into()),
    }
}

fn sudoku_solve(
    format: Format,
    path: &PathBuf,
    box_rows: Option<usize>,
    box_cols: Option<usize>,
    max_iters: usize,
) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cells = text.chars().filter(|c| !c.is_whitespace()).count();
    let q = (1..=cells).find(|q| q * q >= cells).unwrap_or(0);
    if q * q != cells || q < 4 {
        return Err(Error::MalformedGrid(format!("{cells} cells is not a square grid")).into());
    }
    let (r, c) = infer_boxes(q, box_rows, box_cols)?;
    if r * c != q {
        return Err(Usage(format!("{r}x{c} boxes do not tile a {q}x{q} grid")).into());
    }
    let graph = build_classic_sudoku(r, c)?;
    let received = parse_grid(&text, q)?;
    let res = decode(&graph, &received, max_iters)?;
    if res.status == DecodeStatus::Contradiction {
        let v = res.contradiction.unwrap_or(0);
        return Err(anyhow!(
            "contradiction: the givens are inconsistent at row {}, column {}",
            v / q + 1,
            v % q + 1
        ));
    }
    let grid = format_grid(&res.decisions(), q);
    let open: Vec<(usize, usize, String)> = res
        .posteriors
        .iter()
        .enumerate()
        .filter(|(_, p)| p.cardinality() > 1)
        .map(|(v, p)| (v / q + 1, v % q + 1, p.to_string()))
        .collect();
    render(
        format,
        || {
            let mut out = format!("status: {}\niterations: {}\n{grid}", res.status, res.iterations);
            if !open.is_empty() {
                out.push_str("candidates:\n");
                for (row, col, set) in &open {
                    out.push_str(&format!("r{row}c{col} {set}\n"));
                }
            }
            out
        },
        json!({
            "status": res.status,
            "iterations": res.iterations,
            "grid": grid.lines().collect::<Vec<_>>(),
            "candidates": open.iter().map(|(row, col, _)| {
                let values: Vec<usize> = res.posteriors[(row - 1) * q + col - 1].iter().collect();
                json!({ "row": row, "col": col, "values": values })
            }).collect::<Vec<_>>(),
        }),
    )
}

fn sudoku_sample(format: Format, box_rows: usize, box_cols: usize, seed: u64) -> anyhow::Result<String> {
    let graph = build_classic_sudoku(box_rows, box_cols)?;
    let cw = sample_codeword(&graph, seed)?;
    let q = graph.params().q();
    let cells: Vec<Option<usize>> = cw.symbols.iter().map(|&x| Some(x)).collect();
    let grid = format_grid(&cells, q);
    render(
        format,
        || grid.clone(),
        json!({ "q": q, "seed": seed, "grid": grid.lines().collect::<Vec<_>>() }),
    )
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let format = cli.format;
    match cli.command {
        Command::Tables { q, node, dv, dc } => tables(format, q, node, dv, dc),
        Command::Threshold { code, precision } => threshold(format, code.params()?, precision),
        Command::De { code, delta, max_iters } => {
            let trace = de_iterate(code.params()?, delta, max_iters, 1e-10)?;
            render(format, || trace.to_csv(), trace.to_json())
        }
        Command::Rate { code, k } => rate(format, code.params()?, k),
        Command::Sim {
            code,
            n,
            deltas,
            trials,
            max_iters,
            source,
            box_rows,
            box_cols,
        } => {
            let mut cfg = match source {
                Source::Classic => SimConfig::classic(box_rows, box_cols, deltas, trials, cli.seed)?,
                _ => SimConfig::new(code.params()?, n, deltas, trials, cli.seed),
            };
            if matches!(source, Source::Regular) {
                cfg.source = GraphSource::Regular;
            }
            cfg.max_iters = max_iters;
            let stats = run_campaign(&cfg)?;
            Ok(match format {
                Format::Csv => stats.to_csv(),
                Format::Json => stats.to_json()? + "\n",
            })
        }
        Command::Sudoku(SudokuCommand::Solve {
            grid,
            box_rows,
            box_cols,
            max_iters,
        }) => sudoku_solve(format, &grid, box_rows, box_cols, max_iters),
        Command::Sudoku(SudokuCommand::Sample { box_rows, box_cols }) => {
            sudoku_sample(format, box_rows, box_cols, cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let result = run(cli).and_then(|text| match &out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
