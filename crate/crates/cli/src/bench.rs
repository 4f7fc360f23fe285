//! Benchmark harness: runs selected table rows across a seed range, in
//! parallel worker threads, and summarizes identified-anchor counts against
//! the reference values.

use clap::Args;
use sepnmf_core::datagen::generate_instance;
use sepnmf_core::solver::SolverConfig;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::pipeline::{factorize_matrix, score_against_truth};
use crate::table::{select_rows, BenchRow, ROWS};
use crate::{io, CliError, EXIT_OK};

/// Environment variable supplying the default worker count.
pub const JOBS_ENV: &str = "SEPNMF_JOBS";

#[derive(Args)]
pub struct BenchArgs {
    /// Rows to run: all, small, medium, large, c1..c3, or ids like c3-small
    #[arg(long, default_value = "small")]
    rows: String,
    /// Seeds per row
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Base seed; cell k uses seed base+k
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: SEPNMF_JOBS or the machine's parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Iteration cap per run
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// JSON summary output path
    #[arg(long, default_value = "bench_report.json")]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct CellResult {
    row: &'static str,
    seed: u64,
    hits: usize,
    false_positives: usize,
    found: usize,
    converged: bool,
    iterations: usize,
    wall_ms: u64,
}

#[derive(Debug, Serialize)]
struct RowSummary {
    id: &'static str,
    dims: String,
    r: usize,
    regime: String,
    epsilon: f64,
    runs: usize,
    median_hits: f64,
    worst_hits: usize,
    max_false_positives: usize,
    converged_runs: usize,
    median_wall_ms: u64,
    reference_hits: usize,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    rows_filter: String,
    seeds: usize,
    base_seed: u64,
    summaries: Vec<RowSummary>,
    cells: Vec<CellResult>,
}

fn run_cell(row: &BenchRow, seed: u64, max_iters: usize) -> Result<CellResult, CliError> {
    let started = Instant::now();
    let instance = generate_instance(row.m, row.n, row.r, row.regime, seed)
        .map_err(|e| CliError::input(format!("{}: generation: {e}", row.id)))?;
    let cfg = SolverConfig {
        epsilon: row.epsilon,
        max_iters,
        seed,
        ..SolverConfig::default()
    };
    let out = factorize_matrix(&instance.x_orig, &cfg)?;
    let truth: Vec<usize> = instance.true_anchors.iter().map(|&i| i + 1).collect();
    let (hits, false_positives) = score_against_truth(&out.anchors_one_based, &truth);
    Ok(CellResult {
        row: row.id,
        seed,
        hits,
        false_positives,
        found: out.anchors_one_based.len(),
        converged: out.converged,
        iterations: out.iterations,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<u8, CliError> {
    if args.seeds == 0 {
        return Err(CliError::input("--seeds must be at least 1"));
    }
    let row_indices = select_rows(&args.rows).map_err(CliError::input)?;
    let jobs = args
        .jobs
        .or_else(|| {
            std::env::var(JOBS_ENV)
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
        })
        .filter(|&j| j >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        });

    // Each (row, seed) cell is an isolated deterministic run; the worker
    // pool only affects wall time, never results.
    let tasks: Vec<(usize, u64)> = row_indices
        .iter()
        .flat_map(|&ri| (0..args.seeds).map(move |k| (ri, args.seed + k as u64)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CellResult, CliError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= tasks.len() {
                    break;
                }
                let (ri, seed) = tasks[idx];
                let cell = run_cell(&ROWS[ri], seed, args.max_iters);
                results.lock().expect("worker poisoned the results lock")[idx] = Some(cell);
            });
        }
    });

    let collected = results.into_inner().expect("results lock");
    let mut cells = Vec::with_capacity(tasks.len());
    for slot in collected {
        cells.push(slot.expect("every task ran")?);
    }

    let mut summaries = Vec::new();
    println!(
        "{:<10} {:>9} {:>5} {:>7} {:>6} {:>7} {:>6} {:>7} {:>7} {:>9} {:>9}",
        "row", "dims", "r", "eps", "seeds", "median", "worst", "max_fp", "conv", "med_ms", "reference"
    );
    for &ri in &row_indices {
        let row = &ROWS[ri];
        let row_cells: Vec<&CellResult> = cells.iter().filter(|c| c.row == row.id).collect();
        let median_hits = median_of(row_cells.iter().map(|c| c.hits as f64).collect());
        let worst_hits = row_cells.iter().map(|c| c.hits).min().unwrap_or(0);
        let max_fp = row_cells
            .iter()
            .map(|c| c.false_positives)
            .max()
            .unwrap_or(0);
        let converged_runs = row_cells.iter().filter(|c| c.converged).count();
        let median_wall = median_of(row_cells.iter().map(|c| c.wall_ms as f64).collect()) as u64;
        println!(
            "{:<10} {:>9} {:>5} {:>7.0e} {:>6} {:>6.1} {:>6} {:>7} {:>5}/{} {:>9} {:>6}/{}",
            row.id,
            format!("{}x{}", row.m, row.n),
            row.r,
            row.epsilon,
            row_cells.len(),
            median_hits,
            worst_hits,
            max_fp,
            converged_runs,
            row_cells.len(),
            median_wall,
            row.reference_hits,
            row.r,
        );
        summaries.push(RowSummary {
            id: row.id,
            dims: format!("{}x{}", row.m, row.n),
            r: row.r,
            regime: row.regime.to_string(),
            epsilon: row.epsilon,
            runs: row_cells.len(),
            median_hits,
            worst_hits,
            max_false_positives: max_fp,
            converged_runs,
            median_wall_ms: median_wall,
            reference_hits: row.reference_hits,
        });
    }

    let report = BenchReport {
        rows_filter: args.rows.clone(),
        seeds: args.seeds,
        base_seed: args.seed,
        summaries,
        cells,
    };
    io::write_json(&args.out, &report)?;
    println!("wrote {}", args.out.display());
    Ok(EXIT_OK)
}
