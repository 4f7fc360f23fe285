//! Command-line interface: generate synthetic instances, factorize matrix
//! CSVs, verify reports, and run the built-in benchmark table.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 solver hit the iteration cap without converging.

mod bench;
mod io;
mod pipeline;
mod report;
mod table;

use clap::{Args, Parser, Subcommand};
use sepnmf_core::datagen::{generate_instance, DatagenError, Regime};
use sepnmf_core::oracle::{brute_force_extreme_rays, DEFAULT_EXTREMALITY_TOL};
use sepnmf_core::solver::{SolverConfig, DEFAULT_RIDGE_DELTA};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use report::{Accuracy, ConfigEcho, InstanceEcho, Residuals, RunReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Parser)]
#[command(
    name = "sepnmf",
    version,
    about = "Separable non-negative matrix factorization: anchor identification without knowing the rank"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance with planted anchors
    Generate(GenerateArgs),
    /// Identify anchors and weights in a matrix CSV
    Factorize(FactorizeArgs),
    /// Re-run a report's configuration and check its claims
    Verify(VerifyArgs),
    /// Run the built-in benchmark rows
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of rows
    #[arg(long)]
    m: usize,
    /// Number of columns
    #[arg(long)]
    n: usize,
    /// Number of planted extreme rays
    #[arg(long)]
    r: usize,
    /// Dimension regime: c1, c2 or c3
    #[arg(long)]
    regime: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle columns with this seed, remapping the ground truth
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Output directory (receives X.csv and meta.json)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverFlags {
    /// Stopping threshold on successive iterates
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    /// Proximal step constant
    #[arg(long = "t", default_value_t = 100.0)]
    step_t: f64,
    /// Ridge for the Gram kernels
    #[arg(long = "delta", default_value_t = DEFAULT_RIDGE_DELTA)]
    ridge_delta: f64,
    /// Anchor acceptance tolerance on the diagonal
    #[arg(long = "tau", default_value_t = 0.05)]
    anchor_tau: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Seed of the random price vector
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverFlags {
    fn to_config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            step_t: self.step_t,
            ridge_delta: self.ridge_delta,
            anchor_tau: self.anchor_tau,
            max_iters: self.max_iters,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct FactorizeArgs {
    /// Input matrix CSV
    #[arg(long)]
    matrix: PathBuf,
    /// Optional instance metadata with ground truth
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Output directory (receives report.json, anchors.txt, W.csv)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write wall_time_ms as 0 so reruns are byte-identical
    #[arg(long)]
    reproducible: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input matrix CSV
    #[arg(long)]
    matrix: PathBuf,
    /// Report produced by factorize
    #[arg(long)]
    report: PathBuf,
    /// Optional instance metadata with ground truth
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Also compare against the brute-force oracle (size-gated)
    #[arg(long)]
    oracle: bool,
    /// Column-count gate above which the oracle check is skipped
    #[arg(long, default_value_t = 200)]
    oracle_max_n: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Factorize(args) => cmd_factorize(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Bench(args) => bench::cmd_bench(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8, CliError> {
    let regime: Regime = args.regime.parse().map_err(CliError::input)?;
    let instance =
        generate_instance(args.m, args.n, args.r, regime, args.seed).map_err(|e| match e {
            DatagenError::GenerationFailure { .. } => CliError {
                code: EXIT_INPUT,
                message: format!("{e}"),
            },
            other => CliError::input(format!("{other}")),
        })?;
    let instance = match args.shuffle_seed {
        Some(s) => instance.shuffled(s),
        None => instance,
    };
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::input(format!("create {}: {e}", args.out.display())))?;
    io::write_matrix_csv(&args.out.join("X.csv"), &instance.x_orig)?;
    let meta = io::InstanceMeta {
        m: instance.m,
        n: instance.n,
        r: instance.r,
        regime: instance.regime.to_string(),
        seed: instance.seed,
        shuffle_seed: args.shuffle_seed,
        true_anchors: instance.true_anchors.iter().map(|&i| i + 1).collect(),
    };
    io::write_json(&args.out.join("meta.json"), &meta)?;
    println!(
        "generated {}x{} {} instance with {} anchors -> {}",
        instance.m,
        instance.n,
        instance.regime,
        instance.r,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_factorize(args: &FactorizeArgs) -> Result<u8, CliError> {
    let cfg = args.solver.to_config();
    cfg.validate()
        .map_err(|e| CliError::input(format!("{e}")))?;
    let x = io::read_matrix_csv(&args.matrix)?;
    let meta: Option<io::InstanceMeta> = match &args.meta {
        Some(path) => Some(io::read_json(path)?),
        None => None,
    };

    let started = Instant::now();
    let out = pipeline::factorize_matrix(&x, &cfg)?;
    let wall_time_ms = if args.reproducible {
        0
    } else {
        started.elapsed().as_millis() as u64
    };

    let (anchors_true, accuracy, false_positives) = match &meta {
        Some(meta) => {
            let (tp, fp) =
                pipeline::score_against_truth(&out.anchors_one_based, &meta.true_anchors);
            (
                Some(meta.true_anchors.clone()),
                Some(Accuracy {
                    true_positives: tp,
                    r: meta.r,
                }),
                Some(fp),
            )
        }
        None => (None, None, None),
    };

    let report = RunReport {
        config: ConfigEcho {
            epsilon: cfg.epsilon,
            step_t: cfg.step_t,
            ridge_delta: cfg.ridge_delta,
            anchor_tau: cfg.anchor_tau,
            max_iters: cfg.max_iters,
            seed: cfg.seed,
        },
        instance: InstanceEcho {
            matrix_path: args.matrix.display().to_string(),
            rows: x.rows(),
            cols: x.cols(),
            cols_after_dedupe: out.cols_after_dedupe,
            regime: meta.as_ref().map(|m| m.regime.clone()),
            r: meta.as_ref().map(|m| m.r),
            instance_seed: meta.as_ref().map(|m| m.seed),
        },
        anchors_found: out.anchors_one_based.clone(),
        anchors_true,
        accuracy,
        false_positives,
        iterations: out.iterations,
        converged: out.converged,
        diag_gap: out.diag_gap,
        residuals: Residuals {
            phi2_equality: out.phi2.max_equality_violation,
            phi2_column_sum: out.phi2.max_column_sum_violation,
            phi2_min_entry: out.phi2.min_entry,
            reconstruction_normalized: out.reconstruction_normalized,
            reconstruction_denormalized: out.reconstruction_denormalized,
        },
        wall_time_ms,
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::input(format!("create {}: {e}", args.out.display())))?;
    io::write_json(&args.out.join("report.json"), &report)?;
    io::write_anchors(&args.out.join("anchors.txt"), &out.anchors_one_based)?;
    if let Some(w) = &out.w_orig {
        io::write_matrix_csv(&args.out.join("W.csv"), w)?;
    }

    println!(
        "{} anchors in {} iterations ({}) -> {}",
        out.anchors_one_based.len(),
        out.iterations,
        if out.converged {
            "converged"
        } else {
            "iteration cap reached"
        },
        args.out.display()
    );
    Ok(if out.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let x = io::read_matrix_csv(&args.matrix)?;
    let report: RunReport = io::read_json(&args.report)?;
    let meta: Option<io::InstanceMeta> = match &args.meta {
        Some(path) => Some(io::read_json(path)?),
        None => None,
    };

    let cfg = SolverConfig {
        epsilon: report.config.epsilon,
        step_t: report.config.step_t,
        ridge_delta: report.config.ridge_delta,
        anchor_tau: report.config.anchor_tau,
        max_iters: report.config.max_iters,
        seed: report.config.seed,
    };
    cfg.validate()
        .map_err(|e| CliError::input(format!("report config: {e}")))?;
    let out = pipeline::factorize_matrix(&x, &cfg)?;

    let mut all_pass = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!(
            "check {name}: {} ({detail})",
            if pass { "pass" } else { "FAIL" }
        );
        all_pass &= pass;
    };

    check(
        "anchors-reproduced",
        out.anchors_one_based == report.anchors_found,
        format!(
            "recomputed {} anchors vs reported {}",
            out.anchors_one_based.len(),
            report.anchors_found.len()
        ),
    );
    check(
        "converged-flag",
        out.converged == report.converged,
        format!(
            "recomputed {} vs reported {}",
            out.converged, report.converged
        ),
    );

    if out.converged {
        let eta = 10.0 * cfg.epsilon;
        check(
            "phi2-feasibility",
            out.phi2.feasible_at(eta),
            format!(
                "equality {:.3e}, column-sum {:.3e}, min {:.3e}, eta {eta:.1e}",
                out.phi2.max_equality_violation,
                out.phi2.max_column_sum_violation,
                out.phi2.min_entry
            ),
        );
        match (
            out.reconstruction_normalized,
            out.reconstruction_denormalized,
        ) {
            (Some(rn), Some(rd)) => {
                check(
                    "reconstruction-normalized",
                    rn <= 1e-4,
                    format!("{rn:.3e} vs 1e-4"),
                );
                check(
                    "reconstruction-denormalized",
                    rd <= 1e-6,
                    format!("{rd:.3e} vs 1e-6"),
                );
            }
            _ => check(
                "reconstruction-normalized",
                false,
                "no anchors found".into(),
            ),
        }
    } else {
        println!("check phi2-feasibility: skipped (run did not converge)");
        println!("check reconstruction-normalized: skipped (run did not converge)");
    }

    if let Some(meta) = &meta {
        check(
            "ground-truth",
            out.anchors_one_based == meta.true_anchors,
            format!(
                "found {} anchors vs truth of {}",
                out.anchors_one_based.len(),
                meta.true_anchors.len()
            ),
        );
    }

    if args.oracle {
        if out.cols_after_dedupe <= args.oracle_max_n {
            // The oracle works on the deduplicated normalized matrix; map its
            // answers back to original column numbers for the comparison.
            let (xn, _) = sepnmf_core::matrix::l1_normalize_columns(&x)
                .map_err(|e| CliError::input(format!("normalization: {e}")))?;
            let dedupe = sepnmf_core::matrix::dedupe_columns(&xn, 1e-9);
            let oracle_set: Vec<usize> =
                brute_force_extreme_rays(&dedupe.matrix, DEFAULT_EXTREMALITY_TOL)
                    .iter()
                    .map(|&i| dedupe.keep[i] + 1)
                    .collect();
            check(
                "oracle-agreement",
                oracle_set == out.anchors_one_based,
                format!("oracle found {} extreme columns", oracle_set.len()),
            );
        } else {
            println!(
                "check oracle-agreement: skipped (n={} exceeds --oracle-max-n {})",
                out.cols_after_dedupe, args.oracle_max_n
            );
        }
    }

    Ok(if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}
