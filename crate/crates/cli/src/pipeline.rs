//! The shared factorization pipeline: normalize, deduplicate, solve, map
//! indices back to the input matrix, and measure residuals.

use sepnmf_core::matrix::{dedupe_columns, l1_normalize_columns, DenseMatrix};
use sepnmf_core::oracle::{reconstruction_residual, validate_phi2, Phi2Report};
use sepnmf_core::solver::{denormalize, diagonal_gap, run_solver, SolverConfig, SolverError};

use crate::CliError;

/// Everything a report or a verifier needs from one run.
pub struct PipelineOutput {
    /// 1-based anchor indices in the original column numbering.
    pub anchors_one_based: Vec<usize>,
    /// Denormalized weights over all original columns (`|I| x n`), or
    /// `None` when no anchors were identified.
    pub w_orig: Option<DenseMatrix>,
    pub iterations: usize,
    pub converged: bool,
    pub diag_gap: Option<f64>,
    pub phi2: Phi2Report,
    pub reconstruction_normalized: Option<f64>,
    pub reconstruction_denormalized: Option<f64>,
    pub cols_after_dedupe: usize,
}

/// Runs the full pipeline on a raw non-negative matrix.
pub fn factorize_matrix(x: &DenseMatrix, cfg: &SolverConfig) -> Result<PipelineOutput, CliError> {
    let (xn, scales) =
        l1_normalize_columns(x).map_err(|e| CliError::input(format!("normalization: {e}")))?;
    let dedupe = dedupe_columns(&xn, 1e-9);
    let xn_solve = &dedupe.matrix;

    let result = run_solver(xn_solve, cfg).map_err(|e| match e {
        SolverError::InvalidConfig(_) | SolverError::InvalidInput(_) => {
            CliError::input(format!("solver: {e}"))
        }
        other => CliError::input(format!("solver: {other}")),
    })?;

    // Anchor indices back in the original numbering.
    let anchors_orig: Vec<usize> = result.anchors.iter().map(|&i| dedupe.keep[i]).collect();
    let anchors_one_based: Vec<usize> = anchors_orig.iter().map(|&i| i + 1).collect();

    let phi2 = validate_phi2(xn_solve, &result.c_final)
        .map_err(|e| CliError::input(format!("phi2: {e}")))?;

    let (w_orig, rec_norm, rec_denorm) = match &result.w {
        Some(w_dedup) => {
            let rec_norm = reconstruction_residual(xn_solve, &result.anchors, w_dedup)
                .map_err(|e| CliError::input(format!("reconstruction: {e}")))?;

            // Expand weight columns back over duplicates: a dropped column is
            // represented exactly like its retained representative.
            let n = x.cols();
            let mut dedup_pos = vec![usize::MAX; n];
            for (pos, &orig) in dedupe.keep.iter().enumerate() {
                dedup_pos[orig] = pos;
            }
            let mut w_full = DenseMatrix::zeros(w_dedup.rows(), n);
            for j in 0..n {
                let source = match dedup_pos[j] {
                    usize::MAX => dedup_pos[dedupe.dup_map[&j]],
                    pos => pos,
                };
                w_full.col_mut(j).copy_from_slice(w_dedup.col(source));
            }
            let w_orig = denormalize(&anchors_orig, &w_full, &scales)
                .map_err(|e| CliError::input(format!("denormalize: {e}")))?;
            let rec_denorm = reconstruction_residual(x, &anchors_orig, &w_orig)
                .map_err(|e| CliError::input(format!("reconstruction: {e}")))?;
            (Some(w_orig), Some(rec_norm), Some(rec_denorm))
        }
        None => (None, None, None),
    };

    Ok(PipelineOutput {
        anchors_one_based,
        w_orig,
        iterations: result.iterations,
        converged: result.converged,
        diag_gap: diagonal_gap(&result.diag_values, cfg.anchor_tau),
        phi2,
        reconstruction_normalized: rec_norm,
        reconstruction_denormalized: rec_denorm,
        cols_after_dedupe: dedupe.keep.len(),
    })
}

/// Intersection count and false positives against a 1-based truth list.
pub fn score_against_truth(found_one_based: &[usize], truth_one_based: &[usize]) -> (usize, usize) {
    let truth: std::collections::BTreeSet<usize> = truth_one_based.iter().copied().collect();
    let tp = found_one_based.iter().filter(|a| truth.contains(a)).count();
    let fp = found_one_based.len() - tp;
    (tp, fp)
}
