//! Anchor identification for exactly separable non-negative matrix
//! factorization.
//!
//! Under separability every column of a non-negative data matrix lies in the
//! cone generated by a small subset of the columns themselves (the anchors).
//! This crate identifies that subset without being told its size: a random
//! price vector turns anchor identification into a linear program over
//! localizing matrices, solved by a proximal point iteration whose converged
//! diagonal is near-binary, and the weight matrix falls out of the anchor
//! rows.
//!
//! Modules:
//! - [`matrix`]: column-major dense matrices and kernels.
//! - [`gram`]: the ridged Gram factorization with reusable solves.
//! - [`range`]: row space orthonormal basis backing the equality projector.
//! - [`solver`]: the proximal point iteration, anchor and weight extraction.
//! - [`oracle`]: independent ground truth via non-negative least squares.
//! - [`datagen`]: seeded synthetic instance generation for regimes C1-C3.

pub mod datagen;
pub mod gram;
pub mod matrix;
pub mod oracle;
pub mod range;
pub mod solver;

pub use gram::GramSolveHandle;
pub use matrix::{
    dedupe_columns, frobenius_distance, l1_normalize_columns, pos_project, ColumnScales,
    DedupeResult, DenseMatrix, MatrixError,
};
pub use solver::{
    build_augmented, denormalize, diagonal_gap, extract_anchors, extract_weights,
    generate_price_vector, prox_step, run_solver, FactorizationResult, ProxContext, SolverConfig,
    SolverError, SolverState,
};
