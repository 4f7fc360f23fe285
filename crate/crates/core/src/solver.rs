//! Proximal point solver for the anchor-identification LP.
//!
//! The LP minimizes `pᵀ diag(C)` over the polytope `{C : AC = A, C >= 0}`
//! with `A` the column-normalized data matrix augmented by a row of ones.
//! Anchor columns are read off the diagonal of the converged iterate:
//! entries near one mark columns no other column can represent.
//!
//! The iteration is a proximal-point splitting (consensus ADMM) of the two
//! constraint sets. Each step solves the price-shifted proximal subproblem
//! over the equality set in closed form, projects onto the non-negative
//! orthant with `pos(·)`, and advances the scaled dual by the consensus
//! residual. Both constraint sets are handled exactly every iteration, so
//! the scheme converges to the true LP optimum for any positive step
//! constant, and the anchor set it finds is the combinatorial one the
//! brute-force oracle certifies.
//!
//! Two structural facts shape the implementation. The equality set
//! `{Y : AY = A}` contains `E = I` and its direction space is the null
//! space of `A`, so projecting onto it costs one application of the row
//! space projector: `proj(V) = V - Π (V - E)`. And for exactly separable
//! data the row space of `A` has dimension equal to the anchor count `r`,
//! far below `n`, so `Π` is applied through a rank-`r` orthonormal basis
//! built once per run rather than through a dense inverse; a Gram inverse
//! `(AᵀA)⁻¹` does not exist here because `AᵀA` is always rank-deficient
//! for separable data.

use crate::matrix::{frobenius_distance, ColumnScales, DenseMatrix, MatrixError};
use crate::range::RangeBasis;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Tolerance used to check that the input matrix is column-normalized.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Over-relaxation factor of the splitting update.
const RELAXATION: f64 = 1.6;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// A configuration field violates its range.
    InvalidConfig(String),
    /// The input matrix is not column-normalized or contains negatives.
    InvalidInput(String),
    /// The iteration produced NaN or infinity; raise `step_t` so the price
    /// displacement `diag(p)/t` stays finite, or rescale the input.
    NonFiniteState { iteration: usize },
    /// Weight extraction requires at least one anchor.
    EmptyAnchorSet,
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    Matrix(MatrixError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidConfig(msg) => write!(f, "invalid solver config: {msg}"),
            SolverError::InvalidInput(msg) => write!(f, "invalid solver input: {msg}"),
            SolverError::NonFiniteState { iteration } => write!(
                f,
                "solver state became non-finite at iteration {iteration}"
            ),
            SolverError::EmptyAnchorSet => write!(f, "anchor set is empty"),
            SolverError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            SolverError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<MatrixError> for SolverError {
    fn from(e: MatrixError) -> Self {
        SolverError::Matrix(e)
    }
}

/// Solver parameters. The factorization rank is deliberately absent: the
/// anchor count is an output, never an input.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stopping threshold on the Frobenius norm of successive iterates.
    pub epsilon: f64,
    /// Constant proximal step; the price enters each subproblem scaled by
    /// `1/t`, so `t` trades per-iteration objective pressure against
    /// constraint tracking. The optimum reached does not depend on it.
    pub step_t: f64,
    /// Ridge for the Gram kernels ([`crate::gram::GramSolveHandle`]); kept
    /// in the config so runs echo the full numerical setup.
    pub ridge_delta: f64,
    /// Diagonal entries `>= 1 - anchor_tau` are accepted as anchors.
    pub anchor_tau: f64,
    pub max_iters: usize,
    /// Seed for the random price vector.
    pub seed: u64,
}

/// Default Gram ridge.
pub const DEFAULT_RIDGE_DELTA: f64 = 1e-8;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            step_t: 100.0,
            ridge_delta: DEFAULT_RIDGE_DELTA,
            anchor_tau: 0.05,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(SolverError::InvalidConfig("epsilon must be positive".into()));
        }
        if !(self.step_t > 0.0 && self.step_t.is_finite()) {
            return Err(SolverError::InvalidConfig("step_t must be positive".into()));
        }
        if !(self.ridge_delta >= 0.0 && self.ridge_delta.is_finite()) {
            return Err(SolverError::InvalidConfig(
                "ridge_delta must be non-negative".into(),
            ));
        }
        if !(self.anchor_tau > 0.0 && self.anchor_tau < 0.5) {
            return Err(SolverError::InvalidConfig(
                "anchor_tau must lie strictly between 0 and 0.5".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iterate of the proximal point loop.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Localizing matrix, `n x n`; non-negative after each full iteration.
    pub c: DenseMatrix,
    /// Equality-feasible iterate (`AY = A` holds exactly), `n x n`.
    pub y: DenseMatrix,
    /// Scaled dual multiplier of the consensus constraint, `n x n`.
    pub u: DenseMatrix,
    pub iter: usize,
    pub last_step_norm: f64,
    /// `||Y - C||_F` after the update; the iterate only counts as converged
    /// once this, too, is below the threshold. The step norm alone goes
    /// quiet on metastable plateaus where the dual is still integrating a
    /// visible feasibility gap.
    pub consensus_gap: f64,
}

impl SolverState {
    /// Zero-initialized state (`C⁰ = 0`, duals zero).
    pub fn initial(n: usize) -> Self {
        Self {
            c: DenseMatrix::zeros(n, n),
            y: DenseMatrix::zeros(n, n),
            u: DenseMatrix::zeros(n, n),
            iter: 0,
            last_step_norm: f64::INFINITY,
            consensus_gap: f64::INFINITY,
        }
    }
}

/// Everything constant across iterations: the augmented matrix, the row
/// space basis backing the equality projector, the price vector and step.
#[derive(Debug, Clone)]
pub struct ProxContext {
    a: DenseMatrix,
    basis: RangeBasis,
    price: Vec<f64>,
    step_t: f64,
}

impl ProxContext {
    /// Builds the iteration context for a column-normalized matrix.
    pub fn new(xn: &DenseMatrix, cfg: &SolverConfig) -> Result<Self, SolverError> {
        let a = build_augmented(xn);
        let basis = RangeBasis::of_row_space(&a);
        let price = generate_price_vector(xn.cols(), cfg.seed);
        Ok(Self {
            a,
            basis,
            price,
            step_t: cfg.step_t,
        })
    }

    pub fn augmented(&self) -> &DenseMatrix {
        &self.a
    }

    /// Numerical rank of the augmented matrix; equals the anchor count on
    /// exactly separable inputs.
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    /// Projection of every column of `v` onto the affine set `{Y : AY = A}`:
    /// `v - Π (v - E)` with `Π` the row space projector and `E` the identity.
    fn project_equality(&self, v: &DenseMatrix) -> DenseMatrix {
        let n = v.cols();
        let mut shifted = v.clone();
        for j in 0..n {
            let d = shifted.get(j, j) - 1.0;
            shifted.set(j, j, d);
        }
        let projected = self.basis.project_columns(&shifted);
        let data: Vec<f64> = v
            .data()
            .iter()
            .zip(projected.data())
            .map(|(&vv, &pv)| vv - pv)
            .collect();
        DenseMatrix::from_vec_unchecked(n, n, data)
    }
}

/// Stacks a row of ones under the normalized matrix.
pub fn build_augmented(xn: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (xn.rows(), xn.cols());
    let mut a = DenseMatrix::zeros(m + 1, n);
    for j in 0..n {
        let src = xn.col(j);
        let dst = a.col_mut(j);
        dst[..m].copy_from_slice(src);
        dst[m] = 1.0;
    }
    a
}

/// Random price vector with strictly positive, pairwise-distinct entries.
///
/// Entries are uniform on (0.5, 1.5); the whole vector is redrawn in the
/// astronomically unlikely event of a collision. Reproducible from the seed.
pub fn generate_price_vector(n: usize, seed: u64) -> Vec<f64> {
    assert!(n >= 1, "price vector length must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p: Vec<f64> = (0..n).map(|_| 1.5 - rng.gen_range(0.0..1.0)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
        let distinct = order.windows(2).all(|w| p[w[0]] != p[w[1]]);
        if distinct {
            return p;
        }
    }
}

/// One proximal point iteration:
/// (a) price-shifted proximal subproblem over the equality set, in closed
///     form through the row space projector;
/// (b) `pos(·)` projection onto the non-negative orthant;
/// (c) scaled dual ascent by the consensus residual;
/// (d) step norm bookkeeping.
pub fn prox_step(state: &SolverState, ctx: &ProxContext) -> Result<SolverState, SolverError> {
    let n = ctx.a.cols();
    for mat in [&state.c, &state.u] {
        if mat.rows() != n || mat.cols() != n {
            return Err(SolverError::DimensionMismatch {
                expected: (n, n),
                got: (mat.rows(), mat.cols()),
            });
        }
    }
    let inv_t = 1.0 / ctx.step_t;

    // (a) Y = argmin_{AY=A} pᵀdiag(Y) + (t/2) ||Y - Cᵏ + Uᵏ||²
    //       = proj_eq(Cᵏ - Uᵏ - diag(p)/t)
    let mut v_data: Vec<f64> = state
        .c
        .data()
        .iter()
        .zip(state.u.data())
        .map(|(&c, &u)| c - u)
        .collect();
    for j in 0..n {
        v_data[j * n + j] -= inv_t * ctx.price[j];
    }
    let v = DenseMatrix::from_vec_unchecked(n, n, v_data);
    let y = ctx.project_equality(&v);
    if !y.is_finite() {
        return Err(SolverError::NonFiniteState {
            iteration: state.iter + 1,
        });
    }

    // (b) C = pos(Ŷ + U) with the over-relaxed point Ŷ = αY + (1-α)Cᵏ;
    // (c) U += Ŷ - C. Relaxation shortens the dual's plateau crawls.
    let mut c_data = Vec::with_capacity(n * n);
    let mut u_data = Vec::with_capacity(n * n);
    let mut gap_sq = 0.0;
    for ((&yv, &uv), &cv) in y.data().iter().zip(state.u.data()).zip(state.c.data()) {
        let relaxed = RELAXATION * yv + (1.0 - RELAXATION) * cv;
        let s = relaxed + uv;
        let c = if s > 0.0 { s } else { 0.0 };
        c_data.push(c);
        u_data.push(s - c);
        let d = yv - c;
        gap_sq += d * d;
    }
    let c_next = DenseMatrix::from_vec_unchecked(n, n, c_data);
    let u_next = DenseMatrix::from_vec_unchecked(n, n, u_data);
    if !u_next.is_finite() {
        return Err(SolverError::NonFiniteState {
            iteration: state.iter + 1,
        });
    }

    // (d)
    let last_step_norm = frobenius_distance(&c_next, &state.c)?;
    Ok(SolverState {
        c: c_next,
        y,
        u: u_next,
        iter: state.iter + 1,
        last_step_norm,
        consensus_gap: gap_sq.sqrt(),
    })
}

/// Result of a full solver run.
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    /// Anchor column indices, 0-based, ascending.
    pub anchors: Vec<usize>,
    pub c_final: DenseMatrix,
    /// Weight matrix over the anchor basis (`|I| x n`); `None` when no
    /// anchors were identified. Computed by non-negative regression of
    /// every column onto the anchor columns: the LP pins only the diagonal
    /// of `C`, so its off-diagonal mass may route representations through
    /// non-anchor columns, and the direct row slice `C(I,:)` then fails to
    /// reconstruct. Anchor columns carry exact unit vectors.
    pub w: Option<DenseMatrix>,
    pub iterations: usize,
    pub converged: bool,
    pub last_step_norm: f64,
    /// Diagonal of `c_final`, for diagnostics and gap reporting.
    pub diag_values: Vec<f64>,
}

/// Runs the proximal point iteration from the zero state until the step norm
/// drops below `epsilon` or `max_iters` is exhausted, then extracts anchors
/// and weights.
///
/// Expects a column-normalized, duplicate-free matrix; run
/// [`crate::matrix::l1_normalize_columns`] and
/// [`crate::matrix::dedupe_columns`] first.
pub fn run_solver(
    xn: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<FactorizationResult, SolverError> {
    cfg.validate()?;
    validate_normalized(xn)?;

    let ctx = ProxContext::new(xn, cfg)?;
    let mut state = SolverState::initial(xn.cols());
    let mut converged = false;
    while state.iter < cfg.max_iters {
        state = prox_step(&state, &ctx)?;
        // Both the iterate movement and the consensus gap must be quiet;
        // the gap bounds the equality residual of C itself via ||A||.
        if state.last_step_norm <= cfg.epsilon && state.consensus_gap <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    let diag_values = state.c.diagonal();
    let anchors = extract_anchors(&state.c, cfg.anchor_tau);
    let w = if anchors.is_empty() {
        None
    } else {
        Some(anchor_weights(xn, &anchors))
    };
    Ok(FactorizationResult {
        anchors,
        c_final: state.c,
        w,
        iterations: state.iter,
        converged,
        last_step_norm: state.last_step_norm,
        diag_values,
    })
}

/// Non-negative weights of every column over the anchor basis. Anchor
/// columns represent themselves exactly.
fn anchor_weights(xn: &DenseMatrix, anchors: &[usize]) -> DenseMatrix {
    let basis = xn.columns_subset(anchors);
    let mut in_basis = vec![usize::MAX; xn.cols()];
    for (k, &a) in anchors.iter().enumerate() {
        in_basis[a] = k;
    }
    let mut w = DenseMatrix::zeros(anchors.len(), xn.cols());
    for (j, &basis_pos) in in_basis.iter().enumerate() {
        if basis_pos != usize::MAX {
            w.set(basis_pos, j, 1.0);
            continue;
        }
        let (coeffs, _residual) = crate::oracle::nnls(&basis, xn.col(j), 1e-10);
        w.col_mut(j).copy_from_slice(&coeffs);
    }
    w
}

fn validate_normalized(xn: &DenseMatrix) -> Result<(), SolverError> {
    for j in 0..xn.cols() {
        let mut sum = 0.0;
        for (i, &v) in xn.col(j).iter().enumerate() {
            if v < 0.0 {
                return Err(SolverError::InvalidInput(format!(
                    "negative entry at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(SolverError::InvalidInput(format!(
                "column {} sums to {sum}, expected 1 within {NORMALIZATION_TOL}",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Indices whose diagonal entry reaches `1 - tau`, ascending.
pub fn extract_anchors(c: &DenseMatrix, tau: f64) -> Vec<usize> {
    c.diagonal()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= 1.0 - tau)
        .map(|(i, _)| i)
        .collect()
}

/// Rows of `C` indexed by the anchor set: the weight matrix `W`.
pub fn extract_weights(
    c: &DenseMatrix,
    anchors: &[usize],
) -> Result<DenseMatrix, SolverError> {
    if anchors.is_empty() {
        return Err(SolverError::EmptyAnchorSet);
    }
    if let Some(&bad) = anchors.iter().find(|&&i| i >= c.rows()) {
        return Err(SolverError::DimensionMismatch {
            expected: (c.rows(), c.cols()),
            got: (bad + 1, c.cols()),
        });
    }
    Ok(c.rows_subset(anchors))
}

/// Maps weights computed on the normalized matrix back to the original
/// column scales: `W_orig(k, j) = W(k, j) * s[j] / s[anchors[k]]`.
pub fn denormalize(
    anchors: &[usize],
    w: &DenseMatrix,
    scales: &ColumnScales,
) -> Result<DenseMatrix, SolverError> {
    if anchors.len() != w.rows() || scales.len() != w.cols() {
        return Err(SolverError::DimensionMismatch {
            expected: (anchors.len(), scales.len()),
            got: (w.rows(), w.cols()),
        });
    }
    if let Some(&bad) = anchors.iter().find(|&&i| i >= scales.len()) {
        return Err(SolverError::DimensionMismatch {
            expected: (scales.len(), 1),
            got: (bad + 1, 1),
        });
    }
    let mut out = w.clone();
    for j in 0..w.cols() {
        let sj = scales.get(j);
        let col = out.col_mut(j);
        for (k, &anchor) in anchors.iter().enumerate() {
            col[k] *= sj / scales.get(anchor);
        }
    }
    Ok(out)
}

/// Smallest accepted diagonal minus largest rejected diagonal at threshold
/// `1 - tau`; `None` when either side is empty. A healthy exact-instance run
/// shows a gap well above 0.5.
pub fn diagonal_gap(diag: &[f64], tau: f64) -> Option<f64> {
    let threshold = 1.0 - tau;
    let mut min_accepted = f64::INFINITY;
    let mut max_rejected = f64::NEG_INFINITY;
    let mut any_accepted = false;
    let mut any_rejected = false;
    for &v in diag {
        if v >= threshold {
            any_accepted = true;
            min_accepted = min_accepted.min(v);
        } else {
            any_rejected = true;
            max_rejected = max_rejected.max(v);
        }
    }
    if any_accepted && any_rejected {
        Some(min_accepted - max_rejected)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::l1_normalize_columns;

    fn midpoint_instance() -> DenseMatrix {
        // Columns e1, e2, and their midpoint; the midpoint is the only
        // non-anchor and its weights are forced to (1/2, 1/2).
        DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap()
    }

    #[test]
    fn build_augmented_identity() {
        let a = build_augmented(&DenseMatrix::identity(2));
        assert_eq!(a.rows(), 3);
        assert_eq!(a.col(0), &[1.0, 0.0, 1.0]);
        assert_eq!(a.col(1), &[0.0, 1.0, 1.0]);
        // Each augmented column sums to 2: normalized column plus the one.
        for j in 0..2 {
            assert_eq!(a.col(j).iter().sum::<f64>(), 2.0);
        }
    }

    #[test]
    fn price_vector_reproducible_and_distinct() {
        let p1 = generate_price_vector(10_000, 42);
        let p2 = generate_price_vector(10_000, 42);
        assert_eq!(p1, p2);
        assert!(p1.iter().all(|&v| v > 0.0));
        let mut sorted = p1.clone();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted.windows(2).all(|w| w[0] != w[1]));
        let p3 = generate_price_vector(10_000, 43);
        assert_ne!(p1, p3);
    }

    #[test]
    fn price_vector_single_entry() {
        let p = generate_price_vector(1, 0);
        assert_eq!(p.len(), 1);
        assert!(p[0] > 0.0);
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.epsilon = 0.0;
        assert!(matches!(bad.validate(), Err(SolverError::InvalidConfig(_))));
        let mut bad = ok.clone();
        bad.anchor_tau = 0.5;
        assert!(matches!(bad.validate(), Err(SolverError::InvalidConfig(_))));
        let mut bad = ok.clone();
        bad.max_iters = 0;
        assert!(matches!(bad.validate(), Err(SolverError::InvalidConfig(_))));
        let mut bad = ok;
        bad.step_t = -1.0;
        assert!(matches!(bad.validate(), Err(SolverError::InvalidConfig(_))));
    }

    #[test]
    fn rejects_unnormalized_input() {
        let x = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let err = run_solver(&x, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, SolverError::InvalidInput(_)));
    }

    #[test]
    fn equality_projection_is_exact_each_iteration() {
        let (xn, _) = l1_normalize_columns(&midpoint_instance()).unwrap();
        let cfg = SolverConfig::default();
        let ctx = ProxContext::new(&xn, &cfg).unwrap();
        let mut state = SolverState::initial(3);
        for _ in 0..5 {
            state = prox_step(&state, &ctx).unwrap();
            let ay = ctx.augmented().mul(&state.y).unwrap();
            let dist = frobenius_distance(&ay, ctx.augmented()).unwrap();
            assert!(dist < 1e-12, "AY != A: {dist}");
            // C stays non-negative post-projection.
            assert!(state.c.min_entry() >= 0.0);
        }
    }

    #[test]
    fn identity_two_columns_forces_identity_c() {
        // XC = X with X invertible forces C = I, the singleton of the polytope.
        let xn = DenseMatrix::identity(2);
        let res = run_solver(&xn, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.anchors, vec![0, 1]);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (res.c_final.get(i, j) - want).abs() < 1e-3,
                    "C({i},{j}) = {}",
                    res.c_final.get(i, j)
                );
            }
        }
    }

    #[test]
    fn identity_three_columns() {
        let res = run_solver(&DenseMatrix::identity(3), &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.anchors, vec![0, 1, 2]);
        let w = res.w.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((w.get(i, j) - want).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn midpoint_column_gets_half_half_weights() {
        let (xn, _) = l1_normalize_columns(&midpoint_instance()).unwrap();
        let res = run_solver(&xn, &SolverConfig::default()).unwrap();
        assert!(res.converged, "did not converge: step {}", res.last_step_norm);
        assert_eq!(res.anchors, vec![0, 1]);
        let w = res.w.unwrap();
        assert!((w.get(0, 2) - 0.5).abs() < 1e-3, "w(0,2) = {}", w.get(0, 2));
        assert!((w.get(1, 2) - 0.5).abs() < 1e-3, "w(1,2) = {}", w.get(1, 2));
        // Diagonal dichotomy on the toy: diag ~ (1, 1, 0).
        assert!(res.diag_values[0] > 0.95);
        assert!(res.diag_values[1] > 0.95);
        assert!(res.diag_values[2] < 0.05);
    }

    #[test]
    fn converged_run_is_feasible() {
        let (xn, _) = l1_normalize_columns(&midpoint_instance()).unwrap();
        let cfg = SolverConfig::default();
        let res = run_solver(&xn, &cfg).unwrap();
        assert!(res.converged);
        let a = build_augmented(&xn);
        let ac = a.mul(&res.c_final).unwrap();
        let feas = frobenius_distance(&ac, &a).unwrap();
        assert!(
            feas <= 10.0 * cfg.epsilon * a.frobenius_norm(),
            "feasibility residual {feas}"
        );
        assert!(res.c_final.min_entry() >= 0.0);
    }

    #[test]
    fn extract_anchors_threshold() {
        let mut c = DenseMatrix::zeros(3, 3);
        c.set(0, 0, 1.0);
        c.set(1, 1, 0.0);
        c.set(2, 2, 0.97);
        assert_eq!(extract_anchors(&c, 0.05), vec![0, 2]);
        let zeros = DenseMatrix::zeros(2, 2);
        assert!(extract_anchors(&zeros, 0.05).is_empty());
    }

    #[test]
    fn extract_weights_slices_rows() {
        let c = DenseMatrix::identity(3);
        let w = extract_weights(&c, &[0, 2]).unwrap();
        assert_eq!(w.rows(), 2);
        assert_eq!(w.col(0), &[1.0, 0.0]);
        assert_eq!(w.col(2), &[0.0, 1.0]);
        assert_eq!(
            extract_weights(&c, &[]).unwrap_err(),
            SolverError::EmptyAnchorSet
        );
    }

    #[test]
    fn denormalize_scale_ratio() {
        // Identity scales leave W unchanged.
        let w = DenseMatrix::from_rows(&[vec![1.0, 0.7]]).unwrap();
        let (_, ones) = l1_normalize_columns(&DenseMatrix::identity(2)).unwrap();
        let w1 = denormalize(&[0], &w, &ones).unwrap();
        assert_eq!(w1, w);
        // Scales (2, 4): W_orig(0, 1) = W(0, 1) * 4 / 2.
        let x = DenseMatrix::from_rows(&[vec![2.0, 4.0]]).unwrap();
        let (_, s) = l1_normalize_columns(&x).unwrap();
        let w2 = denormalize(&[0], &w, &s).unwrap();
        assert_eq!(w2.get(0, 1), 0.7 * 4.0 / 2.0);
        assert_eq!(w2.get(0, 0), 1.0);
    }

    #[test]
    fn diagonal_gap_reporting() {
        assert_eq!(diagonal_gap(&[1.0, 0.01, 0.99], 0.05), Some(0.98));
        assert_eq!(diagonal_gap(&[1.0, 1.0], 0.05), None);
        assert_eq!(diagonal_gap(&[0.1, 0.2], 0.05), None);
    }

    #[test]
    fn bitwise_deterministic_runs() {
        let (xn, _) = l1_normalize_columns(&midpoint_instance()).unwrap();
        let cfg = SolverConfig::default();
        let r1 = run_solver(&xn, &cfg).unwrap();
        let r2 = run_solver(&xn, &cfg).unwrap();
        assert_eq!(r1.anchors, r2.anchors);
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.c_final.data(), r2.c_final.data());
        assert_eq!(r1.w.unwrap().data(), r2.w.unwrap().data());
    }

    #[test]
    fn anchor_set_independent_of_price_seed() {
        let (xn, _) = l1_normalize_columns(&midpoint_instance()).unwrap();
        let mut anchors = Vec::new();
        for seed in [1_u64, 99, 12345] {
            let cfg = SolverConfig {
                seed,
                ..SolverConfig::default()
            };
            anchors.push(run_solver(&xn, &cfg).unwrap().anchors);
        }
        assert_eq!(anchors[0], anchors[1]);
        assert_eq!(anchors[1], anchors[2]);
    }
}
