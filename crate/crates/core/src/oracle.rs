//! Independent ground-truth machinery: non-negative least squares, brute
//! force extreme-ray detection, feasibility measurement, and reconstruction
//! residuals.
//!
//! The solver is audited against this module, so everything here stays
//! deliberately simple: an active-set NNLS with a KKT certificate, and an
//! exhaustive per-column representability test. Intended for small instances
//! (columns up to a few hundred).

use crate::gram::GramSolveHandle;
use crate::matrix::DenseMatrix;
use std::fmt;

/// Gradient tolerance used by the active-set loop when certifying a column.
const KKT_TOL: f64 = 1e-10;

/// Residual above which a column counts as non-representable (extreme).
/// Generated combinations are exact to machine precision; this leaves margin
/// for normalization rounding.
pub const DEFAULT_EXTREMALITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    EmptyAnchorSet,
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::EmptyAnchorSet => write!(f, "anchor set is empty"),
            OracleError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
        }
    }
}

impl std::error::Error for OracleError {}

/// Measured violations of the feasible set `{C : XC = X, Cᵀ1 = 1, C >= 0}`.
///
/// Pure measurement; a matrix is feasible at tolerance `eta` iff all three
/// readings pass [`Phi2Report::feasible_at`].
#[derive(Debug, Clone, PartialEq)]
pub struct Phi2Report {
    /// Largest entry of `|XC - X|`.
    pub max_equality_violation: f64,
    /// Worst `|column sum of C - 1|`.
    pub max_column_sum_violation: f64,
    /// Most negative entry of `C` (non-negative when `C >= 0` holds).
    pub min_entry: f64,
}

impl Phi2Report {
    pub fn feasible_at(&self, eta: f64) -> bool {
        self.max_equality_violation <= eta
            && self.max_column_sum_violation <= eta
            && self.min_entry >= -eta
    }
}

/// Non-negative least squares by the classic active-set method.
///
/// Minimizes `||B w - y||` subject to `w >= 0` and returns the weights with
/// the residual at the solution. At return, for every column either
/// `w_j > 0` with gradient near zero, or `w_j = 0` with gradient `>= -tol`
/// (gradient taken as `Bᵀ(Bw - y)`).
pub fn nnls(b: &DenseMatrix, y: &[f64], tol: f64) -> (Vec<f64>, f64) {
    assert_eq!(b.rows(), y.len(), "B and y must have matching length");
    let n = b.cols();
    let gram = b.gram();
    let bty = b.transpose_mul_vec(y).expect("length checked above");

    let mut x = vec![0.0_f64; n];
    let mut passive = vec![false; n];
    let mut excluded = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        // Dual vector: w = Bᵀ(y - Bx) = bty - G x.
        let gx = gram.mul_vec(&x).expect("square");
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if passive[j] || excluded[j] {
                continue;
            }
            let w = bty[j] - gx[j];
            if w > tol && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        let Some((entering, _)) = best else { break };
        passive[entering] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 3 * n + 10 {
                break;
            }
            let p_idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let Some(z) = solve_passive(&gram, &bty, &p_idx) else {
                // Numerically dependent subset; drop the entering column.
                passive[entering] = false;
                excluded[entering] = true;
                break;
            };
            if z.iter().all(|&v| v > 0.0) {
                for v in x.iter_mut() {
                    *v = 0.0;
                }
                for (k, &j) in p_idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            // Step toward z until the first coordinate hits zero.
            let mut alpha = f64::INFINITY;
            for (k, &j) in p_idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                break;
            }
            for (k, &j) in p_idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
                if x[j] <= f64::EPSILON * 16.0 {
                    x[j] = 0.0;
                }
            }
            for &j in &p_idx {
                if x[j] == 0.0 {
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    // Residual measured directly in data space.
    let bx = b.mul_vec(&x).expect("square");
    let residual = bx
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (x, residual)
}

/// Least squares on the passive subset via the subset Gram system.
fn solve_passive(gram: &DenseMatrix, bty: &[f64], p_idx: &[usize]) -> Option<Vec<f64>> {
    let p = p_idx.len();
    let mut sub = DenseMatrix::zeros(p, p);
    for (kj, &j) in p_idx.iter().enumerate() {
        for (ki, &i) in p_idx.iter().enumerate() {
            sub.set(ki, kj, gram.get(i, j));
        }
    }
    let rhs_vec: Vec<f64> = p_idx.iter().map(|&j| bty[j]).collect();
    let rhs = DenseMatrix::from_vec_unchecked(p, 1, rhs_vec);
    let max_diag = (0..p).fold(0.0_f64, |acc, i| acc.max(sub.get(i, i)));
    for ridge in [0.0, 1e-14 * max_diag, 1e-10 * max_diag] {
        if let Ok(h) = GramSolveHandle::from_gram(&sub, ridge) {
            if let Ok(z) = h.solve(&rhs) {
                return Some(z.col(0).to_vec());
            }
        }
    }
    None
}

/// Exhaustive extreme-column detection: a column is extreme iff NNLS over
/// all other columns cannot reproduce it within `tol`.
///
/// Under L1 normalization, non-negative representability coincides with
/// convex representability, because non-negative weights reproducing a
/// sum-one vector from sum-one vectors must themselves sum to one.
pub fn brute_force_extreme_rays(xn: &DenseMatrix, tol: f64) -> Vec<usize> {
    let n = xn.cols();
    if n == 1 {
        return vec![0];
    }
    let mut extremes = Vec::new();
    let mut others: Vec<usize> = (1..n).collect();
    for j in 0..n {
        // `others` holds every index except j.
        let b = xn.columns_subset(&others);
        let (_, residual) = nnls(&b, xn.col(j), KKT_TOL);
        if residual > tol {
            extremes.push(j);
        }
        if j + 1 < n {
            others[j] = j;
        }
    }
    extremes
}

/// Measures how far `C` is from the reduced feasible polytope of `Xn`.
pub fn validate_phi2(xn: &DenseMatrix, c: &DenseMatrix) -> Result<Phi2Report, OracleError> {
    let n = xn.cols();
    if c.rows() != n || c.cols() != n {
        return Err(OracleError::DimensionMismatch {
            expected: (n, n),
            got: (c.rows(), c.cols()),
        });
    }
    let xc = xn.mul(c).expect("dimensions checked");
    let mut max_eq = 0.0_f64;
    for (a, b) in xc.data().iter().zip(xn.data()) {
        max_eq = max_eq.max((a - b).abs());
    }
    let mut max_sum = 0.0_f64;
    for j in 0..n {
        let s: f64 = c.col(j).iter().sum();
        max_sum = max_sum.max((s - 1.0).abs());
    }
    Ok(Phi2Report {
        max_equality_violation: max_eq,
        max_column_sum_violation: max_sum,
        min_entry: c.min_entry(),
    })
}

/// Relative Frobenius reconstruction error `||X - X(:, I) W||_F / ||X||_F`.
pub fn reconstruction_residual(
    x: &DenseMatrix,
    anchors: &[usize],
    w: &DenseMatrix,
) -> Result<f64, OracleError> {
    if anchors.is_empty() {
        return Err(OracleError::EmptyAnchorSet);
    }
    if anchors.iter().any(|&i| i >= x.cols()) || w.rows() != anchors.len() || w.cols() != x.cols()
    {
        return Err(OracleError::DimensionMismatch {
            expected: (anchors.len(), x.cols()),
            got: (w.rows(), w.cols()),
        });
    }
    let xi = x.columns_subset(anchors);
    let approx = xi.mul(w).expect("dimensions checked");
    let diff = x.sub(&approx).expect("same shape");
    Ok(diff.frobenius_norm() / x.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::l1_normalize_columns;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kkt_holds(b: &DenseMatrix, y: &[f64], x: &[f64], tol: f64) -> bool {
        // gradient = Bᵀ(Bx - y)
        let bx = b.mul_vec(x).unwrap();
        let r: Vec<f64> = bx.iter().zip(y).map(|(a, b)| a - b).collect();
        let grad = b.transpose_mul_vec(&r).unwrap();
        x.iter()
            .zip(&grad)
            .all(|(&xj, &gj)| if xj > 0.0 { gj.abs() <= tol } else { gj >= -tol })
    }

    #[test]
    fn nnls_identity_basis() {
        let b = DenseMatrix::identity(2);
        let (w, res) = nnls(&b, &[3.0, 4.0], 1e-10);
        assert!((w[0] - 3.0).abs() < 1e-12);
        assert!((w[1] - 4.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn nnls_orthogonal_target() {
        let b = DenseMatrix::from_columns(&[vec![1.0, 0.0]]).unwrap();
        let (w, res) = nnls(&b, &[0.0, 1.0], 1e-10);
        assert_eq!(w, vec![0.0]);
        assert!((res - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_recovers_forward_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = rng.gen_range(3..8);
            let b1: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let b2: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let y: Vec<f64> = b1.iter().zip(&b2).map(|(a, b)| 0.3 * a + 0.7 * b).collect();
            let b = DenseMatrix::from_columns(&[b1, b2]).unwrap();
            let (w, res) = nnls(&b, &y, 1e-10);
            assert!(res <= 1e-8, "residual {res}");
            assert!(kkt_holds(&b, &y, &w, 1e-8));
        }
    }

    #[test]
    fn nnls_kkt_certificate_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let m = rng.gen_range(2..10);
            let n = rng.gen_range(1..12);
            let b = DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (w, _) = nnls(&b, &y, KKT_TOL);
            assert!(w.iter().all(|&v| v >= 0.0));
            assert!(kkt_holds(&b, &y, &w, 1e-6));
        }
    }

    #[test]
    fn nnls_monotone_in_columns() {
        // Adding a column never increases the optimal residual.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let m = rng.gen_range(3..8);
            let n = rng.gen_range(2..7);
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let small = DenseMatrix::from_columns(&cols[..n - 1]).unwrap();
            let full = DenseMatrix::from_columns(&cols).unwrap();
            let (_, r_small) = nnls(&small, &y, KKT_TOL);
            let (_, r_full) = nnls(&full, &y, KKT_TOL);
            assert!(r_full <= r_small + 1e-9, "{r_full} > {r_small}");
        }
    }

    #[test]
    fn brute_force_identity_columns() {
        let xn = DenseMatrix::identity(3);
        assert_eq!(
            brute_force_extreme_rays(&xn, DEFAULT_EXTREMALITY_TOL),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn brute_force_midpoint_not_extreme() {
        let x =
            DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap();
        let (xn, _) = l1_normalize_columns(&x).unwrap();
        assert_eq!(
            brute_force_extreme_rays(&xn, DEFAULT_EXTREMALITY_TOL),
            vec![0, 1]
        );
    }

    #[test]
    fn phi2_identity_always_feasible() {
        let x = DenseMatrix::from_rows(&[vec![0.2, 0.7], vec![0.8, 0.3]]).unwrap();
        let report = validate_phi2(&x, &DenseMatrix::identity(2)).unwrap();
        assert_eq!(report.max_equality_violation, 0.0);
        assert_eq!(report.max_column_sum_violation, 0.0);
        assert_eq!(report.min_entry, 0.0);
        assert!(report.feasible_at(1e-12));
    }

    #[test]
    fn phi2_zero_matrix_violations() {
        let x = DenseMatrix::from_rows(&[vec![0.2, 0.7], vec![0.8, 0.3]]).unwrap();
        let report = validate_phi2(&x, &DenseMatrix::zeros(2, 2)).unwrap();
        // XC - X = -X, so the worst equality violation is the largest entry of X.
        assert_eq!(report.max_equality_violation, 0.8);
        assert_eq!(report.max_column_sum_violation, 1.0);
        assert!(!report.feasible_at(1e-3));
    }

    #[test]
    fn phi2_dimension_check() {
        let x = DenseMatrix::identity(2);
        assert!(matches!(
            validate_phi2(&x, &DenseMatrix::identity(3)),
            Err(OracleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reconstruction_exact_and_zero_weight() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap();
        let w = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.5],
            vec![0.0, 1.0, 0.5],
        ])
        .unwrap();
        let res = reconstruction_residual(&x, &[0, 1], &w).unwrap();
        assert!(res < 1e-12);
        let zero = DenseMatrix::zeros(2, 3);
        let res = reconstruction_residual(&x, &[0, 1], &zero).unwrap();
        assert!((res - 1.0).abs() < 1e-12);
        assert_eq!(
            reconstruction_residual(&x, &[], &w).unwrap_err(),
            OracleError::EmptyAnchorSet
        );
    }
}
