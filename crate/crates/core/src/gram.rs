//! Cholesky factorization of the ridged Gram system `AᵀA + δI` and repeated
//! solves against it.
//!
//! The factorization is computed once per augmented matrix and reused across
//! every iteration; each solve is a pair of triangular sweeps plus one
//! iterative-refinement pass to keep residuals near machine level even when
//! the Gram matrix is rank-deficient and held up only by the ridge.

use crate::matrix::{DenseMatrix, MatrixError};

/// Reusable factorization of `AᵀA + δI` for a fixed matrix `A`.
///
/// Immutable after construction; repeated solves against the same right-hand
/// side return bitwise-identical results.
#[derive(Debug, Clone)]
pub struct GramSolveHandle {
    /// Lower-triangular Cholesky factor, column-major.
    factor: DenseMatrix,
    /// The ridged Gram matrix itself, kept for residual refinement.
    gram: DenseMatrix,
    delta: f64,
    dim: usize,
}

impl GramSolveHandle {
    /// Factors `AᵀA + δI` for the given matrix.
    ///
    /// `δ = 0` is permitted only when `AᵀA` is numerically positive definite;
    /// otherwise [`MatrixError::SingularGram`] asks the caller for a ridge.
    pub fn factor(a: &DenseMatrix, delta: f64) -> Result<Self, MatrixError> {
        Self::from_gram(&a.gram(), delta)
    }

    /// Same as [`GramSolveHandle::factor`] but takes a precomputed Gram matrix.
    pub fn from_gram(gram: &DenseMatrix, delta: f64) -> Result<Self, MatrixError> {
        assert!(gram.rows() == gram.cols(), "Gram matrix must be square");
        assert!(delta >= 0.0, "ridge delta must be non-negative");
        let n = gram.rows();
        let mut ridged = gram.clone();
        for i in 0..n {
            let v = ridged.get(i, i) + delta;
            ridged.set(i, i, v);
        }
        let factor = cholesky_lower(&ridged)?;
        Ok(Self {
            factor,
            gram: ridged,
            delta,
            dim: n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Solves `(AᵀA + δI) Z = B` for every column of `B`.
    ///
    /// One refinement pass follows the triangular sweeps: the ridge makes the
    /// system extremely ill-conditioned when `AᵀA` is singular, and the
    /// correction recovers the digits the first sweep loses.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if b.rows() != self.dim {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.dim, b.cols()),
                got: (b.rows(), b.cols()),
            });
        }
        let mut z = b.clone();
        for j in 0..z.cols() {
            self.solve_column_in_place(z.col_mut(j));
        }
        // Refinement: z += (AᵀA + δI)⁻¹ (b - (AᵀA + δI) z).
        let mut resid = self.residual(b, &z);
        for j in 0..resid.cols() {
            self.solve_column_in_place(resid.col_mut(j));
        }
        for j in 0..z.cols() {
            let zc = z.col_mut(j);
            for (zv, rv) in zc.iter_mut().zip(resid.col(j)) {
                *zv += rv;
            }
        }
        Ok(z)
    }


    /// `B - (AᵀA + δI) Z`, accumulated with fused multiply-adds.
    fn residual(&self, b: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
        let mut out = b.clone();
        for j in 0..z.cols() {
            let zc = z.col(j);
            let oc = out.col_mut(j);
            for (k, &w) in zc.iter().enumerate() {
                if w != 0.0 {
                    let gcol = self.gram.col(k);
                    for (o, &g) in oc.iter_mut().zip(gcol) {
                        *o = g.mul_add(-w, *o);
                    }
                }
            }
        }
        out
    }

    /// Forward then backward substitution on a single column, in place.
    fn solve_column_in_place(&self, x: &mut [f64]) {
        let n = self.dim;
        let l = self.factor.data();
        // L y = x
        for k in 0..n {
            let lk = &l[k * n..(k + 1) * n];
            let yk = x[k] / lk[k];
            x[k] = yk;
            if yk != 0.0 {
                for i in (k + 1)..n {
                    x[i] -= yk * lk[i];
                }
            }
        }
        // Lᵀ z = y
        for k in (0..n).rev() {
            let lk = &l[k * n..(k + 1) * n];
            let mut acc = x[k];
            for i in (k + 1)..n {
                acc -= lk[i] * x[i];
            }
            x[k] = acc / lk[k];
        }
    }
}

/// Plain column-oriented Cholesky; returns the lower factor or
/// [`MatrixError::SingularGram`] when a pivot collapses.
fn cholesky_lower(g: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
    let n = g.rows();
    let mut l = g.clone();
    let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(g.get(i, i)));
    let pivot_floor = f64::EPSILON * max_diag * n as f64;
    // Column-major in-place factorization over the lower triangle.
    let data = l.data_mut();
    for k in 0..n {
        let mut pivot = data[k * n + k];
        if pivot <= pivot_floor || !pivot.is_finite() {
            return Err(MatrixError::SingularGram);
        }
        pivot = pivot.sqrt();
        data[k * n + k] = pivot;
        let inv = 1.0 / pivot;
        for i in (k + 1)..n {
            data[k * n + i] *= inv;
        }
        for j in (k + 1)..n {
            let ljk = data[k * n + j];
            if ljk != 0.0 {
                for i in j..n {
                    data[j * n + i] -= ljk * data[k * n + i];
                }
            }
        }
    }
    // Zero out the strictly upper triangle so the factor is unambiguous.
    for j in 0..n {
        for i in 0..j {
            data[j * n + i] = 0.0;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_distance;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn augmented_identity_gram_is_well_posed() {
        // A = [I2; 1ᵀ]: AᵀA = I + 11ᵀ is positive definite, so δ = 0 works.
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let h = GramSolveHandle::factor(&a, 0.0).unwrap();
        let g = a.gram();
        // Solving against AᵀA's own columns must return identity columns.
        let z = h.solve(&g).unwrap();
        let eye = DenseMatrix::identity(2);
        assert!(frobenius_distance(&z, &eye).unwrap() < 1e-12);
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        // 2x3 matrix: AᵀA is 3x3 of rank 2.
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap();
        assert_eq!(
            GramSolveHandle::factor(&a, 0.0).unwrap_err(),
            MatrixError::SingularGram
        );
        // Same matrix with a ridge factors fine.
        assert!(GramSolveHandle::factor(&a, 1e-8).is_ok());
    }

    #[test]
    fn solve_matches_dense_reference_3x3() {
        // Reference: explicit Gaussian elimination on (AᵀA + δI) for a 3x3 system.
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap();
        let delta = 1e-8;
        let h = GramSolveHandle::factor(&a, delta).unwrap();
        let b = DenseMatrix::from_columns(&[vec![0.3, -0.2, 0.9]]).unwrap();
        let z = h.solve(&b).unwrap();

        // Build the ridged Gram and eliminate by hand.
        let mut g = a.gram();
        for i in 0..3 {
            let v = g.get(i, i) + delta;
            g.set(i, i, v);
        }
        let mut aug: Vec<[f64; 4]> = (0..3)
            .map(|i| [g.get(i, 0), g.get(i, 1), g.get(i, 2), b.get(i, 0)])
            .collect();
        for k in 0..3 {
            let piv = (k..3).max_by(|&i, &j| aug[i][k].abs().total_cmp(&aug[j][k].abs())).unwrap();
            aug.swap(k, piv);
            for i in 0..3 {
                if i != k {
                    let f = aug[i][k] / aug[k][k];
                    let pivot_row = aug[k];
                    for (c, p) in pivot_row.iter().enumerate().skip(k) {
                        aug[i][c] -= f * p;
                    }
                }
            }
        }
        let reference: Vec<f64> = (0..3).map(|i| aug[i][3] / aug[i][i]).collect();

        // The residual contract, checked against the reference solve.
        let gz = g.mul(&z).unwrap();
        let resid = frobenius_distance(&gz, &b).unwrap();
        assert!(resid <= 1e-8 * b.frobenius_norm());
        for (i, want) in reference.iter().enumerate() {
            assert!((z.get(i, 0) - want).abs() <= 1e-6 * want.abs().max(1.0));
        }
    }

    #[test]
    fn forward_construct_solve_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let rows = rng.gen_range(3..12);
            let cols = rng.gen_range(2..10);
            let a = random_matrix(&mut rng, rows, cols);
            let delta = 1e-8;
            let h = match GramSolveHandle::factor(&a, delta) {
                Ok(h) => h,
                Err(_) => continue,
            };
            let mut g = a.gram();
            for i in 0..cols {
                let v = g.get(i, i) + delta;
                g.set(i, i, v);
            }
            let z0 = random_matrix(&mut rng, cols, 3);
            let b = g.mul(&z0).unwrap();
            let z = h.solve(&b).unwrap();
            let err = frobenius_distance(&z, &z0).unwrap();
            assert!(
                err <= 1e-7 * z0.frobenius_norm().max(1.0),
                "trial {trial}: relative error {err}"
            );
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let h = GramSolveHandle::factor(&a, 0.0).unwrap();
        let z = h.solve(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z.data(), &[0.0; 4]);
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 8, 5);
        let h = GramSolveHandle::factor(&a, 1e-8).unwrap();
        let b = random_matrix(&mut rng, 5, 4);
        let z1 = h.solve(&b).unwrap();
        let z2 = h.solve(&b).unwrap();
        assert_eq!(z1.data(), z2.data());
    }
}
