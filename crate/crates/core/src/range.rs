//! Orthonormal basis of a matrix's row space, built once and applied as an
//! exact projector.
//!
//! For a separable data matrix the row space of the augmented matrix has
//! dimension equal to the number of anchors, far below the column count, so
//! projections onto it (and onto its orthogonal complement, the solution
//! set's direction space) cost `O(n·rank)` per column instead of a dense
//! solve.

use crate::matrix::DenseMatrix;

/// Relative cutoff under which a pivot column is considered dependent.
const RANK_REL_TOL: f64 = 1e-11;

/// Orthonormal basis `B` (columns) of the row space of `A`, i.e. the range
/// of `Aᵀ`, computed by Householder QR with column pivoting.
#[derive(Debug, Clone)]
pub struct RangeBasis {
    basis: DenseMatrix,
    dim: usize,
    rank: usize,
}

impl RangeBasis {
    /// Factors the row space of `a`.
    pub fn of_row_space(a: &DenseMatrix) -> Self {
        let at = transpose(a);
        Self::of_column_space(&at)
    }

    /// Factors the column space of `m`.
    pub fn of_column_space(m: &DenseMatrix) -> Self {
        let rows = m.rows();
        let cols = m.cols();
        let limit = rows.min(cols);
        let mut work = m.clone();
        // Householder vectors live in the strict lower part of processed
        // columns of `work`; `betas[k]` is the reflector's scale.
        let mut betas = Vec::with_capacity(limit);
        let mut col_norms: Vec<f64> = (0..cols)
            .map(|j| work.col(j).iter().map(|v| v * v).sum())
            .collect();
        let norm_floor = col_norms.iter().cloned().fold(0.0_f64, f64::max).sqrt() * RANK_REL_TOL;
        let mut rank = 0;
        for k in 0..limit {
            // Pivot: bring the largest remaining column into position k.
            let (pivot, &pivot_norm) = col_norms
                .iter()
                .enumerate()
                .skip(k)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty range");
            if pivot_norm.max(0.0).sqrt() <= norm_floor {
                break;
            }
            if pivot != k {
                swap_columns(&mut work, k, pivot);
                col_norms.swap(k, pivot);
            }
            // Recompute the pivot column's true remaining norm (the running
            // downdates drift) and re-check.
            let fresh: f64 = work.col(k)[k..].iter().map(|v| v * v).sum::<f64>();
            if fresh.sqrt() <= norm_floor {
                break;
            }

            // Build the reflector H = I - beta v vᵀ annihilating below (k, k).
            let (beta, tail_scale) = {
                let col = work.col_mut(k);
                let alpha = {
                    let head = col[k];
                    let norm = fresh.sqrt();
                    if head >= 0.0 {
                        -norm
                    } else {
                        norm
                    }
                };
                let v0 = col[k] - alpha;
                col[k] = alpha;
                (v0 * v0 + col[k + 1..].iter().map(|v| v * v).sum::<f64>(), v0)
            };
            // Normalize so v = (1, tail / tail_scale); beta = 2 / ||v||².
            let beta = if beta > 0.0 { 2.0 * tail_scale * tail_scale / beta } else { 0.0 };
            if tail_scale != 0.0 {
                let inv = 1.0 / tail_scale;
                for v in &mut work.col_mut(k)[k + 1..] {
                    *v *= inv;
                }
            }
            betas.push(beta);
            rank = k + 1;

            // Apply the reflector to the trailing columns and downdate norms.
            let vk: Vec<f64> = work.col(k)[k + 1..].to_vec();
            #[allow(clippy::needless_range_loop)]
            for j in (k + 1)..cols {
                let dot_v = {
                    let cj = work.col(j);
                    let mut acc = cj[k];
                    for (i, vv) in vk.iter().enumerate() {
                        acc += vv * cj[k + 1 + i];
                    }
                    acc
                };
                let scale = beta * dot_v;
                if scale != 0.0 {
                    let cj = work.col_mut(j);
                    cj[k] -= scale;
                    for (i, vv) in vk.iter().enumerate() {
                        cj[k + 1 + i] -= scale * vv;
                    }
                }
                col_norms[j] -= work.col(j)[k] * work.col(j)[k];
            }
        }

        // Accumulate Q's leading `rank` columns by applying the reflectors
        // in reverse to the identity block.
        let mut basis = DenseMatrix::zeros(rows, rank.max(1));
        if rank == 0 {
            // Degenerate zero matrix: empty row space; store a zero column
            // so the projector is identically zero.
            return Self {
                basis,
                dim: rows,
                rank: 0,
            };
        }
        for c in 0..rank {
            basis.col_mut(c)[c] = 1.0;
        }
        for k in (0..rank).rev() {
            let beta = betas[k];
            if beta == 0.0 {
                continue;
            }
            let vk: Vec<f64> = work.col(k)[k + 1..].to_vec();
            for c in 0..rank {
                let col = basis.col_mut(c);
                let mut dot_v = col[k];
                for (i, vv) in vk.iter().enumerate() {
                    dot_v += vv * col[k + 1 + i];
                }
                let scale = beta * dot_v;
                if scale != 0.0 {
                    col[k] -= scale;
                    for (i, vv) in vk.iter().enumerate() {
                        col[k + 1 + i] -= scale * vv;
                    }
                }
            }
        }
        Self {
            basis,
            dim: rows,
            rank,
        }
    }

    /// Ambient dimension of the space the basis lives in.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Numerical rank found during factorization.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Orthogonal projection of every column of `v` onto the basis span:
    /// `B (Bᵀ v)`.
    pub fn project_columns(&self, v: &DenseMatrix) -> DenseMatrix {
        assert_eq!(v.rows(), self.dim, "projector dimension mismatch");
        if self.rank == 0 {
            return DenseMatrix::zeros(v.rows(), v.cols());
        }
        let coeffs = self.basis.transpose_mul(v).expect("dims checked");
        self.basis.mul(&coeffs).expect("dims checked")
    }
}

fn transpose(a: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.cols(), a.rows());
    for j in 0..a.cols() {
        let col = a.col(j);
        for (i, &v) in col.iter().enumerate() {
            out.set(j, i, v);
        }
    }
    out
}

fn swap_columns(m: &mut DenseMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let rows = m.rows();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let data = m.data_mut();
    let (left, right) = data.split_at_mut(hi * rows);
    left[lo * rows..(lo + 1) * rows].swap_with_slice(&mut right[..rows]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_distance;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthonormal(b: &DenseMatrix) -> bool {
        let g = b.gram();
        let mut ok = true;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                ok &= (g.get(i, j) - want).abs() < 1e-12;
            }
        }
        ok
    }

    #[test]
    fn identity_row_space_is_full() {
        let b = RangeBasis::of_row_space(&DenseMatrix::identity(4));
        assert_eq!(b.rank(), 4);
        assert!(orthonormal(&b.basis));
        let v = DenseMatrix::from_fn(4, 2, |i, j| (i + 2 * j) as f64 - 2.5);
        let p = b.project_columns(&v);
        assert!(frobenius_distance(&p, &v).unwrap() < 1e-12);
    }

    #[test]
    fn rank_detects_dependent_rows() {
        // 3x4 matrix whose third row is the sum of the first two.
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.5, 0.25],
            vec![0.0, 1.0, 0.5, 0.75],
            vec![1.0, 1.0, 1.0, 1.0],
        ])
        .unwrap();
        let b = RangeBasis::of_row_space(&a);
        assert_eq!(b.rank(), 2);
        assert!(orthonormal(&b.basis));
        // Projecting the rows themselves must be exact.
        let rows_mat = transpose(&a);
        let p = b.project_columns(&rows_mat);
        assert!(frobenius_distance(&p, &rows_mat).unwrap() < 1e-10);
    }

    #[test]
    fn projector_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let rows = rng.gen_range(2..8);
            let cols = rng.gen_range(2..10);
            let a = DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
            let b = RangeBasis::of_row_space(&a);
            assert!(b.rank() <= rows.min(cols));
            let v = DenseMatrix::from_fn(cols, 3, |_, _| rng.gen_range(-1.0..1.0));
            let p = b.project_columns(&v);
            let pp = b.project_columns(&p);
            assert!(frobenius_distance(&p, &pp).unwrap() < 1e-11);
            // Residual orthogonal to the projection.
            let resid = v.sub(&p).unwrap();
            let cross = p.transpose_mul(&resid).unwrap();
            assert!(cross.max_abs_entry() < 1e-10);
        }
    }
}
