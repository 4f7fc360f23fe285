//! Accuracy contracts of the ridged Gram solve across the shapes the
//! artifact actually produces: column-normalized matrices, tall and wide,
//! including rank-deficient Gram systems held up only by the ridge.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sepnmf_core::gram::GramSolveHandle;
use sepnmf_core::matrix::{frobenius_distance, l1_normalize_columns, DenseMatrix};

const DELTA: f64 = 1e-8;

fn normalized_random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let raw = DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(0.01..1.0));
    l1_normalize_columns(&raw).unwrap().0
}

fn ridged_gram(a: &DenseMatrix, delta: f64) -> DenseMatrix {
    let mut g = a.gram();
    for i in 0..g.rows() {
        let v = g.get(i, i) + delta;
        g.set(i, i, v);
    }
    g
}

#[test]
fn residual_contract_on_random_rhs() {
    // Sizes up to 50x80; wide shapes make AᵀA rank-deficient.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shapes = [(50, 40), (50, 80), (20, 30), (35, 35), (80, 50)];
    for &(rows, cols) in &shapes {
        for _ in 0..8 {
            let a = normalized_random(&mut rng, rows, cols);
            let h = GramSolveHandle::factor(&a, DELTA).unwrap();
            let g = ridged_gram(&a, DELTA);
            let b = DenseMatrix::from_fn(cols, 5, |_, _| rng.gen_range(-1.0..1.0));
            let z = h.solve(&b).unwrap();
            let gz = g.mul(&z).unwrap();
            let resid = frobenius_distance(&gz, &b).unwrap();
            assert!(
                resid <= 1e-8 * b.frobenius_norm(),
                "{rows}x{cols}: residual {resid:.3e} vs {:.3e}",
                1e-8 * b.frobenius_norm()
            );
        }
    }
}

#[test]
fn range_space_rhs_solves_to_machine_level() {
    // The iteration only ever solves against range-space right-hand sides;
    // there the ridge bias is negligible at any rank.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for &(rows, cols) in &[(10usize, 40usize), (25, 100), (50, 80)] {
        let a = normalized_random(&mut rng, rows, cols);
        let h = GramSolveHandle::factor(&a, DELTA).unwrap();
        let g = ridged_gram(&a, DELTA);
        let r = DenseMatrix::from_fn(cols, 4, |_, _| rng.gen_range(-1.0..1.0));
        let b = a.gram().mul(&r).unwrap();
        let z = h.solve(&b).unwrap();
        let gz = g.mul(&z).unwrap();
        let resid = frobenius_distance(&gz, &b).unwrap();
        assert!(
            resid <= 1e-12 * b.frobenius_norm(),
            "{rows}x{cols}: range-space residual {resid:.3e}"
        );
    }
}

#[test]
fn forward_construct_recovers_solution() {
    // B = (AᵀA + δI) Z₀ must solve back to Z₀; 100 pairs, mixing full-rank
    // tall shapes with rank-deficient wide ones.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100 {
        let (rows, cols) = if trial % 2 == 0 {
            let c = rng.gen_range(3..30);
            (c + rng.gen_range(1..20), c)
        } else {
            let r = rng.gen_range(3..40);
            (r, r + rng.gen_range(1..40))
        };
        let a = normalized_random(&mut rng, rows, cols);
        let h = GramSolveHandle::factor(&a, DELTA).unwrap();
        let g = ridged_gram(&a, DELTA);
        let z0 = DenseMatrix::from_fn(cols, 3, |_, _| rng.gen_range(-1.0..1.0));
        let b = g.mul(&z0).unwrap();
        let z = h.solve(&b).unwrap();
        let err = frobenius_distance(&z, &z0).unwrap();
        assert!(
            err <= 1e-7 * z0.frobenius_norm(),
            "trial {trial} ({rows}x{cols}): relative error {:.3e}",
            err / z0.frobenius_norm()
        );
    }
}
