//! Seeded synthetic instance factory for the three dimension regimes.
//!
//! Anchors are drawn entrywise uniform on [0, 100] and planted at the first
//! `r` columns; every remaining column is a random non-negative combination
//! of between 2 and `r` of the planted rays. When the regime permits more
//! rays than ambient dimensions (C3), planted rays are certified extreme by
//! the NNLS oracle and redrawn on failure.

use crate::matrix::{dedupe_columns, l1_normalize_columns, ColumnScales, DenseMatrix, MatrixError};
use crate::oracle::{nnls, DEFAULT_EXTREMALITY_TOL};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Duplicate tolerance applied to the normalized instance.
const DUPLICATE_TOL: f64 = 1e-9;

/// Retry budget for redrawing degenerate random draws.
const MAX_RETRIES: usize = 50;

/// Dimension orderings studied in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Tall data: `m >= n` and `m >= r`.
    C1,
    /// Topic-model shape: `r <= m <= n`.
    C2,
    /// More rays than ambient dimensions: `m <= r <= n`.
    C3,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::C1, Regime::C2, Regime::C3];

    /// Whether `(m, n, r)` satisfies this regime's inequalities.
    pub fn admits(&self, m: usize, n: usize, r: usize) -> bool {
        match self {
            Regime::C1 => m >= n && m >= r,
            Regime::C2 => r <= m && m <= n,
            Regime::C3 => m <= r && r <= n,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::C1 => write!(f, "C1"),
            Regime::C2 => write!(f, "C2"),
            Regime::C3 => write!(f, "C3"),
        }
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Regime::C1),
            "c2" => Ok(Regime::C2),
            "c3" => Ok(Regime::C3),
            other => Err(format!("unknown regime '{other}', expected c1, c2 or c3")),
        }
    }
}

/// Outcome of [`classify_regime`]: boundary equalities can satisfy several
/// regimes at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegimeMatch {
    Unique(Regime),
    Ambiguous(Vec<Regime>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatagenError {
    /// No regime's inequalities hold for `(m, n, r)`.
    NoRegime { m: usize, n: usize, r: usize },
    /// The declared regime does not admit `(m, n, r)`.
    RegimeMismatch {
        declared: Regime,
        m: usize,
        n: usize,
        r: usize,
    },
    InvalidDimensions(String),
    /// The retry budget ran out on degenerate random draws.
    GenerationFailure { attempts: usize, reason: String },
    Matrix(MatrixError),
}

impl fmt::Display for DatagenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatagenError::NoRegime { m, n, r } => {
                write!(f, "no regime admits m={m}, n={n}, r={r}")
            }
            DatagenError::RegimeMismatch { declared, m, n, r } => {
                write!(f, "regime {declared} does not admit m={m}, n={n}, r={r}")
            }
            DatagenError::InvalidDimensions(msg) => write!(f, "invalid dimensions: {msg}"),
            DatagenError::GenerationFailure { attempts, reason } => {
                write!(f, "generation failed after {attempts} attempts: {reason}")
            }
            DatagenError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DatagenError {}

impl From<MatrixError> for DatagenError {
    fn from(e: MatrixError) -> Self {
        DatagenError::Matrix(e)
    }
}

/// Classifies `(m, n, r)` into a regime, or reports the ambiguity.
pub fn classify_regime(m: usize, n: usize, r: usize) -> Result<RegimeMatch, DatagenError> {
    if m == 0 || n == 0 || r == 0 {
        return Err(DatagenError::InvalidDimensions(
            "m, n and r must be positive".into(),
        ));
    }
    let matches: Vec<Regime> = Regime::ALL
        .iter()
        .copied()
        .filter(|reg| reg.admits(m, n, r))
        .collect();
    match matches.len() {
        0 => Err(DatagenError::NoRegime { m, n, r }),
        1 => Ok(RegimeMatch::Unique(matches[0])),
        _ => Ok(RegimeMatch::Ambiguous(matches)),
    }
}

/// A generated problem with its ground truth.
#[derive(Debug, Clone)]
pub struct NmfInstance {
    /// Pre-normalization data, `m x n`.
    pub x_orig: DenseMatrix,
    /// Column-normalized data.
    pub xn: DenseMatrix,
    pub scales: ColumnScales,
    /// 0-based anchor positions; `0..r` unless the instance was shuffled.
    pub true_anchors: Vec<usize>,
    pub regime: Regime,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl NmfInstance {
    /// Returns a copy with columns permuted by a seeded shuffle and the
    /// ground-truth anchor set remapped accordingly.
    pub fn shuffled(&self, shuffle_seed: u64) -> NmfInstance {
        let n = self.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        for k in (1..n).rev() {
            let j = rng.gen_range(0..=k);
            perm.swap(k, j);
        }
        let anchor_set: Vec<bool> = {
            let mut set = vec![false; n];
            for &a in &self.true_anchors {
                set[a] = true;
            }
            set
        };
        let true_anchors: Vec<usize> = (0..n).filter(|&j| anchor_set[perm[j]]).collect();
        let scale_vec: Vec<f64> = perm.iter().map(|&j| self.scales.get(j)).collect();
        let x_orig = self.x_orig.columns_subset(&perm);
        let (xn, scales) =
            l1_normalize_columns(&x_orig).expect("permutation preserves normalizability");
        debug_assert_eq!(scales.as_slice(), scale_vec.as_slice());
        NmfInstance {
            x_orig,
            xn,
            scales,
            true_anchors,
            regime: self.regime,
            seed: self.seed,
            m: self.m,
            n,
            r: self.r,
        }
    }
}

/// Generates a seeded instance for the declared regime.
///
/// Deterministic: identical `(m, n, r, regime, seed)` produce bitwise
/// identical instances.
pub fn generate_instance(
    m: usize,
    n: usize,
    r: usize,
    regime: Regime,
    seed: u64,
) -> Result<NmfInstance, DatagenError> {
    if r < 2 {
        return Err(DatagenError::InvalidDimensions(
            "at least two extreme rays are required".into(),
        ));
    }
    match classify_regime(m, n, r)? {
        RegimeMatch::Unique(found) if found == regime => {}
        RegimeMatch::Unique(_) => {
            return Err(DatagenError::RegimeMismatch { declared: regime, m, n, r })
        }
        RegimeMatch::Ambiguous(matches) if matches.contains(&regime) => {}
        RegimeMatch::Ambiguous(_) => {
            return Err(DatagenError::RegimeMismatch { declared: regime, m, n, r })
        }
    }
    if n <= r {
        return Err(DatagenError::InvalidDimensions(format!(
            "n must exceed r (got n={n}, r={r})"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..MAX_RETRIES {
        let rays = match draw_certified_rays(&mut rng, m, r, regime) {
            Ok(rays) => rays,
            Err(e) if attempt + 1 == MAX_RETRIES => return Err(e),
            Err(_) => continue,
        };

        // Non-anchor columns: combinations of 2..=r rays with weights in (0, 1].
        let mut columns = rays.clone();
        let mut scratch: Vec<usize> = (0..r).collect();
        for _ in r..n {
            let r_prime = rng.gen_range(2..=r);
            for k in 0..r_prime {
                let swap = rng.gen_range(k..r);
                scratch.swap(k, swap);
            }
            let mut col = vec![0.0_f64; m];
            for &ray_idx in &scratch[..r_prime] {
                let weight = 1.0 - rng.gen_range(0.0..1.0);
                for (acc, &v) in col.iter_mut().zip(&rays[ray_idx]) {
                    *acc += weight * v;
                }
            }
            columns.push(col);
        }

        let x_orig = DenseMatrix::from_columns(&columns)?;
        let (xn, scales) = match l1_normalize_columns(&x_orig) {
            Ok(pair) => pair,
            Err(_) => continue,
        };
        if dedupe_columns(&xn, DUPLICATE_TOL).keep.len() != n {
            continue;
        }
        return Ok(NmfInstance {
            x_orig,
            xn,
            scales,
            true_anchors: (0..r).collect(),
            regime,
            seed,
            m,
            n,
            r,
        });
    }
    Err(DatagenError::GenerationFailure {
        attempts: MAX_RETRIES,
        reason: "duplicate or degenerate columns persisted across redraws".into(),
    })
}

/// Draws `r` rays uniform on [0, 100] and, for C3, redraws any ray the NNLS
/// oracle finds representable by the others. For `m >= r` (C1/C2) independent
/// uniform draws are simplicial with probability one, so no check is run.
fn draw_certified_rays(
    rng: &mut ChaCha8Rng,
    m: usize,
    r: usize,
    regime: Regime,
) -> Result<Vec<Vec<f64>>, DatagenError> {
    let mut rays: Vec<Vec<f64>> = (0..r).map(|_| draw_ray(rng, m)).collect();
    if regime != Regime::C3 {
        return Ok(rays);
    }
    for _ in 0..MAX_RETRIES {
        let offenders = non_extreme_rays(&rays)?;
        if offenders.is_empty() {
            return Ok(rays);
        }
        for &i in &offenders {
            rays[i] = draw_ray(rng, m);
        }
    }
    Err(DatagenError::GenerationFailure {
        attempts: MAX_RETRIES,
        reason: "planted rays remained non-simplicial".into(),
    })
}

fn draw_ray(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.0..100.0)).collect()
}

/// Indices of rays lying in the convex hull of the other rays (after L1
/// normalization), per the oracle's residual test.
fn non_extreme_rays(rays: &[Vec<f64>]) -> Result<Vec<usize>, DatagenError> {
    let r = rays.len();
    let raw = DenseMatrix::from_columns(rays)?;
    let (normalized, _) = l1_normalize_columns(&raw)?;
    let mut offenders = Vec::new();
    for i in 0..r {
        let others: Vec<usize> = (0..r).filter(|&k| k != i).collect();
        let b = normalized.columns_subset(&others);
        let (_, residual) = nnls(&b, normalized.col(i), 1e-10);
        if residual <= DEFAULT_EXTREMALITY_TOL {
            offenders.push(i);
        }
    }
    Ok(offenders)
}
