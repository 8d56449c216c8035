//! Seeded generation of RFF and ORF weight matrices.
//!
//! All randomness comes from [`rng_for`]: a ChaCha20 stream keyed by a `u64`
//! seed. Independent streams (blocks, Monte-Carlo replicates, trials) get
//! their own seed through [`sub_seed`], so results never depend on call
//! order or on how many worker threads are used.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the generator stack; recorded in every experiment report.
pub const RNG_ID: &str = "ChaCha20Rng::seed_from_u64 + rand_distr::StandardNormal (ziggurat); sub_seed = splitmix64";

/// Stream index reserved for the single retry of a rank-deficient Haar draw.
const RETRY_STREAM: u64 = u64::MAX;

/// `|r_jj|` below this (relative to the column scale) counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

pub fn rng_for(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of stream `stream` derived from `seed`:
/// `splitmix64(seed ^ splitmix64(stream))`.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Gaussian,
    HaarOrthogonal,
}

/// A `d × p` matrix whose columns are the frequency vectors `w_1, …, w_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: DMatrix<f64>,
    kind: WeightKind,
    seed: u64,
}

impl WeightMatrix {
    #[cfg(test)]
    pub(crate) fn from_entries(entries: DMatrix<f64>, kind: WeightKind, seed: u64) -> Self {
        Self { entries, kind, seed }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Input dimension (rows).
    pub fn d(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of frequencies (columns).
    pub fn p(&self) -> usize {
        self.entries.ncols()
    }

    /// Sizes of the orthogonal blocks: `d, d, …, p mod d` for Haar weights,
    /// a single block of `p` otherwise.
    pub fn block_sizes(&self) -> Vec<usize> {
        match self.kind {
            WeightKind::Gaussian => vec![self.p()],
            WeightKind::HaarOrthogonal => block_sizes(self.d(), self.p()),
        }
    }
}

pub(crate) fn block_sizes(d: usize, p: usize) -> Vec<usize> {
    let mut out = vec![d; p / d];
    if p % d != 0 {
        out.push(p % d);
    }
    out
}

/// `rows × cols` matrix of i.i.d. standard normals, filled column by column.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<WeightMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "gaussian matrix needs positive dimensions, got {rows}x{cols}"
        )));
    }
    Ok(WeightMatrix {
        entries: standard_normal(rows, cols, seed),
        kind: WeightKind::Gaussian,
        seed,
    })
}

fn standard_normal(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Householder QR of a Gaussian matrix with each column of `Q` multiplied by
/// the sign of the matching diagonal entry of `R`. Returns `None` when `R`
/// is numerically singular.
fn sign_corrected_q(g: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        let rjj = r[(j, j)];
        if rjj.abs() <= RANK_TOL * scale {
            return None;
        }
        if rjj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(q)
}

/// First `cols` columns of a Haar-distributed `d × d` orthogonal matrix.
///
/// The Gaussian matrix is filled column by column, so these are exactly the
/// first columns of [`haar_orthogonal`] with the same seed; only the thin QR
/// of the `d × cols` part is computed.
fn haar_columns(d: usize, cols: usize, seed: u64) -> Result<DMatrix<f64>> {
    sign_corrected_q(standard_normal(d, cols, seed))
        .or_else(|| sign_corrected_q(standard_normal(d, cols, sub_seed(seed, RETRY_STREAM))))
        .ok_or_else(|| {
            Error::NumericalFailure(format!(
                "Gaussian draw for a {d}x{d} Haar matrix was rank deficient twice (seed {seed})"
            ))
        })
}

/// A `d × d` Haar-distributed orthogonal matrix.
pub fn haar_orthogonal(d: usize, seed: u64) -> Result<WeightMatrix> {
    if d < 2 {
        return Err(Error::invalid(format!("Haar matrix needs d >= 2, got {d}")));
    }
    Ok(WeightMatrix {
        entries: haar_columns(d, d, seed)?,
        kind: WeightKind::HaarOrthogonal,
        seed,
    })
}

/// ORF weights: `⌈p/d⌉` independent Haar blocks, block `b` drawn with
/// `sub_seed(seed, b)`, columns concatenated and truncated to `p`.
pub fn orf_weight_matrix(d: usize, p: usize, seed: u64) -> Result<WeightMatrix> {
    if d < 2 || p == 0 {
        return Err(Error::invalid(format!(
            "ORF weights need d >= 2 and p >= 1, got d = {d}, p = {p}"
        )));
    }
    let mut entries = DMatrix::zeros(d, p);
    let mut col = 0;
    for (b, size) in block_sizes(d, p).into_iter().enumerate() {
        let block = haar_columns(d, size, sub_seed(seed, b as u64))?;
        entries.columns_mut(col, size).copy_from(&block);
        col += size;
    }
    Ok(WeightMatrix {
        entries,
        kind: WeightKind::HaarOrthogonal,
        seed,
    })
}

/// RFF weights: a `d × p` Gaussian matrix.
pub fn rff_weight_matrix(d: usize, p: usize, seed: u64) -> Result<WeightMatrix> {
    gaussian_matrix(d, p, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_gram_residual(m: &DMatrix<f64>) -> f64 {
        let g = m.transpose() * m;
        let eye = DMatrix::<f64>::identity(g.nrows(), g.ncols());
        (g - eye).amax()
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = gaussian_matrix(3, 2, 7).unwrap();
        let b = gaussian_matrix(3, 2, 7).unwrap();
        assert_eq!(a, b);
        let c = gaussian_matrix(2, 2, 8).unwrap();
        assert_ne!(gaussian_matrix(2, 2, 7).unwrap().entries(), c.entries());
    }

    #[test]
    fn gaussian_rejects_empty() {
        assert!(gaussian_matrix(0, 3, 1).is_err());
        assert!(gaussian_matrix(3, 0, 1).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let g = gaussian_matrix(1000, 1, 1).unwrap();
        let v = g.entries().as_slice();
        let mean = v.iter().sum::<f64>() / 1000.0;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.1);
        assert!((var - 1.0).abs() < 0.15);
    }

    #[test]
    fn rff_delegates_to_gaussian() {
        assert_eq!(rff_weight_matrix(2, 3, 5).unwrap(), gaussian_matrix(2, 3, 5).unwrap());
    }

    #[test]
    fn rff_column_norms_near_sqrt_d() {
        let w = rff_weight_matrix(100, 1000, 3).unwrap();
        let mean_norm =
            w.entries().column_iter().map(|c| c.norm()).sum::<f64>() / 1000.0;
        // E‖w‖ for a chi variable with 100 degrees of freedom is 9.975
        assert!((mean_norm - 10.0).abs() < 0.2);
    }

    #[test]
    fn haar_is_orthogonal() {
        for &d in &[2usize, 3, 10, 64, 257] {
            for seed in 0..3 {
                let o = haar_orthogonal(d, seed).unwrap();
                assert!(max_gram_residual(o.entries()) < 1e-12, "d = {d}");
            }
        }
    }

    #[test]
    fn haar_diagonal_is_centered() {
        // Without the sign correction Householder QR biases the diagonal.
        let d = 4;
        let s = 4000;
        let mean: f64 = (0..s)
            .map(|seed| haar_orthogonal(d, seed).unwrap().entries()[(0, 0)])
            .sum::<f64>()
            / s as f64;
        // sd of O[0,0] is 1/2 for d = 4
        assert!(mean.abs() < 4.0 * 0.5 / (s as f64).sqrt());
    }

    #[test]
    fn orf_small_p_is_orthonormal() {
        let w = orf_weight_matrix(8, 4, 11).unwrap();
        assert_eq!((w.d(), w.p()), (8, 4));
        assert!(max_gram_residual(w.entries()) < 1e-12);
        for c in w.entries().column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orf_blocks() {
        let w = orf_weight_matrix(4, 10, 3).unwrap();
        assert_eq!(w.block_sizes(), vec![4, 4, 2]);
        let e = w.entries();
        assert!(max_gram_residual(&e.columns(0, 4).into_owned()) < 1e-12);
        assert!(max_gram_residual(&e.columns(4, 4).into_owned()) < 1e-12);
        assert!(max_gram_residual(&e.columns(8, 2).into_owned()) < 1e-12);
        // different blocks are independent draws, not orthogonal to each other
        let cross = (e.columns(0, 4).transpose() * e.columns(4, 4)).amax();
        assert!(cross > 1e-3);
    }

    #[test]
    fn partial_block_is_prefix_of_full_block() {
        for &(d, p) in &[(8usize, 3usize), (30, 29), (5, 1)] {
            let full = haar_orthogonal(d, sub_seed(4, 0)).unwrap();
            let part = orf_weight_matrix(d, p, 4).unwrap();
            let diff = (full.entries().columns(0, p) - part.entries()).amax();
            assert!(diff < 1e-13, "d = {d}, p = {p}: {diff}");
        }
    }

    #[test]
    fn orf_rejects_bad_dimensions() {
        assert!(orf_weight_matrix(1, 3, 0).is_err());
        assert!(orf_weight_matrix(3, 0, 0).is_err());
        assert!(haar_orthogonal(1, 0).is_err());
    }

    #[test]
    fn sub_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|k| sub_seed(42, k)).collect();
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
    }
}
