//! The random feature map
//!
//! ```text
//! φ(x) = (1/√p) (sin(w_1ᵀx), …, sin(w_pᵀx), cos(w_1ᵀx), …, cos(w_pᵀx))
//! ```
//!
//! and the approximate kernel `k̃(x, y) = φ(x)ᵀφ(y) = (1/p) Σ_j cos(w_jᵀ(x-y))`.
//! The layout (all sines, then all cosines) is fixed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sampling::{WeightKind, WeightMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: DVector<f64>,
}

impl FeatureVector {
    /// `2p` entries: `p` sines followed by `p` cosines.
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn p(&self) -> usize {
        self.values.len() / 2
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        self.values.dot(&other.values)
    }
}

/// Approximate Gram matrix `K̃[i][j] = k̃(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    kind: WeightKind,
    seed: u64,
    d: usize,
    p: usize,
}

impl GramMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// `(kind, seed, d, p)` of the weights that produced this matrix.
    pub fn generator(&self) -> (WeightKind, u64, usize, usize) {
        (self.kind, self.seed, self.d, self.p)
    }
}

fn check_dim(w: &WeightMatrix, len: usize) -> Result<()> {
    if len != w.d() {
        return Err(Error::DimensionMismatch {
            expected: w.d(),
            got: len,
        });
    }
    Ok(())
}

pub fn feature_map(w: &WeightMatrix, x: &[f64]) -> Result<FeatureVector> {
    check_dim(w, x.len())?;
    let p = w.p();
    let scale = 1.0 / (p as f64).sqrt();
    let proj = w.entries().tr_mul(&DVector::from_column_slice(x));
    let mut values = DVector::zeros(2 * p);
    for (j, t) in proj.iter().enumerate() {
        let (s, c) = t.sin_cos();
        values[j] = scale * s;
        values[j + p] = scale * c;
    }
    Ok(FeatureVector { values })
}

/// `(1/p) Σ_j cos(w_jᵀ(x - y))`.
pub fn approx_kernel(w: &WeightMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(w, x.len())?;
    check_dim(w, y.len())?;
    let diff: DVector<f64> = DVector::from_iterator(x.len(), x.iter().zip(y).map(|(a, b)| a - b));
    Ok(kernel_along(w, &diff))
}

/// `(1/p) Σ_j cos(w_jᵀ Δ)` for a precomputed difference `Δ`.
pub(crate) fn kernel_along(w: &WeightMatrix, diff: &DVector<f64>) -> f64 {
    let proj = w.entries().tr_mul(diff);
    proj.iter().map(|t| t.cos()).sum::<f64>() / w.p() as f64
}

/// `n × 2p` matrix whose rows are the feature vectors of the rows of `x`.
pub fn feature_matrix(w: &WeightMatrix, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dim(w, x.ncols())?;
    let p = w.p();
    let scale = 1.0 / (p as f64).sqrt();
    let proj = x * w.entries();
    let mut phi = DMatrix::zeros(x.nrows(), 2 * p);
    for i in 0..x.nrows() {
        for j in 0..p {
            let (s, c) = proj[(i, j)].sin_cos();
            phi[(i, j)] = scale * s;
            phi[(i, j + p)] = scale * c;
        }
    }
    Ok(phi)
}

/// Gram matrix of the rows of `x` through the explicit feature matrix
/// `Φ Φᵀ`. The result is made exactly symmetric, its diagonal is set to the
/// exact value 1 and entries are clamped to `[-1, 1]`.
pub fn gram_matrix(w: &WeightMatrix, x: &DMatrix<f64>) -> Result<GramMatrix> {
    if x.nrows() == 0 {
        return Err(Error::invalid("Gram matrix needs at least one point"));
    }
    let phi = feature_matrix(w, x)?;
    let mut k = &phi * phi.transpose();
    let n = k.nrows();
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = k[(i, j)].clamp(-1.0, 1.0);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        entries: k,
        kind: w.kind(),
        seed: w.seed(),
        d: w.d(),
        p: w.p(),
    })
}
