//! Positive zeros `0 < a_{d,1} < a_{d,2} < …` of `j_{d/2-1}` and the
//! quantities built from them.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{check_finite, normalized_bessel, BesselOrderDim};
use crate::error::{Error, Result};

/// Width at which bisection stops.
pub const ZERO_BISECTION_WIDTH: f64 = 1e-12;

/// Absolute accuracy advertised by [`ZeroTable`].
pub const ZERO_TOLERANCE: f64 = 1e-10;

/// Forward scan steps tried before giving up on a bracket.
const MAX_SCAN_STEPS: usize = 512;

/// `a_{d,1} > √(2d) (d/2)^{1/4} = 2^{1/4} d^{3/4}`.
pub fn zero_bound_power(d: usize) -> f64 {
    2f64.powf(0.25) * (d as f64).powf(0.75)
}

/// `a_{d,1} > √(d²/4 - 1)`, i.e. `√(ν(ν+2))`.
pub fn zero_bound_linear(d: usize) -> f64 {
    let d = d as f64;
    (0.25 * d * d - 1.0).max(0.0).sqrt()
}

/// The sharper of the two lower bounds on the first zero.
pub fn zero_lower_bound(d: usize) -> f64 {
    zero_bound_power(d).max(zero_bound_linear(d))
}

/// Quadratic lower bound `1 - z²/(2d) ≤ j_{d/2-1}(z)`.
pub fn joshi_lower_bound(d: usize, z: f64) -> f64 {
    1.0 - z * z / (2.0 * d as f64)
}

/// The first `m` positive zeros of `j_{d/2-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    d: usize,
    zeros: Vec<f64>,
    tolerance: f64,
}

impl ZeroTable {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// `Σ_j 1/a_{d,j}²` over the tabulated zeros.
    pub fn rayleigh_sum(&self) -> f64 {
        self.zeros.iter().map(|a| 1.0 / (a * a)).sum()
    }

    /// `∏_j (1 - z²/a_{d,j}²)` over the tabulated zeros.
    pub fn weierstrass_product(&self, z: f64) -> f64 {
        self.zeros
            .iter()
            .map(|a| {
                let r = z / a;
                1.0 - r * r
            })
            .product()
    }
}

fn bisect(d: usize, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64> {
    let lo_positive = f_lo > 0.0;
    while hi - lo > ZERO_BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = normalized_bessel(d, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `[start, start + step, …]` for a sign change, then bisects.
fn scan_and_bisect(d: usize, index: usize, start: f64, step: f64) -> Result<f64> {
    let mut lo = start;
    let mut f_lo = normalized_bessel(d, lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    for _ in 0..MAX_SCAN_STEPS {
        let hi = lo + step;
        let f_hi = normalized_bessel(d, hi)?;
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if (f_hi > 0.0) != (f_lo > 0.0) {
            return bisect(d, lo, hi, f_lo);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::ZeroBracket { d, index })
}

/// `a_{d,1}`, bracketed by scanning forward in steps of `π/2` from the
/// lower bound [`zero_lower_bound`] and refined by bisection.
pub fn first_zero(d: usize) -> Result<f64> {
    BesselOrderDim::new(d)?;
    let start = zero_lower_bound(d);
    if normalized_bessel(d, start)? <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "j_(d/2-1) is not positive at the first-zero lower bound {start} (d = {d})"
        )));
    }
    scan_and_bisect(d, 1, start, FRAC_PI_2)
}

/// The first `m` zeros. Zeros of `j_ν` are more than 3 apart, so zero `k+1`
/// is searched in `[a_k + 2, a_k + 5]`; when that window shows no sign change
/// the scan continues past it in steps of `π/2`.
pub fn zeros(d: usize, m: usize) -> Result<ZeroTable> {
    if m == 0 {
        return Err(Error::invalid("number of zeros m must be >= 1"));
    }
    let mut out = Vec::with_capacity(m);
    out.push(first_zero(d)?);
    for index in 2..=m {
        let prev = out[index - 2];
        let (a, b) = (prev + 2.0, prev + 5.0);
        let f_a = normalized_bessel(d, a)?;
        let f_b = normalized_bessel(d, b)?;
        let next = if f_a == 0.0 {
            a
        } else if f_b == 0.0 {
            b
        } else if (f_a > 0.0) != (f_b > 0.0) {
            bisect(d, a, b, f_a)?
        } else {
            scan_and_bisect(d, index, b, FRAC_PI_2)?
        };
        out.push(next);
    }

    if !out.windows(2).all(|w| w[0] < w[1]) || out[0] <= zero_lower_bound(d) {
        return Err(Error::NumericalFailure(format!(
            "zero table for d = {d} is not strictly increasing above the lower bound"
        )));
    }
    Ok(ZeroTable {
        d,
        zeros: out,
        tolerance: ZERO_TOLERANCE,
    })
}

/// First Rayleigh partial sum `Σ_{j≤m} 1/a_{d,j}²`; the full sum is `1/(2d)`.
pub fn rayleigh_partial(d: usize, m: usize) -> Result<f64> {
    Ok(zeros(d, m)?.rayleigh_sum())
}

/// Partial Weierstrass product `∏_{j≤m} (1 - z²/a_{d,j}²)`.
pub fn weierstrass_partial(d: usize, m: usize, z: f64) -> Result<f64> {
    let z = check_finite(z)?;
    Ok(zeros(d, m)?.weierstrass_product(z))
}
