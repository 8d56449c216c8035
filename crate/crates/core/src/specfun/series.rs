use twofloat::TwoFloat;

use super::{check_finite, BesselOrderDim};
use crate::error::{Error, Result};

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 10_000;

/// Power series of `j_{d/2-1}(z)` with the term recurrence
/// `t_{n+1} = t_n · (-z²/4) / ((n+1)(n+1+ν))`, `t_0 = 1`.
///
/// Summation stops once the terms are past their peak and
/// `|t_n| < tol · max(1, |S_n|)`. The sum is carried in double-double, so for
/// large `z` the result is only as good as `peak_term · 1e-32`.
pub fn normalized_bessel_series(d: usize, z: f64, tol: f64) -> Result<f64> {
    let order = BesselOrderDim::new(d)?;
    let z = check_finite(z)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("series tolerance must be > 0, got {tol}")));
    }
    series_unchecked(order.nu(), z, tol)
}

pub(crate) fn series_unchecked(nu: f64, z: f64, tol: f64) -> Result<f64> {
    // -z²/4, exact in double-double
    let q = -TwoFloat::new_mul(z, z) / 4.0;
    let q_abs = 0.25 * z * z;
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for n in 0..MAX_SERIES_TERMS {
        let n = n as f64;
        // (n+1)(n+1+ν) is an exact f64 for every n reached here
        let denom = (n + 1.0) * (n + 1.0 + nu);
        term = term * q / denom;
        sum += term;
        let decreasing = denom >= q_abs;
        if decreasing && term.hi().abs() < tol * sum.hi().abs().max(1.0) {
            return Ok(sum.hi() + sum.lo());
        }
    }
    Err(Error::NumericalFailure(format!(
        "Bessel series did not converge within {MAX_SERIES_TERMS} terms (nu = {nu}, z = {z})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on the Poisson integral in θ, 20000 panels.
    fn simpson_poisson(d: usize, z: f64) -> f64 {
        let n = 20_000;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (z * t.cos()).cos() * t.sin().powi(d as i32 - 2);
        let mut acc = f(0.0) + f(std::f64::consts::PI);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let integral = acc * h / 3.0;
        let nu = d as f64 / 2.0 - 1.0;
        let ln_norm = statrs::function::gamma::ln_gamma(nu + 1.0)
            - statrs::function::gamma::ln_gamma(nu + 0.5)
            - 0.5 * std::f64::consts::PI.ln();
        integral * ln_norm.exp()
    }

    #[test]
    fn one_at_origin() {
        assert_eq!(normalized_bessel_series(4, 0.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        assert!(matches!(
            normalized_bessel_series(4, 1.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            normalized_bessel_series(4, 1.0, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            normalized_bessel_series(4, 1.0, f64::NAN),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn j0_at_one() {
        let oracle = simpson_poisson(2, 1.0);
        // frozen from the Simpson oracle above
        assert!((oracle - 0.765_197_686_6).abs() < 1e-10);
        let v = normalized_bessel_series(2, 1.0, 1e-12).unwrap();
        assert!((v - oracle).abs() < 1e-10);
    }

    #[test]
    fn high_dimension_monotone_terms() {
        let s = normalized_bessel_series(300, 24.0, 1e-12).unwrap();
        let q = super::super::normalized_bessel_quadrature(300, 24.0, 128).unwrap();
        assert!((s - q).abs() < 1e-9);
    }

    #[test]
    fn survives_heavy_cancellation() {
        // sin(z)/z at z = 50 has a largest series term around 1e20.
        let v = normalized_bessel_series(3, 50.0, 1e-18).unwrap();
        assert!((v - 50.0_f64.sin() / 50.0).abs() < 1e-12);
    }
}
