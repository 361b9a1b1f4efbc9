//! Special functions and generic numerical routines.

mod bessel;
mod marcum;
mod quadrature;

pub use bessel::{bessel_i0, bessel_i0_scaled, bessel_i1, bessel_i1_scaled};
pub use marcum::marcum_q1;
pub use quadrature::{integrate, integrate_semi_infinite, QuadratureSpec};

pub(crate) use bessel::i0e;
pub(crate) use marcum::q1_unchecked;

use crate::error::{Error, Result};

/// Standard normal CDF, `Φ(x) = erfc(-x/√2)/2`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("std_normal_cdf", "argument is NaN"));
    }
    Ok(normal_cdf_unchecked(x))
}

pub(crate) fn normal_cdf_unchecked(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate far into the tail.
pub(crate) fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Bisection for a root of a monotone `g` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` and returns its midpoint.
/// `g(lo)` and `g(hi)` must differ in sign (or one of them must be zero).
pub fn bisect_root<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Config(format!(
            "bisection needs finite lo <= hi and tol > 0 (lo {lo}, hi {hi}, tol {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() || ga.is_nan() || gb.is_nan() {
        return Err(Error::Bracket {
            lo,
            hi,
            g_lo: ga,
            g_hi: gb,
        });
    }
    let a_negative = ga < 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_cdf(8.0).unwrap() - 1.0).abs() < 1e-12);
        let v = std_normal_cdf(1.0).unwrap();
        assert!((v - 0.841_344_746_068_542_9).abs() < 1e-14, "{v:.17}");
        for i in -60..=60 {
            let x = i as f64 * 0.13;
            let s = std_normal_cdf(x).unwrap() + std_normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(std_normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn bisection() {
        let r = bisect_root(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        let target = 0.0483_f64;
        let r = bisect_root(|x| (-0.5 * x * x).exp() - target, 0.0, 10.0, 1e-12).unwrap();
        assert!((r - (-2.0 * target.ln()).sqrt()).abs() < 1e-11);
        assert!((r - 2.462).abs() < 1e-3);

        assert!(matches!(
            bisect_root(|x| x + 1.0, 0.0, 2.0, 1e-9),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn bisection_on_marcum() {
        // Dense tabulation of Q1(2, ·) locates the 0.5 crossing independently.
        let grid: Vec<f64> = (0..=200_000).map(|i| i as f64 * 5e-5).collect();
        let tabulated = grid
            .windows(2)
            .find(|w| marcum_q1(2.0, w[0]).unwrap() >= 0.5 && marcum_q1(2.0, w[1]).unwrap() < 0.5)
            .map(|w| w[0])
            .unwrap();
        let r = bisect_root(|x| marcum_q1(2.0, x).unwrap() - 0.5, 0.0, 10.0, 1e-10).unwrap();
        assert!((r - tabulated).abs() <= 5e-5, "bisect {r} vs table {tabulated}");
    }
}
