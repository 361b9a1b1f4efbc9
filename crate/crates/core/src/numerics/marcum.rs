//! First-order Marcum Q function.

use super::bessel::scaled_sequence;
use crate::error::{Error, Result};

const TERM_TOL: f64 = 1e-14;

/// `Q_1(b, beta) = ∫_beta^∞ x·exp(-(x²+b²)/2)·I_0(x·b) dx`, the upper tail of
/// a unit-scale Rician amplitude with line-of-sight parameter `b`.
///
/// Evaluated with the Neumann series in modified Bessel functions,
///
/// ```text
/// beta > b :  Q = e^{-(b-beta)²/2} Σ_{k>=0} (b/beta)^k  Ĩ_k(b·beta)
/// beta <= b:  Q = 1 - e^{-(b-beta)²/2} Σ_{k>=1} (beta/b)^k Ĩ_k(b·beta)
/// ```
///
/// where `Ĩ_k(x) = I_k(x)·e^{-x}`. The scaled Bessel terms never overflow, so
/// the series is used across the whole parameter range.
pub fn marcum_q1(b: f64, beta: f64) -> Result<f64> {
    if !b.is_finite() || !beta.is_finite() {
        return Err(Error::domain(
            "marcum_q1",
            format!("arguments must be finite, got b={b}, beta={beta}"),
        ));
    }
    if b < 0.0 || beta < 0.0 {
        return Err(Error::domain(
            "marcum_q1",
            format!("arguments must be >= 0, got b={b}, beta={beta}"),
        ));
    }
    Ok(q1_unchecked(b, beta))
}

pub(crate) fn q1_unchecked(b: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    if b == 0.0 {
        return (-0.5 * beta * beta).exp();
    }
    let x = b * beta;
    let prefactor = (-0.5 * (b - beta) * (b - beta)).exp();
    if prefactor == 0.0 {
        return if beta > b { 0.0 } else { 1.0 };
    }

    // I_k(x)/I_0(x) ~ exp(-k²/2x); 10·sqrt(x) terms push that below 1e-20.
    let terms = (10.0 * x.sqrt()) as usize + 40;
    let mut seq = vec![0.0; terms];
    scaled_sequence(x, &mut seq);

    let (ratio, first) = if beta > b { (b / beta, 0) } else { (beta / b, 1) };
    let mut sum = 0.0;
    let mut power = if first == 0 { 1.0 } else { ratio };
    for &ik in &seq[first..] {
        let term = power * ik;
        sum += term;
        if term <= TERM_TOL * sum {
            break;
        }
        power *= ratio;
    }
    let q = if first == 0 {
        prefactor * sum
    } else {
        1.0 - prefactor * sum
    };
    q.clamp(0.0, 1.0)
}
