//! Path loss, Rician/Rayleigh fading laws, the threshold transmission
//! policy and the largest stable fading threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EnvironmentParams, LinkClass};
use crate::numerics::{i0e, integrate, q1_unchecked, QuadratureSpec};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thresholds are never searched beyond this; `Q1` there is below 1e-80
/// for every Rician factor the model produces.
pub const BETA_HARD_CAP: f64 = 20.0;

/// `sqrt(2 ln 1e16)`: past `b` plus this, `Q1(b, x) <= exp(-(x-b)²/2) < 1e-16`.
const TAIL_SPAN: f64 = 8.584_525_296_336_33;

/// Amplitude law of a normalised fading coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FadingModel {
    /// Rician with line-of-sight parameter `b = sqrt(2K)`.
    Rician { b: f64 },
    /// Rayleigh with `Ω = 2`, i.e. Rician with `b = 0`.
    Rayleigh,
}

impl FadingModel {
    pub fn rician_from_k(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::domain(
                "rician_from_k",
                format!("K must be finite and >= 0, got {k}"),
            ));
        }
        Ok(FadingModel::Rician { b: (2.0 * k).sqrt() })
    }

    pub fn b(&self) -> f64 {
        match *self {
            FadingModel::Rician { b } => b,
            FadingModel::Rayleigh => 0.0,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let b = self.b();
        if b == 0.0 {
            x * (-0.5 * x * x).exp()
        } else {
            x * (-0.5 * (x - b) * (x - b)).exp() * i0e(x * b)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    /// `P(h > x) = Q1(b, x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            q1_unchecked(self.b(), x)
        }
    }

    /// Point beyond which the density carries less than 1e-16 of mass.
    pub fn support_end(&self) -> f64 {
        self.b() + TAIL_SPAN
    }

    /// `∫_beta^∞ x^order · f(x) dx` for even `order` in {0, 2, 4}.
    pub fn partial_moment(&self, order: u32, beta: f64, spec: &QuadratureSpec) -> Result<f64> {
        let beta = beta.max(0.0);
        if let FadingModel::Rayleigh = self {
            let s = beta * beta;
            let e = (-0.5 * s).exp();
            return match order {
                0 => Ok(e),
                2 => Ok((s + 2.0) * e),
                4 => Ok((s * s + 4.0 * s + 8.0) * e),
                _ => Err(Error::domain("partial_moment", format!("unsupported order {order}"))),
            };
        }
        if !matches!(order, 0 | 2 | 4) {
            return Err(Error::domain("partial_moment", format!("unsupported order {order}")));
        }
        if order == 0 {
            return Ok(self.tail(beta));
        }
        let end = self.support_end();
        if beta >= end {
            return Ok(0.0);
        }
        integrate(|x| x.powi(order as i32) * self.pdf(x), beta, end, spec)
    }

    /// `E[h^order]` over the whole support.
    pub fn full_moment(&self, order: u32) -> Result<f64> {
        let s = self.b() * self.b();
        match order {
            0 => Ok(1.0),
            2 => Ok(s + 2.0),
            4 => Ok(s * s + 8.0 * s + 8.0),
            _ => Err(Error::domain("full_moment", format!("unsupported order {order}"))),
        }
    }
}

/// Which fading law applies to each link class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingPolicy {
    /// Links touching a UAV are Rician with `K(d)`; ground-to-ground links
    /// are Rayleigh.
    #[default]
    GroundRayleigh,
    /// Every link is Rician with `K(d)`, so ground links get `K` near `K_N`.
    AllRician,
}

impl FadingPolicy {
    pub fn model(&self, class: LinkClass, p_los: f64, env: &EnvironmentParams) -> Result<FadingModel> {
        match (self, class) {
            (FadingPolicy::GroundRayleigh, LinkClass::G2G) => Ok(FadingModel::Rayleigh),
            _ => FadingModel::rician_from_k(rician_factor(p_los, env.k_los, env.k_nlos)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub num_subchannels: u32,
    pub tx_power_w: f64,
    pub sinr_threshold: f64,
    pub bandwidth_hz: f64,
    pub noise_temp_k: f64,
    pub boltzmann_j_per_k: f64,
    pub fading: FadingPolicy,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            num_subchannels: 14,
            tx_power_w: 0.2,
            sinr_threshold: 10.0,
            bandwidth_hz: 100e6,
            noise_temp_k: 290.0,
            boltzmann_j_per_k: 1.38e-23,
            fading: FadingPolicy::default(),
        }
    }
}

impl ChannelParams {
    /// Thermal noise power `kTW` in watts.
    pub fn noise_w(&self) -> f64 {
        self.boltzmann_j_per_k * self.noise_temp_k * self.bandwidth_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_subchannels == 0 {
            return Err(Error::Validation("channel.num_subchannels must be >= 1".into()));
        }
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("sinr_threshold", self.sinr_threshold),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_temp_k", self.noise_temp_k),
            ("boltzmann_j_per_k", self.boltzmann_j_per_k),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("channel.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Free-space constant `C = λ_w² / (16π² d0²)`.
pub fn path_loss_constant(env: &EnvironmentParams) -> f64 {
    let wavelength = SPEED_OF_LIGHT / env.carrier_hz;
    wavelength * wavelength / (16.0 * std::f64::consts::PI.powi(2) * env.d0_m * env.d0_m)
}

/// Large-scale amplitude gain `ĥ` of a link of length `d` with LoS
/// probability `p_los`. The exponent mixes the LoS and NLoS slopes.
pub fn path_loss_amplitude(d: f64, p_los: f64, env: &EnvironmentParams) -> Result<f64> {
    if !(d.is_finite() && d >= env.d0_m) {
        return Err(Error::domain(
            "path_loss_amplitude",
            format!("distance {d} m is below the reference distance {} m", env.d0_m),
        ));
    }
    let p = p_los.clamp(0.0, 1.0);
    let alpha = env.alpha_los * p + env.alpha_nlos * (1.0 - p);
    Ok((path_loss_constant(env) * (env.d0_m / d).powf(alpha)).sqrt())
}

/// Distance-dependent Rician factor, geometric between `K_N` and `K_L`.
pub fn rician_factor(p_los: f64, k_los: f64, k_nlos: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_los) {
        return Err(Error::domain(
            "rician_factor",
            format!("P_L must be in [0,1], got {p_los}"),
        ));
    }
    if !(k_los > 0.0 && k_nlos > 0.0) {
        return Err(Error::domain(
            "rician_factor",
            format!("factors must be > 0, got {k_los} / {k_nlos}"),
        ));
    }
    Ok(k_nlos * ((k_los / k_nlos).ln() * p_los * p_los).exp())
}

/// Probability that the best of `num_subchannels` i.i.d. sub-channels
/// exceeds `beta`: `1 - (1 - Q1)^|F|`.
pub fn transmission_probability(model: &FadingModel, beta: f64, num_subchannels: u32) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain(
            "transmission_probability",
            format!("beta must be >= 0, got {beta}"),
        ));
    }
    if num_subchannels == 0 {
        return Err(Error::domain(
            "transmission_probability",
            "need at least one sub-channel",
        ));
    }
    Ok(mu_unchecked(model, beta, num_subchannels))
}

pub(crate) fn mu_unchecked(model: &FadingModel, beta: f64, num_subchannels: u32) -> f64 {
    let q = model.tail(beta);
    (-(f64::from(num_subchannels) * (-q).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// Largest threshold whose service rate `μ(β)/T_slt` still covers the
/// arrival rate `λ`; capped at [`BETA_HARD_CAP`].
pub fn beta_upper_bound(model: &FadingModel, lambda: f64, t_slot_s: f64, num_subchannels: u32) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0 && t_slot_s > 0.0) || num_subchannels == 0 {
        return Err(Error::domain(
            "beta_upper_bound",
            format!("need lambda >= 0, t_slot > 0, |F| >= 1 (got {lambda}, {t_slot_s}, {num_subchannels})"),
        ));
    }
    let load = lambda * t_slot_s;
    if load >= 1.0 {
        return Err(Error::InfeasibleLoad { load });
    }
    // Per-channel tail mass needed: 1 - (1 - λT)^{1/|F|}.
    let target = -((-load).ln_1p() / f64::from(num_subchannels)).exp_m1();
    if model.tail(BETA_HARD_CAP) >= target {
        return Ok(BETA_HARD_CAP);
    }
    if let FadingModel::Rayleigh = model {
        return Ok((-2.0 * target.ln()).sqrt());
    }
    // Bisection keeping the feasible end, so the result always satisfies
    // Q1(b, β) >= target.
    let (mut lo, mut hi) = (0.0_f64, BETA_HARD_CAP);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if model.tail(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bisect_root, integrate_semi_infinite, marcum_q1};

    #[test]
    fn path_loss_examples() {
        let env = EnvironmentParams::default();
        let c = path_loss_constant(&env);
        // λ_w = c/f = 0.124913 m, C = λ_w²/(16π²·100).
        assert!((c - 0.124_913_524_166_666_7_f64.powi(2) / (1600.0 * std::f64::consts::PI.powi(2))).abs() < 1e-18);
        assert!((c - 9.88e-7).abs() < 1e-9);
        assert!((path_loss_amplitude(10.0, 0.3, &env).unwrap() - c.sqrt()).abs() < 1e-15);
        assert!((path_loss_amplitude(20.0, 1.0, &env).unwrap() - c.sqrt() / 2.0).abs() < 1e-15);
        assert!(path_loss_amplitude(9.99, 1.0, &env).is_err());
    }

    #[test]
    fn rician_factor_examples() {
        assert_eq!(rician_factor(0.0, 15.0, 1.0).unwrap(), 1.0);
        assert!((rician_factor(1.0, 15.0, 1.0).unwrap() - 15.0).abs() < 1e-12);
        let k = rician_factor(0.5, 15.0, 1.0).unwrap();
        assert!((k - (15.0_f64.ln() * 0.25).exp()).abs() < 1e-12);
        assert!((k - 1.968).abs() < 1e-3);
    }

    #[test]
    fn fading_laws() {
        let ray = FadingModel::Rayleigh;
        assert_eq!(ray.cdf(0.0), 0.0);
        assert!((ray.cdf(2.0) - (1.0 - (-2.0_f64).exp())).abs() < 1e-15);
        let ric = FadingModel::Rician { b: 2.0 };
        let spec = QuadratureSpec::default();
        let mass = integrate_semi_infinite(|x| ric.pdf(x), 0.0, &spec).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
        for i in 0..=40 {
            let x = i as f64 * 0.2;
            let q = marcum_q1(2.0, x).unwrap();
            assert!((ric.cdf(x) + q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_moments_against_quadrature() {
        let spec = QuadratureSpec::default();
        for model in [
            FadingModel::Rayleigh,
            FadingModel::Rician { b: 0.7 },
            FadingModel::Rician { b: 5.0 },
        ] {
            for &beta in &[0.0, 1.0, 2.5, 4.0, 7.0] {
                for order in [2u32, 4] {
                    let got = model.partial_moment(order, beta, &spec).unwrap();
                    let want = integrate_semi_infinite(|x| x.powi(order as i32) * model.pdf(x), beta, &spec).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-9 * want.max(1.0),
                        "{model:?} beta={beta} k={order}"
                    );
                }
            }
            let m2 = model.partial_moment(2, 0.0, &spec).unwrap();
            let m4 = model.partial_moment(4, 0.0, &spec).unwrap();
            assert!((m2 - model.full_moment(2).unwrap()).abs() < 1e-9);
            assert!((m4 - model.full_moment(4).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn transmission_probability_examples() {
        let ray = FadingModel::Rayleigh;
        assert_eq!(transmission_probability(&ray, 0.0, 14).unwrap(), 1.0);
        let mu = transmission_probability(&ray, 2.0, 14).unwrap();
        assert!((mu - (1.0 - (1.0 - (-2.0_f64).exp()).powi(14))).abs() < 1e-14);
        assert!((mu - 0.8694).abs() < 1e-4);
        assert!(transmission_probability(&ray, 20.0, 14).unwrap() < 1e-80);
    }

    #[test]
    fn beta_max_rayleigh_closed_form() {
        let b = beta_upper_bound(&FadingModel::Rayleigh, 100.0, 0.005, 14).unwrap();
        let rhs = 1.0 - 0.5_f64.powf(1.0 / 14.0);
        assert!((rhs - 0.0483).abs() < 1e-4);
        assert!((b - (-2.0 * rhs.ln()).sqrt()).abs() < 1e-12);
        assert!((b - 2.462).abs() < 1e-3);
    }

    #[test]
    fn beta_max_rician_boundary() {
        for &b in &[1.0, 2.0, 3.5, 5.5] {
            let model = FadingModel::Rician { b };
            let beta = beta_upper_bound(&model, 100.0, 0.005, 14).unwrap();
            let mu = transmission_probability(&model, beta, 14).unwrap();
            assert!((mu / 0.005 - 100.0).abs() < 1e-6, "b={b} service={}", mu / 0.005);
            // Independent route through the generic bisection.
            let rhs = 1.0 - 0.5_f64.powf(1.0 / 14.0);
            let other = bisect_root(|x| marcum_q1(b, x).unwrap() - rhs, 0.0, 20.0, 1e-10).unwrap();
            assert!((beta - other).abs() < 1e-8);
        }
    }

    #[test]
    fn beta_max_limits() {
        let m = FadingModel::Rician { b: 3.0 };
        assert_eq!(beta_upper_bound(&m, 1e-300, 0.005, 14).unwrap(), BETA_HARD_CAP);
        assert_eq!(beta_upper_bound(&m, 0.0, 0.005, 14).unwrap(), BETA_HARD_CAP);
        assert!(matches!(
            beta_upper_bound(&m, 200.0, 0.005, 14),
            Err(Error::InfeasibleLoad { .. })
        ));
    }

    #[test]
    fn los_links_allow_higher_thresholds() {
        let env = EnvironmentParams::default();
        let policy = FadingPolicy::GroundRayleigh;
        let nlos = policy.model(LinkClass::G2G, 0.0, &env).unwrap();
        for &p in &[0.0, 0.3, 0.8, 1.0] {
            let los = policy.model(LinkClass::A2G, p, &env).unwrap();
            assert!(
                beta_upper_bound(&los, 100.0, 0.005, 14).unwrap() > beta_upper_bound(&nlos, 100.0, 0.005, 14).unwrap()
            );
        }
    }

    #[test]
    fn noise_power() {
        let c = ChannelParams::default();
        assert!((c.noise_w() - 1.38e-23 * 290.0 * 100e6).abs() < 1e-12 * c.noise_w());
        assert!((c.noise_w() - 4.0e-13).abs() < 1e-15);
    }
}
