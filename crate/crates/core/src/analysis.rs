//! Closed-form error probabilities and regret bounds.
//!
//! With `S = S_A - S_B` approximately normal, the chance of judging the worse
//! machine to be better after `N` samples is `Q(φ √N)` where `Q` is the
//! standard normal upper tail and `φ` the mean gap over the combined standard
//! deviation. Bounding `Q(x) <= ½ exp(-x²/2)` and the resulting sum by an
//! integral gives
//!
//! ```text
//! E(N_B) = Σ_{t<N} Q(φ √t) <= ½ - (exp(-φ²(N-1)/2) - 1) / φ²  ->  ½ + 1/φ²
//! ```
//!
//! so the regret `(μ_A - μ_B) E(N_B)` stays bounded as `N` grows. The same
//! argument for TOW at `ω = ω₀` uses `φ_T = (μ_A - μ_B)(1 + ω₀) / (2σ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tow::omega_zero;

/// Standard normal upper tail `Q(x) = P(Z > x) = ½ erfc(x/√2)`.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Chernoff-type bound `½ exp(-x²/2)` on `Q(x)`, for `x >= 0`.
pub fn chernoff(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("chernoff bound needs x >= 0, got {x}")));
    }
    Ok(0.5 * (-0.5 * x * x).exp())
}

/// Variance `p (1 - p)` of a coin with success probability `p`.
pub fn bernoulli_variance(p: f64) -> f64 {
    p * (1.0 - p)
}

/// Separation of the cheater sums: `(μ_A - μ_B) / √(σ_A² + σ_B²)`.
pub fn phi(mu_a: f64, mu_b: f64, sigma_a: f64, sigma_b: f64) -> Result<f64> {
    if !(mu_a > mu_b) {
        return Err(Error::precondition(format!(
            "phi needs mu_a > mu_b, got {mu_a} <= {mu_b}"
        )));
    }
    let var = sigma_a * sigma_a + sigma_b * sigma_b;
    if !(var > 0.0) {
        return Err(Error::domain("combined variance must be positive"));
    }
    Ok((mu_a - mu_b) / var.sqrt())
}

/// Separation of TOW at weight `omega0`: `(μ_A - μ_B)(1 + ω₀) / (2σ)`.
pub fn phi_tow(mu_a: f64, mu_b: f64, sigma: f64, omega0: f64) -> Result<f64> {
    if !(mu_a > mu_b) {
        return Err(Error::precondition(format!(
            "phi_tow needs mu_a > mu_b, got {mu_a} <= {mu_b}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(omega0 >= 0.0) {
        return Err(Error::precondition(format!("omega0 must be >= 0, got {omega0}")));
    }
    Ok((mu_a - mu_b) * (1.0 + omega0) / (2.0 * sigma))
}

/// Probability of a wrong judgment after `n` samples, `Q(φ √n)`.
pub fn p_wrong(phi_value: f64, n: u64) -> f64 {
    qfunc(phi_value * (n as f64).sqrt())
}

/// Upper bound on `E(N_B)` over a horizon of `n >= 1` steps.
pub fn e_nb_bound(phi_value: f64, n: u64) -> Result<f64> {
    check_phi(phi_value)?;
    if n == 0 {
        return Err(Error::precondition("horizon must be at least 1"));
    }
    let phi2 = phi_value * phi_value;
    Ok(0.5 - (-0.5 * phi2 * (n - 1) as f64).exp_m1() / phi2)
}

/// Horizon-free limit `½ + 1/φ²` of [`e_nb_bound`].
pub fn e_nb_limit(phi_value: f64) -> Result<f64> {
    check_phi(phi_value)?;
    Ok(0.5 + 1.0 / (phi_value * phi_value))
}

pub fn regret_bound(mu_a: f64, mu_b: f64, phi_value: f64, n: u64) -> Result<f64> {
    Ok((mu_a - mu_b) * e_nb_bound(phi_value, n)?)
}

pub fn regret_limit(mu_a: f64, mu_b: f64, phi_value: f64) -> Result<f64> {
    Ok((mu_a - mu_b) * e_nb_limit(phi_value)?)
}

fn check_phi(phi_value: f64) -> Result<()> {
    if !(phi_value > 0.0 && phi_value.is_finite()) {
        return Err(Error::domain(format!("phi must be positive, got {phi_value}")));
    }
    Ok(())
}

/// Mean and variance of the TOW difference `S = S_A - S_B` after `n = N_A + N_B`
/// plays with imbalance `d = N_A - N_B`, taking expected losses
/// `L_k = (1 - μ_k) N_k`.
pub fn s_moments_tow(
    mu_a: f64,
    mu_b: f64,
    sigma_a: f64,
    sigma_b: f64,
    omega: f64,
    n: u64,
    d: i64,
) -> Result<(f64, f64)> {
    if d.unsigned_abs() > n {
        return Err(Error::precondition(format!("|d| = {} exceeds n = {n}", d.abs())));
    }
    let (n, d) = (n as f64, d as f64);
    let mean = 0.5 * (mu_a - mu_b) * (1.0 + omega) * n + d_coefficient(mu_a, mu_b, omega) * d;
    let (va, vb) = (sigma_a * sigma_a, sigma_b * sigma_b);
    let var = 0.5 * (va + vb) * n + 0.5 * (va - vb) * d;
    Ok((mean, var))
}

/// Coefficient of `D` in `E(S)`: `((μ_A + μ_B)/2)(1 + ω) - ω`. Zero at
/// `ω = ω₀(μ_A + μ_B)`.
pub fn d_coefficient(mu_a: f64, mu_b: f64, omega: f64) -> f64 {
    0.5 * (mu_a + mu_b) * (1.0 + omega) - omega
}

/// Analytic summary of a two-machine Bernoulli instance.
///
/// `phi`, `e_nb_*` and `regret_*` describe the cheater algorithm; the `_tow`
/// fields repeat them with `phi_t` for TOW at `ω₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mu_a: f64,
    pub mu_b: f64,
    pub horizon: u64,
    pub omega0: f64,
    pub phi: f64,
    pub phi_t: f64,
    pub e_nb_bound: f64,
    pub e_nb_limit: f64,
    pub regret_bound: f64,
    pub regret_limit: f64,
    pub e_nb_bound_tow: f64,
    pub e_nb_limit_tow: f64,
    pub regret_bound_tow: f64,
    pub regret_limit_tow: f64,
}

impl BoundReport {
    /// Bounds for coins paying `mu_a > mu_b` over `horizon` steps. Unequal
    /// variances enter `phi_t` through `σ² = (σ_A² + σ_B²)/2`.
    pub fn bernoulli(mu_a: f64, mu_b: f64, horizon: u64) -> Result<Self> {
        for p in [mu_a, mu_b] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("probability {p} outside [0, 1]")));
            }
        }
        let (va, vb) = (bernoulli_variance(mu_a), bernoulli_variance(mu_b));
        let phi_c = phi(mu_a, mu_b, va.sqrt(), vb.sqrt())?;
        let omega0 = omega_zero(mu_a + mu_b)?;
        let phi_t = phi_tow(mu_a, mu_b, (0.5 * (va + vb)).sqrt(), omega0)?;
        Ok(BoundReport {
            mu_a,
            mu_b,
            horizon,
            omega0,
            phi: phi_c,
            phi_t,
            e_nb_bound: e_nb_bound(phi_c, horizon)?,
            e_nb_limit: e_nb_limit(phi_c)?,
            regret_bound: regret_bound(mu_a, mu_b, phi_c, horizon)?,
            regret_limit: regret_limit(mu_a, mu_b, phi_c)?,
            e_nb_bound_tow: e_nb_bound(phi_t, horizon)?,
            e_nb_limit_tow: e_nb_limit(phi_t)?,
            regret_bound_tow: regret_bound(mu_a, mu_b, phi_t, horizon)?,
            regret_limit_tow: regret_limit(mu_a, mu_b, phi_t)?,
        })
    }

    /// Aligned two-column text rendering.
    pub fn to_text(&self) -> String {
        let rows = [
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
            ("omega0", self.omega0),
            ("phi", self.phi),
            ("phi_t", self.phi_t),
            ("e_nb_bound", self.e_nb_bound),
            ("e_nb_limit", self.e_nb_limit),
            ("regret_bound", self.regret_bound),
            ("regret_limit", self.regret_limit),
            ("e_nb_bound_tow", self.e_nb_bound_tow),
            ("e_nb_limit_tow", self.e_nb_limit_tow),
            ("regret_bound_tow", self.regret_bound_tow),
            ("regret_limit_tow", self.regret_limit_tow),
        ];
        let mut out = format!("{:<18}{}\n", "horizon", self.horizon);
        for (name, v) in rows {
            out.push_str(&format!("{name:<18}{v:.6}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qfunc_reference_points() {
        assert_eq!(qfunc(0.0), 0.5);
        // P(Z > 1) to 17 digits
        assert!((qfunc(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        for x in [0.3, 1.7, 4.2, 7.9] {
            assert!((qfunc(x) + qfunc(-x) - 1.0).abs() < 1e-15);
        }
        assert!(qfunc(40.0) >= 0.0 && qfunc(-40.0) == 1.0);
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff(0.0).unwrap(), 0.5);
        let c1 = chernoff(1.0).unwrap();
        assert!((c1 - 0.5 * (-0.5f64).exp()).abs() < 1e-16);
        assert!((c1 - 0.303_265_329_856_316_7).abs() < 1e-15);
        assert!(c1 >= qfunc(1.0));
        assert!(chernoff(-0.1).is_err());
    }

    #[test]
    fn phi_values() {
        let s = 0.24f64.sqrt();
        let p = phi(0.6, 0.4, s, s).unwrap();
        assert!((p - 0.2 / 0.48f64.sqrt()).abs() < 1e-15);
        assert!((p - 0.288_675_134_594_812_9).abs() < 1e-12);
        assert!((phi(0.6, 0.4, 2.0 * s, 2.0 * s).unwrap() - p / 2.0).abs() < 1e-15);
        assert!((phi(0.7, 0.3, s, s).unwrap() - 2.0 * p).abs() < 1e-15);
        assert!(matches!(phi(0.6, 0.4, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(phi(0.4, 0.6, s, s), Err(Error::Precondition(_))));
    }

    #[test]
    fn phi_tow_values() {
        let s = 0.24f64.sqrt();
        let pt = phi_tow(0.6, 0.4, s, 1.0).unwrap();
        assert!((pt - 0.408_248_290_463_863).abs() < 1e-12);
        let p = phi(0.6, 0.4, s, s).unwrap();
        assert!((pt - std::f64::consts::SQRT_2 * p).abs() < 1e-15);
        assert!(phi_tow(0.5 + 1e-12, 0.5, s, 1.0).unwrap() < 1e-11);
        assert!(matches!(phi_tow(0.6, 0.4, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn wrong_judgment_probability() {
        assert_eq!(p_wrong(0.3, 0), 0.5);
        let p = 0.2 / 0.48f64.sqrt();
        let v = p_wrong(p, 100);
        assert!((v - qfunc(p * 10.0)).abs() < 1e-18);
        assert!((v - 0.001_946).abs() < 5e-7, "{v}");
        let mut prev = 1.0;
        for n in 0..500 {
            let v = p_wrong(p, n);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn e_nb_values() {
        assert_eq!(e_nb_bound(0.7, 1).unwrap(), 0.5);
        let p = 0.2 / 0.48f64.sqrt();
        assert!((e_nb_limit(p).unwrap() - 12.5).abs() < 1e-12);
        assert!(e_nb_bound(p, 1000).unwrap() <= 12.5);
        assert!(e_nb_bound(p, 0).is_err());
        assert!(e_nb_bound(0.0, 10).is_err());
    }

    #[test]
    fn regret_values() {
        let s = 0.24f64.sqrt();
        let p = phi(0.6, 0.4, s, s).unwrap();
        assert!((regret_limit(0.6, 0.4, p).unwrap() - 2.5).abs() < 1e-12);
        let pt = phi_tow(0.6, 0.4, s, 1.0).unwrap();
        assert!((1.0 / (pt * pt) - 6.0).abs() < 1e-12);
        assert!((regret_limit(0.6, 0.4, pt).unwrap() - 1.3).abs() < 1e-12);
        assert!(regret_bound(0.5 + 1e-9, 0.5, 0.3, 1000).unwrap() < 1e-7);
    }

    #[test]
    fn s_moments() {
        assert_eq!(s_moments_tow(0.6, 0.4, 0.5, 0.5, 1.0, 0, 0).unwrap(), (0.0, 0.0));
        let (m, v) = s_moments_tow(0.6, 0.4, 0.3, 0.3, 1.0, 100, 40).unwrap();
        assert!((m - 0.1 * 2.0 * 100.0).abs() < 1e-12);
        assert!((v - 0.09 * 100.0).abs() < 1e-12);
        // unequal sigma: variance depends on d
        let (_, v) = s_moments_tow(0.6, 0.4, 0.5, 0.3, 1.0, 100, 40).unwrap();
        assert!((v - (0.17 * 100.0 + 0.08 * 40.0)).abs() < 1e-12);
        assert!(s_moments_tow(0.6, 0.4, 0.5, 0.5, 1.0, 3, -4).is_err());
        assert!(d_coefficient(0.7, 0.5, omega_zero(1.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn bound_report_example() {
        let r = BoundReport::bernoulli(0.6, 0.4, 1000).unwrap();
        assert!((r.phi - 0.288_675).abs() < 1e-6);
        assert!((r.phi_t - 0.408_248).abs() < 1e-6);
        assert!((r.regret_limit - 2.5).abs() < 1e-12);
        assert!((r.regret_limit_tow - 1.3).abs() < 1e-12);
        assert!(r.e_nb_bound <= r.e_nb_limit);
        assert!(r.to_text().contains("regret_limit      2.500000"));
        assert!(BoundReport::bernoulli(1.0, 0.0, 10).is_err());
        assert!(BoundReport::bernoulli(0.4, 0.6, 10).is_err());
    }
}
