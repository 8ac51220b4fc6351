//! Tug-of-war (TOW) dynamics.
//!
//! Each machine `k` carries an estimate `Q_k`. Playing `k` adds `+1` to
//! `Q_k` on a reward and `-ω` on a punishment, so that with a fixed weight
//! `Q_k = N_k - (1 + ω) L_k`. The decision is read off the displacements
//!
//! ```text
//! X_k = Q_k - mean_{j != k} Q_j + δ_k(t)
//! ```
//!
//! and the machine with the largest `X_k` is played. For two machines this is
//! `X_A = Q_A - Q_B + δ`, `X_B = -X_A`: the terminals of a rigid body whose
//! total displacement is conserved. For `M > 2` the mean-subtraction keeps
//! `Σ X_k = 0` when `δ = 0`.
//!
//! The weight that separates the top two machines is `ω₀ = γ / (2 - γ)` with
//! `γ = P_A + P_B` ([`omega_zero`]); separating the `m`-th and `(m+1)`-th best
//! uses `γ' = P_(m) + P_(m+1)` ([`omega_zero_multi`]).

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::PlayHistory;
use crate::error::{Error, Result};

/// Clamp margin for the adaptive estimate of γ.
pub const ADAPTIVE_GAMMA_EPS: f64 = 1e-6;

/// `ω₀ = γ / (2 - γ)`, defined for `0 < γ < 2`.
pub fn omega_zero(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::domain(format!(
            "gamma must lie in (0, 2), got {gamma}"
        )));
    }
    Ok(gamma / (2.0 - gamma))
}

/// `ω₀` separating the `m`-th and `(m+1)`-th best machines (`m` is 1-based).
pub fn omega_zero_multi(probs_sorted_desc: &[f64], m: usize) -> Result<f64> {
    if m == 0 || m >= probs_sorted_desc.len() {
        return Err(Error::domain(format!(
            "m must lie in 1..{} for {} machines, got {m}",
            probs_sorted_desc.len(),
            probs_sorted_desc.len()
        )));
    }
    if probs_sorted_desc.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::precondition(
            "probabilities must be sorted in descending order",
        ));
    }
    omega_zero(probs_sorted_desc[m - 1] + probs_sorted_desc[m])
}

/// Sum of the two largest values; the γ that [`omega_zero`] needs for a
/// bandit whose best two machines should be told apart.
pub fn top_two_sum(values: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &v in values {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    first + second
}

/// How the punishment weight ω is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMode {
    Fixed(f64),
    /// `ω₀(γ)` with the true γ handed to the player.
    OracleGamma(f64),
    /// `ω₀(γ̂)` with γ̂ re-estimated from the play history at every update.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationKind {
    None,
    /// i.i.d. uniform on `[-amplitude, amplitude]`.
    Uniform,
    /// i.i.d. normal with standard deviation `amplitude`.
    Gaussian,
    /// `amplitude * cos(2πt/period + 2πk/M)`; antisymmetric for two machines.
    Oscillation,
}

/// The fluctuation `δ_k(t)` added to each displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationConfig {
    pub kind: FluctuationKind,
    pub amplitude: f64,
    pub period: u64,
    /// Subtract the across-machine mean so the noise itself is zero-sum.
    #[serde(default)]
    pub shared: bool,
}

impl Default for FluctuationConfig {
    fn default() -> Self {
        FluctuationConfig {
            kind: FluctuationKind::Uniform,
            amplitude: 0.5,
            period: 100,
            shared: false,
        }
    }
}

impl FluctuationConfig {
    pub fn none() -> Self {
        FluctuationConfig {
            kind: FluctuationKind::None,
            amplitude: 0.0,
            ..Default::default()
        }
    }

    pub fn uniform(amplitude: f64) -> Self {
        FluctuationConfig {
            kind: FluctuationKind::Uniform,
            amplitude,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config(format!(
                "fluctuation amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if self.kind == FluctuationKind::Oscillation && self.period == 0 {
            return Err(Error::config("oscillation period must be positive"));
        }
        Ok(())
    }

    fn is_silent(&self) -> bool {
        self.kind == FluctuationKind::None || self.amplitude == 0.0
    }

    /// Fills `out` with `δ_k(t)`, one entry per machine.
    pub fn sample<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut [f64]) {
        if self.is_silent() {
            out.fill(0.0);
            return;
        }
        let a = self.amplitude;
        match self.kind {
            FluctuationKind::None => unreachable!(),
            FluctuationKind::Uniform => {
                for d in out.iter_mut() {
                    *d = rng.random_range(-a..=a);
                }
            }
            FluctuationKind::Gaussian => {
                for d in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *d = a * z;
                }
            }
            FluctuationKind::Oscillation => {
                let m = out.len() as f64;
                let phase = TAU * (t % self.period) as f64 / self.period as f64;
                for (k, d) in out.iter_mut().enumerate() {
                    *d = a * (phase + TAU * k as f64 / m).cos();
                }
            }
        }
        if self.shared {
            let mean = out.iter().sum::<f64>() / out.len() as f64;
            out.iter_mut().for_each(|d| *d -= mean);
        }
    }
}

/// Policy-level configuration for TOW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowConfig {
    pub omega: OmegaMode,
    pub fluct: FluctuationConfig,
}

/// Index of the largest value; exact ties are broken uniformly with `rng`.
pub(crate) fn argmax_random_tie<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == best).count();
    if ties <= 1 {
        return values.iter().position(|&v| v == best).unwrap_or(0);
    }
    let pick = rng.random_range(0..ties);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(k, _)| k)
        .unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowState {
    q: Vec<f64>,
    omega: OmegaMode,
    fluct: FluctuationConfig,
    time: u64,
}

impl TowState {
    pub fn new(machines: usize, omega: OmegaMode, fluct: FluctuationConfig) -> Result<Self> {
        if machines < 2 {
            return Err(Error::config("TOW needs at least 2 machines"));
        }
        match omega {
            OmegaMode::Fixed(w) if !(w >= 0.0 && w.is_finite()) => {
                return Err(Error::config(format!("omega must be finite and >= 0, got {w}")));
            }
            OmegaMode::OracleGamma(g) => {
                omega_zero(g).map_err(|e| Error::config(e.to_string()))?;
            }
            _ => {}
        }
        fluct.validate()?;
        Ok(TowState {
            q: vec![0.0; machines],
            omega,
            fluct,
            time: 0,
        })
    }

    pub fn from_config(machines: usize, config: &TowConfig) -> Result<Self> {
        Self::new(machines, config.omega, config.fluct)
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Overwrites the estimates; mostly useful for tests and examples.
    pub fn set_q(&mut self, q: Vec<f64>) -> Result<()> {
        if q.len() != self.q.len() {
            return Err(Error::precondition("one Q value per machine"));
        }
        self.q = q;
        Ok(())
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn omega_mode(&self) -> OmegaMode {
        self.omega
    }

    pub fn fluctuation(&self) -> &FluctuationConfig {
        &self.fluct
    }

    /// The weight in force for the next update.
    pub fn resolve_omega(&self, history: &PlayHistory) -> f64 {
        match self.omega {
            OmegaMode::Fixed(w) => w,
            // validated at construction
            OmegaMode::OracleGamma(g) => g / (2.0 - g),
            OmegaMode::Adaptive => {
                let rates: Vec<f64> = (0..history.machines()).map(|k| history.mean(k)).collect();
                let gamma = top_two_sum(&rates).clamp(ADAPTIVE_GAMMA_EPS, 2.0 - ADAPTIVE_GAMMA_EPS);
                gamma / (2.0 - gamma)
            }
        }
    }

    /// Displacements `X_k` at step `t` without fluctuation.
    pub fn base_displacements(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.q.len()];
        self.fill_base(&mut x);
        x
    }

    fn fill_base(&self, out: &mut [f64]) {
        let m = self.q.len() as f64;
        let total: f64 = self.q.iter().sum();
        for (x, &q) in out.iter_mut().zip(&self.q) {
            *x = q - (total - q) / (m - 1.0);
        }
    }

    /// Displacements `X_k` for the coming step, including `δ_k(t)`.
    pub fn displacements<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.q.len()];
        let mut delta = vec![0.0; self.q.len()];
        self.fill_base(&mut x);
        self.fluct.sample(self.time + 1, rng, &mut delta);
        x.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
        x
    }

    /// Machine to play next: the argmax of the displacements.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x = self.displacements(rng);
        argmax_random_tie(&x, rng)
    }

    /// Applies the learning rule for one play. `history` must already contain
    /// this play; Adaptive mode estimates ω from it.
    pub fn update(&mut self, machine: usize, reward: bool, history: &PlayHistory) -> Result<()> {
        let machines = self.q.len();
        if machine >= machines {
            return Err(Error::InvalidIndex {
                index: machine,
                machines,
            });
        }
        if reward {
            self.q[machine] += 1.0;
        } else {
            self.q[machine] -= self.resolve_omega(history);
        }
        self.time += 1;
        Ok(())
    }
}
