//! Comparison models and baseline policies.
//!
//! * [`RandomWalkState`]: each machine's walker steps `+α` on a reward and
//!   `-β` on a punishment, so `R_k = α N_k - (α + β) L_k`. Dividing by `α`
//!   gives the TOW estimate with `ω = β/α`.
//! * [`CheaterState`]: an imaginary player that pulls both machines every
//!   step, sums the outcomes, and declares the machine with the larger sum.
//! * [`q_prime`], [`q_diff`], [`q_double_prime_diff`]: estimates of a player
//!   who knows `γ = P_A + P_B` and can therefore update the machine it did not
//!   play. The rescaled difference `(Q'_A - Q'_B) / (2 - γ)` coincides with the
//!   TOW difference `Q_A - Q_B` exactly when `ω = ω₀(γ)`.
//! * [`Baseline`]: ε-greedy, softmax, UCB1, UCB1-tuned and uniform random in
//!   their textbook forms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{BanditEnv, PlayHistory};
use crate::error::{Error, Result};
use crate::tow::{argmax_random_tie, omega_zero};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkState {
    r: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl RandomWalkState {
    pub fn new(machines: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(format!(
                "random walk flights must be positive, got alpha={alpha} beta={beta}"
            )));
        }
        if machines < 2 {
            return Err(Error::config("random walk needs at least 2 machines"));
        }
        Ok(RandomWalkState {
            r: vec![0.0; machines],
            alpha,
            beta,
        })
    }

    pub fn displacements(&self) -> &[f64] {
        &self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rw_step(&mut self, machine: usize, reward: bool) -> Result<()> {
        let machines = self.r.len();
        let r = self.r.get_mut(machine).ok_or(Error::InvalidIndex {
            index: machine,
            machines,
        })?;
        if reward {
            *r += self.alpha;
        } else {
            *r -= self.beta;
        }
        Ok(())
    }

    /// The walker furthest to the right, ties broken uniformly.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        argmax_random_tie(&self.r, rng)
    }
}

/// `E(R) = (α p - β (1 - p)) n`.
pub fn rw_expected(alpha: f64, beta: f64, p: f64, n: u64) -> f64 {
    (alpha * p - beta * (1.0 - p)) * n as f64
}

/// Whether `P_B < β/(α+β) < P_A`, i.e. the better walker drifts right and the
/// worse one left.
pub fn separation_ok(alpha: f64, beta: f64, p_a: f64, p_b: f64) -> Result<bool> {
    if !(p_a > p_b) {
        return Err(Error::precondition(format!(
            "separation needs p_a > p_b, got {p_a} <= {p_b}"
        )));
    }
    let threshold = beta / (alpha + beta);
    Ok(p_b < threshold && threshold < p_a)
}

/// `β/α` placing the threshold `β/(α+β)` at the midpoint `γ/2`; equal to
/// [`omega_zero`].
pub fn alpha_beta_ratio_from_gamma(gamma: f64) -> Result<f64> {
    omega_zero(gamma)
}

/// Outcome of one cheater step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheaterStep {
    /// What each machine paid at this step.
    pub outcomes: [bool; 2],
    /// The machine declared for the next step.
    pub declared: usize,
}

/// Running sums `S_A`, `S_B` of the cheater algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CheaterState {
    s: [f64; 2],
    loss_weight: f64,
}

impl Default for CheaterState {
    fn default() -> Self {
        Self::new()
    }
}

impl CheaterState {
    /// Plain mode: `S_k` counts rewards.
    pub fn new() -> Self {
        CheaterState {
            s: [0.0; 2],
            loss_weight: 0.0,
        }
    }

    /// TOW-analysis mode: every punishment also subtracts `omega`.
    pub fn with_loss_weight(omega: f64) -> Self {
        CheaterState {
            s: [0.0; 2],
            loss_weight: omega,
        }
    }

    pub fn sums(&self) -> [f64; 2] {
        self.s
    }

    /// The machine the current sums point at, uniformly random on a tie.
    pub fn declare<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        argmax_random_tie(&self.s, rng)
    }

    /// Pulls both machines at step `t` (machine 0 first), folds the outcomes
    /// into the sums and declares the machine for step `t + 1`.
    pub fn cheater_step<R: Rng + ?Sized>(
        &mut self,
        env: &mut BanditEnv,
        t: u64,
        rng: &mut R,
    ) -> Result<CheaterStep> {
        if env.machines() != 2 {
            return Err(Error::config(format!(
                "the cheater algorithm is defined for 2 machines, got {}",
                env.machines()
            )));
        }
        let outcomes = [env.pull(0, t)?, env.pull(1, t)?];
        for (s, &won) in self.s.iter_mut().zip(&outcomes) {
            *s += if won { 1.0 } else { -self.loss_weight };
        }
        Ok(CheaterStep {
            outcomes,
            declared: self.declare(rng),
        })
    }
}

fn two_machines(history: &PlayHistory) -> Result<([f64; 2], [f64; 2])> {
    if history.machines() != 2 {
        return Err(Error::precondition(format!(
            "expected a 2-machine history, got {} machines",
            history.machines()
        )));
    }
    let n = [history.plays()[0] as f64, history.plays()[1] as f64];
    let l = [history.losses()[0] as f64, history.losses()[1] as f64];
    Ok((n, l))
}

/// `(Q'_A, Q'_B)` with `Q'_A = N_A - L_A + (γ - 1) N_B + L_B` and symmetrically
/// for B.
pub fn q_prime(history: &PlayHistory, gamma: f64) -> Result<(f64, f64)> {
    let ([na, nb], [la, lb]) = two_machines(history)?;
    omega_zero(gamma)?;
    Ok((
        na - la + (gamma - 1.0) * nb + lb,
        nb - lb + (gamma - 1.0) * na + la,
    ))
}

/// `Q_A - Q_B = (N_A - N_B) - (1 + ω)(L_A - L_B)`.
pub fn q_diff(history: &PlayHistory, omega: f64) -> Result<f64> {
    let ([na, nb], [la, lb]) = two_machines(history)?;
    Ok((na - nb) - (1.0 + omega) * (la - lb))
}

/// `Q''_A - Q''_B = (N_A - N_B) - 2/(2 - γ) (L_A - L_B)`.
pub fn q_double_prime_diff(history: &PlayHistory, gamma: f64) -> Result<f64> {
    let ([na, nb], [la, lb]) = two_machines(history)?;
    omega_zero(gamma)?;
    Ok((na - nb) - 2.0 / (2.0 - gamma) * (la - lb))
}

/// Standard bandit baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    EpsilonGreedy(f64),
    Softmax(f64),
    Ucb1,
    Ucb1Tuned,
    Random,
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Baseline::EpsilonGreedy(e) if !(0.0..=1.0).contains(&e) => Err(Error::config(
                format!("epsilon must lie in [0, 1], got {e}"),
            )),
            Baseline::Softmax(tau) if !(tau > 0.0) => Err(Error::config(format!(
                "softmax temperature must be positive, got {tau}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, history: &PlayHistory, rng: &mut R) -> usize {
        let m = history.machines();
        let means = || (0..m).map(|k| history.mean(k)).collect::<Vec<_>>();
        match *self {
            Baseline::Random => rng.random_range(0..m),
            Baseline::EpsilonGreedy(eps) => {
                if eps > 0.0 && rng.random::<f64>() < eps {
                    rng.random_range(0..m)
                } else {
                    argmax_random_tie(&means(), rng)
                }
            }
            Baseline::Softmax(tau) => {
                let means = means();
                let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = means.iter().map(|&x| ((x - top) / tau).exp()).collect();
                let mut u = rng.random::<f64>() * weights.iter().sum::<f64>();
                for (k, w) in weights.iter().enumerate() {
                    if u < *w {
                        return k;
                    }
                    u -= w;
                }
                m - 1
            }
            Baseline::Ucb1 | Baseline::Ucb1Tuned => {
                // one forced pass in index order before the index applies
                if let Some(k) = history.plays().iter().position(|&n| n == 0) {
                    return k;
                }
                let ln_n = (history.total_plays() as f64).ln();
                let index: Vec<f64> = (0..m)
                    .map(|k| {
                        let n_k = history.plays()[k] as f64;
                        let mean = history.mean(k);
                        let bonus = 2.0 * ln_n / n_k;
                        if *self == Baseline::Ucb1 {
                            mean + bonus.sqrt()
                        } else {
                            let v = mean * (1.0 - mean) + bonus.sqrt();
                            mean + (ln_n / n_k * v.min(0.25)).sqrt()
                        }
                    })
                    .collect();
                argmax_random_tie(&index, rng)
            }
        }
    }
}
