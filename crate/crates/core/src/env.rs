//! Bernoulli slot machines and the per-machine play counters.
//!
//! A [`BanditEnv`] owns its random stream. Every [`BanditEnv::pull`] draws
//! exactly one uniform `u` in `[0, 1)` and pays out iff `u < P_k`, so two
//! policies fed the same stream see the same sequence of uniforms (common
//! random numbers) even when they pick different machines.
//!
//! Streams are ChaCha8 keyed by a 64-bit seed; [`stream`] selects one of the
//! 2^64 independent streams under a key, which is how the harness gives the
//! environment and the policy of a trial their own sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The random generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// One step of the splitmix64 generator, used as a 64-bit mixing function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `base_seed`:
/// `splitmix64(base_seed ^ splitmix64(trial_index))`.
///
/// Trial seeds depend only on their own index, so adding trials never
/// reshuffles the existing ones.
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(trial_index))
}

/// Stream `id` of the ChaCha8 generator keyed by `seed`.
pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A step change of the reward probabilities, effective from step `t` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub t: u64,
    pub probs: Vec<f64>,
}

/// Static description of an environment: probabilities plus optional switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub switches: Vec<Switch>,
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.len() < 2 {
        return Err(Error::config(format!(
            "need at least 2 machines, got {}",
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::config(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl EnvSpec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let spec = EnvSpec {
            probs,
            switches: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_switches(mut self, switches: Vec<Switch>) -> Result<Self> {
        self.switches = switches;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_probs(&self.probs)?;
        let mut last = 0;
        for sw in &self.switches {
            if sw.t <= last {
                return Err(Error::config(format!(
                    "switch times must be strictly increasing and >= 1 (got {} after {last})",
                    sw.t
                )));
            }
            if sw.probs.len() != self.probs.len() {
                return Err(Error::config(format!(
                    "switch at t={} has {} probabilities, expected {}",
                    sw.t,
                    sw.probs.len(),
                    self.probs.len()
                )));
            }
            check_probs(&sw.probs)?;
            last = sw.t;
        }
        Ok(())
    }

    pub fn machines(&self) -> usize {
        self.probs.len()
    }

    /// Probabilities in force at step `t` (the last switch with time <= t).
    pub fn probs_at(&self, t: u64) -> &[f64] {
        self.switches
            .iter()
            .rev()
            .find(|sw| sw.t <= t)
            .map_or(&self.probs[..], |sw| &sw.probs[..])
    }

    pub fn is_stationary(&self) -> bool {
        self.switches.is_empty()
    }
}

/// A live environment: the spec plus its own random stream.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    spec: EnvSpec,
    rng: StreamRng,
}

impl BanditEnv {
    /// Stationary environment on stream 0 of `seed`.
    pub fn new(probs: Vec<f64>, seed: u64) -> Result<Self> {
        Ok(Self::with_rng(EnvSpec::new(probs)?, stream(seed, 0)))
    }

    pub fn from_spec(spec: EnvSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(Self::with_rng(spec, stream(seed, 0)))
    }

    /// Wraps an already validated spec around an existing stream.
    pub fn with_rng(spec: EnvSpec, rng: StreamRng) -> Self {
        BanditEnv { spec, rng }
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn machines(&self) -> usize {
        self.spec.machines()
    }

    pub fn probs_at(&self, t: u64) -> &[f64] {
        self.spec.probs_at(t)
    }

    /// Plays `machine` at step `t` (1-based) and reports whether it paid out.
    pub fn pull(&mut self, machine: usize, t: u64) -> Result<bool> {
        let machines = self.machines();
        if machine >= machines {
            return Err(Error::InvalidIndex {
                index: machine,
                machines,
            });
        }
        if t == 0 {
            return Err(Error::precondition("time steps start at 1"));
        }
        let p = self.spec.probs_at(t)[machine];
        let u: f64 = self.rng.random();
        Ok(u < p)
    }
}

/// Per-machine play counts `N_k` and punishment counts `L_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayHistory {
    plays: Vec<u64>,
    losses: Vec<u64>,
}

impl PlayHistory {
    pub fn new(machines: usize) -> Self {
        PlayHistory {
            plays: vec![0; machines],
            losses: vec![0; machines],
        }
    }

    pub fn from_counts(plays: Vec<u64>, losses: Vec<u64>) -> Result<Self> {
        if plays.len() != losses.len() {
            return Err(Error::precondition("plays and losses differ in length"));
        }
        if let Some(k) = (0..plays.len()).find(|&k| losses[k] > plays[k]) {
            return Err(Error::precondition(format!(
                "machine {k} has more losses ({}) than plays ({})",
                losses[k], plays[k]
            )));
        }
        Ok(PlayHistory { plays, losses })
    }

    pub fn record(&mut self, machine: usize, reward: bool) -> Result<()> {
        let machines = self.machines();
        if machine >= machines {
            return Err(Error::InvalidIndex {
                index: machine,
                machines,
            });
        }
        self.plays[machine] += 1;
        if !reward {
            self.losses[machine] += 1;
        }
        Ok(())
    }

    pub fn machines(&self) -> usize {
        self.plays.len()
    }

    pub fn plays(&self) -> &[u64] {
        &self.plays
    }

    pub fn losses(&self) -> &[u64] {
        &self.losses
    }

    pub fn wins(&self, machine: usize) -> u64 {
        self.plays[machine] - self.losses[machine]
    }

    pub fn total_plays(&self) -> u64 {
        self.plays.iter().sum()
    }

    /// Empirical reward rate, with 0.5 for a machine never played.
    pub fn mean(&self, machine: usize) -> f64 {
        match self.plays[machine] {
            0 => 0.5,
            n => self.wins(machine) as f64 / n as f64,
        }
    }
}
