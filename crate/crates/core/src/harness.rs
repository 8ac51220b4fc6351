//! Monte Carlo experiment runner.
//!
//! A trial is fully determined by `(base_seed, trial_index)`: the trial seed
//! is [`trial_seed`], the environment draws from stream 0 of that seed and the
//! policy from stream 1. Every policy therefore meets the same sequence of
//! environment uniforms, which makes comparisons use common random numbers.
//!
//! Trials run on the current rayon pool. Per-step regret values are rounded
//! once to a fixed-point grid of 2^-48 and accumulated as integers, so the
//! aggregate is bit-identical for any trial order or thread count.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{stream, trial_seed, BanditEnv, EnvSpec, PlayHistory, StreamRng};
use crate::error::{Error, Result};
use crate::models::{Baseline, CheaterState, RandomWalkState};
use crate::tow::{TowConfig, TowState};

/// A policy together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySpec {
    Tow(TowConfig),
    Cheater,
    RandomWalk { alpha: f64, beta: f64 },
    Baseline(Baseline),
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(format!("malformed {what} '{s}'")))
}

impl PolicySpec {
    /// Parses `tow`, `cheater`, `egreedy:<ε>`, `softmax:<τ>`, `ucb1`,
    /// `ucb1tuned`, `random` or `randomwalk:<α>,<β>`; `tow` takes its settings
    /// from `tow`.
    pub fn parse(name: &str, tow: TowConfig) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let spec = match (head.trim(), arg) {
            ("tow", None) => PolicySpec::Tow(tow),
            ("cheater", None) => PolicySpec::Cheater,
            ("ucb1", None) => PolicySpec::Baseline(Baseline::Ucb1),
            ("ucb1tuned", None) => PolicySpec::Baseline(Baseline::Ucb1Tuned),
            ("random", None) => PolicySpec::Baseline(Baseline::Random),
            ("egreedy", Some(a)) => {
                PolicySpec::Baseline(Baseline::EpsilonGreedy(parse_num(a, "epsilon")?))
            }
            ("softmax", Some(a)) => PolicySpec::Baseline(Baseline::Softmax(parse_num(a, "tau")?)),
            ("randomwalk", Some(a)) => {
                let (alpha, beta) = a.split_once(',').ok_or_else(|| {
                    Error::config(format!("randomwalk expects '<alpha>,<beta>', got '{a}'"))
                })?;
                PolicySpec::RandomWalk {
                    alpha: parse_num(alpha, "alpha")?,
                    beta: parse_num(beta, "beta")?,
                }
            }
            _ => return Err(Error::config(format!("unknown policy '{name}'"))),
        };
        spec.validate(2)?;
        Ok(spec)
    }

    /// Short name as accepted by [`PolicySpec::parse`].
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Tow(_) => "tow".into(),
            PolicySpec::Cheater => "cheater".into(),
            PolicySpec::RandomWalk { alpha, beta } => format!("randomwalk:{alpha},{beta}"),
            PolicySpec::Baseline(b) => match b {
                Baseline::EpsilonGreedy(e) => format!("egreedy:{e}"),
                Baseline::Softmax(t) => format!("softmax:{t}"),
                Baseline::Ucb1 => "ucb1".into(),
                Baseline::Ucb1Tuned => "ucb1tuned".into(),
                Baseline::Random => "random".into(),
            },
        }
    }

    pub fn validate(&self, machines: usize) -> Result<()> {
        match self {
            PolicySpec::Tow(cfg) => TowState::from_config(machines, cfg).map(drop),
            PolicySpec::Cheater if machines != 2 => Err(Error::config(format!(
                "the cheater algorithm needs exactly 2 machines, got {machines}"
            ))),
            PolicySpec::Cheater => Ok(()),
            PolicySpec::RandomWalk { alpha, beta } => {
                RandomWalkState::new(machines, *alpha, *beta).map(drop)
            }
            PolicySpec::Baseline(b) => b.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvSpec,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub record_stride: u64,
}

pub const DEFAULT_RECORD_STRIDE: u64 = 10;

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.policy.validate(self.env.machines())?;
        for (name, v) in [
            ("horizon", self.horizon),
            ("trials", self.trials),
            ("record_stride", self.record_stride),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Steps at which metrics are recorded: multiples of the stride up to the
    /// horizon.
    pub fn recorded_steps(&self) -> impl Iterator<Item = u64> {
        let stride = self.record_stride;
        (1..=self.horizon / stride).map(move |i| i * stride)
    }
}

/// Step-by-step log of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub chosen: Vec<usize>,
    pub rewards: Vec<bool>,
    /// Pseudo-regret `Σ (max_k P_k(t) - P_chosen(t))` up to and including each step.
    pub cum_regret: Vec<f64>,
}

impl TrialRecord {
    fn with_capacity(n: usize) -> Self {
        TrialRecord {
            chosen: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            cum_regret: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// Plays of machines that were not best at the time they were played, up
    /// to and including step `t`.
    pub fn suboptimal_plays(&self, env: &EnvSpec, t: u64) -> u64 {
        (1..=t)
            .filter(|&s| !is_best(env.probs_at(s), self.chosen[s as usize - 1]))
            .count() as u64
    }
}

fn is_best(probs: &[f64], k: usize) -> bool {
    probs.iter().all(|&p| p <= probs[k])
}

enum Agent {
    Tow(TowState),
    Walk(RandomWalkState),
    Baseline(Baseline),
}

impl Agent {
    fn select(&self, history: &PlayHistory, rng: &mut StreamRng) -> usize {
        match self {
            Agent::Tow(s) => s.select(rng),
            Agent::Walk(w) => w.select(rng),
            Agent::Baseline(b) => b.select(history, rng),
        }
    }

    fn observe(&mut self, machine: usize, reward: bool, history: &PlayHistory) -> Result<()> {
        match self {
            Agent::Tow(s) => s.update(machine, reward, history),
            Agent::Walk(w) => w.rw_step(machine, reward),
            Agent::Baseline(_) => Ok(()),
        }
    }
}

/// Runs trial `trial_index` of `config` from scratch.
pub fn run_trial(config: &RunConfig, trial_index: u64) -> Result<TrialRecord> {
    config.validate()?;
    run_trial_unchecked(config, trial_index)
}

fn run_trial_unchecked(config: &RunConfig, trial_index: u64) -> Result<TrialRecord> {
    let seed = trial_seed(config.base_seed, trial_index);
    let mut env = BanditEnv::with_rng(config.env.clone(), stream(seed, 0));
    let mut rng = stream(seed, 1);
    let machines = env.machines();
    let mut record = TrialRecord::with_capacity(config.horizon as usize);
    let mut regret = 0.0;
    let mut log = |record: &mut TrialRecord, env: &BanditEnv, t: u64, k: usize, r: bool| {
        let probs = env.probs_at(t);
        let best = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        regret += best - probs[k];
        record.chosen.push(k);
        record.rewards.push(r);
        record.cum_regret.push(regret);
    };

    let agent = match &config.policy {
        PolicySpec::Cheater => {
            let mut cheater = CheaterState::new();
            let mut declared = cheater.declare(&mut rng);
            for t in 1..=config.horizon {
                let step = cheater.cheater_step(&mut env, t, &mut rng)?;
                log(&mut record, &env, t, declared, step.outcomes[declared]);
                declared = step.declared;
            }
            return Ok(record);
        }
        PolicySpec::Tow(cfg) => Agent::Tow(TowState::from_config(machines, cfg)?),
        PolicySpec::RandomWalk { alpha, beta } => {
            Agent::Walk(RandomWalkState::new(machines, *alpha, *beta)?)
        }
        PolicySpec::Baseline(b) => Agent::Baseline(*b),
    };
    let mut agent = agent;
    let mut history = PlayHistory::new(machines);
    for t in 1..=config.horizon {
        let k = agent.select(&history, &mut rng);
        let reward = env.pull(k, t)?;
        history.record(k, reward)?;
        agent.observe(k, reward, &history)?;
        log(&mut record, &env, t, k, reward);
    }
    Ok(record)
}

const FIXED_SCALE: f64 = (1u64 << 48) as f64;

fn to_fixed(v: f64) -> i128 {
    (v * FIXED_SCALE).round() as i128
}

fn from_fixed(v: i128) -> f64 {
    v as f64 / FIXED_SCALE
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct StepAccumulator {
    regret: i128,
    regret_sq: i128,
    correct: u64,
    nb: u64,
}

fn accumulate(config: &RunConfig, record: &TrialRecord, acc: &mut [StepAccumulator]) {
    let mut nb = 0u64;
    let mut steps = config.recorded_steps().zip(acc.iter_mut()).peekable();
    for (i, &k) in record.chosen.iter().enumerate() {
        let t = i as u64 + 1;
        let best = is_best(config.env.probs_at(t), k);
        nb += u64::from(!best);
        if let Some((_, slot)) = steps.next_if(|(s, _)| *s == t) {
            let r = record.cum_regret[i];
            slot.regret += to_fixed(r);
            slot.regret_sq += to_fixed(r * r);
            slot.correct += u64::from(best);
            slot.nb += nb;
        }
    }
}

/// One row of aggregated output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub mean_regret: f64,
    pub se_regret: f64,
    pub correct_rate: f64,
    pub mean_nb: f64,
}

impl MetricsRow {
    /// CSV fields; floats use the shortest representation that parses back
    /// to the same value.
    pub fn fields(&self) -> [String; 5] {
        [
            self.step.to_string(),
            self.mean_regret.to_string(),
            self.se_regret.to_string(),
            self.correct_rate.to_string(),
            self.mean_nb.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub config: RunConfig,
    pub rows: Vec<MetricsRow>,
}

impl AggregateMetrics {
    pub fn final_row(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    pub fn row_at(&self, step: u64) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.step == step)
    }
}

/// Runs all trials of `config` and aggregates them at the recorded steps.
pub fn run_experiment(config: &RunConfig) -> Result<AggregateMetrics> {
    config.validate()?;
    let slots = config.recorded_steps().count();
    let totals = (0..config.trials)
        .into_par_iter()
        .try_fold(
            || vec![StepAccumulator::default(); slots],
            |mut acc, i| {
                let record = run_trial_unchecked(config, i)?;
                accumulate(config, &record, &mut acc);
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![StepAccumulator::default(); slots],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.regret += y.regret;
                    x.regret_sq += y.regret_sq;
                    x.correct += y.correct;
                    x.nb += y.nb;
                }
                Ok(a)
            },
        )?;

    let n = config.trials as f64;
    let rows = config
        .recorded_steps()
        .zip(totals)
        .map(|(step, acc)| {
            let mean = from_fixed(acc.regret) / n;
            let se = if config.trials > 1 {
                let var = (from_fixed(acc.regret_sq) - n * mean * mean) / (n - 1.0);
                (var.max(0.0) / n).sqrt()
            } else {
                0.0
            };
            MetricsRow {
                step,
                mean_regret: mean,
                se_regret: se,
                correct_rate: acc.correct as f64 / n,
                mean_nb: acc.nb as f64 / n,
            }
        })
        .collect();
    Ok(AggregateMetrics {
        config: config.clone(),
        rows,
    })
}

/// Path of the JSON provenance file written next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = File::create(path).map_err(io_err(path))?;
    let text = serde_json::to_string_pretty(value).expect("config serializes");
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(io_err(path))
}

const HEADER: [&str; 5] = ["step", "mean_regret", "se_regret", "correct_rate", "mean_nb"];

/// Writes the metrics as CSV and the run configuration as `<path>.json`.
pub fn write_results(metrics: &AggregateMetrics, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(HEADER).map_err(csv_err(path))?;
    for row in &metrics.rows {
        w.write_record(row.fields()).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    write_json(&metrics.config, &sidecar_path(path))
}

/// Reads back a CSV written by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<MetricsRow>, _>>()
        .map_err(csv_err(path))
}

/// Writes several runs into one CSV keyed by policy name, plus a JSON array
/// of their configurations.
pub fn write_comparison(runs: &[(String, AggregateMetrics)], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let mut header = vec!["policy"];
    header.extend(HEADER);
    w.write_record(&header).map_err(csv_err(path))?;
    for (name, metrics) in runs {
        for row in &metrics.rows {
            let mut record = vec![name.clone()];
            record.extend(row.fields());
            w.write_record(&record).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))?;
    let configs: Vec<&RunConfig> = runs.iter().map(|(_, m)| &m.config).collect();
    write_json(&configs, &sidecar_path(path))
}
