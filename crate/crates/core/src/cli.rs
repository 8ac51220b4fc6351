//! Command-line front end.
//!
//! Every experiment subcommand accepts `--config <file.toml>`; the file uses
//! the flag names as keys (`probs`, `horizon`, `omega`, `[fluct]`, `[[switch]]`,
//! ...) and any flag given on the command line wins over the file.
//!
//! ```toml
//! algo = "tow"
//! omega = "auto"          # "auto" | "adaptive" | <number>
//! probs = [0.6, 0.4]
//! horizon = 1000
//! trials = 1000
//! seed = 42
//! stride = 10
//! out = "r.csv"
//!
//! [fluct]
//! kind = "uniform"        # none | uniform | gaussian | oscillation
//! amplitude = 0.5
//! period = 100
//! shared = false
//!
//! [[switch]]
//! t = 500
//! probs = [0.4, 0.6]
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::BoundReport;
use crate::env::{EnvSpec, Switch};
use crate::error::{Error, Result};
use crate::harness::{
    run_experiment, write_comparison, write_results, PolicySpec, RunConfig, DEFAULT_RECORD_STRIDE,
};
use crate::models::Baseline;
use crate::tow::{top_two_sum, FluctuationConfig, FluctuationKind, OmegaMode, TowConfig};

/// Environment variable capping the number of worker threads (0 = automatic).
pub const THREADS_ENV: &str = "TOW_BANDIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tow-bandit", version, about = "Tug-of-war bandit experiments and regret bounds")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run one policy and write per-step metrics as CSV.
    Run(RunArgs),
    /// Run several policies on common random numbers into one CSV.
    Compare(CompareArgs),
    /// Run one experiment per value of a parameter grid.
    Sweep(SweepArgs),
    /// Print analytic error and regret bounds for a two-machine instance.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML file with default values for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reward probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    /// Probability switch `T:P1,P2,...` effective from step T (repeatable).
    #[arg(long = "switch", value_name = "T:PROBS")]
    switches: Vec<String>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record every k-th step.
    #[arg(long)]
    stride: Option<u64>,
    /// TOW weight: `auto`, `adaptive` or a number.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long = "fluct-kind", value_name = "KIND")]
    fluct_kind: Option<String>,
    #[arg(long = "fluct-amplitude", value_name = "A")]
    fluct_amplitude: Option<f64>,
    #[arg(long = "fluct-period", value_name = "STEPS")]
    fluct_period: Option<u64>,
    /// Make the fluctuation zero-sum across machines.
    #[arg(long = "fluct-shared")]
    fluct_shared: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Policy name (tow, cheater, egreedy:<e>, softmax:<t>, ucb1, ucb1tuned, random, randomwalk:<a>,<b>).
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Policy names, space separated.
    #[arg(long, num_args = 1..)]
    policies: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long)]
    algo: Option<String>,
    /// One of omega, amplitude, epsilon, tau, alpha, beta.
    #[arg(long)]
    param: Option<String>,
    /// `start:stop:step`, endpoints inclusive.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long = "mu-a")]
    mu_a: f64,
    #[arg(long = "mu-b")]
    mu_b: f64,
    #[arg(long)]
    horizon: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFluct {
    kind: Option<String>,
    amplitude: Option<f64>,
    period: Option<u64>,
    shared: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FileOmega {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<String>,
    policies: Option<Vec<String>>,
    omega: Option<FileOmega>,
    probs: Option<Vec<f64>>,
    #[serde(default, rename = "switch")]
    switches: Vec<Switch>,
    horizon: Option<u64>,
    trials: Option<u64>,
    seed: Option<u64>,
    stride: Option<u64>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    param: Option<String>,
    grid: Option<String>,
    #[serde(default)]
    fluct: FileFluct,
}

fn load_file(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::config(format!("{}: {}", path.display(), e.message())))
}

/// A validated subcommand, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run {
        config: RunConfig,
        out: PathBuf,
    },
    Compare {
        configs: Vec<RunConfig>,
        out: PathBuf,
    },
    Sweep {
        param: String,
        runs: Vec<(f64, RunConfig)>,
        out_dir: PathBuf,
    },
    Bound {
        mu_a: f64,
        mu_b: f64,
        horizon: u64,
    },
}

/// Why parsing stopped: either clap's own outcome (usage error, `--help`,
/// `--version`) or an invalid configuration.
#[derive(Debug)]
pub enum ParseError {
    Usage(clap::Error),
    Invalid(Error),
}

impl From<Error> for ParseError {
    fn from(e: Error) -> Self {
        ParseError::Invalid(e)
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseError::Usage)?;
    Ok(match cli.command {
        Sub::Run(a) => {
            let file = load_file(a.exp.config.as_deref())?;
            let shared = Shared::resolve(&a.exp, &file)?;
            let algo = a.algo.or(file.algo.clone()).unwrap_or_else(|| "tow".into());
            let out = a.out.or(file.out).ok_or_else(|| Error::config("missing --out"))?;
            Command::Run {
                config: shared.config(PolicySpec::parse(&algo, shared.tow)?)?,
                out,
            }
        }
        Sub::Compare(a) => {
            let file = load_file(a.exp.config.as_deref())?;
            let shared = Shared::resolve(&a.exp, &file)?;
            let names = a
                .policies
                .or(file.policies.clone())
                .ok_or_else(|| Error::config("missing --policies"))?;
            let configs = names
                .iter()
                .map(|n| shared.config(PolicySpec::parse(n, shared.tow)?))
                .collect::<Result<Vec<_>>>()?;
            let out = a.out.or(file.out).ok_or_else(|| Error::config("missing --out"))?;
            Command::Compare { configs, out }
        }
        Sub::Sweep(a) => {
            let file = load_file(a.exp.config.as_deref())?;
            let shared = Shared::resolve(&a.exp, &file)?;
            let algo = a.algo.or(file.algo.clone()).unwrap_or_else(|| "tow".into());
            let param = a
                .param
                .or(file.param.clone())
                .ok_or_else(|| Error::config("missing --param"))?;
            let grid = a
                .grid
                .or(file.grid.clone())
                .ok_or_else(|| Error::config("missing --grid"))?;
            let runs = parse_grid(&grid)?
                .into_iter()
                .map(|v| Ok((v, shared.config(sweep_policy(&algo, shared.tow, &param, v)?)?)))
                .collect::<Result<Vec<_>>>()?;
            let out_dir = a
                .out_dir
                .or(file.out_dir)
                .ok_or_else(|| Error::config("missing --out-dir"))?;
            Command::Sweep {
                param,
                runs,
                out_dir,
            }
        }
        Sub::Bound(a) => {
            BoundReport::bernoulli(a.mu_a, a.mu_b, a.horizon)?;
            Command::Bound {
                mu_a: a.mu_a,
                mu_b: a.mu_b,
                horizon: a.horizon,
            }
        }
    })
}

/// Settings common to every policy of a run.
struct Shared {
    env: EnvSpec,
    horizon: u64,
    trials: u64,
    seed: u64,
    stride: u64,
    tow: TowConfig,
}

impl Shared {
    fn resolve(a: &ExperimentArgs, file: &FileConfig) -> Result<Self> {
        let probs = a
            .probs
            .clone()
            .or(file.probs.clone())
            .ok_or_else(|| Error::config("missing --probs"))?;
        let switches = if a.switches.is_empty() {
            file.switches.clone()
        } else {
            a.switches.iter().map(|s| parse_switch(s)).collect::<Result<_>>()?
        };
        let env = EnvSpec::new(probs)?.with_switches(switches)?;

        let omega_text = match (&a.omega, &file.omega) {
            (Some(s), _) => s.clone(),
            (None, Some(FileOmega::Text(s))) => s.clone(),
            (None, Some(FileOmega::Number(v))) => v.to_string(),
            (None, None) => "auto".into(),
        };
        let omega = parse_omega(&omega_text, &env.probs)?;

        let mut fluct = FluctuationConfig::default();
        if let Some(kind) = a.fluct_kind.as_ref().or(file.fluct.kind.as_ref()) {
            fluct.kind = parse_fluct_kind(kind)?;
        }
        if let Some(v) = a.fluct_amplitude.or(file.fluct.amplitude) {
            fluct.amplitude = v;
        }
        if let Some(v) = a.fluct_period.or(file.fluct.period) {
            fluct.period = v;
        }
        fluct.shared = a.fluct_shared || file.fluct.shared.unwrap_or(false);
        if fluct.kind == FluctuationKind::None {
            fluct.amplitude = 0.0;
        }
        fluct.validate()?;

        Ok(Shared {
            env,
            horizon: a.horizon.or(file.horizon).unwrap_or(1000),
            trials: a.trials.or(file.trials).unwrap_or(1000),
            seed: a.seed.or(file.seed).unwrap_or(0),
            stride: a.stride.or(file.stride).unwrap_or(DEFAULT_RECORD_STRIDE),
            tow: TowConfig { omega, fluct },
        })
    }

    fn config(&self, policy: PolicySpec) -> Result<RunConfig> {
        let config = RunConfig {
            env: self.env.clone(),
            policy,
            horizon: self.horizon,
            trials: self.trials,
            base_seed: self.seed,
            record_stride: self.stride,
        };
        config.validate()?;
        Ok(config)
    }
}

/// `auto` gives `OracleGamma` with γ the sum of the two largest true
/// probabilities.
fn parse_omega(text: &str, probs: &[f64]) -> Result<OmegaMode> {
    match text.trim() {
        "auto" => {
            let gamma = top_two_sum(probs);
            if !(gamma > 0.0 && gamma < 2.0) {
                return Err(Error::config(format!(
                    "--omega auto needs the top two probabilities to sum into (0, 2), got {gamma}"
                )));
            }
            Ok(OmegaMode::OracleGamma(gamma))
        }
        "adaptive" => Ok(OmegaMode::Adaptive),
        s => s
            .parse::<f64>()
            .map(OmegaMode::Fixed)
            .map_err(|_| Error::config(format!("malformed --omega '{s}'"))),
    }
}

fn parse_fluct_kind(s: &str) -> Result<FluctuationKind> {
    Ok(match s.trim() {
        "none" => FluctuationKind::None,
        "uniform" => FluctuationKind::Uniform,
        "gaussian" => FluctuationKind::Gaussian,
        "oscillation" => FluctuationKind::Oscillation,
        other => return Err(Error::config(format!("unknown fluctuation kind '{other}'"))),
    })
}

fn parse_switch(s: &str) -> Result<Switch> {
    let (t, probs) = s
        .split_once(':')
        .ok_or_else(|| Error::config(format!("malformed --switch '{s}', expected T:P1,P2,...")))?;
    let t = t
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("malformed switch time '{t}'")))?;
    let probs = probs
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("malformed probability '{p}'")))
        })
        .collect::<Result<_>>()?;
    Ok(Switch { t, probs })
}

/// Expands `start:stop:step`; `stop` is included when it lies within half a
/// step of the last grid point.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("malformed grid '{s}'")))
        })
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::config(format!("grid '{s}' must be start:stop:step")));
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::config(format!(
            "grid '{s}' needs step > 0 and stop >= start"
        )));
    }
    let n = ((stop - start) / step + 0.5).floor() as u64;
    Ok((0..=n)
        .map(|i| {
            let v = start + i as f64 * step;
            (v * 1e12).round() / 1e12
        })
        .collect())
}

fn sweep_policy(algo: &str, tow: TowConfig, param: &str, v: f64) -> Result<PolicySpec> {
    let head = algo.split(':').next().unwrap_or("").trim();
    let spec = match (param, head) {
        ("omega", "tow") => PolicySpec::Tow(TowConfig {
            omega: OmegaMode::Fixed(v),
            ..tow
        }),
        ("amplitude", "tow") => PolicySpec::Tow(TowConfig {
            fluct: FluctuationConfig {
                amplitude: v,
                ..tow.fluct
            },
            ..tow
        }),
        ("epsilon", "egreedy") => PolicySpec::Baseline(Baseline::EpsilonGreedy(v)),
        ("tau", "softmax") => PolicySpec::Baseline(Baseline::Softmax(v)),
        ("alpha" | "beta", "randomwalk") => {
            let (alpha, beta) = match PolicySpec::parse(algo, tow) {
                Ok(PolicySpec::RandomWalk { alpha, beta }) => (alpha, beta),
                _ => (1.0, 1.0),
            };
            if param == "alpha" {
                PolicySpec::RandomWalk { alpha: v, beta }
            } else {
                PolicySpec::RandomWalk { alpha, beta: v }
            }
        }
        _ => {
            return Err(Error::config(format!(
                "cannot sweep '{param}' for policy '{algo}'"
            )))
        }
    };
    Ok(spec)
}

/// Reads [`THREADS_ENV`]; unset, empty or 0 means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        _ => Ok(0),
    }
}

fn sweep_file_name(param: &str, v: f64) -> String {
    format!("{param}_{v}.csv")
}

/// Runs `command`, writing data files and human-readable results to `stdout`.
pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    let io = |source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match command {
        Command::Run { config, out } => {
            let metrics = run_experiment(config)?;
            write_results(&metrics, out)?;
            if let Some(row) = metrics.final_row() {
                writeln!(
                    stdout,
                    "{}: step {} mean_regret {:.6} se {:.6} correct_rate {:.4} mean_nb {:.4}",
                    config.policy.name(),
                    row.step,
                    row.mean_regret,
                    row.se_regret,
                    row.correct_rate,
                    row.mean_nb
                )
                .map_err(io)?;
            }
        }
        Command::Compare { configs, out } => {
            let mut runs = Vec::with_capacity(configs.len());
            for config in configs {
                let metrics = run_experiment(config)?;
                if let Some(row) = metrics.final_row() {
                    writeln!(
                        stdout,
                        "{:<20} mean_regret {:>12.6} se {:>10.6} mean_nb {:>10.4}",
                        config.policy.name(),
                        row.mean_regret,
                        row.se_regret,
                        row.mean_nb
                    )
                    .map_err(io)?;
                }
                runs.push((config.policy.name(), metrics));
            }
            write_comparison(&runs, out)?;
        }
        Command::Sweep {
            param,
            runs,
            out_dir,
        } => {
            std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
                path: out_dir.clone(),
                source,
            })?;
            let summary_path = out_dir.join("summary.csv");
            let mut summary = csv::Writer::from_path(&summary_path).map_err(|source| Error::Csv {
                path: summary_path.clone(),
                source,
            })?;
            let csv_err = |source| Error::Csv {
                path: summary_path.clone(),
                source,
            };
            summary
                .write_record([
                    "value",
                    "final_mean_regret",
                    "final_se_regret",
                    "final_correct_rate",
                    "final_mean_nb",
                ])
                .map_err(csv_err)?;
            for (v, config) in runs {
                let metrics = run_experiment(config)?;
                write_results(&metrics, &out_dir.join(sweep_file_name(param, *v)))?;
                if let Some(row) = metrics.final_row() {
                    summary
                        .write_record([
                            v.to_string(),
                            row.mean_regret.to_string(),
                            row.se_regret.to_string(),
                            row.correct_rate.to_string(),
                            row.mean_nb.to_string(),
                        ])
                        .map_err(csv_err)?;
                    writeln!(stdout, "{param}={v}: mean_regret {:.6}", row.mean_regret).map_err(io)?;
                }
            }
            summary.flush().map_err(|source| Error::Io {
                path: summary_path.clone(),
                source,
            })?;
        }
        Command::Bound {
            mu_a,
            mu_b,
            horizon,
        } => {
            let report = BoundReport::bernoulli(*mu_a, *mu_b, *horizon)?;
            write!(stdout, "{}", report.to_text()).map_err(io)?;
            writeln!(stdout, "{}", serde_json::to_string(&report).expect("report serializes"))
                .map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> std::result::Result<Command, ParseError> {
        parse_args(std::iter::once("tow-bandit").chain(args.split_whitespace()))
    }

    #[test]
    fn run_flags_map_to_config() {
        let cmd = parse(
            "run --algo tow --omega auto --probs 0.6,0.4 --horizon 1000 --trials 1000 --seed 42 --out r.csv",
        )
        .unwrap();
        let Command::Run { config, out } = cmd else { panic!() };
        assert_eq!(out, PathBuf::from("r.csv"));
        assert_eq!(config.horizon, 1000);
        assert_eq!(config.trials, 1000);
        assert_eq!(config.base_seed, 42);
        assert_eq!(config.record_stride, 10);
        assert_eq!(config.env.probs, vec![0.6, 0.4]);
        let PolicySpec::Tow(t) = config.policy else { panic!() };
        assert_eq!(t.omega, OmegaMode::OracleGamma(1.0));
        assert_eq!(t.fluct, FluctuationConfig::default());
    }

    #[test]
    fn omega_variants() {
        let omega = |s: &str| {
            let Command::Run { config, .. } =
                parse(&format!("run --probs 0.7,0.2,0.5 --omega {s} --out x.csv")).unwrap()
            else {
                panic!()
            };
            let PolicySpec::Tow(t) = config.policy else { panic!() };
            t.omega
        };
        assert_eq!(omega("auto"), OmegaMode::OracleGamma(1.2));
        assert_eq!(omega("adaptive"), OmegaMode::Adaptive);
        assert_eq!(omega("0.25"), OmegaMode::Fixed(0.25));
        assert!(matches!(
            parse("run --probs 0.6,0.4 --omega lots --out x.csv"),
            Err(ParseError::Invalid(_))
        ));
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(parse("run --bogus --out x"), Err(ParseError::Usage(_))));
        assert!(matches!(parse("run --horizon ten --probs 0.5,0.4 --out x"), Err(ParseError::Usage(_))));
        assert!(matches!(parse("run --probs 0.6,0.4"), Err(ParseError::Invalid(_))));
        assert!(matches!(parse("run --out x.csv"), Err(ParseError::Invalid(_))));
        assert!(matches!(parse("bound --mu-a 0.6"), Err(ParseError::Usage(_))));
        assert!(matches!(parse(""), Err(ParseError::Usage(_))));
        let Err(ParseError::Usage(e)) = parse("--help") else { panic!() };
        assert_eq!(e.kind(), clap::error::ErrorKind::DisplayHelp);
    }

    #[test]
    fn compare_shares_everything_but_policy() {
        let Command::Compare { configs, .. } =
            parse("compare --policies tow egreedy:0.1 randomwalk:1,1 --probs 0.6,0.4 --seed 3 --out c.csv")
                .unwrap()
        else {
            panic!()
        };
        assert_eq!(configs.len(), 3);
        assert_eq!(configs[2].policy, PolicySpec::RandomWalk { alpha: 1.0, beta: 1.0 });
        assert!(configs.iter().all(|c| c.base_seed == 3 && c.env == configs[0].env));
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.2:2.0:0.1").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[1], 0.3);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(parse_grid("1:1:0.5").unwrap(), vec![1.0]);
        assert_eq!(parse_grid("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse_grid("0:1.2:0.3").unwrap().len(), 5);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:0.1").is_err());
    }

    #[test]
    fn sweep_builds_one_run_per_value() {
        let Command::Sweep { runs, param, .. } =
            parse("sweep --algo tow --param omega --grid 0.5:1.5:0.5 --probs 0.6,0.4 --out-dir d").unwrap()
        else {
            panic!()
        };
        assert_eq!(param, "omega");
        let omegas: Vec<_> = runs
            .iter()
            .map(|(_, c)| match c.policy {
                PolicySpec::Tow(t) => t.omega,
                _ => panic!(),
            })
            .collect();
        assert_eq!(
            omegas,
            vec![OmegaMode::Fixed(0.5), OmegaMode::Fixed(1.0), OmegaMode::Fixed(1.5)]
        );
        assert!(matches!(
            parse("sweep --algo ucb1 --param omega --grid 0:1:1 --probs 0.6,0.4 --out-dir d"),
            Err(ParseError::Invalid(_))
        ));
        let Command::Sweep { runs, .. } =
            parse("sweep --algo randomwalk:2,3 --param beta --grid 1:2:1 --probs 0.6,0.4 --out-dir d").unwrap()
        else {
            panic!()
        };
        assert_eq!(runs[1].1.policy, PolicySpec::RandomWalk { alpha: 2.0, beta: 2.0 });
    }

    #[test]
    fn switch_flags() {
        let Command::Run { config, .. } =
            parse("run --algo random --probs 0.6,0.4 --switch 100:0.4,0.6 --switch 200:0.5,0.5 --out x")
                .unwrap()
        else {
            panic!()
        };
        assert_eq!(config.env.switches.len(), 2);
        assert_eq!(config.env.probs_at(150), &[0.4, 0.6]);
        assert!(parse("run --probs 0.6,0.4 --switch 100 --out x").is_err());
        assert!(parse("run --probs 0.6,0.4 --switch 100:0.5 --out x").is_err());
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(
            &path,
            r#"
algo = "tow"
omega = 0.5
probs = [0.7, 0.3]
horizon = 300
trials = 7
seed = 9
out = "from_file.csv"

[fluct]
kind = "oscillation"
amplitude = 0.2
period = 50

[[switch]]
t = 100
probs = [0.3, 0.7]
"#,
        )
        .unwrap();
        let Command::Run { config, out } =
            parse(&format!("run --config {} --trials 11", path.display())).unwrap()
        else {
            panic!()
        };
        assert_eq!(out, PathBuf::from("from_file.csv"));
        assert_eq!(config.trials, 11);
        assert_eq!(config.horizon, 300);
        assert_eq!(config.base_seed, 9);
        assert_eq!(config.env.switches[0].t, 100);
        let PolicySpec::Tow(t) = config.policy else { panic!() };
        assert_eq!(t.omega, OmegaMode::Fixed(0.5));
        assert_eq!(t.fluct.kind, FluctuationKind::Oscillation);
        assert_eq!(t.fluct.period, 50);

        std::fs::write(&path, "probs = [0.6, 0.4]\nbogus = 1\n").unwrap();
        assert!(matches!(
            parse(&format!("run --config {} --out x", path.display())),
            Err(ParseError::Invalid(_))
        ));
    }

    #[test]
    fn bound_command_prints_text_and_json() {
        let cmd = parse("bound --mu-a 0.6 --mu-b 0.4 --horizon 1000").unwrap();
        let mut out = Vec::new();
        execute(&cmd, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("phi               0.288675"));
        assert!(text.contains("phi_t             0.408248"));
        let json: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        for key in ["phi", "phi_t", "e_nb_bound", "e_nb_limit", "regret_bound", "regret_limit"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!((json["regret_limit"].as_f64().unwrap() - 2.5).abs() < 1e-12);
        assert!((json["regret_limit_tow"].as_f64().unwrap() - 1.3).abs() < 1e-12);
        assert!(parse("bound --mu-a 0.4 --mu-b 0.6 --horizon 10").is_err());
    }
}
