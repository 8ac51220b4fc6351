//! Multi-armed bandits solved by tug-of-war (TOW) dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`env`]: Bernoulli slot machines with seeded streams and play counters.
//! * [`tow`]: the TOW policy, its learning rule and the weight `ω₀`.
//! * [`models`]: the random-walk model, the cheater algorithm, the
//!   simultaneous-update estimates and textbook baselines.
//! * [`analysis`]: the Q-function, Chernoff bound and constant-regret bounds.
//! * [`harness`]: reproducible Monte Carlo experiments and CSV output.
//! * [`cli`]: the `tow-bandit` command line.
//!
//! ```
//! use tow_bandit::env::{stream, BanditEnv, PlayHistory};
//! use tow_bandit::tow::{omega_zero, FluctuationConfig, OmegaMode, TowState};
//!
//! let probs = vec![0.6, 0.4];
//! let mut env = BanditEnv::new(probs.clone(), 1).unwrap();
//! let mut rng = stream(1, 1);
//! let mut tow = TowState::new(2, OmegaMode::OracleGamma(1.0), FluctuationConfig::default()).unwrap();
//! let mut history = PlayHistory::new(2);
//! for t in 1..=1000 {
//!     let k = tow.select(&mut rng);
//!     let reward = env.pull(k, t).unwrap();
//!     history.record(k, reward).unwrap();
//!     tow.update(k, reward, &history).unwrap();
//! }
//! assert_eq!(omega_zero(1.0).unwrap(), 1.0);
//! assert!(history.plays()[0] > history.plays()[1]);
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod env;
pub mod error;
pub mod harness;
pub mod models;
pub mod tow;

pub use error::{Error, Result};

// Chapters of the guide under book/ are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/tow.md")]
    mod tow {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
