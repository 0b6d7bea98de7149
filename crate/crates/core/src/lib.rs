//! Rank-only optimal stopping on the observation closest to the midpoint of
//! `[0, 1]`.
//!
//! `n` uniform values arrive one at a time and only their relative ranks are
//! visible. The goal is to stop on the value that ends up closest to `1/2`.
//! This crate builds the optimal backward-induction policy, the rectangular
//! heuristic `A(h, w)` with its closed-form bounds, and a deterministic
//! Monte-Carlo simulator that cross-checks all of it.
//!
//! Probability work happens in natural-log space (see [`numerics::LogProb`]);
//! the rank-transition probabilities exist in two models, selected by
//! [`Mode`].

pub mod error;
pub mod heuristic;
pub mod numerics;
pub mod policy;
pub mod rankprob;
pub mod simulator;

pub use error::{Error, Result};
pub use heuristic::{BoundsReport, HeuristicParams};
pub use numerics::{ExactRational, LogFactorialTable, LogProb};
pub use policy::{PolicyTable, StoppingRegion};
pub use rankprob::{Mode, RankTime, WillBestMatrix};
pub use simulator::{AlgoSpec, RankTracker, SimulationReport, SimulationRun, StoppingRule, TrialInstance};
