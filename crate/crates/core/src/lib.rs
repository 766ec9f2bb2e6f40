//! Simulator of an energy-harvesting secondary user (SU) that opportunistically
//! shares a primary user's (PU) spectrum in overlay and underlay modes, trying to
//! keep its Age of Information (AoI) low.
//!
//! The crate is organized around five pieces:
//!
//! * [`env`] — the slot-by-slot physical and decision dynamics: PU activity
//!   chain, imperfect sensing, Rayleigh fading, energy harvesting, battery and
//!   AoI bookkeeping, central-entity power grants, rate and reward.
//! * [`oracle`] — a small fully observed discretization of the environment as
//!   an exact finite MDP, solved by value iteration and tabular Q-learning.
//!   Used as ground truth for the deep agents.
//! * [`nn`] — a minimal dense network (ReLU, He init, backprop, Adam) with an
//!   optional dueling head and a finite-difference gradient checker.
//! * [`agents`] — DQN and D3QN learners (replay memory, ε-greedy schedule,
//!   target network, TD losses), plus the overlay-only baseline and a random
//!   policy.
//! * [`harness`] — seeded experiment sweeps, metric aggregation and CSV /
//!   plot-column emission.
//!
//! All randomness flows through explicitly passed counter-based generators
//! (ChaCha); identical seed and config produce bit-identical trajectories.

pub mod agents;
pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod oracle;

pub use config::{EnvConfig, ExperimentConfig};
pub use error::{Result, SimError};
