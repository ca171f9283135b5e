//! Quantile-criterion decision making for episodic MDPs with ordered end states.
//!
//! * [`mdp`]: the episodic model, policies, sampling and exact end-state
//!   distributions.
//! * [`quantile`]: cumulative/decumulative views and lower/upper quantiles.
//! * [`shaping`]: θ-parameterised terminal rewards.
//! * [`solver`]: backward induction, optimal envelopes, the θ search and a
//!   brute-force policy oracle.
//! * [`learning`]: tabular Q-learning and the two-timescale quantile learner.
//! * [`env`]: the game-show model and small fixtures.
//! * [`seed`]: seed splitting.

pub mod env;
pub mod error;
pub mod learning;
pub mod mdp;
pub mod quantile;
pub mod seed;
pub mod shaping;
pub mod solver;

pub use error::{Error, Result};
pub use mdp::{
    exact_end_distribution, rollout, sample_transition, validate_model, ActionId, ActionSpec,
    EndStateSet, Episode, EpisodicModel, Outcome, Policy, SampleOnly, Simulator, StateClass,
    StateId, ValidationReport, Violation,
};
pub use quantile::{EndStateDistribution, Quantile, Tau};
pub use shaping::{Objective, Theta};
