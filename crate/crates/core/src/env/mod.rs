//! Concrete episodic environments.

mod random;
mod toys;
mod wwtbam;

pub use random::{random_small_mdp, RandomMdpLimits};
pub use toys::{build_example1, build_two_action_toy};
pub use wwtbam::{
    build_wwtbam, wwtbam_end_states, Lifeline, WwtbamConfig, WwtbamLayout, DEFAULT_QUESTIONS,
};
