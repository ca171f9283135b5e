//! Experiment configuration for `train`.
//!
//! ```toml
//! environment = "wwtbam"        # built-in name or path to a model/game-show file
//! objective = "upper"
//! tau = 0.3
//! steps = 1000000
//! seed = 1
//! log_every = 1000
//! output_dir = "runs/wwtbam"
//!
//! [schedules]
//! alpha_exponent = 0.55         # alpha_n = 1/(n+1)^alpha_exponent
//! epsilon = 0.01
//! ```
//!
//! Unknown keys are errors. Relative paths are taken relative to the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use qqlearn::learning::{AlphaClock, Layering, LearnerSettings, Schedule, Schedules};
use qqlearn::Objective;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Step count of the long run.
pub const LONG_STEPS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayeringChoice {
    /// Collapsed for the game show, one layer per step otherwise.
    #[default]
    Auto,
    PerStep,
    Collapsed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaClockChoice {
    Global,
    #[default]
    PerPair,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaChoice {
    /// `1/n`
    #[default]
    Harmonic,
    /// θ stays at `theta0`.
    Zero,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_alpha_exponent")]
    pub alpha_exponent: f64,
    #[serde(default)]
    pub beta: BetaChoice,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// `ε_n = max(epsilon, n^{-1/4})` instead of a constant.
    #[serde(default)]
    pub epsilon_decay: bool,
    #[serde(default)]
    pub alpha_clock: AlphaClockChoice,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            alpha_exponent: default_alpha_exponent(),
            beta: BetaChoice::Harmonic,
            epsilon: default_epsilon(),
            epsilon_decay: false,
            alpha_clock: AlphaClockChoice::PerPair,
        }
    }
}

fn default_alpha_exponent() -> f64 {
    11.0 / 20.0
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_steps() -> u64 {
    1_000_000
}

fn default_log_every() -> u64 {
    1_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_runs() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: String,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    pub tau: f64,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedules: ScheduleConfig,
    #[serde(default = "default_log_every")]
    pub log_every: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Independent runs with split seeds, executed concurrently.
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub layering: LayeringChoice,
    /// Hide the transition table from the summary, as for a black-box simulator.
    #[serde(default)]
    pub sample_only: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_objective() -> Objective {
    Objective::Upper
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::read_text(path)?;
        let cfg = Self::parse(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.tau > 0.0 && self.tau < 1.0) {
            errs.push(format!("tau: {} is outside (0, 1)", self.tau));
        }
        if self.steps == 0 {
            errs.push("steps: must be at least 1".to_string());
        }
        if self.log_every == 0 {
            errs.push("log_every: must be at least 1".to_string());
        }
        let a = self.schedules.alpha_exponent;
        if !(a > 0.5 && a < 1.0) {
            errs.push(format!("schedules.alpha_exponent: {a} is outside (0.5, 1)"));
        }
        let e = self.schedules.epsilon;
        if !(0.0..=1.0).contains(&e) {
            errs.push(format!("schedules.epsilon: {e} is outside [0, 1]"));
        }
        if self.runs == 0 {
            errs.push("runs: must be at least 1".to_string());
        }
        if !self.theta0.is_finite() {
            errs.push("theta0: must be finite".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(format!(
                "invalid config:\n{}",
                errs.join("\n")
            )))
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.output_dir)
    }

    pub fn schedules(&self) -> Schedules {
        let s = &self.schedules;
        Schedules {
            alpha: Schedule::Power {
                offset: 1.0,
                exponent: s.alpha_exponent,
            },
            beta: match s.beta {
                BetaChoice::Harmonic => Schedule::Harmonic,
                BetaChoice::Zero => Schedule::Zero,
            },
            epsilon: if s.epsilon_decay {
                Schedule::FloorPower {
                    floor: s.epsilon,
                    exponent: 0.25,
                }
            } else {
                Schedule::Constant(s.epsilon)
            },
        }
    }

    /// `progress_in_state` tells whether the environment's states already
    /// encode the step, which is what `auto` layering keys on.
    pub fn settings(&self, progress_in_state: bool) -> LearnerSettings {
        let layering = match self.layering {
            LayeringChoice::PerStep => Layering::PerStep,
            LayeringChoice::Collapsed => Layering::Collapsed,
            LayeringChoice::Auto if progress_in_state => Layering::Collapsed,
            LayeringChoice::Auto => Layering::PerStep,
        };
        LearnerSettings {
            schedules: self.schedules(),
            steps: self.steps,
            log_every: self.log_every,
            layering,
            alpha_clock: match self.schedules.alpha_clock {
                AlphaClockChoice::Global => AlphaClock::Global,
                AlphaClockChoice::PerPair => AlphaClock::PerPair,
            },
            theta0: self.theta0,
            theta_warmup: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("dir/cfg.toml"))
    }

    #[test]
    fn defaults_follow_the_reference_run() {
        let cfg = parse("environment = \"wwtbam\"\ntau = 0.3\n").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.steps, 1_000_000);
        assert_eq!(cfg.objective, Objective::Upper);
        assert_eq!(cfg.output_dir(), Path::new("dir/out"));
        let s = cfg.settings(true);
        assert_eq!(s.layering, Layering::Collapsed);
        assert_eq!(s.schedules, Schedules::default());
        assert_eq!(cfg.settings(false).layering, Layering::PerStep);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("environment = \"toy\"\ntau = 0.3\nstpes = 10\n").unwrap_err();
        assert!(err.to_string().contains("stpes"), "{err}");
        let err =
            parse("environment = \"toy\"\ntau = 0.3\n[schedules]\nalpha = 0.6\n").unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn ranges_are_checked() {
        let cfg = parse(
            "environment = \"toy\"\ntau = 1.0\nsteps = 0\n[schedules]\nalpha_exponent = 1.0\n",
        )
        .unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("tau"));
        assert!(err.contains("steps"));
        assert!(err.contains("alpha_exponent"));
    }
}
