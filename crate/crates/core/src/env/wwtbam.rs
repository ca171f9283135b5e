//! "Who Wants to Be a Millionaire" as an episodic MDP.
//!
//! A decision state is `(question, available lifelines)`. At each one the
//! contestant either quits with the pot won so far or answers after spending
//! any subset of the still-available lifelines. Spending lifelines raises the
//! success probability additively (clipped to 1). A wrong answer ends the game
//! at the highest guarantee point strictly below the current question, or at 0.
//!
//! End states are the distinct amounts the game can end with, sorted
//! ascending; equal amounts are one end state.
//!
//! The default probabilities are calibration placeholders: a linear decline
//! from 0.95 at the first question to 0.35 at the last, and lifeline boosts of
//! 0.5, 0.3 and 0.2 times the remaining failure probability.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionSpec, EndStateSet, EpisodicModel, Outcome, StateId};

pub const DEFAULT_QUESTIONS: usize = 15;
const MAX_LIFELINES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lifeline {
    pub name: String,
    /// Additive success-probability boost per question.
    pub boost: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WwtbamConfig {
    pub questions: usize,
    /// Pot after answering question `q` correctly, at position `q - 1`.
    pub payouts: Vec<u64>,
    /// Questions whose pot is kept after a later wrong answer.
    pub guarantees: Vec<usize>,
    /// Success probability without lifelines, per question.
    pub base_prob: Vec<f64>,
    pub lifelines: Vec<Lifeline>,
    #[serde(default = "default_true")]
    pub allow_quit_at_first: bool,
    #[serde(default)]
    pub single_lifeline_per_question: bool,
}

fn default_true() -> bool {
    true
}

impl Default for WwtbamConfig {
    fn default() -> Self {
        let q = DEFAULT_QUESTIONS;
        let base_prob: Vec<f64> = (0..q)
            .map(|k| 0.95 - 0.60 * k as f64 / (q - 1) as f64)
            .collect();
        let lifeline = |name: &str, share: f64| Lifeline {
            name: name.to_string(),
            boost: base_prob.iter().map(|p| share * (1.0 - p)).collect(),
        };
        Self {
            questions: q,
            payouts: (0..q as u32).map(|k| 100 * 2u64.pow(k)).collect(),
            guarantees: vec![5, 10],
            lifelines: vec![
                lifeline("50:50", 0.5),
                lifeline("audience", 0.3),
                lifeline("phone", 0.2),
            ],
            base_prob,
            allow_quit_at_first: true,
            single_lifeline_per_question: false,
        }
    }
}

impl WwtbamConfig {
    /// Checks the configuration and lists every problem found.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let q = self.questions;
        if q == 0 {
            errs.push("questions: must be at least 1".to_string());
        }
        if self.payouts.len() != q {
            errs.push(format!(
                "payouts: {} entries for {q} questions",
                self.payouts.len()
            ));
        }
        if let Some(k) = self.payouts.windows(2).position(|w| w[0] >= w[1]) {
            errs.push(format!(
                "payouts: not strictly increasing at question {} ({} >= {})",
                k + 2,
                self.payouts[k],
                self.payouts[k + 1]
            ));
        }
        if self.payouts.first() == Some(&0) {
            errs.push("payouts: the first pot must be positive".to_string());
        }
        for &g in &self.guarantees {
            if g == 0 || g > q {
                errs.push(format!("guarantees: question {g} outside 1..={q}"));
            }
        }
        if self.base_prob.len() != q {
            errs.push(format!(
                "base_prob: {} entries for {q} questions",
                self.base_prob.len()
            ));
        }
        for (k, p) in self.base_prob.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0 && *p <= 1.0) {
                errs.push(format!("base_prob[{}]: {p} not in (0, 1]", k + 1));
            }
        }
        if self.lifelines.len() > MAX_LIFELINES {
            errs.push(format!(
                "lifelines: {} given, at most {MAX_LIFELINES} supported",
                self.lifelines.len()
            ));
        }
        for (l, lifeline) in self.lifelines.iter().enumerate() {
            if lifeline.boost.len() != q {
                errs.push(format!(
                    "lifelines[{l}].boost: {} entries for {q} questions",
                    lifeline.boost.len()
                ));
            }
            for (k, b) in lifeline.boost.iter().enumerate() {
                if !(b.is_finite() && *b >= 0.0) {
                    errs.push(format!(
                        "lifelines[{l}].boost[{}]: {b} is not a non-negative number",
                        k + 1
                    ));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    /// Success probability at question `q` when spending lifeline set `used`.
    pub fn success_probability(&self, q: usize, used: u8) -> f64 {
        let base = self.base_prob[q - 1];
        let boost: f64 = self
            .lifelines
            .iter()
            .enumerate()
            .filter(|(l, _)| used & (1 << l) != 0)
            .map(|(_, lifeline)| lifeline.boost[q - 1])
            .sum();
        (base + boost).min(1.0)
    }

    /// Amount kept after a wrong answer at question `q`.
    pub fn guarantee_payout(&self, q: usize) -> u64 {
        self.guarantees
            .iter()
            .filter(|&&g| g < q)
            .max()
            .map_or(0, |&g| self.payouts[g - 1])
    }

    /// Amount taken home when quitting before question `q`.
    pub fn quit_payout(&self, q: usize) -> u64 {
        if q <= 1 {
            0
        } else {
            self.payouts[q - 2]
        }
    }

    fn can_quit(&self, q: usize) -> bool {
        q > 1 || self.allow_quit_at_first
    }

    fn end_amounts(&self) -> Vec<u64> {
        let mut amounts = BTreeSet::new();
        for q in 1..=self.questions {
            amounts.insert(self.guarantee_payout(q));
            if self.can_quit(q) {
                amounts.insert(self.quit_payout(q));
            }
        }
        amounts.insert(self.payouts[self.questions - 1]);
        amounts.into_iter().collect()
    }
}

/// Index map between game positions and model state ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WwtbamLayout {
    questions: usize,
    lifelines: usize,
    end_amounts: Vec<u64>,
}

impl WwtbamLayout {
    pub fn new(config: &WwtbamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            questions: config.questions,
            lifelines: config.lifelines.len(),
            end_amounts: config.end_amounts(),
        })
    }

    fn masks(&self) -> usize {
        1 << self.lifelines
    }

    pub fn num_decision_states(&self) -> usize {
        self.questions * self.masks()
    }

    /// Mask of all lifelines available.
    pub fn full_mask(&self) -> u8 {
        (self.masks() - 1) as u8
    }

    pub fn decision_state(&self, question: usize, available: u8) -> StateId {
        (question - 1) * self.masks() + available as usize
    }

    /// `(question, available lifelines)` of a decision state.
    pub fn decode(&self, s: StateId) -> Option<(usize, u8)> {
        (s < self.num_decision_states()).then(|| (s / self.masks() + 1, (s % self.masks()) as u8))
    }

    pub fn end_amounts(&self) -> &[u64] {
        &self.end_amounts
    }

    /// State id of the end state paying `amount`.
    pub fn end_state(&self, amount: u64) -> Option<StateId> {
        self.end_amounts
            .binary_search(&amount)
            .ok()
            .map(|k| self.num_decision_states() + k)
    }

    /// 1-based end index of `amount`.
    pub fn end_index(&self, amount: u64) -> Option<usize> {
        self.end_amounts.binary_search(&amount).ok().map(|k| k + 1)
    }
}

/// Ascending, deduplicated end amounts.
pub fn wwtbam_end_states(config: &WwtbamConfig) -> Result<EndStateSet> {
    let layout = WwtbamLayout::new(config)?;
    EndStateSet::new(layout.end_amounts.iter().map(|a| a.to_string()).collect())
}

fn lifeline_label(config: &WwtbamConfig, used: u8) -> String {
    let mut label = String::from("answer");
    for (l, lifeline) in config.lifelines.iter().enumerate() {
        if used & (1 << l) != 0 {
            label.push('+');
            label.push_str(&lifeline.name);
        }
    }
    label
}

pub fn build_wwtbam(config: &WwtbamConfig) -> Result<EpisodicModel> {
    let layout = WwtbamLayout::new(config)?;
    let decision = layout.num_decision_states();
    let total = decision + layout.end_amounts.len();
    let end = |amount: u64| {
        layout
            .end_state(amount)
            .expect("amount listed among end states")
    };

    let mut labels = Vec::with_capacity(total);
    let mut actions = Vec::with_capacity(total);
    for s in 0..decision {
        let (q, available) = layout.decode(s).expect("decision state");
        labels.push(format!(
            "q{q}/{available:0width$b}",
            width = layout.lifelines.max(1)
        ));
        let mut row = Vec::new();
        for used in 0..=layout.full_mask() {
            if used & !available != 0 {
                continue;
            }
            if config.single_lifeline_per_question && used.count_ones() > 1 {
                continue;
            }
            let p = config.success_probability(q, used);
            let success = if q == config.questions {
                end(config.payouts[q - 1])
            } else {
                layout.decision_state(q + 1, available & !used)
            };
            let mut outcomes = vec![Outcome::new(success, p)];
            if p < 1.0 {
                outcomes.push(Outcome::new(end(config.guarantee_payout(q)), 1.0 - p));
            }
            row.push(ActionSpec::new(lifeline_label(config, used), outcomes));
        }
        if config.can_quit(q) {
            row.push(ActionSpec::certain("quit", end(config.quit_payout(q))));
        }
        actions.push(row);
    }
    for amount in &layout.end_amounts {
        labels.push(amount.to_string());
        actions.push(Vec::new());
    }
    Ok(EpisodicModel::new(
        labels,
        actions,
        layout.decision_state(1, layout.full_mask()),
        (decision..total).collect(),
        config.questions,
    ))
}
