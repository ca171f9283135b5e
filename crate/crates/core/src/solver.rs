//! Full-model ground truth.
//!
//! Backward induction on the θ-shaped MDP (no discounting, reward granted on
//! the transition that enters an end state), the optimal envelopes
//! `G*(g) = max_π G^π(g)` and `F*(g) = min_π F^π(g)`, the optimal quantiles
//! derived from them, the θ search that alternates solving and stepping θ by
//! `±1/n`, and a brute-force policy enumerator used as an independent oracle.

use crate::error::{Error, Result};
use crate::mdp::{end_distribution_unchecked, EpisodicModel, Policy, StateId};
use crate::quantile::{
    lower_index_from_cdf, lower_quantile, upper_index_from_decumulative, upper_quantile, Tau,
    COMPUTED_TOLERANCE,
};
use crate::shaping::{binary_upper_reward, end_reward_vector, Objective, Theta};

/// Two action values closer than this are treated as tied (lowest index wins).
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest policy space [`enumerate_policies`] agrees to walk.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Optimal values `V(t, s)` for decision steps `t = 1..=T` and the greedy
/// policy extracted from them.
#[derive(Debug, Clone)]
pub struct ValueTable {
    horizon: usize,
    num_states: usize,
    initial: StateId,
    values: Vec<f64>,
    greedy: Policy,
}

impl ValueTable {
    /// Value of state `s` when the `t`-th decision is due.
    pub fn value(&self, t: usize, s: StateId) -> f64 {
        assert!((1..=self.horizon).contains(&t) && s < self.num_states);
        self.values[(t - 1) * self.num_states + s]
    }

    /// `V*(s_0)` at the first decision.
    pub fn root_value(&self) -> f64 {
        self.value(1, self.initial)
    }

    pub fn greedy(&self) -> &Policy {
        &self.greedy
    }

    pub fn into_greedy(self) -> Policy {
        self.greedy
    }
}

/// Backward induction with terminal payoffs `end_rewards[i - 1]` for `g_i`.
pub fn solve_with_end_rewards(model: &EpisodicModel, end_rewards: &[f64]) -> Result<ValueTable> {
    model.ensure_valid()?;
    if end_rewards.len() != model.num_end_states() {
        return Err(Error::Precondition(format!(
            "{} end rewards for {} end states",
            end_rewards.len(),
            model.num_end_states()
        )));
    }
    Ok(backward_induction(model, end_rewards))
}

fn backward_induction(model: &EpisodicModel, end_rewards: &[f64]) -> ValueTable {
    let horizon = model.horizon();
    let num_states = model.num_states();
    let mut values = vec![0.0; horizon * num_states];
    let mut greedy = Policy::empty(horizon, num_states);
    // value-to-go after the last decision; non-end states there are unreachable
    let mut next = vec![0.0; num_states];
    let mut q = Vec::new();
    for t in (1..=horizon).rev() {
        let row = &mut values[(t - 1) * num_states..t * num_states];
        for (s, slot) in row.iter_mut().enumerate() {
            if model.is_end(s) {
                continue;
            }
            q.clear();
            q.extend(model.actions(s).iter().map(|spec| {
                spec.outcomes
                    .iter()
                    .map(|o| {
                        let cont = match model.end_index(o.next) {
                            Some(i) => end_rewards[i - 1],
                            None => next[o.next],
                        };
                        o.prob * cont
                    })
                    .sum::<f64>()
            }));
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let a = q
                .iter()
                .position(|&v| v >= best - TIE_TOLERANCE)
                .unwrap_or(0);
            *slot = best;
            greedy.set(t, s, a).expect("policy sized from the model");
        }
        next.copy_from_slice(row);
    }
    ValueTable {
        horizon,
        num_states,
        initial: model.initial(),
        values,
        greedy,
    }
}

/// Optimal values for the shaped reward of `objective` at `theta`.
pub fn solve_theta(
    model: &EpisodicModel,
    theta: Theta,
    objective: Objective,
) -> Result<ValueTable> {
    model.ensure_valid()?;
    let theta = Theta::new(theta.value(), model.num_end_states());
    Ok(backward_induction(
        model,
        &end_reward_vector(objective, theta),
    ))
}

/// Per-end-state vector of optimal probabilities (`G*` or `F*`), indexed `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    values: Vec<f64>,
}

impl Envelope {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry for `g_i` (1-based).
    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|k| self.values.get(k)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `G*(g_k) = max_π G^π(g_k)`, one binary-reward solve per `k`.
pub fn optimal_decumulative(model: &EpisodicModel) -> Result<Envelope> {
    model.ensure_valid()?;
    let n = model.num_end_states();
    let values = (1..=n)
        .map(|k| {
            let rewards: Vec<f64> = (1..=n)
                .map(|i| binary_upper_reward(k, crate::mdp::StateClass::End(i)))
                .collect();
            backward_induction(model, &rewards).root_value()
        })
        .collect();
    Ok(Envelope { values })
}

/// `F*(g_i) = min_π F^π(g_i) = 1 − G*(g_{i+1})`, with `F*(g_n) = 1`.
pub fn optimal_cumulative(model: &EpisodicModel) -> Result<Envelope> {
    let g = optimal_decumulative(model)?;
    Ok(cumulative_from_decumulative(&g))
}

fn cumulative_from_decumulative(g: &Envelope) -> Envelope {
    let n = g.len();
    let values = (0..n)
        .map(|k| {
            if k + 1 < n {
                1.0 - g.values[k + 1]
            } else {
                1.0
            }
        })
        .collect();
    Envelope { values }
}

/// `max { k : G*(g_k) ≥ 1 − τ }`.
pub fn optimal_upper_quantile(model: &EpisodicModel, tau: Tau) -> Result<usize> {
    tau.require_upper()?;
    let g = optimal_decumulative(model)?;
    Ok(upper_index_from_decumulative(
        g.values(),
        tau.value(),
        COMPUTED_TOLERANCE,
    ))
}

/// `min { k : F*(g_k) ≥ τ }`.
pub fn optimal_lower_quantile(model: &EpisodicModel, tau: Tau) -> Result<usize> {
    tau.require_lower()?;
    let f = optimal_cumulative(model)?;
    Ok(lower_index_from_cdf(
        f.values(),
        tau.value(),
        COMPUTED_TOLERANCE,
    ))
}

pub fn optimal_quantile(model: &EpisodicModel, tau: Tau, objective: Objective) -> Result<usize> {
    match objective {
        Objective::Upper => optimal_upper_quantile(model, tau),
        Objective::Lower => optimal_lower_quantile(model, tau),
    }
}

/// Decision rule of the θ search: `true` when θ has to go down.
///
/// Upper: `V < 1 − τ`. Lower (rewards in `[−1, 0]`): `V ≤ −τ`.
pub fn theta_should_decrease(objective: Objective, value: f64, tau: f64) -> bool {
    match objective {
        Objective::Upper => value < 1.0 - tau,
        Objective::Lower => value <= -tau,
    }
}

/// θ iterates of the full-model search.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTrace {
    /// `θ_0, θ_1, …, θ_N`.
    pub thetas: Vec<f64>,
    /// `V*_{θ_{n-1}}(s_0)` evaluated at iteration `n`.
    pub values: Vec<f64>,
    pub clamp_events: usize,
}

impl ThetaTrace {
    pub fn final_theta(&self) -> f64 {
        *self.thetas.last().expect("trace holds θ_0")
    }

    /// Mean of the last `fraction` of the iterates (at least one).
    pub fn trailing_mean(&self, fraction: f64) -> f64 {
        let iterates = &self.thetas[1.min(self.thetas.len() - 1)..];
        let k = ((iterates.len() as f64 * fraction).ceil() as usize).clamp(1, iterates.len());
        iterates[iterates.len() - k..].iter().sum::<f64>() / k as f64
    }
}

/// Alternates a full solve at the current θ with a `±1/n` step.
///
/// Each iteration re-solves from scratch.
pub fn simple_strategy(
    model: &EpisodicModel,
    tau: Tau,
    objective: Objective,
    iterations: usize,
    theta0: f64,
) -> Result<ThetaTrace> {
    let t = tau.value();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TauOutOfRange {
            tau: t,
            range: "(0, 1) (theta search)",
        });
    }
    model.ensure_valid()?;
    let n_end = model.num_end_states();
    // At θ = 0 every end state pays its maximum, so the search can always rise.
    let at_zero = backward_induction(model, &end_reward_vector(objective, Theta::new(0.0, n_end)))
        .root_value();
    if theta_should_decrease(objective, at_zero, t) {
        return Err(Error::Precondition(format!(
            "V*_0(s_0) = {at_zero} already below the target; no crossing exists"
        )));
    }
    let mut theta = Theta::new(theta0, n_end);
    let mut thetas = Vec::with_capacity(iterations + 1);
    let mut values = Vec::with_capacity(iterations);
    let mut clamp_events = 0;
    thetas.push(theta.value());
    for n in 1..=iterations {
        let v = backward_induction(model, &end_reward_vector(objective, theta)).root_value();
        let step = 1.0 / n as f64;
        let delta = if theta_should_decrease(objective, v, t) {
            -step
        } else {
            step
        };
        if theta.shift(delta) {
            clamp_events += 1;
        }
        values.push(v);
        thetas.push(theta.value());
    }
    Ok(ThetaTrace {
        thetas,
        values,
        clamp_events,
    })
}

/// Supremum of the θ values at which the search still moves upward, found
/// by bisection on the non-increasing map `θ ↦ V*_θ(s_0)`.
pub fn theta_crossing(model: &EpisodicModel, tau: Tau, objective: Objective) -> Result<f64> {
    let t = tau.value();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TauOutOfRange {
            tau: t,
            range: "(0, 1) (theta search)",
        });
    }
    model.ensure_valid()?;
    let n_end = model.num_end_states();
    let value_at = |x: f64| {
        backward_induction(model, &end_reward_vector(objective, Theta::new(x, n_end))).root_value()
    };
    let (mut lo, mut hi) = (0.0, n_end as f64 + 1.0);
    if !theta_should_decrease(objective, value_at(hi), t) {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta_should_decrease(objective, value_at(mid), t) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(lo)
}

/// Which decision points a policy enumeration ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyScope {
    /// Every `(t, s)` with `s` non-end: `Π_t Π_s |A(s)|` policies.
    Full,
    /// Only `(t, s)` pairs reachable from `s_0` under some policy; rules
    /// elsewhere stay undefined. Policies outside this set induce the same
    /// end-state distributions as one inside it.
    Reachable,
}

/// Lazy iterator over deterministic time-indexed policies in lexicographic
/// order of their action vectors (decision points sorted by `(t, s)`).
#[derive(Debug, Clone)]
pub struct PolicyEnumerator {
    template: Policy,
    points: Vec<(usize, StateId, usize)>,
    digits: Vec<usize>,
    done: bool,
    count: u128,
}

impl PolicyEnumerator {
    /// Number of policies the enumerator yields in total.
    pub fn count_total(&self) -> u128 {
        self.count
    }
}

impl Iterator for PolicyEnumerator {
    type Item = Policy;

    fn next(&mut self) -> Option<Policy> {
        if self.done {
            return None;
        }
        let mut policy = self.template.clone();
        for (&(t, s, _), &a) in self.points.iter().zip(&self.digits) {
            policy
                .set(t, s, a)
                .expect("decision point inside the policy");
        }
        // odometer, last decision point fastest
        self.done = true;
        for k in (0..self.points.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.points[k].2 {
                self.done = false;
                break;
            }
            self.digits[k] = 0;
        }
        Some(policy)
    }
}

/// Size of the policy space for `scope`, saturating.
pub fn policy_count(model: &EpisodicModel, scope: PolicyScope) -> u128 {
    decision_points(model, scope)
        .iter()
        .fold(1u128, |acc, &(_, _, k)| acc.saturating_mul(k as u128))
}

fn decision_points(model: &EpisodicModel, scope: PolicyScope) -> Vec<(usize, StateId, usize)> {
    match scope {
        PolicyScope::Full => (1..=model.horizon())
            .flat_map(|t| {
                (0..model.num_states())
                    .filter(|&s| !model.is_end(s))
                    .map(move |s| (t, s, model.actions(s).len()))
            })
            .collect(),
        PolicyScope::Reachable => model
            .reachable_layers()
            .into_iter()
            .enumerate()
            .flat_map(|(k, layer)| {
                layer
                    .into_iter()
                    .map(move |s| (k + 1, s, model.actions(s).len()))
            })
            .collect(),
    }
}

/// Every deterministic policy of `scope`, exactly once.
pub fn enumerate_policies(model: &EpisodicModel, scope: PolicyScope) -> Result<PolicyEnumerator> {
    model.ensure_valid()?;
    let points = decision_points(model, scope);
    let count = points
        .iter()
        .fold(1u128, |acc, &(_, _, k)| acc.saturating_mul(k as u128));
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(PolicyEnumerator {
        template: Policy::empty(model.horizon(), model.num_states()),
        digits: vec![0; points.len()],
        points,
        done: false,
        count,
    })
}

/// Enumerates every reachable-scope policy and keeps the first one (in
/// enumeration order) with the best requested quantile.
pub fn brute_force_best_quantile(
    model: &EpisodicModel,
    tau: Tau,
    objective: Objective,
) -> Result<(Policy, usize)> {
    match objective {
        Objective::Upper => tau.require_upper()?,
        Objective::Lower => tau.require_lower()?,
    }
    let mut best: Option<(Policy, usize)> = None;
    for policy in enumerate_policies(model, PolicyScope::Reachable)? {
        let dist = end_distribution_unchecked(model, &policy)?;
        let q = match objective {
            Objective::Upper => upper_quantile(&dist, tau)?,
            Objective::Lower => lower_quantile(&dist, tau)?,
        };
        if best.as_ref().is_none_or(|(_, b)| q > *b) {
            best = Some((policy, q));
        }
    }
    Ok(best.expect("at least one policy exists"))
}

/// Envelopes by enumeration: `(max_π G^π, min_π F^π)`.
pub fn brute_force_envelopes(model: &EpisodicModel) -> Result<(Envelope, Envelope)> {
    let n = model.num_end_states();
    let mut g_max = vec![f64::NEG_INFINITY; n];
    let mut f_min = vec![f64::INFINITY; n];
    for policy in enumerate_policies(model, PolicyScope::Reachable)? {
        let dist = end_distribution_unchecked(model, &policy)?;
        for (k, (f, g)) in dist
            .cdf()
            .into_iter()
            .zip(dist.decumulative_vec())
            .enumerate()
        {
            g_max[k] = g_max[k].max(g);
            f_min[k] = f_min[k].min(f);
        }
    }
    Ok((Envelope { values: g_max }, Envelope { values: f_min }))
}
