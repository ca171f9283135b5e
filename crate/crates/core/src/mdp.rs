//! Episodic MDPs whose trajectories end in one of `n` totally ordered end
//! states, together with deterministic time-indexed policies.
//!
//! States and actions are dense indices. End states carry a 1-based index
//! `i` in `1..=n`, and index order is preference order: `g_1 ≺ … ≺ g_n`.
//! End states are absorbing and accept no action; an episode stops on entry.
//!
//! Two capability levels are exposed. [`EpisodicModel`] gives full access to
//! the transition table and is what the exact solver consumes. The
//! [`Simulator`] trait only allows drawing successor states; learners are
//! generic over it, and [`SampleOnly`] wraps a model so that nothing else
//! leaks through.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantile::EndStateDistribution;

pub type StateId = usize;
pub type ActionId = usize;

/// Tolerance on transition row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: StateId,
    pub prob: f64,
}

impl Outcome {
    pub fn new(next: StateId, prob: f64) -> Self {
        Self { next, prob }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub label: String,
    pub outcomes: Vec<Outcome>,
}

impl ActionSpec {
    pub fn new(label: impl Into<String>, outcomes: Vec<Outcome>) -> Self {
        Self {
            label: label.into(),
            outcomes,
        }
    }

    /// Action with a single certain successor.
    pub fn certain(label: impl Into<String>, next: StateId) -> Self {
        Self::new(label, vec![Outcome::new(next, 1.0)])
    }
}

/// Ordered end states `g_1 ≺ … ≺ g_n`; position `i - 1` holds the label of `g_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndStateSet {
    labels: Vec<String>,
}

impl EndStateSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Precondition(
                "an end-state set needs at least one end state".into(),
            ));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label of `g_i` (1-based).
    pub fn label(&self, i: usize) -> Option<&str> {
        i.checked_sub(1)
            .and_then(|k| self.labels.get(k))
            .map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// What reward shaping needs to know about a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    NonEnd,
    /// End state with its 1-based preference index.
    End(usize),
}

/// Full description of an episodic MDP with ordered end states.
///
/// Construction never fails; call [`validate_model`] (or let the solver do
/// it) to check the invariants before trusting the model.
#[derive(Debug, Clone)]
pub struct EpisodicModel {
    state_labels: Vec<String>,
    actions: Vec<Vec<ActionSpec>>,
    initial: StateId,
    end_state_ids: Vec<StateId>,
    end_index_of: Vec<Option<usize>>,
    end_states: EndStateSet,
    horizon: usize,
}

impl EpisodicModel {
    /// `actions[s]` lists the admissible actions of state `s`;
    /// `end_state_ids` lists end states from least to most preferred.
    pub fn new(
        state_labels: Vec<String>,
        actions: Vec<Vec<ActionSpec>>,
        initial: StateId,
        end_state_ids: Vec<StateId>,
        horizon: usize,
    ) -> Self {
        let num_states = state_labels.len().max(actions.len());
        let mut end_index_of = vec![None; num_states];
        for (k, &s) in end_state_ids.iter().enumerate() {
            if let Some(slot) = end_index_of.get_mut(s) {
                if slot.is_none() {
                    *slot = Some(k + 1);
                }
            }
        }
        let labels = end_state_ids
            .iter()
            .map(|&s| {
                state_labels
                    .get(s)
                    .cloned()
                    .unwrap_or_else(|| format!("#{s}"))
            })
            .collect();
        Self {
            state_labels,
            actions,
            initial,
            end_state_ids,
            end_index_of,
            end_states: EndStateSet { labels },
            horizon,
        }
    }

    pub fn num_states(&self) -> usize {
        self.end_index_of.len()
    }

    pub fn num_end_states(&self) -> usize {
        self.end_state_ids.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn end_states(&self) -> &EndStateSet {
        &self.end_states
    }

    /// State id of `g_i`.
    pub fn end_state_id(&self, i: usize) -> Option<StateId> {
        i.checked_sub(1)
            .and_then(|k| self.end_state_ids.get(k))
            .copied()
    }

    pub fn end_index(&self, s: StateId) -> Option<usize> {
        self.end_index_of.get(s).copied().flatten()
    }

    pub fn is_end(&self, s: StateId) -> bool {
        self.end_index(s).is_some()
    }

    pub fn classify(&self, s: StateId) -> StateClass {
        match self.end_index(s) {
            Some(i) => StateClass::End(i),
            None => StateClass::NonEnd,
        }
    }

    pub fn actions(&self, s: StateId) -> &[ActionSpec] {
        self.actions.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn state_label(&self, s: StateId) -> String {
        self.state_labels
            .get(s)
            .cloned()
            .unwrap_or_else(|| format!("#{s}"))
    }

    pub fn action_label(&self, s: StateId, a: ActionId) -> String {
        self.actions(s)
            .get(a)
            .map(|spec| spec.label.clone())
            .unwrap_or_else(|| format!("#{a}"))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_model(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_clean() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report))
        }
    }

    fn outcomes(&self, s: StateId, a: ActionId) -> Result<&[Outcome]> {
        if self.is_end(s) {
            return Err(Error::EndStateAction { state: s });
        }
        self.actions(s)
            .get(a)
            .map(|spec| spec.outcomes.as_slice())
            .ok_or(Error::InadmissibleAction {
                state: s,
                action: a,
            })
    }

    /// Non-end states reachable at each decision step, under any policy.
    ///
    /// Entry `t - 1` lists the states in which the `t`-th decision may have to
    /// be taken. Only meaningful once transition targets are in range.
    pub fn reachable_layers(&self) -> Vec<Vec<StateId>> {
        let mut layers = Vec::with_capacity(self.horizon);
        let mut frontier: BTreeSet<StateId> = BTreeSet::new();
        if self.initial < self.num_states() && !self.is_end(self.initial) {
            frontier.insert(self.initial);
        }
        for _ in 0..self.horizon {
            if frontier.is_empty() {
                break;
            }
            let mut next = BTreeSet::new();
            for &s in &frontier {
                for spec in self.actions(s) {
                    for o in &spec.outcomes {
                        if o.prob > 0.0 && o.next < self.num_states() && !self.is_end(o.next) {
                            next.insert(o.next);
                        }
                    }
                }
            }
            layers.push(frontier.into_iter().collect());
            frontier = next;
        }
        layers
    }
}

/// One failed model invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    ZeroHorizon,
    NoEndStates,
    InitialOutOfRange {
        initial: StateId,
    },
    InitialIsEndState {
        initial: StateId,
    },
    EndStateOutOfRange {
        position: usize,
        state: StateId,
    },
    DuplicateEndState {
        state: StateId,
    },
    EndStateHasActions {
        state: StateId,
    },
    NoActions {
        state: StateId,
    },
    TargetOutOfRange {
        state: StateId,
        action: ActionId,
        next: StateId,
    },
    BadProbability {
        state: StateId,
        action: ActionId,
        next: StateId,
        prob: f64,
    },
    RowSum {
        state: StateId,
        action: ActionId,
        sum: f64,
    },
    /// Non-end states still reachable after `horizon` decisions.
    HorizonExceeded {
        horizon: usize,
        states: Vec<StateId>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "model has no states"),
            Violation::ZeroHorizon => write!(f, "horizon must be at least 1"),
            Violation::NoEndStates => write!(f, "model has no end states"),
            Violation::InitialOutOfRange { initial } => {
                write!(f, "initial state {initial} is out of range")
            }
            Violation::InitialIsEndState { initial } => {
                write!(f, "initial state {initial} is an end state")
            }
            Violation::EndStateOutOfRange { position, state } => {
                write!(
                    f,
                    "end state #{} refers to unknown state {state}",
                    position + 1
                )
            }
            Violation::DuplicateEndState { state } => {
                write!(f, "state {state} is listed more than once among end states")
            }
            Violation::EndStateHasActions { state } => {
                write!(
                    f,
                    "end state {state} has outgoing actions (end states are absorbing)"
                )
            }
            Violation::NoActions { state } => {
                write!(f, "non-end state {state} has no admissible action")
            }
            Violation::TargetOutOfRange {
                state,
                action,
                next,
            } => write!(
                f,
                "(state {state}, action {action}): successor {next} out of range"
            ),
            Violation::BadProbability {
                state,
                action,
                next,
                prob,
            } => write!(
                f,
                "(state {state}, action {action}): probability {prob} to {next} is not in [0, 1]"
            ),
            Violation::RowSum { state, action, sum } => write!(
                f,
                "(state {state}, action {action}): probabilities sum to {sum}, expected 1"
            ),
            Violation::HorizonExceeded { horizon, states } => write!(
                f,
                "non-end states {states:?} remain reachable after {horizon} steps"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "model is valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and lists all violations found.
pub fn validate_model(model: &EpisodicModel) -> ValidationReport {
    let mut violations = Vec::new();
    let num_states = model.num_states();

    if num_states == 0 {
        violations.push(Violation::NoStates);
    }
    if model.horizon == 0 {
        violations.push(Violation::ZeroHorizon);
    }
    if model.end_state_ids.is_empty() {
        violations.push(Violation::NoEndStates);
    }

    let mut seen = BTreeSet::new();
    for (position, &state) in model.end_state_ids.iter().enumerate() {
        if state >= num_states {
            violations.push(Violation::EndStateOutOfRange { position, state });
        } else if !seen.insert(state) {
            violations.push(Violation::DuplicateEndState { state });
        }
    }

    if model.initial >= num_states {
        violations.push(Violation::InitialOutOfRange {
            initial: model.initial,
        });
    } else if model.is_end(model.initial) {
        violations.push(Violation::InitialIsEndState {
            initial: model.initial,
        });
    }

    let mut structural_ok = true;
    for s in 0..num_states {
        let actions = model.actions(s);
        if model.is_end(s) {
            if !actions.is_empty() {
                violations.push(Violation::EndStateHasActions { state: s });
            }
            continue;
        }
        if actions.is_empty() {
            violations.push(Violation::NoActions { state: s });
        }
        for (a, spec) in actions.iter().enumerate() {
            let mut sum = 0.0;
            for o in &spec.outcomes {
                if o.next >= num_states {
                    structural_ok = false;
                    violations.push(Violation::TargetOutOfRange {
                        state: s,
                        action: a,
                        next: o.next,
                    });
                }
                if !o.prob.is_finite() || o.prob < 0.0 || o.prob > 1.0 {
                    violations.push(Violation::BadProbability {
                        state: s,
                        action: a,
                        next: o.next,
                        prob: o.prob,
                    });
                }
                sum += o.prob;
            }
            if sum.is_nan() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSum {
                    state: s,
                    action: a,
                    sum,
                });
            }
        }
    }

    if structural_ok && model.horizon > 0 && model.initial < num_states {
        // Any state still reachable after `horizon` decisions means some
        // trajectory fails to terminate in time.
        let mut frontier: BTreeSet<StateId> = BTreeSet::new();
        if !model.is_end(model.initial) {
            frontier.insert(model.initial);
        }
        for _ in 0..model.horizon {
            let mut next = BTreeSet::new();
            for &s in &frontier {
                for spec in model.actions(s) {
                    for o in &spec.outcomes {
                        if o.prob > 0.0 && !model.is_end(o.next) {
                            next.insert(o.next);
                        }
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        if !frontier.is_empty() {
            violations.push(Violation::HorizonExceeded {
                horizon: model.horizon,
                states: frontier.into_iter().collect(),
            });
        }
    }

    ValidationReport { violations }
}

/// Deterministic Markovian policy with one decision rule per step `t ∈ 1..=T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    horizon: usize,
    num_states: usize,
    rules: Vec<Option<ActionId>>,
}

impl Policy {
    /// Policy with no rule defined anywhere.
    pub fn empty(horizon: usize, num_states: usize) -> Self {
        Self {
            horizon,
            num_states,
            rules: vec![None; horizon * num_states],
        }
    }

    /// Same decision rule at every step.
    pub fn stationary(horizon: usize, rule: &[Option<ActionId>]) -> Self {
        let mut rules = Vec::with_capacity(horizon * rule.len());
        for _ in 0..horizon {
            rules.extend_from_slice(rule);
        }
        Self {
            horizon,
            num_states: rule.len(),
            rules,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    fn slot(&self, t: usize, s: StateId) -> Option<usize> {
        (t >= 1 && t <= self.horizon && s < self.num_states).then(|| (t - 1) * self.num_states + s)
    }

    pub fn action(&self, t: usize, s: StateId) -> Option<ActionId> {
        self.slot(t, s).and_then(|k| self.rules[k])
    }

    pub fn set(&mut self, t: usize, s: StateId, a: ActionId) -> Result<()> {
        let k = self.slot(t, s).ok_or_else(|| {
            Error::PolicyShape(format!(
                "(t = {t}, s = {s}) outside {} steps × {} states",
                self.horizon, self.num_states
            ))
        })?;
        self.rules[k] = Some(a);
        Ok(())
    }

    pub fn clear(&mut self, t: usize, s: StateId) {
        if let Some(k) = self.slot(t, s) {
            self.rules[k] = None;
        }
    }

    /// All defined rules as `(t, s, a)`.
    pub fn rules(&self) -> impl Iterator<Item = (usize, StateId, ActionId)> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter_map(move |(k, a)| a.map(|a| (k / self.num_states + 1, k % self.num_states, a)))
    }

    fn check_shape(&self, model_states: usize, model_horizon: usize) -> Result<()> {
        if self.num_states != model_states || self.horizon < model_horizon {
            return Err(Error::PolicyShape(format!(
                "policy covers {} steps × {} states, model needs {} × {}",
                self.horizon, self.num_states, model_horizon, model_states
            )));
        }
        Ok(())
    }
}

/// One episode from the initial state to an end state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub steps: Vec<(StateId, ActionId)>,
    /// End index of the terminal state.
    pub terminal: usize,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Sample-only view of an episodic environment.
pub trait Simulator {
    fn num_states(&self) -> usize;
    fn num_actions(&self, s: StateId) -> usize;
    fn initial_state(&self) -> StateId;
    fn horizon(&self) -> usize;
    fn num_end_states(&self) -> usize;
    fn classify(&self, s: StateId) -> StateClass;
    fn sample_next<R: Rng + ?Sized>(&self, s: StateId, a: ActionId, rng: &mut R)
        -> Result<StateId>;
}

impl Simulator for EpisodicModel {
    fn num_states(&self) -> usize {
        EpisodicModel::num_states(self)
    }

    fn num_actions(&self, s: StateId) -> usize {
        self.actions(s).len()
    }

    fn initial_state(&self) -> StateId {
        self.initial
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn num_end_states(&self) -> usize {
        EpisodicModel::num_end_states(self)
    }

    fn classify(&self, s: StateId) -> StateClass {
        EpisodicModel::classify(self, s)
    }

    fn sample_next<R: Rng + ?Sized>(
        &self,
        s: StateId,
        a: ActionId,
        rng: &mut R,
    ) -> Result<StateId> {
        sample_transition(self, s, a, rng)
    }
}

/// Hides the transition table of a model behind [`Simulator`].
#[derive(Debug, Clone, Copy)]
pub struct SampleOnly<'a> {
    model: &'a EpisodicModel,
}

impl<'a> SampleOnly<'a> {
    pub fn new(model: &'a EpisodicModel) -> Self {
        Self { model }
    }
}

impl Simulator for SampleOnly<'_> {
    fn num_states(&self) -> usize {
        self.model.num_states()
    }

    fn num_actions(&self, s: StateId) -> usize {
        self.model.actions(s).len()
    }

    fn initial_state(&self) -> StateId {
        self.model.initial
    }

    fn horizon(&self) -> usize {
        self.model.horizon
    }

    fn num_end_states(&self) -> usize {
        self.model.num_end_states()
    }

    fn classify(&self, s: StateId) -> StateClass {
        self.model.classify(s)
    }

    fn sample_next<R: Rng + ?Sized>(
        &self,
        s: StateId,
        a: ActionId,
        rng: &mut R,
    ) -> Result<StateId> {
        sample_transition(self.model, s, a, rng)
    }
}

/// Draws a successor of `(s, a)`. Consumes exactly one uniform draw.
pub fn sample_transition<R: Rng + ?Sized>(
    model: &EpisodicModel,
    s: StateId,
    a: ActionId,
    rng: &mut R,
) -> Result<StateId> {
    let outcomes = model.outcomes(s, a)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for o in outcomes {
        if o.prob <= 0.0 {
            continue;
        }
        acc += o.prob;
        last = Some(o.next);
        if u < acc {
            return Ok(o.next);
        }
    }
    // u landed in the rounding gap above the accumulated mass
    last.ok_or(Error::InadmissibleAction {
        state: s,
        action: a,
    })
}

/// Follows `policy` from the initial state until an end state is entered.
pub fn rollout<E, R>(env: &E, policy: &Policy, rng: &mut R) -> Result<Episode>
where
    E: Simulator + ?Sized,
    R: Rng + ?Sized,
{
    let horizon = env.horizon();
    let mut s = env.initial_state();
    let mut steps = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let a = policy
            .action(t, s)
            .ok_or(Error::PolicyUndefined { step: t, state: s })?;
        if a >= env.num_actions(s) {
            return Err(Error::InadmissibleAction {
                state: s,
                action: a,
            });
        }
        steps.push((s, a));
        s = env.sample_next(s, a, rng)?;
        if let StateClass::End(i) = env.classify(s) {
            return Ok(Episode { steps, terminal: i });
        }
    }
    Err(Error::Precondition(format!(
        "episode did not terminate within the horizon of {horizon} steps"
    )))
}

/// Exact end-state distribution induced by `policy` from the initial state.
pub fn exact_end_distribution(
    model: &EpisodicModel,
    policy: &Policy,
) -> Result<EndStateDistribution> {
    model.ensure_valid()?;
    end_distribution_unchecked(model, policy)
}

/// Forward mass propagation; assumes a valid model.
pub(crate) fn end_distribution_unchecked(
    model: &EpisodicModel,
    policy: &Policy,
) -> Result<EndStateDistribution> {
    let num_states = model.num_states();
    policy.check_shape(num_states, model.horizon)?;
    let mut absorbed = vec![0.0; model.num_end_states()];
    let mut mass = vec![0.0; num_states];
    let mut next = vec![0.0; num_states];
    mass[model.initial] = 1.0;
    for t in 1..=model.horizon {
        next.iter_mut().for_each(|m| *m = 0.0);
        let mut any = false;
        for (s, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let a = policy
                .action(t, s)
                .ok_or(Error::PolicyUndefined { step: t, state: s })?;
            for o in model.outcomes(s, a)? {
                let flow = m * o.prob;
                match model.end_index(o.next) {
                    Some(i) => absorbed[i - 1] += flow,
                    None => {
                        next[o.next] += flow;
                        any = true;
                    }
                }
            }
        }
        std::mem::swap(&mut mass, &mut next);
        if !any {
            break;
        }
    }
    EndStateDistribution::computed(absorbed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_example1, build_two_action_toy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|s| format!("s{s}")).collect()
    }

    #[test]
    fn toy_models_are_valid() {
        assert!(build_two_action_toy().validate().is_clean());
        assert!(build_example1().0.validate().is_clean());
    }

    #[test]
    fn row_sum_violation_is_located() {
        let model = EpisodicModel::new(
            labels(3),
            vec![
                vec![ActionSpec::new(
                    "a",
                    vec![Outcome::new(1, 0.5), Outcome::new(2, 0.4)],
                )],
                vec![],
                vec![],
            ],
            0,
            vec![1, 2],
            1,
        );
        let report = validate_model(&model);
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::RowSum { state, action, sum } => {
                assert_eq!((*state, *action), (0, 0));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn cycle_is_reported_as_horizon_violation() {
        // s0 -> s1 -> s0 ... with an escape to the end state from s1
        let model = EpisodicModel::new(
            labels(3),
            vec![
                vec![ActionSpec::certain("go", 1)],
                vec![ActionSpec::new(
                    "loop",
                    vec![Outcome::new(0, 0.5), Outcome::new(2, 0.5)],
                )],
                vec![],
            ],
            0,
            vec![2],
            4,
        );
        let report = validate_model(&model);
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::HorizonExceeded { horizon: 4, .. }]
        ));
    }

    #[test]
    fn absorbing_and_structure_violations() {
        let model = EpisodicModel::new(
            labels(3),
            vec![
                vec![ActionSpec::certain("a", 7)],
                vec![],
                vec![ActionSpec::certain("b", 0)],
            ],
            2,
            vec![2, 2],
            0,
        );
        let v = validate_model(&model).violations;
        assert!(v.contains(&Violation::ZeroHorizon));
        assert!(v.contains(&Violation::DuplicateEndState { state: 2 }));
        assert!(v.contains(&Violation::InitialIsEndState { initial: 2 }));
        assert!(v.contains(&Violation::EndStateHasActions { state: 2 }));
        assert!(v.contains(&Violation::NoActions { state: 1 }));
        assert!(v.contains(&Violation::TargetOutOfRange {
            state: 0,
            action: 0,
            next: 7
        }));
    }

    #[test]
    fn deterministic_edge_always_taken() {
        let model = build_two_action_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_transition(&model, 0, 1, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn inadmissible_action_rejected() {
        let model = build_two_action_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_transition(&model, 0, 5, &mut rng),
            Err(Error::InadmissibleAction {
                state: 0,
                action: 5
            })
        ));
        assert!(matches!(
            sample_transition(&model, 1, 0, &mut rng),
            Err(Error::EndStateAction { state: 1 })
        ));
    }

    #[test]
    fn fair_coin_frequencies() {
        let model = EpisodicModel::new(
            labels(3),
            vec![
                vec![ActionSpec::new(
                    "flip",
                    vec![Outcome::new(1, 0.5), Outcome::new(2, 0.5)],
                )],
                vec![],
                vec![],
            ],
            0,
            vec![1, 2],
            1,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let heads = (0..n)
            .filter(|_| sample_transition(&model, 0, 0, &mut rng).unwrap() == 1)
            .count();
        assert!((heads as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_draws() {
        let (model, _) = build_example1();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample_transition(&model, 0, 0, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn rollout_follows_deterministic_chain() {
        let model = build_two_action_toy();
        let mut policy = Policy::empty(1, model.num_states());
        policy.set(1, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ep = rollout(&model, &policy, &mut rng).unwrap();
        assert_eq!(ep.terminal, 2);
        assert_eq!(ep.steps, vec![(0, 1)]);
    }

    #[test]
    fn undefined_policy_is_rejected() {
        let model = build_two_action_toy();
        let policy = Policy::empty(1, model.num_states());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            rollout(&model, &policy, &mut rng),
            Err(Error::PolicyUndefined { step: 1, state: 0 })
        ));
        assert!(matches!(
            exact_end_distribution(&model, &policy),
            Err(Error::PolicyUndefined { step: 1, state: 0 })
        ));
    }

    #[test]
    fn example1_exact_distribution() {
        let (model, policy) = build_example1();
        let d = exact_end_distribution(&model, &policy).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.2, 0.3]);
    }

    #[test]
    fn deterministic_chain_unit_mass() {
        // s0 -> s1 -> g2 among three end states
        let model = EpisodicModel::new(
            labels(5),
            vec![
                vec![ActionSpec::certain("a", 1)],
                vec![ActionSpec::certain("b", 3)],
                vec![],
                vec![],
                vec![],
            ],
            0,
            vec![2, 3, 4],
            2,
        );
        let d = exact_end_distribution(
            &model,
            &Policy::stationary(2, &[Some(0), Some(0), None, None, None]),
        )
        .unwrap();
        assert_eq!(d.probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn sample_only_hides_nothing_it_needs() {
        let model = build_two_action_toy();
        let env = SampleOnly::new(&model);
        assert_eq!(env.num_actions(0), 2);
        assert_eq!(env.classify(2), StateClass::End(2));
        let mut policy = Policy::empty(1, 3);
        policy.set(1, 0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(rollout(&env, &policy, &mut rng).unwrap().terminal, 1);
    }
}
