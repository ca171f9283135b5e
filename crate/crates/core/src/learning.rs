//! Tabular learning from samples only.
//!
//! [`q_learning`] runs finite-horizon Q-learning against a fixed shaped
//! reward. [`qq_learning`] couples it with a slow update of the threshold θ:
//! after every environment step θ moves by `β_n` toward the point where the
//! learned root value crosses the target (`1 − τ` for the upper quantile).
//! For θ to look quasi-static to the Q-values, `β_n / α_n` must vanish;
//! [`check_timescale`] verifies this numerically before a run starts.
//!
//! Time steps are forward decision indices: `t = 1` is the decision taken in
//! the initial state. Q-values at step `t` bootstrap from step `t + 1`, and
//! nothing is bootstrapped past an end state. No discounting is applied.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Policy, Simulator, StateClass, StateId};
use crate::quantile::Tau;
use crate::shaping::{shaped_reward, Objective, Theta};
use crate::solver::theta_should_decrease;

/// Step-size or exploration schedule, evaluated at the global step `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Constant(f64),
    /// `1 / n`
    Harmonic,
    /// `1 / (n + offset)^exponent`
    Power {
        offset: f64,
        exponent: f64,
    },
    /// `max(floor, n^(−exponent))`
    FloorPower {
        floor: f64,
        exponent: f64,
    },
    Zero,
}

impl Schedule {
    pub fn at(&self, n: u64) -> f64 {
        let n = n as f64;
        match *self {
            Schedule::Constant(c) => c,
            Schedule::Harmonic => 1.0 / n,
            Schedule::Power { offset, exponent } => (n + offset).powf(-exponent),
            Schedule::FloorPower { floor, exponent } => n.powf(-exponent).max(floor),
            Schedule::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    /// Q-value learning rate (fast timescale).
    pub alpha: Schedule,
    /// θ step (slow timescale).
    pub beta: Schedule,
    pub epsilon: Schedule,
}

impl Default for Schedules {
    /// `α_n = 1/(n+1)^{11/20}`, `β_n = 1/n`, `ε = 0.01`.
    fn default() -> Self {
        Self {
            alpha: Schedule::Power {
                offset: 1.0,
                exponent: 11.0 / 20.0,
            },
            beta: Schedule::Harmonic,
            epsilon: Schedule::Constant(0.01),
        }
    }
}

impl Schedules {
    /// `ε_n = max(0.01, n^{-1/4})`.
    pub fn decaying_epsilon() -> Schedule {
        Schedule::FloorPower {
            floor: 0.01,
            exponent: 0.25,
        }
    }
}

pub const TIMESCALE_CHECKPOINTS: [u64; 3] = [100, 10_000, 1_000_000];
pub const TIMESCALE_FINAL_RATIO: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct TimescaleReport {
    /// `(n, β_n / α_n)` at each checkpoint.
    pub ratios: Vec<(u64, f64)>,
    pub passed: bool,
    pub diagnostic: String,
}

/// Passes iff `β_n/α_n` decreases over `n ∈ {10², 10⁴, 10⁶}` and ends below
/// 0.05. A ratio that is already zero counts as decreasing (frozen θ).
pub fn check_timescale(schedules: &Schedules) -> TimescaleReport {
    let ratios: Vec<(u64, f64)> = TIMESCALE_CHECKPOINTS
        .iter()
        .map(|&n| (n, schedules.beta.at(n) / schedules.alpha.at(n)))
        .collect();
    let mut problems = Vec::new();
    for &(n, r) in &ratios {
        if !r.is_finite() || r < 0.0 {
            problems.push(format!("ratio at n = {n} is {r}"));
        }
    }
    for w in ratios.windows(2) {
        let ((n0, r0), (n1, r1)) = (w[0], w[1]);
        if !(r1 < r0 || r1 == 0.0) {
            problems.push(format!(
                "ratio does not decrease from n = {n0} ({r0:.4e}) to n = {n1} ({r1:.4e})"
            ));
        }
    }
    let (n_last, last) = *ratios.last().expect("checkpoints");
    if last.is_nan() || last >= TIMESCALE_FINAL_RATIO {
        problems.push(format!(
            "ratio at n = {n_last} is {last:.4e}, needs to be below {TIMESCALE_FINAL_RATIO}"
        ));
    }
    let passed = problems.is_empty();
    let listing = ratios
        .iter()
        .map(|(n, r)| format!("n={n}: {r:.4e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let diagnostic = if passed {
        format!("beta/alpha vanishes ({listing})")
    } else {
        format!("{} ({listing})", problems.join("; "))
    };
    TimescaleReport {
        ratios,
        passed,
        diagnostic,
    }
}

/// Which counter `n` the learning rate `α_n(s, a)` is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaClock {
    /// Global step count.
    Global,
    /// Number of updates the `(t, s, a)` entry has received, this one included.
    PerPair,
}

/// How the Q-table is indexed in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layering {
    /// One layer per decision step `t = 1..=T`.
    PerStep,
    /// A single layer, for environments whose states already encode progress.
    Collapsed,
}

/// Time-indexed action values `Q(t, s, a)`, initialised to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    layers: usize,
    offsets: Vec<usize>,
    counts: Vec<usize>,
    width: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    pub fn new<E: Simulator + ?Sized>(env: &E, layering: Layering) -> Self {
        let layers = match layering {
            Layering::PerStep => env.horizon().max(1),
            Layering::Collapsed => 1,
        };
        let counts: Vec<usize> = (0..env.num_states())
            .map(|s| match env.classify(s) {
                StateClass::End(_) => 0,
                StateClass::NonEnd => env.num_actions(s),
            })
            .collect();
        let mut offsets = Vec::with_capacity(counts.len());
        let mut width = 0;
        for &c in &counts {
            offsets.push(width);
            width += c;
        }
        Self {
            layers,
            offsets,
            counts,
            width,
            values: vec![0.0; layers * width],
            visits: vec![0; layers * width],
        }
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    fn layer(&self, t: usize) -> Option<usize> {
        if self.layers == 1 {
            Some(0)
        } else {
            (t >= 1 && t <= self.layers).then(|| t - 1)
        }
    }

    fn range(&self, t: usize, s: StateId) -> Option<std::ops::Range<usize>> {
        let layer = self.layer(t)?;
        let start = layer * self.width + self.offsets[s];
        Some(start..start + self.counts[s])
    }

    /// `Q(t, s, ·)`; empty past the last layer or for end states.
    pub fn row(&self, t: usize, s: StateId) -> &[f64] {
        match self.range(t, s) {
            Some(r) => &self.values[r],
            None => &[],
        }
    }

    pub fn get(&self, t: usize, s: StateId, a: ActionId) -> f64 {
        self.row(t, s)[a]
    }

    pub fn set(&mut self, t: usize, s: StateId, a: ActionId, value: f64) {
        let r = self.range(t, s).expect("time step inside the table");
        self.values[r][a] = value;
    }

    /// `max_a Q(t, s, a)`, or 0 when there is nothing to choose from.
    pub fn max_value(&self, t: usize, s: StateId) -> f64 {
        self.row(t, s)
            .iter()
            .copied()
            .reduce(f64::max)
            .unwrap_or(0.0)
    }

    pub fn greedy_action(&self, t: usize, s: StateId) -> Option<ActionId> {
        let row = self.row(t, s);
        (!row.is_empty()).then(|| argmax(row))
    }

    /// Greedy policy over `horizon` steps; end states stay undefined.
    pub fn greedy_policy(&self, horizon: usize) -> Policy {
        let num_states = self.counts.len();
        let mut policy = Policy::empty(horizon, num_states);
        for t in 1..=horizon {
            for s in 0..num_states {
                if let Some(a) = self.greedy_action(t, s) {
                    policy.set(t, s, a).expect("policy sized from the table");
                }
            }
        }
        policy
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Counts one more update of `(t, s, a)` and returns the new count.
    fn visit(&mut self, t: usize, s: StateId, a: ActionId) -> u64 {
        let r = self.range(t, s).expect("time step inside the table");
        let slot = &mut self.visits[r][a];
        *slot += 1;
        *slot
    }
}

/// Lowest index among the maxima.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// Greedy action with probability `1 − eps`, uniform otherwise. Always
/// consumes one uniform draw, plus one more when exploring.
pub fn epsilon_greedy<R: Rng + ?Sized>(q_row: &[f64], eps: f64, rng: &mut R) -> ActionId {
    assert!(!q_row.is_empty(), "no admissible action");
    let u: f64 = rng.random();
    if u < eps {
        rng.random_range(0..q_row.len())
    } else {
        argmax(q_row)
    }
}

/// `Q(t,s,a) += α (r + max_a' Q(t+1, s', a') − Q(t,s,a))`; the bootstrap
/// term is dropped on entry into an end state.
#[allow(clippy::too_many_arguments)]
pub fn q_update(
    q: &mut QTable,
    t: usize,
    s: StateId,
    a: ActionId,
    r: f64,
    s_next: StateId,
    terminal: bool,
    alpha: f64,
) {
    let bootstrap = if terminal {
        0.0
    } else {
        q.max_value(t + 1, s_next)
    };
    let old = q.get(t, s, a);
    q.set(t, s, a, old + alpha * (r + bootstrap - old));
}

/// Learned counterpart of `V*_θ(s_0)`: `max_a Q(1, s_0, a)`.
pub fn v_estimate(q: &QTable, s0: StateId) -> f64 {
    q.max_value(1, s0)
}

/// Running end-state frequencies and the score they earn under the current θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTracker {
    counts: Vec<u64>,
    episodes: u64,
}

impl ScoreTracker {
    pub fn new(end_states: usize) -> Self {
        Self {
            counts: vec![0; end_states],
            episodes: 0,
        }
    }

    /// Counts one episode ending at `g_i`.
    pub fn record(&mut self, i: usize) {
        self.counts[i - 1] += 1;
        self.episodes += 1;
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.episodes.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// `Σ_i f_i · R_θ(g_i)`; 0 before the first episode ends.
    pub fn score(&self, objective: Objective, theta: Theta) -> f64 {
        if self.episodes == 0 {
            return 0.0;
        }
        self.frequencies()
            .iter()
            .enumerate()
            .map(|(k, f)| f * shaped_reward(objective, theta, StateClass::End(k + 1)))
            .sum()
    }
}

/// One logged row of a learning run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: u64,
    pub theta: f64,
    pub v_estimate: f64,
    pub score: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub episode_count: u64,
}

#[derive(Debug, Clone)]
pub struct LearnerSettings {
    pub schedules: Schedules,
    pub steps: u64,
    /// A trace row is written when `n % log_every == 0`.
    pub log_every: u64,
    pub layering: Layering,
    pub alpha_clock: AlphaClock,
    pub theta0: f64,
    /// Steps during which θ is held at `theta0`.
    pub theta_warmup: u64,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self {
            schedules: Schedules::default(),
            steps: 1_000_000,
            log_every: 1_000,
            layering: Layering::PerStep,
            alpha_clock: AlphaClock::PerPair,
            theta0: 0.0,
            theta_warmup: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LearningRun {
    pub q: QTable,
    pub theta: Theta,
    pub trace: Vec<TraceRecord>,
    pub tracker: ScoreTracker,
    pub clamp_events: u64,
}

impl LearningRun {
    /// Mean `v_estimate` over the last `fraction` of the trace rows.
    pub fn trailing_v_mean(&self, fraction: f64) -> f64 {
        trailing_mean(
            self.trace.iter().map(|r| r.v_estimate),
            self.trace.len(),
            fraction,
        )
    }

    pub fn trailing_theta_mean(&self, fraction: f64) -> f64 {
        trailing_mean(
            self.trace.iter().map(|r| r.theta),
            self.trace.len(),
            fraction,
        )
    }

    pub fn final_record(&self) -> Option<&TraceRecord> {
        self.trace.last()
    }
}

fn trailing_mean(values: impl Iterator<Item = f64>, len: usize, fraction: f64) -> f64 {
    if len == 0 {
        return f64::NAN;
    }
    let k = ((len as f64 * fraction).ceil() as usize).clamp(1, len);
    values.skip(len - k).sum::<f64>() / k as f64
}

/// Current position inside an episode.
struct Cursor {
    s0: StateId,
    s: StateId,
    t: usize,
    horizon: usize,
}

impl Cursor {
    fn new<E: Simulator + ?Sized>(env: &E) -> Self {
        let s0 = env.initial_state();
        Self {
            s0,
            s: s0,
            t: 1,
            horizon: env.horizon(),
        }
    }

    fn advance(&mut self, next: StateId, class: StateClass) -> Result<()> {
        match class {
            StateClass::End(_) => {
                self.s = self.s0;
                self.t = 1;
            }
            StateClass::NonEnd => {
                self.s = next;
                self.t += 1;
                if self.t > self.horizon {
                    return Err(Error::Precondition(format!(
                        "episode exceeded the horizon of {} steps",
                        self.horizon
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_settings(settings: &LearnerSettings) -> Result<()> {
    if settings.log_every == 0 {
        return Err(Error::Precondition("log_every must be at least 1".into()));
    }
    Ok(())
}

/// Q-learning with the reward shaped at a fixed θ.
pub fn q_learning<E, R>(
    env: &E,
    objective: Objective,
    theta: Theta,
    settings: &LearnerSettings,
    rng: &mut R,
) -> Result<LearningRun>
where
    E: Simulator + ?Sized,
    R: Rng + ?Sized,
{
    check_settings(settings)?;
    let theta = Theta::new(theta.value(), env.num_end_states());
    let schedules = &settings.schedules;
    let mut q = QTable::new(env, settings.layering);
    let mut tracker = ScoreTracker::new(env.num_end_states());
    let mut trace = Vec::with_capacity((settings.steps / settings.log_every) as usize);
    let mut cur = Cursor::new(env);

    for n in 1..=settings.steps {
        let eps = schedules.epsilon.at(n);
        let a = epsilon_greedy(q.row(cur.t, cur.s), eps, rng);
        let alpha = match settings.alpha_clock {
            AlphaClock::Global => schedules.alpha.at(n),
            AlphaClock::PerPair => schedules.alpha.at(q.visit(cur.t, cur.s, a)),
        };
        let next = env.sample_next(cur.s, a, rng)?;
        let class = env.classify(next);
        let terminal = matches!(class, StateClass::End(_));
        let r = shaped_reward(objective, theta, class);
        q_update(&mut q, cur.t, cur.s, a, r, next, terminal, alpha);
        if let StateClass::End(i) = class {
            tracker.record(i);
        }
        cur.advance(next, class)?;
        if n % settings.log_every == 0 {
            trace.push(TraceRecord {
                n,
                theta: theta.value(),
                v_estimate: v_estimate(&q, cur.s0),
                score: tracker.score(objective, theta),
                epsilon: eps,
                alpha,
                beta: 0.0,
                episode_count: tracker.episodes(),
            });
        }
    }
    Ok(LearningRun {
        q,
        theta,
        trace,
        tracker,
        clamp_events: 0,
    })
}

/// Two-timescale quantile Q-learning.
///
/// Per step: ε-greedy action, one environment transition, the shaped reward
/// of the entered end state at the current θ, a Q-update with `α_n`, then
/// θ moves by `∓β_n` depending on the learned root value.
pub fn qq_learning<E, R>(
    env: &E,
    tau: Tau,
    objective: Objective,
    settings: &LearnerSettings,
    rng: &mut R,
) -> Result<LearningRun>
where
    E: Simulator + ?Sized,
    R: Rng + ?Sized,
{
    let t = tau.value();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TauOutOfRange {
            tau: t,
            range: "(0, 1) (quantile learning)",
        });
    }
    let report = check_timescale(&settings.schedules);
    if !report.passed {
        return Err(Error::Timescale(report.diagnostic));
    }
    check_settings(settings)?;

    let schedules = &settings.schedules;
    let mut theta = Theta::new(settings.theta0, env.num_end_states());
    let mut q = QTable::new(env, settings.layering);
    let mut tracker = ScoreTracker::new(env.num_end_states());
    let mut trace = Vec::with_capacity((settings.steps / settings.log_every) as usize);
    let mut cur = Cursor::new(env);
    let mut clamp_events = 0;

    for n in 1..=settings.steps {
        let eps = schedules.epsilon.at(n);
        let beta = schedules.beta.at(n);
        let a = epsilon_greedy(q.row(cur.t, cur.s), eps, rng);
        let alpha = match settings.alpha_clock {
            AlphaClock::Global => schedules.alpha.at(n),
            AlphaClock::PerPair => schedules.alpha.at(q.visit(cur.t, cur.s, a)),
        };
        let next = env.sample_next(cur.s, a, rng)?;
        let class = env.classify(next);
        let terminal = matches!(class, StateClass::End(_));
        let r = shaped_reward(objective, theta, class);
        q_update(&mut q, cur.t, cur.s, a, r, next, terminal, alpha);

        let v = v_estimate(&q, cur.s0);
        if n > settings.theta_warmup {
            let delta = if theta_should_decrease(objective, v, t) {
                -beta
            } else {
                beta
            };
            if theta.shift(delta) {
                clamp_events += 1;
            }
        }

        if let StateClass::End(i) = class {
            tracker.record(i);
        }
        cur.advance(next, class)?;
        if n % settings.log_every == 0 {
            trace.push(TraceRecord {
                n,
                theta: theta.value(),
                v_estimate: v,
                score: tracker.score(objective, theta),
                epsilon: eps,
                alpha,
                beta,
                episode_count: tracker.episodes(),
            });
        }
    }
    Ok(LearningRun {
        q,
        theta,
        trace,
        tracker,
        clamp_events,
    })
}
