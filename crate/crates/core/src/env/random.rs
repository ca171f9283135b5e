use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::mdp::{ActionSpec, EpisodicModel, Outcome};

/// Size bounds for [`random_small_mdp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomMdpLimits {
    /// Non-end states.
    pub max_states: usize,
    pub max_actions: usize,
    pub max_horizon: usize,
    pub max_end_states: usize,
}

impl Default for RandomMdpLimits {
    fn default() -> Self {
        Self {
            max_states: 6,
            max_actions: 3,
            max_horizon: 3,
            max_end_states: 4,
        }
    }
}

impl RandomMdpLimits {
    /// Upper bound on the reachable-scope policy count of any generated
    /// model. Every decision state sits in exactly one layer, so it is
    /// decided at most once per episode.
    pub fn worst_case_policies(&self) -> u128 {
        (self.max_actions as u128).saturating_pow(self.max_states as u32)
    }

    pub fn is_usable(&self) -> bool {
        self.max_states >= 1
            && self.max_actions >= 1
            && self.max_horizon >= 1
            && self.max_end_states >= 1
    }
}

/// Layered random model: decision states are split into `T` layers, layer 0
/// holding only the initial state; every action of a state in layer `ℓ`
/// leads to states of layer `ℓ + 1` or to end states, and the last layer
/// leads to end states only. Half of the models use probabilities that are
/// multiples of 0.1 so that quantile thresholds are hit exactly.
pub fn random_small_mdp<R: Rng + ?Sized>(rng: &mut R, limits: RandomMdpLimits) -> EpisodicModel {
    assert!(limits.is_usable(), "random MDP limits must all be positive");
    let horizon = rng.random_range(1..=limits.max_horizon.min(limits.max_states));
    let decision = rng.random_range(horizon..=limits.max_states);
    let n_end = rng.random_range(1..=limits.max_end_states);
    let quantized = rng.random_bool(0.5);

    let mut layer_of = vec![0usize; decision];
    for (s, layer) in layer_of.iter_mut().enumerate().skip(1) {
        *layer = if s < horizon {
            s
        } else if horizon > 1 {
            rng.random_range(1..horizon)
        } else {
            0
        };
    }
    let ends: Vec<usize> = (decision..decision + n_end).collect();

    let mut actions = Vec::with_capacity(decision + n_end);
    for s in 0..decision {
        let layer = layer_of[s];
        let mut pool: Vec<usize> = ends.clone();
        if layer + 1 < horizon {
            pool.extend((0..decision).filter(|&x| layer_of[x] == layer + 1));
        }
        let k = rng.random_range(1..=limits.max_actions);
        let row = (0..k)
            .map(|a| {
                pool.shuffle(rng);
                let support = rng.random_range(1..=pool.len().min(3));
                let probs = if quantized {
                    quantized_row(rng, support)
                } else {
                    continuous_row(rng, support)
                };
                let outcomes = pool[..support]
                    .iter()
                    .zip(probs)
                    .map(|(&next, p)| Outcome::new(next, p))
                    .collect();
                ActionSpec::new(format!("a{a}"), outcomes)
            })
            .collect();
        actions.push(row);
    }
    actions.extend((0..n_end).map(|_| Vec::new()));

    let labels = (0..decision)
        .map(|s| format!("s{s}"))
        .chain((1..=n_end).map(|i| format!("g{i}")))
        .collect();
    EpisodicModel::new(labels, actions, 0, ends, horizon)
}

/// Ten tenths dealt out at random.
fn quantized_row<R: Rng + ?Sized>(rng: &mut R, support: usize) -> Vec<f64> {
    let mut units = vec![0u32; support];
    for _ in 0..10 {
        units[rng.random_range(0..support)] += 1;
    }
    units.into_iter().map(|u| u as f64 / 10.0).collect()
}

/// Flat Dirichlet draw.
fn continuous_row<R: Rng + ?Sized>(rng: &mut R, support: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..support).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
    // put the rounding residue on the last entry
    let head: f64 = p[..support - 1].iter().sum();
    p[support - 1] = (1.0 - head).max(0.0);
    p
}
