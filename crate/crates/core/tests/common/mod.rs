#![allow(dead_code)]

use qqlearn::EpisodicModel;

/// Every end-state distribution reachable by a deterministic time-indexed
/// policy, found by trying each action at every `(t, s)` the process can
/// occupy. Independent of the library's enumerator and propagation code.
pub fn all_policy_distributions(model: &EpisodicModel) -> Vec<Vec<f64>> {
    let points = decision_points(model);
    let mut out = Vec::new();
    let mut choice = vec![0usize; points.len()];
    loop {
        out.push(propagate(model, &points, &choice));
        // odometer over the choices
        let mut k = 0;
        loop {
            if k == points.len() {
                return out;
            }
            let (_, s) = points[k];
            choice[k] += 1;
            if choice[k] < model.actions(s).len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn decision_points(model: &EpisodicModel) -> Vec<(usize, usize)> {
    let mut points = Vec::new();
    let mut frontier = vec![model.initial()];
    for t in 1..=model.horizon() {
        frontier.sort_unstable();
        frontier.dedup();
        let mut next = Vec::new();
        for &s in &frontier {
            points.push((t, s));
            for a in model.actions(s) {
                for o in &a.outcomes {
                    if o.prob > 0.0 && !model.is_end(o.next) {
                        next.push(o.next);
                    }
                }
            }
        }
        frontier = next;
    }
    points
}

fn propagate(model: &EpisodicModel, points: &[(usize, usize)], choice: &[usize]) -> Vec<f64> {
    let n = model.num_end_states();
    let mut ends = vec![0.0; n];
    let mut mass = vec![0.0; model.num_states()];
    mass[model.initial()] = 1.0;
    for t in 1..=model.horizon() {
        let mut next = vec![0.0; model.num_states()];
        for (s, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let k = points
                .iter()
                .position(|&p| p == (t, s))
                .expect("occupied state is a decision point");
            for o in &model.actions(s)[choice[k]].outcomes {
                match model.end_index(o.next) {
                    Some(i) => ends[i - 1] += m * o.prob,
                    None => next[o.next] += m * o.prob,
                }
            }
        }
        mass = next;
    }
    ends
}

const TOL: f64 = 1e-9;

pub fn cdf(d: &[f64]) -> Vec<f64> {
    d.iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

pub fn decdf(d: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = d
        .iter()
        .rev()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    g.reverse();
    g
}

/// Least 1-based `i` with `F(g_i) ≥ τ`.
pub fn lower_q(d: &[f64], tau: f64) -> usize {
    cdf(d)
        .iter()
        .position(|&f| f >= tau - TOL)
        .map_or(d.len(), |k| k + 1)
}

/// Greatest 1-based `i` with `G(g_i) ≥ 1 − τ`.
pub fn upper_q(d: &[f64], tau: f64) -> usize {
    decdf(d)
        .iter()
        .rposition(|&g| g >= 1.0 - tau - TOL)
        .map_or(1, |k| k + 1)
}
