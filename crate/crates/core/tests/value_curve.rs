use proptest::prelude::*;
use qqlearn::env::{random_small_mdp, RandomMdpLimits};
use qqlearn::solver::{optimal_cumulative, optimal_decumulative, solve_theta};
use qqlearn::{EpisodicModel, Objective, Theta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64) -> EpisodicModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_small_mdp(&mut rng, RandomMdpLimits::default())
}

fn root(m: &EpisodicModel, theta: f64, objective: Objective) -> f64 {
    let th = Theta::new(theta, m.num_end_states());
    solve_theta(m, th, objective).unwrap().root_value()
}

proptest! {
    #[test]
    fn optimal_value_is_nonincreasing_and_lipschitz(
        seed in 0u64..10_000,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let m = model(seed);
        let top = m.num_end_states() as f64 + 1.0;
        let (lo, hi) = if a <= b { (a * top, b * top) } else { (b * top, a * top) };
        for objective in [Objective::Upper, Objective::Lower] {
            let v_lo = root(&m, lo, objective);
            let v_hi = root(&m, hi, objective);
            prop_assert!(v_hi <= v_lo + 1e-12);
            prop_assert!(v_lo - v_hi <= hi - lo + 1e-12);
        }
    }

    #[test]
    fn lower_value_is_upper_value_shifted(seed in 0u64..10_000, x in 0.0f64..1.0) {
        let m = model(seed);
        let theta = x * (m.num_end_states() as f64 + 1.0);
        let up = root(&m, theta, Objective::Upper);
        let low = root(&m, theta, Objective::Lower);
        prop_assert!((low - (up - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn integer_theta_reads_the_envelopes() {
    for seed in 0..50 {
        let m = model(seed);
        let n = m.num_end_states();
        let g = optimal_decumulative(&m).unwrap();
        let f = optimal_cumulative(&m).unwrap();
        for k in 1..=n {
            let up = root(&m, k as f64, Objective::Upper);
            assert!((up - g.get(k).unwrap()).abs() < 1e-12, "seed {seed} k {k}");
            // lower reward at θ = k charges −1 below g_k: value is −F*(g_{k−1})
            let low = root(&m, k as f64, Objective::Lower);
            let expected = if k == 1 { 0.0 } else { -f.get(k - 1).unwrap() };
            assert!((low - expected).abs() < 1e-12, "seed {seed} k {k}");
        }
    }
}
