use qqlearn::env::{build_two_action_toy, build_wwtbam, WwtbamConfig};
use qqlearn::learning::{q_learning, qq_learning, Layering, LearnerSettings, Schedule, Schedules};
use qqlearn::solver::{solve_theta, theta_crossing};
use qqlearn::{Objective, SampleOnly, Tau, Theta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits(run: &qqlearn::learning::LearningRun) -> Vec<[u64; 8]> {
    run.trace
        .iter()
        .map(|r| {
            [
                r.n,
                r.theta.to_bits(),
                r.v_estimate.to_bits(),
                r.score.to_bits(),
                r.epsilon.to_bits(),
                r.alpha.to_bits(),
                r.beta.to_bits(),
                r.episode_count,
            ]
        })
        .collect()
}

#[test]
fn frozen_theta_degenerates_to_q_learning() {
    let toy = build_two_action_toy();
    let model = build_wwtbam(&WwtbamConfig::default()).unwrap();
    let cases = [
        (&toy, Layering::PerStep, 1.5),
        (&model, Layering::Collapsed, 4.5),
    ];
    for (m, layering, theta0) in cases {
        let env = SampleOnly::new(m);
        for objective in [Objective::Upper, Objective::Lower] {
            let settings = LearnerSettings {
                schedules: Schedules {
                    beta: Schedule::Zero,
                    ..Schedules::default()
                },
                steps: 20_000,
                log_every: 100,
                layering,
                theta0,
                ..LearnerSettings::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let qq =
                qq_learning(&env, Tau::new(0.3).unwrap(), objective, &settings, &mut rng).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let theta = Theta::new(theta0, m.num_end_states());
            let plain = q_learning(&env, objective, theta, &settings, &mut rng).unwrap();
            assert_eq!(bits(&qq), bits(&plain));
            assert_eq!(qq.q, plain.q);
        }
    }
}

#[test]
fn toy_learner_tracks_crossing() {
    let toy = build_two_action_toy();
    let tau = Tau::new(0.3).unwrap();
    let crossing = theta_crossing(&toy, tau, Objective::Upper).unwrap();
    assert!((crossing - 2.3).abs() < 1e-9);
    let env = SampleOnly::new(&toy);
    let settings = LearnerSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let run = qq_learning(&env, tau, Objective::Upper, &settings, &mut rng).unwrap();
    assert_eq!(run.trace.len(), 1000);
    assert!(
        (run.theta.value() - crossing).abs() < 0.3,
        "theta {}",
        run.theta.value()
    );
    assert!((run.trailing_v_mean(0.1) - 0.7).abs() < 0.05);
    assert!(run.q.values().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn small_tau_settles_near_the_safe_end() {
    let toy = build_two_action_toy();
    let tau = Tau::new(0.01).unwrap();
    let crossing = theta_crossing(&toy, tau, Objective::Upper).unwrap();
    let env = SampleOnly::new(&toy);
    let settings = LearnerSettings {
        steps: 200_000,
        ..LearnerSettings::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let run = qq_learning(&env, tau, Objective::Upper, &settings, &mut rng).unwrap();
    assert!((run.theta.value() - crossing).abs() < 0.3);
    let v = solve_theta(&toy, run.theta, Objective::Upper)
        .unwrap()
        .root_value();
    assert!((v - 0.99).abs() < 0.05, "value {v}");
}

#[test]
fn lower_learner_tracks_lower_crossing() {
    let toy = build_two_action_toy();
    let tau = Tau::new(0.3).unwrap();
    let crossing = theta_crossing(&toy, tau, Objective::Lower).unwrap();
    let env = SampleOnly::new(&toy);
    let settings = LearnerSettings {
        steps: 200_000,
        ..LearnerSettings::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let run = qq_learning(&env, tau, Objective::Lower, &settings, &mut rng).unwrap();
    assert!(
        (run.theta.value() - crossing).abs() < 0.3,
        "{} vs {crossing}",
        run.theta.value()
    );
    assert!(run.q.values().iter().all(|v| (-1.0..=0.0).contains(v)));
}

#[test]
fn game_show_value_estimate_settles_near_target() {
    let model = build_wwtbam(&WwtbamConfig::default()).unwrap();
    let env = SampleOnly::new(&model);
    let settings = LearnerSettings {
        layering: Layering::Collapsed,
        ..LearnerSettings::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let run = qq_learning(
        &env,
        Tau::new(0.3).unwrap(),
        Objective::Upper,
        &settings,
        &mut rng,
    )
    .unwrap();
    let v = run.trailing_v_mean(0.1);
    assert!((0.65..=0.75).contains(&v), "trailing mean {v}");
    assert!(run.q.values().iter().all(|v| (0.0..=1.0).contains(v)));
}
