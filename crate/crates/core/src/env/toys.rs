use crate::mdp::{ActionSpec, EpisodicModel, Outcome, Policy};

fn names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// One decision with a single action that ends at `g_1`, `g_2`, `g_3` with
/// probabilities 0.5, 0.2, 0.3, plus its only policy.
pub fn build_example1() -> (EpisodicModel, Policy) {
    let model = EpisodicModel::new(
        names(&["s0", "g1", "g2", "g3"]),
        vec![
            vec![ActionSpec::new(
                "play",
                vec![
                    Outcome::new(1, 0.5),
                    Outcome::new(2, 0.2),
                    Outcome::new(3, 0.3),
                ],
            )],
            vec![],
            vec![],
            vec![],
        ],
        0,
        vec![1, 2, 3],
        1,
    );
    let policy = Policy::stationary(1, &[Some(0), None, None, None]);
    (model, policy)
}

/// `s_0` with `a_1 → g_1` and `a_2 → g_2`, both certain; `T = 1`.
pub fn build_two_action_toy() -> EpisodicModel {
    EpisodicModel::new(
        names(&["s0", "g1", "g2"]),
        vec![
            vec![ActionSpec::certain("a1", 1), ActionSpec::certain("a2", 2)],
            vec![],
            vec![],
        ],
        0,
        vec![1, 2],
        1,
    )
}
