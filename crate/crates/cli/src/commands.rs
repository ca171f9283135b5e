use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use qqlearn::env::{random_small_mdp, RandomMdpLimits};
use qqlearn::learning::{check_timescale, qq_learning, LearningRun};
use qqlearn::quantile::{empirical_distribution, sampling_tolerance};
use qqlearn::seed::{stream_rng, ORACLE_STREAM, SIMULATE_STREAM, TRAIN_STREAM};
use qqlearn::shaping::quantile_from_theta;
use qqlearn::solver::{
    brute_force_best_quantile, optimal_cumulative, optimal_decumulative, optimal_quantile,
    solve_theta, theta_crossing, ENUMERATION_LIMIT,
};
use qqlearn::{
    exact_end_distribution, rollout, EndStateDistribution, EpisodicModel, Objective, Policy,
    SampleOnly, Tau, Theta,
};

use crate::config::{ExperimentConfig, LONG_STEPS};
use crate::environment::{resolve, Environment};
use crate::error::{CliError, Result, EXIT_FAILED, EXIT_OK};
use crate::output::{write_run, Summary};
use crate::policy_file::load_policy;

/// Quantile levels checked by the random-model oracle.
pub const ORACLE_TAUS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

/// Copies a report into `dir/name` when an output directory was given.
fn save_report(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = dir {
        crate::create_dir(dir)?;
        crate::write_file(&dir.join(name), text)?;
    }
    Ok(())
}

fn end_label(model: &EpisodicModel, i: usize) -> String {
    model.end_states().label(i).unwrap_or("?").to_string()
}

pub fn validate(target: &str, out: &mut dyn Write) -> Result<i32> {
    let env = resolve(target, Path::new(""))?;
    let report = env.model.validate();
    let mut text = String::new();
    if report.is_clean() {
        let _ = writeln!(
            text,
            "{}: clean ({} states, {} end states, horizon {})",
            env.name,
            env.model.num_states(),
            env.model.num_end_states(),
            env.model.horizon()
        );
        emit(out, &text)?;
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            text,
            "{}: {} violation(s)",
            env.name,
            report.violations.len()
        );
        for v in &report.violations {
            let _ = writeln!(text, "  {v}");
        }
        emit(out, &text)?;
        Ok(EXIT_FAILED)
    }
}

pub struct SolveArgs<'a> {
    pub target: &'a str,
    pub tau: f64,
    pub objective: Objective,
    pub out_dir: Option<&'a Path>,
}

pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let env = resolve(args.target, Path::new(""))?;
    let model = &env.model;
    let report = model.validate();
    if !report.is_clean() {
        return Err(CliError::Invalid(format!(
            "{}: invalid model\n{report}",
            env.name
        )));
    }
    let tau = Tau::new(args.tau)?;
    let k = optimal_quantile(model, tau, args.objective)?;
    let g = optimal_decumulative(model)?;
    let f = optimal_cumulative(model)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "model {}: {} states, {} end states, horizon {}",
        env.name,
        model.num_states(),
        model.num_end_states(),
        model.horizon()
    );
    let _ = writeln!(
        text,
        "{:>4}  {:>12}  {:>10}  {:>10}",
        "i", "end state", "F*", "G*"
    );
    for i in 1..=model.num_end_states() {
        let _ = writeln!(
            text,
            "{:>4}  {:>12}  {:>10.6}  {:>10.6}",
            i,
            end_label(model, i),
            f.get(i).unwrap_or(f64::NAN),
            g.get(i).unwrap_or(f64::NAN)
        );
    }
    let _ = writeln!(
        text,
        "optimal {} {}-quantile: g_{} ({})",
        args.objective,
        args.tau,
        k,
        end_label(model, k)
    );
    if args.tau > 0.0 && args.tau < 1.0 {
        let crossing = theta_crossing(model, tau, args.objective)?;
        let _ = writeln!(text, "theta crossing: {crossing:.6}");
    }
    let theta = Theta::new(k as f64, model.num_end_states());
    let table = solve_theta(model, theta, args.objective)?;
    let _ = writeln!(
        text,
        "greedy policy at theta = {k} (value {:.6}):",
        table.root_value()
    );
    for (t, s, a) in on_policy_rules(model, table.greedy()) {
        let _ = writeln!(
            text,
            "  t={t:<3} {:<12} -> {}",
            model.state_label(s),
            model.action_label(s, a)
        );
    }
    emit(out, &text)?;
    save_report(args.out_dir, "solve.txt", &text)?;
    Ok(EXIT_OK)
}

/// Decision rules at the `(t, s)` pairs the policy itself can reach.
fn on_policy_rules(model: &EpisodicModel, policy: &Policy) -> Vec<(usize, usize, usize)> {
    let mut rules = Vec::new();
    let mut layer = BTreeSet::from([model.initial()]);
    for t in 1..=model.horizon() {
        let mut next = BTreeSet::new();
        for &s in &layer {
            let Some(a) = policy.action(t, s) else {
                continue;
            };
            rules.push((t, s, a));
            for o in &model.actions(s)[a].outcomes {
                if o.prob > 0.0 && !model.is_end(o.next) {
                    next.insert(o.next);
                }
            }
        }
        layer = next;
    }
    rules
}

pub struct SimulateArgs<'a> {
    pub target: &'a str,
    pub policy: Option<&'a Path>,
    pub episodes: usize,
    pub seed: u64,
    pub taus: &'a [f64],
    pub out_dir: Option<&'a Path>,
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let env = resolve(args.target, Path::new(""))?;
    let model = &env.model;
    let report = model.validate();
    if !report.is_clean() {
        return Err(CliError::Invalid(format!(
            "{}: invalid model\n{report}",
            env.name
        )));
    }
    let policy = match (args.policy, &env.designated) {
        (Some(path), _) => load_policy(path, model)?,
        (None, Some(p)) => p.clone(),
        (None, None) => {
            return Err(CliError::Usage(format!(
                "{} has several policies; pass --policy",
                env.name
            )))
        }
    };
    if args.episodes == 0 {
        return Err(CliError::Usage("--episodes must be at least 1".into()));
    }
    let taus: Vec<Tau> = args
        .taus
        .iter()
        .map(|&t| Tau::new(t))
        .collect::<qqlearn::Result<_>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    // reject incompatible policies before sampling
    let exact = exact_end_distribution(model, &policy)
        .map_err(|e| CliError::Invalid(format!("incompatible policy: {e}")))?;

    let sim = SampleOnly::new(model);
    let mut rng = stream_rng(args.seed, SIMULATE_STREAM, 0);
    let mut terminals = Vec::with_capacity(args.episodes);
    for _ in 0..args.episodes {
        terminals.push(rollout(&sim, &policy, &mut rng)?.terminal);
    }
    let emp = empirical_distribution(&terminals, model.num_end_states())?;
    let slack = sampling_tolerance(args.episodes);
    let banded = EndStateDistribution::with_tolerance(emp.probs().to_vec(), slack)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{}: {} episodes, seed {}",
        env.name, args.episodes, args.seed
    );
    let _ = writeln!(
        text,
        "{:>4}  {:>12}  {:>10}  {:>10}",
        "i", "end state", "empirical", "exact"
    );
    for i in 1..=model.num_end_states() {
        let _ = writeln!(
            text,
            "{:>4}  {:>12}  {:>10.6}  {:>10.6}",
            i,
            end_label(model, i),
            emp.probs()[i - 1],
            exact.probs()[i - 1]
        );
    }
    let _ = writeln!(
        text,
        "total variation to exact: {:.6}",
        emp.total_variation(&exact)
    );
    for tau in taus {
        let t = tau.value();
        let _ = writeln!(
            text,
            "tau {t}: empirical {}, within sampling error (+/-{slack:.4}) {}, exact {}",
            qqlearn::quantile::quantile(&emp, tau),
            qqlearn::quantile::quantile(&banded, tau),
            qqlearn::quantile::quantile(&exact, tau)
        );
    }
    emit(out, &text)?;
    save_report(args.out_dir, "simulate.txt", &text)?;
    Ok(EXIT_OK)
}

pub struct OracleArgs<'a> {
    pub seeds: u64,
    pub seed: u64,
    pub limits: RandomMdpLimits,
    pub out_dir: Option<&'a Path>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleTally {
    pub cases: u64,
    pub agreed: u64,
    pub mismatches: Vec<String>,
}

/// Envelope quantiles against brute-force enumeration on random models.
pub fn oracle_tally(seeds: u64, seed: u64, limits: RandomMdpLimits) -> Result<OracleTally> {
    if !limits.is_usable() {
        return Err(CliError::Usage(
            "random model limits must all be positive".into(),
        ));
    }
    if limits.worst_case_policies() > ENUMERATION_LIMIT {
        return Err(CliError::Usage(format!(
            "limits allow up to {} policies, above the enumeration limit {}",
            limits.worst_case_policies(),
            ENUMERATION_LIMIT
        )));
    }
    let mut tally = OracleTally::default();
    for k in 0..seeds {
        let mut rng = stream_rng(seed, ORACLE_STREAM, k);
        let model = random_small_mdp(&mut rng, limits);
        for &t in &ORACLE_TAUS {
            let tau = Tau::new(t)?;
            for objective in [Objective::Upper, Objective::Lower] {
                let envelope = optimal_quantile(&model, tau, objective)?;
                let (_, brute) = brute_force_best_quantile(&model, tau, objective)?;
                tally.cases += 1;
                if envelope == brute {
                    tally.agreed += 1;
                } else {
                    tally.mismatches.push(format!(
                        "model {k}, tau {t}, {objective}: envelope g_{envelope}, enumeration g_{brute}"
                    ));
                }
            }
        }
    }
    Ok(tally)
}

pub fn oracle_check(args: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let tally = oracle_tally(args.seeds, args.seed, args.limits)?;
    let mut text = String::new();
    let l = args.limits;
    let _ = writeln!(
        text,
        "random models: {} (seed {}, states <= {}, actions <= {}, horizon <= {}, end states <= {})",
        args.seeds, args.seed, l.max_states, l.max_actions, l.max_horizon, l.max_end_states
    );
    for m in &tally.mismatches {
        let _ = writeln!(text, "  mismatch: {m}");
    }
    let verdict = if tally.agreed == tally.cases {
        "pass"
    } else {
        "FAIL"
    };
    let _ = writeln!(
        text,
        "agreement: {}/{} {verdict}",
        tally.agreed, tally.cases
    );
    emit(out, &text)?;
    save_report(args.out_dir, "oracle-check.txt", &text)?;
    Ok(if tally.agreed == tally.cases {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

pub struct TrainArgs<'a> {
    pub config: &'a Path,
    pub seed: Option<u64>,
    pub out_dir: Option<&'a Path>,
    pub runs: Option<u32>,
    pub long: bool,
}

/// Outcome of one training job.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub index: u32,
    pub dir: PathBuf,
    pub summary: Summary,
}

pub fn train(args: &TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if args.long {
        cfg.steps = LONG_STEPS;
    }
    cfg.validate()?;
    let dir = match args.out_dir {
        Some(d) => d.to_path_buf(),
        None => cfg.output_dir(),
    };
    let runs = run_experiment(&cfg, &dir)?;

    let mut text = String::new();
    for run in &runs {
        let s = &run.summary;
        let _ = writeln!(
            text,
            "run {} (seed {}): theta {:.4}, quantile g_{}, trailing v_estimate {:.4}, score {:.4} -> {}",
            run.index,
            s.seed,
            s.final_theta,
            s.quantile,
            s.trailing_v_mean,
            s.final_score,
            run.dir.display()
        );
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}

/// Runs every job of the config concurrently and writes their outputs.
/// A single run writes straight into `dir`; a sweep uses `dir/run-<k>` and
/// adds an aggregate `sweep.txt`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<TrainedRun>> {
    let env = resolve(&cfg.environment, &cfg.base_dir)?;
    let report = env.model.validate();
    if !report.is_clean() {
        return Err(CliError::Invalid(format!(
            "{}: invalid model\n{report}",
            env.name
        )));
    }
    let settings = cfg.settings(env.progress_in_state);
    let timescale = check_timescale(&settings.schedules);
    if !timescale.passed {
        return Err(CliError::Invalid(format!(
            "timescale check failed: {}",
            timescale.diagnostic
        )));
    }
    let tau = Tau::new(cfg.tau)?;
    let exact = if cfg.sample_only {
        None
    } else {
        Some(ExactReference::compute(&env.model, tau, cfg.objective)?)
    };

    let jobs: Vec<(u32, PathBuf)> = (0..cfg.runs)
        .map(|k| {
            let d = if cfg.runs == 1 {
                dir.to_path_buf()
            } else {
                dir.join(format!("run-{k}"))
            };
            (k, d)
        })
        .collect();

    let results: Vec<Result<TrainedRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(k, d)| {
                let (env, settings, exact) = (&env, &settings, exact.as_ref());
                scope.spawn(move || -> Result<TrainedRun> {
                    let mut rng = stream_rng(cfg.seed, TRAIN_STREAM, *k as u64);
                    let sim = SampleOnly::new(&env.model);
                    let run = qq_learning(&sim, tau, cfg.objective, settings, &mut rng)?;
                    let summary = summarize(cfg, env, &run, *k, exact)?;
                    write_run(d, &run, &summary)?;
                    Ok(TrainedRun {
                        index: *k,
                        dir: d.clone(),
                        summary,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training job panicked"))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    if cfg.runs > 1 {
        crate::write_file(&dir.join("sweep.txt"), &sweep_report(&runs))?;
    }
    Ok(runs)
}

/// Exact-solver figures for the configured objective.
#[derive(Debug, Clone, Copy)]
pub struct ExactReference {
    pub quantile: usize,
    pub crossing: f64,
}

impl ExactReference {
    pub fn compute(model: &EpisodicModel, tau: Tau, objective: Objective) -> Result<Self> {
        Ok(Self {
            quantile: optimal_quantile(model, tau, objective)?,
            crossing: theta_crossing(model, tau, objective)?,
        })
    }
}

fn summarize(
    cfg: &ExperimentConfig,
    env: &Environment,
    run: &LearningRun,
    index: u32,
    exact: Option<&ExactReference>,
) -> Result<Summary> {
    let model = &env.model;
    let last = run
        .final_record()
        .ok_or_else(|| CliError::Invalid("steps < log_every: the trace is empty".into()))?;
    let quantile = quantile_from_theta(run.theta);
    let exact = match exact {
        Some(e) => Some(crate::output::ExactComparison {
            quantile: e.quantile,
            quantile_label: end_label(model, e.quantile),
            crossing: e.crossing,
            value_at_final_theta: solve_theta(model, run.theta, cfg.objective)?.root_value(),
        }),
        None => None,
    };
    Ok(Summary {
        environment: env.name.clone(),
        objective: cfg.objective,
        tau: cfg.tau,
        steps: cfg.steps,
        seed: cfg.seed,
        run: index,
        final_theta: run.theta.value(),
        quantile,
        quantile_label: end_label(model, quantile),
        trailing_v_mean: run.trailing_v_mean(0.1),
        trailing_theta_mean: run.trailing_theta_mean(0.1),
        final_v_estimate: last.v_estimate,
        final_score: last.score,
        episodes: last.episode_count,
        clamp_events: run.clamp_events,
        exact,
    })
}

fn sweep_report(runs: &[TrainedRun]) -> String {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "run,final_theta,quantile,trailing_v_mean,final_score,exact_quantile"
    );
    for r in runs {
        let s = &r.summary;
        let exact = s
            .exact
            .as_ref()
            .map_or(String::new(), |e| e.quantile.to_string());
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            r.index, s.final_theta, s.quantile, s.trailing_v_mean, s.final_score, exact
        );
    }
    let agree = runs
        .iter()
        .filter(|r| {
            r.summary
                .exact
                .as_ref()
                .is_some_and(|e| e.quantile == r.summary.quantile)
        })
        .count();
    if runs.iter().any(|r| r.summary.exact.is_some()) {
        let _ = writeln!(
            text,
            "# quantile agreement with exact solver: {agree}/{}",
            runs.len()
        );
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: impl FnOnce(&mut Vec<u8>) -> Result<i32>) -> (i32, String) {
        let mut buf = Vec::new();
        let code = f(&mut buf).unwrap();
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn solve_example1() {
        for (objective, expected) in [(Objective::Lower, "g_1"), (Objective::Upper, "g_2")] {
            let args = SolveArgs {
                target: "example1",
                tau: 0.5,
                objective,
                out_dir: None,
            };
            let (code, text) = run(|w| solve(&args, w));
            assert_eq!(code, 0);
            assert!(
                text.contains(&format!("0.5-quantile: {expected}")),
                "{text}"
            );
        }
    }

    #[test]
    fn solve_toy_upper() {
        let args = SolveArgs {
            target: "toy",
            tau: 0.3,
            objective: Objective::Upper,
            out_dir: None,
        };
        let (_, text) = run(|w| solve(&args, w));
        assert!(text.contains("quantile: g_2"), "{text}");
        assert!(text.contains("theta crossing: 2.3"), "{text}");
        assert!(text.contains("s0           -> a2"), "{text}");
    }

    #[test]
    fn oracle_refuses_large_limits() {
        let limits = RandomMdpLimits {
            max_states: 20,
            ..RandomMdpLimits::default()
        };
        let err = oracle_tally(1, 0, limits).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_USAGE);
    }

    #[test]
    fn oracle_small_sweep_agrees() {
        let tally = oracle_tally(5, 9, RandomMdpLimits::default()).unwrap();
        assert_eq!(tally.cases, 50);
        assert_eq!(tally.agreed, 50);
        assert_eq!(
            tally,
            oracle_tally(5, 9, RandomMdpLimits::default()).unwrap()
        );
    }

    #[test]
    fn simulate_needs_a_policy_for_choice_models() {
        let args = SimulateArgs {
            target: "toy",
            policy: None,
            episodes: 10,
            seed: 0,
            taus: &[0.5],
            out_dir: None,
        };
        let err = simulate(&args, &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_USAGE);
    }
}
