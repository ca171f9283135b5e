//! Files written by `train`.

use std::fmt::Write as _;
use std::path::Path;

use qqlearn::learning::{LearningRun, TraceRecord};
use qqlearn::Objective;

use crate::error::{CliError, Result};
use crate::plot::Chart;

/// Exact column order of `trace.csv`.
pub const TRACE_HEADER: &str = "n,theta,v_estimate,score,epsilon,alpha,beta,episode_count";

#[derive(Debug, Clone, PartialEq)]
pub struct ExactComparison {
    pub quantile: usize,
    pub quantile_label: String,
    pub crossing: f64,
    pub value_at_final_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub environment: String,
    pub objective: Objective,
    pub tau: f64,
    pub steps: u64,
    pub seed: u64,
    pub run: u32,
    pub final_theta: f64,
    pub quantile: usize,
    pub quantile_label: String,
    pub trailing_v_mean: f64,
    pub trailing_theta_mean: f64,
    pub final_v_estimate: f64,
    pub final_score: f64,
    pub episodes: u64,
    pub clamp_events: u64,
    /// Absent for sample-only environments.
    pub exact: Option<ExactComparison>,
}

impl Summary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "environment: {}", self.environment);
        let _ = writeln!(s, "objective: {}", self.objective);
        let _ = writeln!(s, "tau: {}", self.tau);
        let _ = writeln!(s, "steps: {}", self.steps);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "run: {}", self.run);
        let _ = writeln!(s, "final theta: {:.6}", self.final_theta);
        let _ = writeln!(
            s,
            "quantile from theta: g_{} ({})",
            self.quantile, self.quantile_label
        );
        let _ = writeln!(
            s,
            "trailing 10% v_estimate mean: {:.6}",
            self.trailing_v_mean
        );
        let _ = writeln!(
            s,
            "trailing 10% theta mean: {:.6}",
            self.trailing_theta_mean
        );
        let _ = writeln!(s, "final v_estimate: {:.6}", self.final_v_estimate);
        let _ = writeln!(s, "final score: {:.6}", self.final_score);
        let _ = writeln!(s, "episodes: {}", self.episodes);
        let _ = writeln!(s, "theta clamp events: {}", self.clamp_events);
        if let Some(e) = &self.exact {
            let _ = writeln!(
                s,
                "exact optimal quantile: g_{} ({})",
                e.quantile, e.quantile_label
            );
            let _ = writeln!(s, "exact theta crossing: {:.6}", e.crossing);
            let _ = writeln!(
                s,
                "exact optimal value at final theta: {:.6}",
                e.value_at_final_theta
            );
            let verdict = if e.quantile == self.quantile {
                "yes"
            } else {
                "no"
            };
            let _ = writeln!(s, "quantile matches exact solver: {verdict}");
        }
        s
    }
}

pub fn trace_csv(trace: &[TraceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in trace {
        w.serialize(r)?;
    }
    if trace.is_empty() {
        w.write_record(TRACE_HEADER.split(','))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `trace.csv`, `summary.txt` and the three SVG curves.
pub fn write_run(dir: &Path, run: &LearningRun, summary: &Summary) -> Result<()> {
    crate::create_dir(dir)?;
    crate::write_file(&dir.join("trace.csv"), &trace_csv(&run.trace)?)?;
    crate::write_file(&dir.join("summary.txt"), &summary.to_text())?;

    let target = match summary.objective {
        Objective::Upper => 1.0 - summary.tau,
        Objective::Lower => -summary.tau,
    };
    let series = |f: fn(&TraceRecord) -> f64| -> Vec<(f64, f64)> {
        run.trace.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    let plots = [
        (
            "v_estimate.svg",
            "Root value estimate",
            "v_estimate",
            Some(target),
            series(|r| r.v_estimate),
        ),
        (
            "score.svg",
            "Score",
            "score",
            Some(target),
            series(|r| r.score),
        ),
        (
            "theta.svg",
            "Theta",
            "theta",
            summary.exact.as_ref().map(|e| e.crossing),
            series(|r| r.theta),
        ),
    ];
    for (file, title, y_label, reference, points) in plots {
        let chart = Chart {
            title,
            x_label: "n",
            y_label,
            reference,
        };
        crate::write_file(&dir.join(file), &chart.render(&points))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_header_is_exact() {
        let rec = TraceRecord {
            n: 10,
            theta: 1.5,
            v_estimate: 0.25,
            score: 0.5,
            epsilon: 0.01,
            alpha: 0.1,
            beta: 0.1,
            episode_count: 3,
        };
        let text = trace_csv(&[rec]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next(), Some("10,1.5,0.25,0.5,0.01,0.1,0.1,3"));
        assert_eq!(trace_csv(&[]).unwrap().trim_end(), TRACE_HEADER);
    }
}
