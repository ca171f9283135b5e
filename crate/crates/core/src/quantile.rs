//! Cumulative and decumulative views of end-state distributions, and the
//! lower/upper quantile criteria built on them.
//!
//! With `F(g_i) = Σ_{j ≤ i} p_j` and `G(g_i) = Σ_{j ≥ i} p_j`:
//!
//! * lower τ-quantile, τ ∈ (0, 1]: `min { i : F(g_i) ≥ τ }`
//! * upper τ-quantile, τ ∈ [0, 1): `max { i : G(g_i) ≥ 1 − τ }`
//!
//! Both sets are never empty because `F(g_n) = G(g_1) = 1`.
//!
//! Comparisons follow `≥` literally. Distributions built with
//! [`EndStateDistribution::new`] compare with zero slack; distributions
//! produced by arithmetic ([`EndStateDistribution::computed`]) allow
//! [`COMPUTED_TOLERANCE`] of rounding error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on `≥` comparisons for probabilities obtained by arithmetic.
pub const COMPUTED_TOLERANCE: f64 = 1e-9;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Tau(f64);

impl Tau {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::TauOutOfRange {
                tau: value,
                range: "[0, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub(crate) fn require_lower(self) -> Result<()> {
        if self.0 > 0.0 {
            Ok(())
        } else {
            Err(Error::TauOutOfRange {
                tau: self.0,
                range: "(0, 1] (lower quantile)",
            })
        }
    }

    pub(crate) fn require_upper(self) -> Result<()> {
        if self.0 < 1.0 {
            Ok(())
        } else {
            Err(Error::TauOutOfRange {
                tau: self.0,
                range: "[0, 1) (upper quantile)",
            })
        }
    }
}

/// Probability vector over the ordered end states `g_1 ≺ … ≺ g_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndStateDistribution {
    probs: Vec<f64>,
    tolerance: f64,
}

impl EndStateDistribution {
    /// A distribution given exactly; quantile comparisons use no slack.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, 0.0)
    }

    /// A distribution obtained by computation.
    pub fn computed(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, COMPUTED_TOLERANCE)
    }

    /// A distribution whose quantile comparisons allow `tolerance` of slack.
    pub fn with_tolerance(probs: Vec<f64>, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidDistribution(format!("tolerance {tolerance}")));
        }
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no end states".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} is not a probability"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
        }
        Ok(Self { probs, tolerance })
    }

    /// Unit mass on `g_k`.
    pub fn point_mass(n: usize, k: usize) -> Result<Self> {
        check_index(k, n)?;
        let mut probs = vec![0.0; n];
        probs[k - 1] = 1.0;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `F(g_i)` for every `i`.
    pub fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `G(g_i)` for every `i`.
    pub fn decumulative_vec(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .rev()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        out.reverse();
        out
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        let get = |d: &Self, i: usize| d.probs.get(i).copied().unwrap_or(0.0);
        0.5 * (0..n)
            .map(|i| (get(self, i) - get(other, i)).abs())
            .sum::<f64>()
    }

    /// `p·self + (1 − p)·other`, computed.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidDistribution(
                "mixing distributions of different sizes".into(),
            ));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| p * a + (1.0 - p) * b)
            .collect();
        Self::computed(probs)
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&i) {
        Ok(())
    } else {
        Err(Error::EndIndexOutOfRange { index: i, n })
    }
}

/// `F(g_i) = Σ_{j ≤ i} p_j`.
pub fn cumulative(dist: &EndStateDistribution, i: usize) -> Result<f64> {
    check_index(i, dist.len())?;
    Ok(dist.probs[..i].iter().sum())
}

/// `G(g_i) = Σ_{j ≥ i} p_j`.
pub fn decumulative(dist: &EndStateDistribution, i: usize) -> Result<f64> {
    check_index(i, dist.len())?;
    Ok(dist.probs[i - 1..].iter().rev().sum())
}

/// Smallest `i` with `cdf[i - 1] ≥ τ − tol`; `n` when none qualifies.
pub fn lower_index_from_cdf(cdf: &[f64], tau: f64, tol: f64) -> usize {
    cdf.iter()
        .position(|&f| f >= tau - tol)
        .map_or(cdf.len(), |k| k + 1)
}

/// Largest `i` with `decdf[i - 1] ≥ 1 − τ − tol`; `1` when none qualifies.
pub fn upper_index_from_decumulative(decdf: &[f64], tau: f64, tol: f64) -> usize {
    decdf
        .iter()
        .rposition(|&g| g >= 1.0 - tau - tol)
        .map_or(1, |k| k + 1)
}

pub fn lower_quantile(dist: &EndStateDistribution, tau: Tau) -> Result<usize> {
    tau.require_lower()?;
    Ok(lower_index_from_cdf(
        &dist.cdf(),
        tau.value(),
        dist.tolerance,
    ))
}

pub fn upper_quantile(dist: &EndStateDistribution, tau: Tau) -> Result<usize> {
    tau.require_upper()?;
    Ok(upper_index_from_decumulative(
        &dist.decumulative_vec(),
        tau.value(),
        dist.tolerance,
    ))
}

/// Result of the combined quantile query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantile {
    Unique(usize),
    /// Lower and upper quantiles disagree; the caller has to pick.
    Split {
        lower: usize,
        upper: usize,
    },
}

impl std::fmt::Display for Quantile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantile::Unique(i) => write!(f, "g_{i}"),
            Quantile::Split { lower, upper } => write!(f, "split(g_{lower}, g_{upper})"),
        }
    }
}

/// At τ = 0 only the upper quantile exists, at τ = 1 only the lower one.
pub fn quantile(dist: &EndStateDistribution, tau: Tau) -> Quantile {
    let t = tau.value();
    if t == 0.0 {
        return Quantile::Unique(upper_index_from_decumulative(
            &dist.decumulative_vec(),
            t,
            dist.tolerance,
        ));
    }
    let lower = lower_index_from_cdf(&dist.cdf(), t, dist.tolerance);
    if t == 1.0 {
        return Quantile::Unique(lower);
    }
    let upper = upper_index_from_decumulative(&dist.decumulative_vec(), t, dist.tolerance);
    if lower == upper {
        Quantile::Unique(lower)
    } else {
        Quantile::Split { lower, upper }
    }
}

/// Three standard errors of a frequency estimated from `samples` draws,
/// taken at its worst case `p = 1/2`.
pub fn sampling_tolerance(samples: usize) -> f64 {
    1.5 / (samples.max(1) as f64).sqrt()
}

/// Frequency vector of observed terminal indices.
pub fn empirical_distribution(terminals: &[usize], n: usize) -> Result<EndStateDistribution> {
    if terminals.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0u64; n];
    for &i in terminals {
        check_index(i, n)?;
        counts[i - 1] += 1;
    }
    let total = terminals.len() as f64;
    EndStateDistribution::computed(counts.iter().map(|&c| c as f64 / total).collect())
}
