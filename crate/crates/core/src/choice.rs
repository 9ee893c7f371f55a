//! Human route choice under Hedge (exponential weights) dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the coordinate sum accepted by [`RoutingVector::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// A distribution over paths. Always renormalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RoutingVector(Vec<f64>);

impl RoutingVector {
    /// Accepts nonnegative weights summing to one within [`SIMPLEX_TOLERANCE`]
    /// and renormalizes them.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, SIMPLEX_TOLERANCE)
    }

    pub fn with_tolerance(weights: Vec<f64>, tolerance: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotOnSimplex("empty routing vector".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::NotOnSimplex(format!("{weights:?} has a negative or non-finite entry")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::NotOnSimplex(format!("{weights:?} sums to {sum}")));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    /// Normalizes arbitrary nonnegative weights with a positive sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::NotOnSimplex(format!("{weights:?} has a negative or non-finite entry")));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::NotOnSimplex("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(paths: usize) -> Self {
        assert!(paths > 0, "uniform routing over zero paths");
        Self(vec![1.0 / paths as f64; paths])
    }

    /// All mass on `path`.
    pub fn vertex(paths: usize, path: usize) -> Self {
        let mut v = vec![0.0; paths];
        v[path] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, path: usize) -> f64 {
        self.0[path]
    }
}

impl TryFrom<Vec<f64>> for RoutingVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RoutingVector> for Vec<f64> {
    fn from(v: RoutingVector) -> Vec<f64> {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "kebab-case")]
pub enum LearningSchedule {
    Constant { eta0: f64 },
    /// `eta0 / sqrt(k + 1)`.
    InverseSqrt { eta0: f64 },
}

impl Default for LearningSchedule {
    fn default() -> Self {
        LearningSchedule::Constant { eta0: 0.1 }
    }
}

impl LearningSchedule {
    pub fn eta0(&self) -> f64 {
        match *self {
            LearningSchedule::Constant { eta0 } | LearningSchedule::InverseSqrt { eta0 } => eta0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eta0 = self.eta0();
        if eta0.is_finite() && eta0 > 0.0 {
            Ok(())
        } else {
            Err(crate::error::invalid(format!("learning rate {eta0} must be positive")))
        }
    }
}

pub fn learning_rate(schedule: &LearningSchedule, k: u64) -> f64 {
    match *schedule {
        LearningSchedule::Constant { eta0 } => eta0,
        LearningSchedule::InverseSqrt { eta0 } => eta0 / ((k + 1) as f64).sqrt(),
    }
}

/// One Hedge step: `mu'_p ∝ mu_p exp(-eta * latency_p)`.
///
/// The smallest latency is subtracted before exponentiating, which leaves the
/// result unchanged and keeps the best path's weight at `mu_p`.
pub fn hedge_update(routing: &RoutingVector, latencies: &[f64], eta: f64) -> Result<RoutingVector> {
    if latencies.len() != routing.len() {
        return Err(crate::error::invalid(format!(
            "{} latencies for {} paths",
            latencies.len(),
            routing.len()
        )));
    }
    if latencies.iter().any(|l| !l.is_finite()) {
        return Err(crate::error::invalid("latencies must be finite"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(crate::error::invalid(format!("learning rate {eta} must be nonnegative")));
    }
    let shift = latencies
        .iter()
        .zip(routing.as_slice())
        .filter(|(_, &m)| m > 0.0)
        .map(|(&l, _)| l)
        .fold(f64::INFINITY, f64::min);
    if !shift.is_finite() {
        return Err(Error::NotOnSimplex("routing vector has no mass".into()));
    }
    let weights: Vec<f64> = routing
        .as_slice()
        .iter()
        .zip(latencies)
        .map(|(&m, &l)| if m > 0.0 { m * (-eta * (l - shift)).exp() } else { 0.0 })
        .collect();
    RoutingVector::from_weights(weights)
}
