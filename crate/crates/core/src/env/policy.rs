//! Baseline controllers for the autonomous routing vector.

use crate::choice::{hedge_update, RoutingVector};
use crate::equilibrium::EquilibriumSolution;
use crate::error::Result;

/// A controller mapping the latest observation and latencies to `mu_a`.
pub trait Policy {
    fn action(&mut self, observation: &[f64], latencies: &[f64]) -> Result<RoutingVector>;

    /// Clears internal state at the start of an episode.
    fn reset(&mut self) {}
}

pub fn policy_uniform(paths: usize) -> RoutingVector {
    RoutingVector::uniform(paths)
}

/// All autonomous vehicles on the lowest-latency road; ties go to the lower index.
pub fn policy_greedy_min_latency(latencies: &[f64]) -> RoutingVector {
    let best = latencies
        .iter()
        .enumerate()
        .fold(0, |best, (p, &l)| if l < latencies[best] { p } else { best });
    RoutingVector::vertex(latencies.len(), best)
}

/// Replays the autonomous split of an equilibrium; uniform if it has no
/// autonomous flow.
pub fn policy_static_equilibrium(solution: &EquilibriumSolution) -> RoutingVector {
    let autos: Vec<f64> = solution.flows.iter().map(|f| f.auto).collect();
    RoutingVector::from_weights(autos).unwrap_or_else(|_| RoutingVector::uniform(solution.flows.len()))
}

/// A fixed routing vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticRouting(pub RoutingVector);

impl Policy for StaticRouting {
    fn action(&mut self, _: &[f64], _: &[f64]) -> Result<RoutingVector> {
        Ok(self.0.clone())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMinLatency;

impl Policy for GreedyMinLatency {
    fn action(&mut self, _: &[f64], latencies: &[f64]) -> Result<RoutingVector> {
        Ok(policy_greedy_min_latency(latencies))
    }
}

/// Uncontrolled autonomous vehicles: `mu_a` follows the same Hedge dynamics
/// as human drivers, starting uniform, with its own rate.
#[derive(Debug, Clone)]
pub struct SelfishAv {
    eta: f64,
    paths: usize,
    routing: Option<RoutingVector>,
}

impl SelfishAv {
    pub fn new(paths: usize, eta: f64) -> Self {
        Self {
            eta,
            paths,
            routing: None,
        }
    }
}

impl Policy for SelfishAv {
    /// The first call returns the uniform start; later calls apply one Hedge
    /// step with the latencies of the previous tick.
    fn action(&mut self, _: &[f64], latencies: &[f64]) -> Result<RoutingVector> {
        let next = match &self.routing {
            None => RoutingVector::uniform(self.paths),
            Some(mu) => hedge_update(mu, latencies, self.eta)?,
        };
        self.routing = Some(next.clone());
        Ok(next)
    }

    fn reset(&mut self) {
        self.routing = None;
    }
}
