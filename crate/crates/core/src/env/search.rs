//! Derivative-free search for the best constant autonomous routing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Environment, Scenario};
use crate::choice::RoutingVector;
use crate::error::{invalid, Result};

const POPULATION: usize = 32;
const ELITES: usize = 6;
const INITIAL_SPREAD: f64 = 2.0;
const MIN_SPREAD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub routing: RoutingVector,
    /// Episode-average stage cost of `routing`.
    pub mean_cost: f64,
    pub evaluations: usize,
}

/// Runs one episode from the scenario's own seed with `routing` held fixed
/// and returns the mean of `J(1..=K)`.
pub fn evaluate_static_policy(scenario: &Scenario, routing: &RoutingVector) -> Result<f64> {
    let mut env = Environment::new(scenario.clone())?;
    let mut total = 0.0;
    let mut steps = 0u64;
    while !env.is_done() {
        total += env.step(routing)?.cost;
        steps += 1;
    }
    Ok(total / steps as f64)
}

fn softmax(logits: &[f64]) -> Result<RoutingVector> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    RoutingVector::from_weights(logits.iter().map(|z| (z - top).exp()).collect())
}

/// Cross-entropy search over softmax logits for the constant `mu_a` with the
/// lowest episode-average cost. Vertices and the uniform vector are always
/// evaluated; the best point seen is returned.
pub fn optimize_static_policy(
    scenario: &Scenario,
    iterations: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let paths = scenario.validate()?.len();
    if paths == 1 {
        let routing = RoutingVector::vertex(1, 0);
        let mean_cost = evaluate_static_policy(scenario, &routing)?;
        return Ok(SearchOutcome {
            routing,
            mean_cost,
            evaluations: 1,
        });
    }
    if iterations == 0 {
        return Err(invalid("search needs at least one iteration"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0;
    let mut best: Option<(RoutingVector, f64)> = None;
    let mut consider = |routing: RoutingVector, evaluations: &mut usize| -> Result<f64> {
        let cost = evaluate_static_policy(scenario, &routing)?;
        *evaluations += 1;
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((routing, cost));
        }
        Ok(cost)
    };

    consider(RoutingVector::uniform(paths), &mut evaluations)?;
    for p in 0..paths {
        consider(RoutingVector::vertex(paths, p), &mut evaluations)?;
    }

    let mut mean = vec![0.0; paths];
    let mut spread = vec![INITIAL_SPREAD; paths];
    for _ in 0..iterations {
        let mut scored = Vec::with_capacity(POPULATION);
        for _ in 0..POPULATION {
            let logits: Vec<f64> = mean
                .iter()
                .zip(&spread)
                .map(|(&m, &s)| {
                    Normal::new(m, s)
                        .map(|d| d.sample(&mut rng))
                        .map_err(|e| invalid(e.to_string()))
                })
                .collect::<Result<_>>()?;
            let cost = consider(softmax(&logits)?, &mut evaluations)?;
            scored.push((cost, logits));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let elites = &scored[..ELITES];
        for d in 0..paths {
            let m = elites.iter().map(|(_, z)| z[d]).sum::<f64>() / ELITES as f64;
            let var = elites.iter().map(|(_, z)| (z[d] - m).powi(2)).sum::<f64>() / ELITES as f64;
            mean[d] = m;
            spread[d] = var.sqrt().max(MIN_SPREAD);
        }
    }
    let (routing, mean_cost) = best.expect("at least one evaluation");
    Ok(SearchOutcome {
        routing,
        mean_cost,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctm::RoadGeometry;

    fn geometry(cells: usize) -> RoadGeometry {
        RoadGeometry {
            cells,
            m_n: 3,
            b_n: 2,
            b_b: 1,
            v: 1.0,
            h_h: 1.0,
            h_a: 0.5,
            n_jam: 8.0,
        }
    }

    #[test]
    fn single_path_is_trivial() {
        let s = Scenario::new(vec![geometry(5)], 0.3, 0.3, 20);
        let out = optimize_static_policy(&s, 5, 1).unwrap();
        assert_eq!(out.routing.as_slice(), &[1.0]);
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let s = Scenario::new(vec![geometry(5), geometry(10)], 0.6, 1.0, 60);
        let a = optimize_static_policy(&s, 3, 11).unwrap();
        let b = optimize_static_policy(&s, 3, 11).unwrap();
        assert_eq!(a, b);
    }
}
