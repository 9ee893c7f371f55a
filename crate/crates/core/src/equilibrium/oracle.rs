//! Grid-search reference for best equilibria on small networks.
//!
//! For each candidate free-flow road `q`, every road before it is congested at
//! bottleneck capacity, so its flow is fixed by its autonomy level alone. The
//! oracle grids those autonomy levels, routes the remaining demand on road `q`
//! (and, when autonomous vehicles are dispatched, on later roads cheapest
//! first), and keeps the best point that meets every equilibrium condition.
//! It shares no code with the linear-programming solvers.

use super::{road_models, EquilibriumSolution, Regime, RoadModel};
use crate::ctm::FlowTuple;
use crate::error::{invalid, Error, Result};
use crate::network::NetworkSpec;

const MAX_PATHS: usize = 3;
const FEASIBILITY_TOL: f64 = 1e-6;
const REFINE_ROUNDS: usize = 4;

struct Evaluation {
    violation: f64,
    total: f64,
    flows: Vec<FlowTuple>,
}

fn evaluate(
    roads: &[RoadModel],
    q: usize,
    alphas: &[f64],
    human: f64,
    auto: f64,
    regime: Regime,
) -> Evaluation {
    let target = roads[q].free_flow_latency;
    let mut flows = vec![FlowTuple::ZERO; roads.len()];
    let mut violation = 0.0;
    let mut rest_h = human;
    let mut rest_a = auto;
    for (p, &alpha) in alphas.iter().enumerate() {
        let road = &roads[p];
        let cap = road.capacity(alpha);
        let gamma = (target - road.free_flow_latency) / road.congestion_increment(alpha);
        violation += (gamma - road.upstream_cells as f64).max(0.0);
        flows[p] = FlowTuple::new(cap * (1.0 - alpha), cap * alpha);
        rest_h -= flows[p].human;
        rest_a -= flows[p].auto;
    }
    violation += (-rest_h).max(0.0) + (-rest_a).max(0.0);
    let rest_h = rest_h.max(0.0);
    let mut rest_a = rest_a.max(0.0);

    let free = &roads[q];
    let room = free.speed * free.bottleneck_lanes - free.headway_human * rest_h;
    violation += (-room).max(0.0) / free.headway_human;
    let on_free = match regime {
        Regime::Selfish => rest_a,
        Regime::Controlled => rest_a.min(room.max(0.0) / free.headway_auto),
    };
    violation += (free.headway_auto * on_free - room.max(0.0)).max(0.0) / free.headway_human;
    flows[q] = FlowTuple::new(rest_h, on_free);
    rest_a -= on_free;
    if regime == Regime::Controlled {
        for (p, road) in roads.iter().enumerate().skip(q + 1) {
            let take = rest_a.min(road.capacity(1.0));
            flows[p] = FlowTuple::new(0.0, take);
            rest_a -= take;
        }
        violation += rest_a.max(0.0);
    }

    let total = flows
        .iter()
        .enumerate()
        .map(|(p, f)| {
            let latency = if p < q { target } else { roads[p].free_flow_latency };
            f.total() * latency
        })
        .sum();
    Evaluation {
        violation,
        total,
        flows,
    }
}

/// Orders evaluations: any feasible point beats an infeasible one, feasible
/// points by total latency, infeasible ones by violation.
fn better(a: &Evaluation, b: &Evaluation) -> bool {
    let fa = a.violation <= FEASIBILITY_TOL;
    let fb = b.violation <= FEASIBILITY_TOL;
    match (fa, fb) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.total < b.total,
        (false, false) => a.violation < b.violation,
    }
}

/// Visits every point of a regular grid over `[lo_d, hi_d]` with `steps + 1`
/// points per axis, keeping the best evaluation.
#[allow(clippy::too_many_arguments)]
fn scan(
    roads: &[RoadModel],
    q: usize,
    lo: &[f64],
    hi: &[f64],
    steps: usize,
    human: f64,
    auto: f64,
    regime: Regime,
) -> (Vec<f64>, Evaluation) {
    let dims = lo.len();
    let mut index = vec![0usize; dims];
    let mut alphas = lo.to_vec();
    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    loop {
        for d in 0..dims {
            alphas[d] = lo[d] + (hi[d] - lo[d]) * index[d] as f64 / steps as f64;
        }
        let e = evaluate(roads, q, &alphas, human, auto, regime);
        if best.as_ref().is_none_or(|(_, b)| better(&e, b)) {
            best = Some((alphas.clone(), e));
        }
        let mut d = 0;
        loop {
            if d == dims {
                return best.expect("grid has at least one point");
            }
            index[d] += 1;
            if index[d] <= steps {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

fn search_candidate(
    roads: &[RoadModel],
    q: usize,
    resolution: f64,
    human: f64,
    auto: f64,
    regime: Regime,
) -> Evaluation {
    let steps = (1.0 / resolution).ceil() as usize;
    let (mut center, mut best) = scan(roads, q, &vec![0.0; q], &vec![1.0; q], steps, human, auto, regime);
    let mut width = 1.0 / steps as f64;
    for _ in 0..REFINE_ROUNDS {
        let lo: Vec<f64> = center.iter().map(|c| (c - width).max(0.0)).collect();
        let hi: Vec<f64> = center.iter().map(|c| (c + width).min(1.0)).collect();
        let (c, e) = scan(roads, q, &lo, &hi, 20, human, auto, regime);
        if better(&e, &best) {
            center = c;
            best = e;
        }
        width /= 10.0;
    }
    best
}

/// Best equilibrium found by exhaustive search over per-road autonomy levels.
///
/// Limited to networks of at most three roads; `resolution` is the grid step
/// on each autonomy level before local refinement.
pub fn brute_force_equilibrium(
    net: &NetworkSpec,
    human_demand: f64,
    auto_demand: f64,
    resolution: f64,
    regime: Regime,
) -> Result<EquilibriumSolution> {
    if net.len() > MAX_PATHS {
        return Err(invalid(format!(
            "grid search supports at most {MAX_PATHS} paths, got {}",
            net.len()
        )));
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(invalid(format!("resolution {resolution} must lie in (0, 0.5]")));
    }
    if !(human_demand >= 0.0 && auto_demand >= 0.0) {
        return Err(Error::NegativeDemand {
            human: human_demand,
            auto: auto_demand,
        });
    }
    let roads = road_models(net)?;
    let mut best: Option<(usize, Evaluation)> = None;
    for q in 0..roads.len() {
        let e = search_candidate(&roads, q, resolution, human_demand, auto_demand, regime);
        if e.violation > FEASIBILITY_TOL {
            continue;
        }
        if regime == Regime::Selfish {
            best = Some((q, e));
            break;
        }
        if best.as_ref().is_none_or(|(_, b)| e.total < b.total - 1e-12) {
            best = Some((q, e));
        }
    }
    let (q, e) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no {regime:?} equilibrium found for demand ({human_demand}, {auto_demand})"
        ))
    })?;
    let flows = e
        .flows
        .into_iter()
        .map(|f| FlowTuple::new(f.human.max(0.0), f.auto.max(0.0)))
        .collect();
    EquilibriumSolution::from_flows(net, regime, q, flows)
}
