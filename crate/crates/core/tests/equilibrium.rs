mod common;

use mixroute::ctm::{FlowTuple, PathSpec, RoadGeometry};
use mixroute::equilibrium::{
    best_controlled_equilibrium, best_selfish_equilibrium, brute_force_equilibrium,
    equilibrium_state, EquilibriumSolution, Regime,
};
use mixroute::network::NetworkSpec;
use mixroute::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    roads: Vec<RoadGeometry>,
    net: NetworkSpec,
    human: f64,
    auto: f64,
}

fn instance(seed: u64, paths: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roads = common::random_network(&mut rng, paths);
    let net = NetworkSpec::from_geometries(&roads).unwrap();
    // Demand up to the all-human capacity of the whole network, mostly.
    let scale: f64 = roads.iter().map(|g| common::bottleneck_capacity(g, 0.0)).sum();
    let total = scale * rng.random_range(0.05..1.3);
    let share: f64 = rng.random();
    Instance {
        roads,
        net,
        human: (1.0 - share) * total,
        auto: share * total,
    }
}

fn solve(i: &Instance, regime: Regime) -> Option<EquilibriumSolution> {
    let result = match regime {
        Regime::Selfish => best_selfish_equilibrium(&i.net, i.human, i.auto),
        Regime::Controlled => best_controlled_equilibrium(&i.net, i.human, i.auto),
    };
    match result {
        Ok(s) => Some(s),
        Err(Error::Infeasible(_)) => None,
        Err(e) => panic!("unexpected error {e}"),
    }
}

/// Structural checks against quantities recomputed from the road geometry.
fn check_solution(i: &Instance, s: &EquilibriumSolution) -> Result<(), TestCaseError> {
    let tol = 1e-7;
    let human: f64 = s.flows.iter().map(|f| f.human).sum();
    let auto: f64 = s.flows.iter().map(|f| f.auto).sum();
    prop_assert!((human - i.human).abs() <= tol * (1.0 + i.human));
    prop_assert!((auto - i.auto).abs() <= tol * (1.0 + i.auto));

    let q = s.free_flow_road;
    let common_latency = i.roads[q].cells as f64 / i.roads[q].v;
    prop_assert!((s.common_latency - common_latency).abs() <= 1e-12);
    let mut total = 0.0;
    for (p, g) in i.roads.iter().enumerate() {
        let f = s.flows[p];
        prop_assert!(f.human >= -tol && f.auto >= -tol);
        let alpha = f.autonomy();
        if f.total() > tol {
            prop_assert!(f.total() <= common::bottleneck_capacity(g, alpha) * (1.0 + tol));
            let gamma = s.congested_length[p];
            prop_assert!(gamma >= -tol && gamma <= g.m_n as f64 + 1e-6);
            let latency = common::closed_form_latency(g, alpha, gamma);
            prop_assert!((s.latencies[p] - latency).abs() <= 1e-6 * latency);
        }
        if p < q {
            // Congested roads run exactly at capacity and match the common latency.
            prop_assert!((f.total() - common::bottleneck_capacity(g, alpha)).abs() <= 1e-6);
            prop_assert!((s.latencies[p] - common_latency).abs() <= 1e-9 * common_latency);
        }
        if p > q {
            prop_assert!(f.human <= tol);
            if s.regime == Regime::Selfish {
                prop_assert!(f.auto <= tol);
            }
        }
        total += f.total() * s.latencies[p];
    }
    prop_assert!((s.total_latency - total).abs() <= 1e-9 * (1.0 + total));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solutions_are_consistent_equilibria(seed in any::<u64>(), paths in 1usize..5) {
        let i = instance(seed, paths);
        for regime in [Regime::Selfish, Regime::Controlled] {
            if let Some(s) = solve(&i, regime) {
                prop_assert_eq!(s.regime, regime);
                check_solution(&i, &s)?;
            }
        }
    }

    #[test]
    fn control_never_hurts(seed in any::<u64>(), paths in 1usize..5) {
        let i = instance(seed, paths);
        if let Some(selfish) = solve(&i, Regime::Selfish) {
            let controlled = solve(&i, Regime::Controlled);
            prop_assert!(controlled.is_some(), "selfish feasible but controlled infeasible");
            prop_assert!(controlled.unwrap().total_latency <= selfish.total_latency + 1e-7);
        }
    }

    #[test]
    fn all_human_demand_makes_regimes_agree(seed in any::<u64>(), paths in 1usize..5) {
        let mut i = instance(seed, paths);
        i.human += i.auto;
        i.auto = 0.0;
        let s = solve(&i, Regime::Selfish);
        let c = solve(&i, Regime::Controlled);
        prop_assert_eq!(s.is_some(), c.is_some());
        if let (Some(s), Some(c)) = (s, c) {
            prop_assert!((s.total_latency - c.total_latency).abs() <= 1e-7 * (1.0 + s.total_latency));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_programs_match_grid_search(seed in any::<u64>(), paths in 1usize..3) {
        let i = instance(seed, paths);
        for regime in [Regime::Selfish, Regime::Controlled] {
            let oracle = brute_force_equilibrium(&i.net, i.human, i.auto, 1e-2, regime);
            match (solve(&i, regime), oracle) {
                (Some(lp), Ok(o)) => {
                    prop_assert!(
                        (lp.total_latency - o.total_latency).abs() <= 5e-3 * lp.total_latency.max(1.0),
                        "{:?}: lp {} oracle {}", regime, lp.total_latency, o.total_latency
                    );
                }
                (None, Err(Error::Infeasible(_))) => {}
                (lp, o) => prop_assert!(false, "{:?}: lp {:?} oracle {:?}", regime, lp.map(|s| s.total_latency), o.map(|s| s.total_latency)),
            }
        }
    }
}

/// Per-road steady states built from an equilibrium stay put under the
/// dynamics and reproduce its latencies.
#[test]
fn equilibrium_flows_are_dynamic_fixed_points() {
    let roads = [common::canonical(), common::canonical_with_cells(13)];
    let net = NetworkSpec::from_geometries(&roads).unwrap();
    let s = best_selfish_equilibrium(&net, 1.5, 0.0).unwrap();
    assert_eq!(s.free_flow_road, 1);
    assert_eq!(s.congested_length[0], 2.0);
    for (p, path) in net.paths().iter().enumerate() {
        let gamma = s.congested_length[p] as usize;
        let mut state = equilibrium_state(path, s.flows[p], gamma).unwrap();
        let start = state.clone();
        for _ in 0..500 {
            state.step(s.flows[p]).unwrap();
        }
        for (a, b) in state.cells().iter().zip(start.cells()) {
            assert!((a.total() - b.total()).abs() <= 1e-12);
        }
        assert!((state.latency_estimate(None) - s.latencies[p]).abs() <= 1e-9);
    }
}

#[test]
fn congested_state_requires_capacity_demand() {
    let path = PathSpec::single_bottleneck(&common::canonical()).unwrap();
    let err = equilibrium_state(&path, FlowTuple::new(0.5, 0.0), 1).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
    assert!(equilibrium_state(&path, FlowTuple::new(0.5, 0.0), 4).is_err());
}

#[test]
fn demand_beyond_every_road_is_infeasible() {
    let net = NetworkSpec::from_geometries(&[common::canonical(), common::canonical_with_cells(10)]).unwrap();
    assert!(matches!(best_selfish_equilibrium(&net, 5.0, 0.0), Err(Error::Infeasible(_))));
    assert!(matches!(best_controlled_equilibrium(&net, 5.0, 0.0), Err(Error::Infeasible(_))));
}

#[test]
fn solution_round_trips_through_json() {
    let net = NetworkSpec::from_geometries(&[common::canonical(), common::canonical_with_cells(10)]).unwrap();
    let s = best_controlled_equilibrium(&net, 0.6, 1.0).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: EquilibriumSolution = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
}
