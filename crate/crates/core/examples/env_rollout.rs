//! Rolling out the baseline autonomous-routing policies on a scenario file.
//!
//! Run with `cargo run --release --example env_rollout [scenario.json]`.

use mixroute::cli::load_scenario;
use mixroute::env::{
    policy_static_equilibrium, Environment, GreedyMinLatency, Policy, SelfishAv, StaticRouting,
};
use mixroute::equilibrium::best_controlled_equilibrium;
use mixroute::choice::RoutingVector;

fn episode(env: &mut Environment, policy: &mut dyn Policy) -> mixroute::Result<(f64, f64)> {
    env.reset(None)?;
    policy.reset();
    let mut obs = env.observation();
    let mut latencies = env.latencies().to_vec();
    let (mut total, mut last) = (0.0, 0.0);
    while !env.is_done() {
        let action = policy.action(&obs, &latencies)?;
        let r = env.step(&action)?;
        total += r.cost;
        last = r.cost;
        obs = r.observation;
        latencies = r.latencies;
    }
    Ok((total / env.episode_len() as f64, last))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/two_path_control.json").into());
    let scenario = load_scenario(path.as_ref()).map_err(|e| e.message)?;
    let paths = scenario.network.paths.len();
    let mut env = Environment::new(scenario.clone())?;
    println!("{path}: {paths} roads, observation length {}", env.observation_len());

    let (human, auto) = scenario.demand.mean();
    let mut policies: Vec<(&str, Box<dyn Policy>)> = vec![
        ("uniform", Box::new(StaticRouting(RoutingVector::uniform(paths)))),
        ("greedy", Box::new(GreedyMinLatency)),
        ("selfish", Box::new(SelfishAv::new(paths, 0.1))),
    ];
    if let Ok(best) = best_controlled_equilibrium(env.network(), human, auto) {
        println!("best controlled equilibrium: total latency {:.4}", best.total_latency);
        policies.push(("static-equilibrium", Box::new(StaticRouting(policy_static_equilibrium(&best)))));
    }
    for (name, policy) in policies.iter_mut() {
        let (mean, last) = episode(&mut env, policy.as_mut())?;
        println!("  {name:<18} mean J {mean:>9.3}   final J {last:>9.3}");
    }
    Ok(())
}
