//! Searching for the best constant autonomous routing and comparing it with
//! the best controlled equilibrium.
//!
//! Run with `cargo run --release --example static_policy_search`.

use mixroute::cli::load_scenario;
use mixroute::env::optimize_static_policy;
use mixroute::equilibrium::best_controlled_equilibrium;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/two_path_control.json");
    let scenario = load_scenario(path.as_ref()).map_err(|e| e.message)?;
    let (human, auto) = scenario.demand.mean();
    let best = best_controlled_equilibrium(&scenario.build_network()?, human, auto)?;
    let found = optimize_static_policy(&scenario, 25, 3)?;
    println!(
        "best constant routing {:?}: mean J {:.4} after {} episodes",
        found.routing.as_slice(),
        found.mean_cost,
        found.evaluations
    );
    let split: Vec<f64> = best.flows.iter().map(|f| f.auto / auto).collect();
    println!(
        "best controlled equilibrium routes {split:?} and holds {:.4} vehicles at steady state",
        best.total_latency
    );
    Ok(())
}
