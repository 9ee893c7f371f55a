//! Steady states of a single-bottleneck road: build one with a given number
//! of congested cells, advance it, and compare its latency with the closed form.
//!
//! Run with `cargo run --example path_fixed_point`.

use mixroute::ctm::{FlowTuple, PathSpec, RoadGeometry};
use mixroute::equilibrium::{equilibrium_state, road_equilibrium_latency, RoadModel};

fn main() -> mixroute::Result<()> {
    let road = PathSpec::single_bottleneck(&RoadGeometry {
        cells: 5,
        m_n: 3,
        b_n: 2,
        b_b: 1,
        v: 1.0,
        h_h: 1.0,
        h_a: 0.5,
        n_jam: 8.0,
    })?;
    let model = RoadModel::new(&road)?;

    for alpha in [0.0, 0.5, 1.0] {
        let capacity = model.capacity(alpha);
        let demand = FlowTuple::new((1.0 - alpha) * capacity, alpha * capacity);
        println!("alpha = {alpha}: bottleneck capacity {capacity:.4}");
        for gamma in 0..=3 {
            let start = equilibrium_state(&road, demand, gamma)?;
            let mut state = start.clone();
            for _ in 0..1000 {
                state.step(demand)?;
            }
            let drift = state
                .cells()
                .iter()
                .zip(start.cells())
                .map(|(a, b)| (a.total() - b.total()).abs())
                .fold(0.0, f64::max);
            let densities: Vec<String> = start.cells().iter().map(|c| format!("{:.3}", c.total())).collect();
            println!(
                "  gamma={gamma} densities=[{}] latency {:.4} (closed form {:.4}), drift after 1000 steps {drift:.1e}",
                densities.join(", "),
                state.latency_estimate(None),
                road_equilibrium_latency(&road, alpha, gamma as f64)?,
            );
        }
    }
    Ok(())
}
