//! Human route choice under Hedge dynamics on two parallel roads.
//!
//! With demand road 0 can carry alone, humans settle on it. With demand that
//! needs both roads, the equilibrium is stationary when started exactly, but
//! from an empty network the congestion and the routing chase each other.
//!
//! Run with `cargo run --release --example hedge_dynamics`.

use mixroute::choice::{hedge_update, RoutingVector};
use mixroute::env::{EquilibriumInit, Environment, InitialCondition, Scenario};
use mixroute::ctm::RoadGeometry;

fn road(cells: usize) -> RoadGeometry {
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

fn run(label: &str, scenario: Scenario) -> mixroute::Result<()> {
    let mut env = Environment::new(scenario)?;
    let action = RoutingVector::uniform(2);
    println!("{label}");
    let every = env.episode_len() / 8;
    while !env.is_done() {
        let r = env.step(&action)?;
        if env.time() % every == 0 {
            let mu = env.human_routing().as_slice();
            println!(
                "  k={:>5} mu_h=({:.4}, {:.4}) latencies=({:.3}, {:.3}) J={:.3}",
                env.time(),
                mu[0],
                mu[1],
                r.latencies[0],
                r.latencies[1],
                r.cost
            );
        }
    }
    Ok(())
}

fn main() -> mixroute::Result<()> {
    let mu = RoutingVector::uniform(2);
    let next = hedge_update(&mu, &[2.0, 4.0], 0.5)?;
    println!("one Hedge step from (0.5, 0.5) with latencies (2, 4): {:?}\n", next.as_slice());

    run("demand 0.8 (fits road 0):", Scenario::new(vec![road(5), road(10)], 0.8, 0.0, 400))?;

    let mut steady = Scenario::new(vec![road(5), road(13)], 1.5, 0.0, 400);
    steady.initial = InitialCondition::Equilibrium {
        paths: vec![
            EquilibriumInit { human: 1.0, auto: 0.0, gamma: 2 },
            EquilibriumInit { human: 0.5, auto: 0.0, gamma: 0 },
        ],
    };
    run("\ndemand 1.5 started at equilibrium:", steady)?;

    run(
        "\ndemand 1.5 from an empty network:",
        Scenario::new(vec![road(5), road(13)], 1.5, 0.0, 4000),
    )
}
