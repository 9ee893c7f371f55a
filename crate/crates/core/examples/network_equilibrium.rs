//! Best equilibria with selfish and with centrally routed autonomous vehicles,
//! cross-checked against the grid-search oracle.
//!
//! Run with `cargo run --release --example network_equilibrium`.

use mixroute::ctm::RoadGeometry;
use mixroute::equilibrium::{
    best_controlled_equilibrium, best_selfish_equilibrium, brute_force_equilibrium, Regime,
};
use mixroute::network::NetworkSpec;

fn main() -> mixroute::Result<()> {
    let road = |cells| RoadGeometry {
        cells,
        m_n: 3,
        b_n: 2,
        b_b: 1,
        v: 1.0,
        h_h: 1.0,
        h_a: 0.5,
        n_jam: 8.0,
    };
    let net = NetworkSpec::from_geometries(&[road(5), road(10)])?;

    for (human, auto) in [(0.6, 1.0), (1.2, 0.3), (0.4, 0.2)] {
        println!("demand: {human} human, {auto} autonomous");
        let selfish = best_selfish_equilibrium(&net, human, auto)?;
        let controlled = best_controlled_equilibrium(&net, human, auto)?;
        for (name, s, regime) in [("selfish", &selfish, Regime::Selfish), ("controlled", &controlled, Regime::Controlled)] {
            let oracle = brute_force_equilibrium(&net, human, auto, 1e-3, regime)?;
            let flows: Vec<String> = s
                .flows
                .iter()
                .map(|f| format!("({:.3} h, {:.3} a)", f.human, f.auto))
                .collect();
            println!(
                "  {name:<10} total latency {:>7.4} (oracle {:>7.4})  free-flow road {}  flows {}  congested cells {:.3?}",
                s.total_latency,
                oracle.total_latency,
                s.free_flow_road,
                flows.join(" "),
                s.congested_length,
            );
        }
    }
    Ok(())
}
