//! How autonomy reshapes a cell's fundamental diagram, and what a single
//! cell passes downstream.
//!
//! Run with `cargo run --example fundamental_diagram`.

use mixroute::ctm::{cell_outflow, fundamental_diagram, split_flow_by_type, CellParams, CellState};

fn main() -> mixroute::Result<()> {
    // Two lanes, free-flow speed 1, human headway 1, autonomous headway 0.5.
    let cell = CellParams::new(1.0, 2, 1.0, 0.5, 8.0)?;

    println!("alpha  critical  capacity  shockwave");
    for step in 0..=4 {
        let alpha = step as f64 / 4.0;
        let fd = fundamental_diagram(&cell, cell.lanes, alpha);
        println!(
            "{alpha:>5.2}  {:>8.3}  {:>8.3}  {:>9.3}",
            fd.critical_density, fd.capacity, fd.shockwave_speed
        );
    }

    let one_lane = fundamental_diagram(&cell, 1, 0.0);
    println!("\none lane closed: capacity {:.3}, jam density {:.3}", one_lane.capacity, one_lane.jam_density);

    // A dense upstream cell feeding a nearly full downstream cell.
    let upstream = CellState::with_density(2, 3.0, 2.0);
    let downstream = CellState::with_density(2, 6.5, 0.0);
    let flow = cell_outflow((&cell, &upstream), Some((&cell, &downstream)));
    let split = split_flow_by_type(flow, &upstream)?;
    println!(
        "\nupstream (3 h, 2 a) -> downstream (6.5 h): flow {flow:.3} = {:.3} human + {:.3} autonomous",
        split.human, split.auto
    );
    Ok(())
}
