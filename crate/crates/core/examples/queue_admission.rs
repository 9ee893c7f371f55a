//! Releasing queued vehicles into roads with limited room at their entrance.
//!
//! Run with `cargo run --example queue_admission`.

use mixroute::choice::RoutingVector;
use mixroute::queue::VehicleQueue;

fn main() -> mixroute::Result<()> {
    let mut queue = VehicleQueue::new();
    queue.enqueue(4.0, 0.0)?;
    queue.enqueue(1.0, 2.0)?;

    let human = RoutingVector::new(vec![0.5, 0.5])?;
    let auto = RoutingVector::new(vec![1.0, 0.0])?;
    let supplies = [3.0, 1.0];

    let admitted = queue.disburse(&supplies, &human, &auto)?;
    for (p, f) in admitted.iter().enumerate() {
        println!("road {p}: admitted {:.2} human + {:.2} autonomous (room {})", f.human, f.auto, supplies[p]);
    }
    println!("still waiting:");
    for packet in queue.packets() {
        println!("  {:.2} human, {:.2} autonomous", packet.human, packet.auto);
    }

    let admitted = queue.disburse(&[10.0, 10.0], &human, &auto)?;
    println!("next step with ample room: {admitted:?}; queue empty = {}", queue.is_empty());
    Ok(())
}
