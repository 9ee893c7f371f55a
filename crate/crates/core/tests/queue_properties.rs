mod common;

use mixroute::choice::RoutingVector;
use mixroute::queue::{Packet, VehicleQueue};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    queue: VehicleQueue,
    supplies: Vec<f64>,
    mu_h: RoutingVector,
    mu_a: RoutingVector,
}

fn case(seed: u64, paths: usize, packets: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queue = VehicleQueue::new();
    for _ in 0..packets {
        let human = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..3.0) };
        let auto = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..3.0) };
        queue.enqueue(human, auto).unwrap();
    }
    let supplies = (0..paths)
        .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..6.0) })
        .collect();
    let routing = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.2) {
            RoutingVector::vertex(paths, rng.random_range(0..paths))
        } else {
            RoutingVector::new(common::random_simplex(rng, paths)).unwrap()
        }
    };
    let mu_h = routing(&mut rng);
    let mu_a = routing(&mut rng);
    Case { queue, supplies, mu_h, mu_a }
}

const TOL: f64 = 1e-9;

proptest! {
    #[test]
    fn admission_never_exceeds_supply(seed in any::<u64>(), paths in 1usize..5, packets in 0usize..8) {
        let mut c = case(seed, paths, packets);
        let admitted = c.queue.disburse(&c.supplies, &c.mu_h, &c.mu_a).unwrap();
        for (f, s) in admitted.iter().zip(&c.supplies) {
            prop_assert!(f.human >= 0.0 && f.auto >= 0.0);
            prop_assert!(f.total() <= s + TOL);
        }
    }

    #[test]
    fn vehicles_are_conserved(seed in any::<u64>(), paths in 1usize..5, packets in 0usize..8) {
        let mut c = case(seed, paths, packets);
        let before = c.queue.totals();
        let admitted = c.queue.disburse(&c.supplies, &c.mu_h, &c.mu_a).unwrap();
        let after = c.queue.totals();
        let human: f64 = admitted.iter().map(|f| f.human).sum();
        let auto: f64 = admitted.iter().map(|f| f.auto).sum();
        prop_assert!((before.human - after.human - human).abs() <= TOL);
        prop_assert!((before.auto - after.auto - auto).abs() <= TOL);
    }

    #[test]
    fn service_is_first_in_first_out(seed in any::<u64>(), paths in 1usize..5, packets in 0usize..8) {
        let mut c = case(seed, paths, packets);
        let original: Vec<Packet> = c.queue.packets().copied().collect();
        c.queue.disburse(&c.supplies, &c.mu_h, &c.mu_a).unwrap();
        let rest: Vec<Packet> = c.queue.packets().copied().collect();
        prop_assert!(rest.len() <= original.len());
        let offset = original.len() - rest.len();
        if let Some((head, tail)) = rest.split_first() {
            prop_assert_eq!(tail, &original[offset + 1..]);
            // The head keeps its own class mix.
            let o = original[offset];
            prop_assert!((head.human * o.auto - head.auto * o.human).abs() <= TOL);
            prop_assert!(head.human <= o.human && head.auto <= o.auto);
        }
    }

    #[test]
    fn each_class_follows_its_routing(seed in any::<u64>(), paths in 1usize..5, packets in 0usize..8) {
        let mut c = case(seed, paths, packets);
        let admitted = c.queue.disburse(&c.supplies, &c.mu_h, &c.mu_a).unwrap();
        let human: f64 = admitted.iter().map(|f| f.human).sum();
        let auto: f64 = admitted.iter().map(|f| f.auto).sum();
        for (p, f) in admitted.iter().enumerate() {
            prop_assert!((f.human - c.mu_h.get(p) * human).abs() <= TOL);
            prop_assert!((f.auto - c.mu_a.get(p) * auto).abs() <= TOL);
        }
    }

    #[test]
    fn leftover_head_is_blocked_by_a_full_road(seed in any::<u64>(), paths in 1usize..5, packets in 1usize..8) {
        let mut c = case(seed, paths, packets);
        let admitted = c.queue.disburse(&c.supplies, &c.mu_h, &c.mu_a).unwrap();
        let head = c.queue.packets().next().copied();
        if let Some(head) = head {
            let blocked = (0..paths).any(|p| {
                let load = c.mu_h.get(p) * head.human + c.mu_a.get(p) * head.auto;
                load > 0.0 && admitted[p].total() >= c.supplies[p] - TOL
            });
            prop_assert!(blocked);
        }
    }
}

#[test]
fn ample_supply_empties_the_queue() {
    let mut queue = VehicleQueue::new();
    queue.enqueue(1.0, 2.0).unwrap();
    queue.enqueue(0.5, 0.0).unwrap();
    let admitted = queue
        .disburse(&[100.0, 100.0], &RoutingVector::uniform(2), &RoutingVector::vertex(2, 1))
        .unwrap();
    assert!(queue.is_empty());
    assert_eq!(admitted[0].human, 0.75);
    assert_eq!(admitted[0].auto, 0.0);
    assert_eq!(admitted[1].auto, 2.0);
}

#[test]
fn negative_demand_is_rejected() {
    let mut queue = VehicleQueue::new();
    assert!(queue.enqueue(-1.0, 0.0).is_err());
    assert!(queue.enqueue(0.0, f64::NAN).is_err());
    assert!(queue.is_empty());
}
