//! Entry queue and packet admission.
//!
//! Demand arrives once per step as a packet `(q_h, q_a)` appended to a FIFO
//! queue. Packets are released head-first, split across paths by the two
//! routing vectors, while every path stays within its first-cell supply. The
//! first packet that does not fit is admitted fractionally.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::choice::RoutingVector;
use crate::ctm::FlowTuple;
use crate::error::{invalid, Error, Result};

/// A volume of waiting vehicles that entered the queue in the same step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub human: f64,
    pub auto: f64,
}

impl Packet {
    pub fn is_empty(&self) -> bool {
        self.human == 0.0 && self.auto == 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleQueue {
    packets: VecDeque<Packet>,
}

impl VehicleQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    /// Appends `(human, auto)` at the tail. Zero packets are dropped.
    pub fn enqueue(&mut self, human: f64, auto: f64) -> Result<()> {
        if !(human >= 0.0 && auto >= 0.0) || !human.is_finite() || !auto.is_finite() {
            return Err(Error::NegativeDemand { human, auto });
        }
        let packet = Packet { human, auto };
        if !packet.is_empty() {
            self.packets.push_back(packet);
        }
        Ok(())
    }

    /// Waiting vehicles per class `(Q_h, Q_a)`.
    pub fn totals(&self) -> FlowTuple {
        self.packets
            .iter()
            .fold(FlowTuple::ZERO, |acc, p| acc + FlowTuple::new(p.human, p.auto))
    }

    /// Releases vehicles into the network subject to per-path `supplies`.
    ///
    /// Returns the admitted flow per path. Whole packets are taken while
    /// `f_p + mu_h[p] q_h + mu_a[p] q_a <= s_p` holds on every path; the first
    /// packet that fails is scaled by the largest feasible fraction and the
    /// remainder stays at the head. Paths receiving none of the head packet
    /// do not constrain it.
    pub fn disburse(
        &mut self,
        supplies: &[f64],
        human_routing: &RoutingVector,
        auto_routing: &RoutingVector,
    ) -> Result<Vec<FlowTuple>> {
        let paths = supplies.len();
        if human_routing.len() != paths || auto_routing.len() != paths {
            return Err(invalid(format!(
                "routing vectors of length {} and {} for {paths} paths",
                human_routing.len(),
                auto_routing.len()
            )));
        }
        if supplies.iter().any(|s| !(*s >= 0.0)) {
            return Err(invalid("supplies must be nonnegative"));
        }
        let mu_h = human_routing.as_slice();
        let mu_a = auto_routing.as_slice();
        let mut admitted = vec![FlowTuple::ZERO; paths];

        while let Some(head) = self.packets.front_mut() {
            let load = |p: usize| mu_h[p] * head.human + mu_a[p] * head.auto;
            let fits = (0..paths).all(|p| admitted[p].total() + load(p) <= supplies[p]);
            if fits {
                for (p, flow) in admitted.iter_mut().enumerate() {
                    flow.human += mu_h[p] * head.human;
                    flow.auto += mu_a[p] * head.auto;
                }
                self.packets.pop_front();
                continue;
            }
            let fraction = (0..paths)
                .filter(|&p| load(p) > 0.0)
                .map(|p| (supplies[p] - admitted[p].total()) / load(p))
                .fold(1.0_f64, f64::min)
                .clamp(0.0, 1.0);
            if fraction > 0.0 {
                for (p, flow) in admitted.iter_mut().enumerate() {
                    flow.human += fraction * mu_h[p] * head.human;
                    flow.auto += fraction * mu_a[p] * head.auto;
                }
                head.human *= 1.0 - fraction;
                head.auto *= 1.0 - fraction;
            }
            break;
        }
        Ok(admitted)
    }
}

/// Pure form of [`VehicleQueue::enqueue`].
pub fn enqueue_demand(queue: &VehicleQueue, human: f64, auto: f64) -> Result<VehicleQueue> {
    let mut next = queue.clone();
    next.enqueue(human, auto)?;
    Ok(next)
}

/// Pure form of [`VehicleQueue::disburse`].
pub fn disburse(
    queue: &VehicleQueue,
    supplies: &[f64],
    human_routing: &RoutingVector,
    auto_routing: &RoutingVector,
) -> Result<(Vec<FlowTuple>, VehicleQueue)> {
    let mut next = queue.clone();
    let flows = next.disburse(supplies, human_routing, auto_routing)?;
    Ok((flows, next))
}

pub fn queue_totals(queue: &VehicleQueue) -> FlowTuple {
    queue.totals()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> RoutingVector {
        RoutingVector::new(v.to_vec()).unwrap()
    }

    fn queue_of(packets: &[(f64, f64)]) -> VehicleQueue {
        let mut q = VehicleQueue::new();
        for &(h, a) in packets {
            q.enqueue(h, a).unwrap();
        }
        q
    }

    fn as_pairs(q: &VehicleQueue) -> Vec<(f64, f64)> {
        q.packets().map(|p| (p.human, p.auto)).collect()
    }

    #[test]
    fn enqueue_examples() {
        let q = enqueue_demand(&VehicleQueue::new(), 2.0, 1.0).unwrap();
        assert_eq!(as_pairs(&q), vec![(2.0, 1.0)]);
        let q = enqueue_demand(&q, 0.0, 0.0).unwrap();
        assert_eq!(as_pairs(&q), vec![(2.0, 1.0)]);
        let q = enqueue_demand(&q, 1.0, 3.0).unwrap();
        assert_eq!(as_pairs(&q), vec![(2.0, 1.0), (1.0, 3.0)]);
        assert!(enqueue_demand(&q, -1.0, 0.0).is_err());
    }

    #[test]
    fn totals_examples() {
        assert_eq!(queue_of(&[(2.0, 1.0), (1.0, 3.0)]).totals(), FlowTuple::new(3.0, 4.0));
        assert_eq!(VehicleQueue::new().totals(), FlowTuple::ZERO);
        assert_eq!(queue_of(&[(0.5, 0.0)]).totals(), FlowTuple::new(0.5, 0.0));
    }

    #[test]
    fn head_packet_split_when_one_path_saturates() {
        let q = queue_of(&[(4.0, 0.0)]);
        let (flows, rest) = disburse(&q, &[3.0, 1.0], &rv(&[0.5, 0.5]), &rv(&[0.5, 0.5])).unwrap();
        assert_eq!(flows, vec![FlowTuple::new(1.0, 0.0), FlowTuple::new(1.0, 0.0)]);
        assert_eq!(as_pairs(&rest), vec![(2.0, 0.0)]);
    }

    #[test]
    fn ample_supply_admits_everything() {
        let q = queue_of(&[(2.0, 2.0)]);
        let (flows, rest) =
            disburse(&q, &[10.0, 10.0], &rv(&[0.3, 0.7]), &rv(&[0.9, 0.1])).unwrap();
        assert!(rest.is_empty());
        let total: f64 = flows.iter().map(|f| f.total()).sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_supply_admits_nothing() {
        let q = queue_of(&[(2.0, 1.0)]);
        let (flows, rest) = disburse(&q, &[0.0, 0.0], &rv(&[0.5, 0.5]), &rv(&[0.5, 0.5])).unwrap();
        assert!(flows.iter().all(|f| *f == FlowTuple::ZERO));
        assert_eq!(rest, q);
    }

    #[test]
    fn empty_queue_gives_zero_flows() {
        let (flows, _) =
            disburse(&VehicleQueue::new(), &[1.0], &rv(&[1.0]), &rv(&[1.0])).unwrap();
        assert_eq!(flows, vec![FlowTuple::ZERO]);
    }

    #[test]
    fn unrouted_zero_supply_path_is_vacuous() {
        let q = queue_of(&[(1.0, 1.0), (1.0, 0.0)]);
        let (flows, rest) = disburse(&q, &[5.0, 0.0], &rv(&[1.0, 0.0]), &rv(&[1.0, 0.0])).unwrap();
        assert!(rest.is_empty());
        assert_eq!(flows[0], FlowTuple::new(2.0, 1.0));
        assert_eq!(flows[1], FlowTuple::ZERO);
    }

    #[test]
    fn later_packets_wait_for_head() {
        let q = queue_of(&[(3.0, 0.0), (0.0, 1.0)]);
        let (flows, rest) = disburse(&q, &[2.0], &rv(&[1.0]), &rv(&[1.0])).unwrap();
        assert_eq!(flows[0], FlowTuple::new(2.0, 0.0));
        assert_eq!(as_pairs(&rest), vec![(1.0, 0.0), (0.0, 1.0)]);
    }

    #[test]
    fn exact_fit_then_stop() {
        let q = queue_of(&[(1.0, 0.0), (1.0, 0.0)]);
        let (flows, rest) = disburse(&q, &[1.0], &rv(&[1.0]), &rv(&[1.0])).unwrap();
        assert_eq!(flows[0], FlowTuple::new(1.0, 0.0));
        assert_eq!(as_pairs(&rest), vec![(1.0, 0.0)]);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let q = queue_of(&[(1.0, 0.0)]);
        assert!(disburse(&q, &[1.0, 1.0], &rv(&[1.0]), &rv(&[0.5, 0.5])).is_err());
    }
}
