//! Steady states of roads and best network equilibria.
//!
//! A congested road at equilibrium runs at bottleneck capacity, which makes
//! `h_h f_h + h_a f_a = v b_b` affine in the two class flows, and its number of
//! congested cells is then `gamma = delta * (f_h + f_a) / (c v b_b)` for a
//! latency gap `delta` above free flow. Both best-equilibrium searches reduce
//! to one small linear program per candidate free-flow road.

mod oracle;
mod road;

use serde::{Deserialize, Serialize};

pub use oracle::brute_force_equilibrium;
pub use road::{
    congested_cell_latency, enumerate_congestion_profiles, equilibrium_state,
    road_equilibrium_latency, RoadModel,
};

use crate::ctm::FlowTuple;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::network::NetworkSpec;

/// Whether autonomous vehicles choose routes selfishly or are dispatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Selfish,
    Controlled,
}

/// A network equilibrium with per-road flows and congestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub regime: Regime,
    pub flows: Vec<FlowTuple>,
    pub autonomy: Vec<f64>,
    /// Congested length `gamma` of each road (continuous).
    pub congested_length: Vec<f64>,
    pub latencies: Vec<f64>,
    /// Index of the free-flow road `p'` (0-based).
    pub free_flow_road: usize,
    /// Latency shared by every road carrying human drivers.
    pub common_latency: f64,
    /// `sum_p (f_h + f_a) * latency_p`.
    pub total_latency: f64,
}

impl EquilibriumSolution {
    /// Builds the derived fields from road flows. Roads before `free_flow_road`
    /// are congested up to the common latency; later roads run in free flow.
    pub(crate) fn from_flows(
        net: &NetworkSpec,
        regime: Regime,
        free_flow_road: usize,
        flows: Vec<FlowTuple>,
    ) -> Result<Self> {
        let roads = road_models(net)?;
        let common_latency = roads[free_flow_road].free_flow_latency;
        let mut autonomy = Vec::with_capacity(flows.len());
        let mut congested_length = Vec::with_capacity(flows.len());
        let mut latencies = Vec::with_capacity(flows.len());
        for (p, (road, flow)) in roads.iter().zip(&flows).enumerate() {
            let alpha = if flow.total() > 0.0 {
                flow.autonomy()
            } else if regime == Regime::Controlled {
                1.0
            } else {
                0.0
            };
            let (gamma, latency) = if p < free_flow_road {
                let gap = common_latency - road.free_flow_latency;
                (gap / road.congestion_increment(alpha), common_latency)
            } else {
                (0.0, road.free_flow_latency)
            };
            autonomy.push(alpha);
            congested_length.push(gamma);
            latencies.push(latency);
        }
        let total_latency = flows
            .iter()
            .zip(&latencies)
            .map(|(f, l)| f.total() * l)
            .sum();
        Ok(Self {
            regime,
            flows,
            autonomy,
            congested_length,
            latencies,
            free_flow_road,
            common_latency,
            total_latency,
        })
    }
}

pub(crate) fn road_models(net: &NetworkSpec) -> Result<Vec<RoadModel>> {
    net.paths().iter().map(RoadModel::new).collect()
}

fn check_demand(human: f64, auto: f64) -> Result<()> {
    if human >= 0.0 && auto >= 0.0 && human.is_finite() && auto.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeDemand { human, auto })
    }
}

/// Columns of the per-candidate program: human flows on roads `0..=q`,
/// then autonomous flows on roads `0..auto_roads`.
struct Layout {
    human_roads: usize,
}

impl Layout {
    fn human(&self, p: usize) -> usize {
        p
    }
    fn auto(&self, p: usize) -> usize {
        self.human_roads + p
    }
}

/// Constraints shared by both regimes for free-flow candidate `q`.
fn add_equilibrium_rows(
    lp: &mut LinearProgram,
    roads: &[RoadModel],
    q: usize,
    layout: &Layout,
    human_demand: f64,
    auto_demand: f64,
    auto_roads: usize,
) {
    let target = roads[q].free_flow_latency;
    for (p, road) in roads.iter().enumerate().take(q) {
        let throughput = road.speed * road.bottleneck_lanes;
        // At capacity: h_h f_h + h_a f_a = v b_b.
        lp.add_sparse(
            &[
                (layout.human(p), road.headway_human),
                (layout.auto(p), road.headway_auto),
            ],
            Relation::Eq,
            throughput,
        );
        // gamma = gap (f_h + f_a) / (c v b_b) <= m_n
        let gap = target - road.free_flow_latency;
        let max_flow =
            road.upstream_cells as f64 * road.congestion_coefficient() * throughput / gap;
        lp.add_sparse(
            &[(layout.human(p), 1.0), (layout.auto(p), 1.0)],
            Relation::Le,
            max_flow,
        );
    }
    let free = &roads[q];
    lp.add_sparse(
        &[
            (layout.human(q), free.headway_human),
            (layout.auto(q), free.headway_auto),
        ],
        Relation::Le,
        free.speed * free.bottleneck_lanes,
    );
    let humans: Vec<(usize, f64)> = (0..=q).map(|p| (layout.human(p), 1.0)).collect();
    lp.add_sparse(&humans, Relation::Eq, human_demand);
    let autos: Vec<(usize, f64)> = (0..auto_roads).map(|p| (layout.auto(p), 1.0)).collect();
    lp.add_sparse(&autos, Relation::Eq, auto_demand);
}

fn extract_flows(x: &[f64], layout: &Layout, paths: usize, auto_roads: usize) -> Vec<FlowTuple> {
    (0..paths)
        .map(|p| {
            let human = if p < layout.human_roads {
                x[layout.human(p)].max(0.0)
            } else {
                0.0
            };
            let auto = if p < auto_roads {
                x[layout.auto(p)].max(0.0)
            } else {
                0.0
            };
            FlowTuple::new(human, auto)
        })
        .collect()
}

/// Feasibility program for free-flow candidate `q` with every user selfish.
fn selfish_candidate(
    roads: &[RoadModel],
    q: usize,
    human_demand: f64,
    auto_demand: f64,
) -> Result<Option<Vec<FlowTuple>>> {
    let layout = Layout { human_roads: q + 1 };
    let mut lp = LinearProgram::minimize(vec![0.0; 2 * (q + 1)]);
    add_equilibrium_rows(&mut lp, roads, q, &layout, human_demand, auto_demand, q + 1);
    Ok(match lp.solve()? {
        LpOutcome::Optimal(s) => Some(extract_flows(&s.x, &layout, roads.len(), q + 1)),
        _ => None,
    })
}

/// Program for candidate `q` with dispatched autonomous vehicles allowed on
/// roads beyond `q` (in free flow, at most at full-autonomy capacity).
fn controlled_candidate(
    roads: &[RoadModel],
    q: usize,
    human_demand: f64,
    auto_demand: f64,
) -> Result<Option<Vec<FlowTuple>>> {
    let paths = roads.len();
    let layout = Layout { human_roads: q + 1 };
    let mut objective = vec![0.0; q + 1 + paths];
    for (p, road) in roads.iter().enumerate().skip(q + 1) {
        objective[layout.auto(p)] = road.free_flow_latency;
    }
    let mut lp = LinearProgram::minimize(objective);
    for (p, road) in roads.iter().enumerate().skip(q + 1) {
        lp.set_bounds(layout.auto(p), 0.0, road.capacity(1.0));
    }
    add_equilibrium_rows(&mut lp, roads, q, &layout, human_demand, auto_demand, paths);
    Ok(match lp.solve()? {
        LpOutcome::Optimal(s) => Some(extract_flows(&s.x, &layout, paths, paths)),
        _ => None,
    })
}

/// Minimum-latency equilibrium when humans and autonomous vehicles are both
/// selfish: the smallest free-flow road index whose program is feasible.
pub fn best_selfish_equilibrium(
    net: &NetworkSpec,
    human_demand: f64,
    auto_demand: f64,
) -> Result<EquilibriumSolution> {
    check_demand(human_demand, auto_demand)?;
    let roads = road_models(net)?;
    for q in 0..roads.len() {
        if let Some(flows) = selfish_candidate(&roads, q, human_demand, auto_demand)? {
            return EquilibriumSolution::from_flows(net, Regime::Selfish, q, flows);
        }
    }
    Err(Error::Infeasible(format!(
        "demand ({human_demand}, {auto_demand}) cannot be served by any selfish equilibrium"
    )))
}

/// Minimum-latency equilibrium when humans are selfish and autonomous
/// vehicles are routed centrally. Every free-flow candidate is solved and
/// the lowest total latency kept; ties go to the smaller index.
pub fn best_controlled_equilibrium(
    net: &NetworkSpec,
    human_demand: f64,
    auto_demand: f64,
) -> Result<EquilibriumSolution> {
    check_demand(human_demand, auto_demand)?;
    let roads = road_models(net)?;
    let mut best: Option<EquilibriumSolution> = None;
    for q in 0..roads.len() {
        let Some(flows) = controlled_candidate(&roads, q, human_demand, auto_demand)? else {
            continue;
        };
        let solution = EquilibriumSolution::from_flows(net, Regime::Controlled, q, flows)?;
        let better = best
            .as_ref()
            .is_none_or(|b| solution.total_latency < b.total_latency - 1e-12);
        if better {
            best = Some(solution);
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "demand ({human_demand}, {auto_demand}) cannot be served by any controlled equilibrium"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctm::RoadGeometry;

    pub(crate) fn geometry(cells: usize) -> RoadGeometry {
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

    fn two_path() -> NetworkSpec {
        NetworkSpec::from_geometries(&[geometry(5), geometry(10)]).unwrap()
    }

    #[test]
    fn single_path_below_capacity() {
        let net = NetworkSpec::from_geometries(&[geometry(5)]).unwrap();
        let s = best_selfish_equilibrium(&net, 0.5, 0.2).unwrap();
        assert_eq!(s.free_flow_road, 0);
        assert_eq!(s.congested_length, vec![0.0]);
        assert!((s.common_latency - 5.0).abs() < 1e-12);
        assert!((s.total_latency - 3.5).abs() < 1e-9);
    }

    #[test]
    fn desk_instance_selfish() {
        // Road 0 alone cannot carry 1.5 at alpha = 0.2 (capacity 1/0.9).
        let s = best_selfish_equilibrium(&two_path(), 1.2, 0.3).unwrap();
        assert_eq!(s.free_flow_road, 1);
        assert!((s.common_latency - 10.0).abs() < 1e-12);
        assert!((s.total_latency - 15.0).abs() < 1e-9);
        let f0 = s.flows[0];
        assert!((f0.human + 0.5 * f0.auto - 1.0).abs() < 1e-9);
        assert!(s.congested_length[0] > 0.0 && s.congested_length[0] <= 3.0);
        assert!((s.latencies[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn controlled_uses_overflow_road() {
        // Humans fit road 0 in free flow; surplus autonomous vehicles go to road 1.
        let net = two_path();
        let c = best_controlled_equilibrium(&net, 0.6, 1.0).unwrap();
        assert_eq!(c.free_flow_road, 0);
        assert!((c.flows[0].human - 0.6).abs() < 1e-9);
        assert!((c.flows[0].auto - 0.8).abs() < 1e-9);
        assert!((c.flows[1].auto - 0.2).abs() < 1e-9);
        assert!((c.total_latency - 9.0).abs() < 1e-9);
        let s = best_selfish_equilibrium(&net, 0.6, 1.0).unwrap();
        assert!((s.total_latency - 16.0).abs() < 1e-9);
    }

    #[test]
    fn no_autonomy_controlled_equals_selfish() {
        let net = two_path();
        let s = best_selfish_equilibrium(&net, 1.4, 0.0).unwrap();
        let c = best_controlled_equilibrium(&net, 1.4, 0.0).unwrap();
        assert!((s.total_latency - c.total_latency).abs() < 1e-9);
        assert_eq!(s.free_flow_road, c.free_flow_road);
    }

    #[test]
    fn infeasible_demand_reported() {
        let err = best_selfish_equilibrium(&two_path(), 5.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        let err = best_controlled_equilibrium(&two_path(), 5.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        assert!(best_selfish_equilibrium(&two_path(), -1.0, 0.0).is_err());
    }
}
