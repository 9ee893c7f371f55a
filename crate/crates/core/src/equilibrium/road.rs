use crate::ctm::{FlowTuple, PathSpec, PathState};
use crate::error::{invalid, Error, Result};

/// Closed-form steady-state quantities of a single-bottleneck road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadModel {
    pub free_flow_latency: f64,
    pub speed: f64,
    pub upstream_cells: usize,
    pub upstream_lanes: f64,
    pub bottleneck_lanes: f64,
    pub headway_human: f64,
    pub headway_auto: f64,
    /// Jam density of a pre-bottleneck cell.
    pub jam_density: f64,
}

impl RoadModel {
    pub fn new(path: &PathSpec) -> Result<Self> {
        let b = path
            .bottleneck()
            .ok_or_else(|| invalid("path has no single-bottleneck structure"))?;
        let ratio = b.lane_ratio();
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid(format!("lane ratio {ratio} must lie in (0, 1)")));
        }
        let first = path.cell(0);
        Ok(Self {
            free_flow_latency: path.free_flow_latency(),
            speed: first.free_flow_speed,
            upstream_cells: b.upstream_cells,
            upstream_lanes: f64::from(b.upstream_lanes),
            bottleneck_lanes: f64::from(b.bottleneck_lanes),
            headway_human: first.headway_human,
            headway_auto: first.headway_auto,
            jam_density: first.jam_density,
        })
    }

    pub fn lane_ratio(&self) -> f64 {
        self.bottleneck_lanes / self.upstream_lanes
    }

    pub fn mean_headway(&self, alpha: f64) -> f64 {
        self.headway_human - alpha * (self.headway_human - self.headway_auto)
    }

    /// Bottleneck capacity `v b_b / H(alpha)`.
    pub fn capacity(&self, alpha: f64) -> f64 {
        self.speed * self.bottleneck_lanes / self.mean_headway(alpha)
    }

    /// `(1 - r) n_jam / (r v b_n)`; the congestion increment is this times `H(alpha)`.
    pub fn congestion_coefficient(&self) -> f64 {
        let r = self.lane_ratio();
        (1.0 - r) * self.jam_density / (r * self.speed * self.upstream_lanes)
    }

    /// Extra latency of one congested cell over free flow.
    pub fn congestion_increment(&self, alpha: f64) -> f64 {
        self.congestion_coefficient() * self.mean_headway(alpha)
    }

    pub fn critical_density_upstream(&self, alpha: f64) -> f64 {
        self.upstream_lanes / self.mean_headway(alpha)
    }

    /// Density of a congested pre-bottleneck cell, `(1 - r) n_jam + r n_crit`.
    pub fn congested_density(&self, alpha: f64) -> f64 {
        let r = self.lane_ratio();
        (1.0 - r) * self.jam_density + r * self.critical_density_upstream(alpha)
    }

    /// Latency with `gamma` (possibly fractional) congested cells.
    pub fn latency(&self, alpha: f64, gamma: f64) -> f64 {
        self.free_flow_latency + gamma * self.congestion_increment(alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(invalid(format!("autonomy level {alpha} outside [0, 1]")))
    }
}

/// Time to cross one congested cell at autonomy `alpha`.
pub fn congested_cell_latency(path: &PathSpec, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let road = RoadModel::new(path)?;
    Ok(1.0 / road.speed + road.congestion_increment(alpha))
}

/// Equilibrium latency of a road with `gamma` congested cells.
pub fn road_equilibrium_latency(path: &PathSpec, alpha: f64, gamma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let road = RoadModel::new(path)?;
    if !(gamma >= 0.0 && gamma <= road.upstream_cells as f64) {
        return Err(invalid(format!(
            "congested length {gamma} outside [0, {}]",
            road.upstream_cells
        )));
    }
    Ok(road.latency(alpha, gamma))
}

/// Congested-cell sets a road can hold at equilibrium: the suffixes of the
/// pre-bottleneck segment, from the empty set up to all of it. Cell indices
/// are 0-based.
pub fn enumerate_congestion_profiles(path: &PathSpec) -> Result<Vec<Vec<usize>>> {
    let road = RoadModel::new(path)?;
    let m = road.upstream_cells;
    Ok((0..=m).map(|gamma| (m - gamma..m).collect()).collect())
}

/// Builds the steady state of a road fed `demand` with `gamma` congested cells.
///
/// Congested cells sit at the congested density, every other cell carries the
/// demand in free flow, and all cells share the demand's autonomy level. With
/// `gamma > 0` the demand must equal the bottleneck capacity.
pub fn equilibrium_state(path: &PathSpec, demand: FlowTuple, gamma: usize) -> Result<PathState> {
    let road = RoadModel::new(path)?;
    if !(demand.human >= 0.0 && demand.auto >= 0.0) {
        return Err(Error::NegativeDemand {
            human: demand.human,
            auto: demand.auto,
        });
    }
    let m = road.upstream_cells;
    if gamma > m {
        return Err(invalid(format!("gamma {gamma} exceeds pre-bottleneck length {m}")));
    }
    let flow = demand.total();
    let alpha = demand.autonomy();
    let capacity = road.capacity(alpha);
    let tol = 1e-9 * capacity.max(1.0);
    if gamma > 0 && (flow - capacity).abs() > tol {
        return Err(Error::Infeasible(format!(
            "{gamma} congested cells need demand equal to capacity {capacity}, got {flow}"
        )));
    }
    if flow > capacity + tol {
        return Err(Error::Infeasible(format!(
            "demand {flow} exceeds bottleneck capacity {capacity}"
        )));
    }
    let free = flow / road.speed;
    let congested = road.congested_density(alpha);
    let totals: Vec<f64> = (0..path.len())
        .map(|i| if i + gamma >= m && i < m { congested } else { free })
        .collect();
    let human: Vec<f64> = totals.iter().map(|n| (1.0 - alpha) * n).collect();
    let auto: Vec<f64> = totals.iter().map(|n| alpha * n).collect();
    PathState::from_densities(path.clone(), &human, &auto)
}
