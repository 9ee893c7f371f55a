//! Two-class cell transmission model.
//!
//! A path is an ordered list of cells. Each cell carries a density of
//! human-driven and autonomous vehicles; the triangular fundamental diagram of
//! a cell depends on its autonomy level through the mean headway
//! `alpha * h_a + (1 - alpha) * h_h`. Time and space are dimensionless: one
//! step, one cell.
//!
//! Flow from cell `i` to `i + 1` is the minimum of the upstream demand
//! `v * n_i`, the downstream supply `(n_jam - n) * w` and the upstream
//! capacity. The last cell exits the road with no supply limit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Inflow above first-cell supply by more than this is rejected.
pub const SUPPLY_TOLERANCE: f64 = 1e-9;

/// Fundamental-diagram parameters of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// Cells per time step, in `(0, 1]`.
    pub free_flow_speed: f64,
    pub lanes: u32,
    /// Cells per vehicle, per lane.
    pub headway_human: f64,
    pub headway_auto: f64,
    /// Vehicles per cell with every lane open.
    pub jam_density: f64,
}

impl CellParams {
    pub fn new(
        free_flow_speed: f64,
        lanes: u32,
        headway_human: f64,
        headway_auto: f64,
        jam_density: f64,
    ) -> Result<Self> {
        let params = Self {
            free_flow_speed,
            lanes,
            headway_human,
            headway_auto,
            jam_density,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.free_flow_speed,
            self.headway_human,
            self.headway_auto,
            self.jam_density,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("cell parameters must be finite"));
        }
        if !(self.free_flow_speed > 0.0 && self.free_flow_speed <= 1.0) {
            return Err(invalid(format!(
                "free-flow speed {} must lie in (0, 1]",
                self.free_flow_speed
            )));
        }
        if self.lanes == 0 {
            return Err(invalid("a cell needs at least one lane"));
        }
        if !(self.headway_auto > 0.0 && self.headway_auto <= self.headway_human) {
            return Err(invalid(format!(
                "headways must satisfy 0 < h_a <= h_h (got h_a={}, h_h={})",
                self.headway_auto, self.headway_human
            )));
        }
        let densest = f64::from(self.lanes) / self.headway_auto;
        if self.jam_density <= densest {
            return Err(invalid(format!(
                "jam density {} must exceed the all-autonomous critical density {}",
                self.jam_density, densest
            )));
        }
        // The shockwave speed peaks at alpha = 1.
        let w = self.free_flow_speed * densest / (self.jam_density - densest);
        if w > 1.0 + 1e-12 {
            return Err(invalid(format!(
                "shockwave speed {w} at full autonomy exceeds one cell per step"
            )));
        }
        Ok(())
    }

    /// Mean headway of a mix with autonomy level `alpha`.
    pub fn mean_headway(&self, alpha: f64) -> f64 {
        self.headway_human - alpha * (self.headway_human - self.headway_auto)
    }
}

/// Critical density, capacity and shockwave speed at a given autonomy level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalDiagram {
    pub critical_density: f64,
    pub capacity: f64,
    pub shockwave_speed: f64,
    /// Jam density scaled by the open-lane fraction.
    pub jam_density: f64,
}

/// Evaluates the fundamental diagram of a cell with `open_lanes` usable lanes.
///
/// With every lane closed the cell passes no flow and everything is zero.
pub fn fundamental_diagram(params: &CellParams, open_lanes: u32, alpha: f64) -> FundamentalDiagram {
    if open_lanes == 0 {
        return FundamentalDiagram {
            critical_density: 0.0,
            capacity: 0.0,
            shockwave_speed: 0.0,
            jam_density: 0.0,
        };
    }
    let open = f64::from(open_lanes.min(params.lanes));
    let critical_density = open / params.mean_headway(alpha);
    let capacity = params.free_flow_speed * critical_density;
    let jam_density = params.jam_density * open / f64::from(params.lanes);
    FundamentalDiagram {
        critical_density,
        capacity,
        shockwave_speed: capacity / (jam_density - critical_density),
        jam_density,
    }
}

/// Human and autonomous components of a flow (or of a vehicle volume).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTuple {
    pub human: f64,
    pub auto: f64,
}

impl FlowTuple {
    pub const ZERO: FlowTuple = FlowTuple {
        human: 0.0,
        auto: 0.0,
    };

    pub fn new(human: f64, auto: f64) -> Self {
        Self { human, auto }
    }

    pub fn total(&self) -> f64 {
        self.human + self.auto
    }

    /// Autonomous share; 0 for an empty tuple.
    pub fn autonomy(&self) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.auto / total
        } else {
            0.0
        }
    }
}

impl std::ops::Add for FlowTuple {
    type Output = FlowTuple;
    fn add(self, rhs: FlowTuple) -> FlowTuple {
        FlowTuple::new(self.human + rhs.human, self.auto + rhs.auto)
    }
}

impl std::ops::AddAssign for FlowTuple {
    fn add_assign(&mut self, rhs: FlowTuple) {
        self.human += rhs.human;
        self.auto += rhs.auto;
    }
}

/// Vehicle densities and lane-closure flags of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub human: f64,
    pub auto: f64,
    /// One flag per lane; `true` means closed.
    pub closed: Vec<bool>,
}

impl CellState {
    pub fn empty(lanes: u32) -> Self {
        Self {
            human: 0.0,
            auto: 0.0,
            closed: vec![false; lanes as usize],
        }
    }

    pub fn with_density(lanes: u32, human: f64, auto: f64) -> Self {
        Self {
            human,
            auto,
            closed: vec![false; lanes as usize],
        }
    }

    pub fn total(&self) -> f64 {
        self.human + self.auto
    }

    /// Autonomy level; 0 by convention when the cell is empty.
    pub fn autonomy(&self) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.auto / total
        } else {
            0.0
        }
    }

    pub fn open_lanes(&self) -> u32 {
        self.closed.iter().filter(|c| !**c).count() as u32
    }

    pub fn diagram(&self, params: &CellParams) -> FundamentalDiagram {
        fundamental_diagram(params, self.open_lanes(), self.autonomy())
    }

    /// Vehicles per step the cell can accept: `(n_jam - n) * w`, floored at 0.
    pub fn supply(&self, params: &CellParams) -> f64 {
        let fd = self.diagram(params);
        ((fd.jam_density - self.total()).max(0.0) * fd.shockwave_speed).max(0.0)
    }
}

/// Total flow leaving `upstream`. `downstream` is `None` at the road exit.
pub fn cell_outflow(
    upstream: (&CellParams, &CellState),
    downstream: Option<(&CellParams, &CellState)>,
) -> f64 {
    let (params, state) = upstream;
    let n = state.total();
    if n <= 0.0 {
        return 0.0;
    }
    let demand = params.free_flow_speed * n;
    let capacity = state.diagram(params).capacity;
    let mut flow = demand.min(capacity);
    if let Some((down_params, down_state)) = downstream {
        flow = flow.min(down_state.supply(down_params));
    }
    flow.max(0.0)
}

/// Splits a total outflow in proportion to the cell's composition.
pub fn split_flow_by_type(total_flow: f64, cell: &CellState) -> Result<FlowTuple> {
    if total_flow <= 0.0 {
        return Ok(FlowTuple::ZERO);
    }
    let n = cell.total();
    if n <= 0.0 {
        return Err(Error::EmptyCellSplit { flow: total_flow });
    }
    if total_flow > n * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "outflow {total_flow} exceeds cell content {n}"
        )));
    }
    let auto = (cell.autonomy() * total_flow).min(cell.auto);
    let human = (total_flow - auto).min(cell.human).max(0.0);
    Ok(FlowTuple { human, auto })
}

/// Lane split of a single-bottleneck road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bottleneck {
    /// Number of cells before the lane drop (`m_n`).
    pub upstream_cells: usize,
    pub upstream_lanes: u32,
    pub bottleneck_lanes: u32,
}

impl Bottleneck {
    /// `b_b / b_n`.
    pub fn lane_ratio(&self) -> f64 {
        f64::from(self.bottleneck_lanes) / f64::from(self.upstream_lanes)
    }
}

/// Compact description of a single-bottleneck road, as found in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadGeometry {
    /// Total number of cells.
    pub cells: usize,
    /// Cells before the bottleneck.
    pub m_n: usize,
    pub b_n: u32,
    pub b_b: u32,
    pub v: f64,
    pub h_h: f64,
    pub h_a: f64,
    /// Jam density of a pre-bottleneck cell.
    pub n_jam: f64,
}

/// Static description of one road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    cells: Vec<CellParams>,
    bottleneck: Option<Bottleneck>,
}

impl PathSpec {
    /// Arbitrary cell list, no bottleneck structure assumed.
    pub fn from_cells(cells: Vec<CellParams>) -> Result<Self> {
        if cells.is_empty() {
            return Err(invalid("a path needs at least one cell"));
        }
        for c in &cells {
            c.validate()?;
        }
        Ok(Self {
            cells,
            bottleneck: None,
        })
    }

    /// Road with `m_n` cells of `b_n` lanes followed by cells of `b_b < b_n`
    /// lanes; every other parameter is shared. Jam density scales with lanes.
    pub fn single_bottleneck(geometry: &RoadGeometry) -> Result<Self> {
        let g = geometry;
        if g.m_n == 0 {
            return Err(invalid("a bottleneck road needs m_n >= 1"));
        }
        if g.cells < 2 || g.cells <= g.m_n {
            return Err(invalid(format!(
                "a bottleneck road needs at least one bottleneck cell (cells={}, m_n={})",
                g.cells, g.m_n
            )));
        }
        if g.b_b == 0 || g.b_b >= g.b_n {
            return Err(invalid(format!(
                "bottleneck lanes must satisfy 0 < b_b < b_n (got b_b={}, b_n={})",
                g.b_b, g.b_n
            )));
        }
        let upstream = CellParams::new(g.v, g.b_n, g.h_h, g.h_a, g.n_jam)?;
        let downstream = CellParams::new(
            g.v,
            g.b_b,
            g.h_h,
            g.h_a,
            g.n_jam * f64::from(g.b_b) / f64::from(g.b_n),
        )?;
        let mut cells = vec![upstream; g.m_n];
        cells.extend(std::iter::repeat_n(downstream, g.cells - g.m_n));
        Ok(Self {
            cells,
            bottleneck: Some(Bottleneck {
                upstream_cells: g.m_n,
                upstream_lanes: g.b_n,
                bottleneck_lanes: g.b_b,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellParams] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &CellParams {
        &self.cells[i]
    }

    pub fn bottleneck(&self) -> Option<&Bottleneck> {
        self.bottleneck.as_ref()
    }

    /// Traversal time with every cell in free flow, `sum 1/v`.
    pub fn free_flow_latency(&self) -> f64 {
        self.cells.iter().map(|c| 1.0 / c.free_flow_speed).sum()
    }

    /// Smallest cell capacity at autonomy `alpha`, all lanes open.
    pub fn min_capacity(&self, alpha: f64) -> f64 {
        self.cells
            .iter()
            .map(|c| fundamental_diagram(c, c.lanes, alpha).capacity)
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of lane-closure flags across the path.
    pub fn lane_count(&self) -> usize {
        self.cells.iter().map(|c| c.lanes as usize).sum()
    }
}

/// Per-step outcome of [`PathState::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathStepReport {
    /// Flow out of each cell; the last entry leaves the road.
    pub flows: Vec<FlowTuple>,
    pub exit: FlowTuple,
}

/// Dynamic state of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    spec: PathSpec,
    cells: Vec<CellState>,
}

impl PathState {
    pub fn empty(spec: PathSpec) -> Self {
        let cells = spec.cells.iter().map(|c| CellState::empty(c.lanes)).collect();
        Self { spec, cells }
    }

    pub fn from_densities(spec: PathSpec, human: &[f64], auto: &[f64]) -> Result<Self> {
        if human.len() != spec.len() || auto.len() != spec.len() {
            return Err(invalid(format!(
                "expected {} densities per class, got {} and {}",
                spec.len(),
                human.len(),
                auto.len()
            )));
        }
        let mut cells = Vec::with_capacity(spec.len());
        for (i, params) in spec.cells.iter().enumerate() {
            let (h, a) = (human[i], auto[i]);
            if !(h >= 0.0 && a >= 0.0) || !h.is_finite() || !a.is_finite() {
                return Err(invalid(format!("cell {i} has invalid density ({h}, {a})")));
            }
            if h + a > params.jam_density * (1.0 + 1e-12) {
                return Err(invalid(format!(
                    "cell {i} density {} exceeds jam density {}",
                    h + a,
                    params.jam_density
                )));
            }
            cells.push(CellState::with_density(params.lanes, h, a));
        }
        Ok(Self { spec, cells })
    }

    pub fn spec(&self) -> &PathSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &CellState {
        &self.cells[i]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Vehicles on the road, per class.
    pub fn vehicles(&self) -> FlowTuple {
        self.cells
            .iter()
            .fold(FlowTuple::ZERO, |acc, c| acc + FlowTuple::new(c.human, c.auto))
    }

    pub fn diagram(&self, i: usize) -> FundamentalDiagram {
        self.cells[i].diagram(&self.spec.cells[i])
    }

    pub fn supply(&self, i: usize) -> f64 {
        self.cells[i].supply(&self.spec.cells[i])
    }

    /// Admission limit of the road for this step.
    pub fn entry_supply(&self) -> f64 {
        self.supply(0)
    }

    /// Current total outflow of every cell, evaluated on the present state.
    pub fn outflows(&self) -> Vec<f64> {
        let last = self.cells.len() - 1;
        (0..self.cells.len())
            .map(|i| {
                let up = (&self.spec.cells[i], &self.cells[i]);
                let down = (i < last).then(|| (&self.spec.cells[i + 1], &self.cells[i + 1]));
                cell_outflow(up, down)
            })
            .collect()
    }

    /// Advances one step with `inflow` entering the first cell.
    ///
    /// Fails without touching the state if `inflow` exceeds the first-cell
    /// supply. The reported path index is 0; network code rewrites it.
    pub fn step(&mut self, inflow: FlowTuple) -> Result<PathStepReport> {
        if !(inflow.human >= 0.0 && inflow.auto >= 0.0) {
            return Err(Error::NegativeDemand {
                human: inflow.human,
                auto: inflow.auto,
            });
        }
        let supply = self.entry_supply();
        if inflow.total() > supply + SUPPLY_TOLERANCE {
            return Err(Error::SupplyExceeded {
                path: 0,
                inflow: inflow.total(),
                supply,
            });
        }
        let totals = self.outflows();
        let flows = totals
            .iter()
            .zip(&self.cells)
            .map(|(&f, cell)| split_flow_by_type(f, cell))
            .collect::<Result<Vec<_>>>()?;
        let mut incoming = inflow;
        for (cell, out) in self.cells.iter_mut().zip(&flows) {
            cell.human = cell.human - out.human + incoming.human;
            cell.auto = cell.auto - out.auto + incoming.auto;
            incoming = *out;
        }
        let exit = incoming;
        Ok(PathStepReport { flows, exit })
    }

    /// Default latency charged to a cell that holds vehicles but passes none.
    pub fn default_blocked_latency(&self) -> f64 {
        10.0 * self.spec.free_flow_latency()
    }

    /// Frozen-field traversal time: sum over cells of density over outflow.
    ///
    /// Empty cells cost `1/v`; occupied cells with zero outflow cost
    /// `blocked_latency` (default ten times the free-flow latency).
    pub fn latency_estimate(&self, blocked_latency: Option<f64>) -> f64 {
        let blocked = blocked_latency.unwrap_or_else(|| self.default_blocked_latency());
        self.outflows()
            .iter()
            .zip(&self.cells)
            .zip(&self.spec.cells)
            .map(|((&f, cell), params)| {
                let n = cell.total();
                if n <= 0.0 {
                    1.0 / params.free_flow_speed
                } else if f > 0.0 {
                    n / f
                } else {
                    blocked
                }
            })
            .sum()
    }

    /// Opens or closes one lane. Densities are left untouched.
    pub fn set_lane_closure(&mut self, cell: usize, lane: usize, closed: bool) -> Result<()> {
        let len = self.cells.len();
        let state = self.cells.get_mut(cell).ok_or(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            len,
        })?;
        let lanes = state.closed.len();
        let flag = state.closed.get_mut(lane).ok_or(Error::IndexOutOfRange {
            what: "lane",
            index: lane,
            len: lanes,
        })?;
        *flag = closed;
        Ok(())
    }
}

/// Pure form of [`PathState::step`].
pub fn step_path(path: &PathState, inflow: FlowTuple) -> Result<(PathState, FlowTuple)> {
    let mut next = path.clone();
    let report = next.step(inflow)?;
    Ok((next, report.exit))
}

/// Pure form of [`PathState::latency_estimate`] with the default blocked-cell cap.
pub fn path_latency_estimate(path: &PathState) -> f64 {
    path.latency_estimate(None)
}

/// Pure form of [`PathState::set_lane_closure`].
pub fn apply_lane_closure(
    path: &PathState,
    cell: usize,
    lane: usize,
    closed: bool,
) -> Result<PathState> {
    let mut next = path.clone();
    next.set_lane_closure(cell, lane, closed)?;
    Ok(next)
}
