//! The network as an episodic control environment.
//!
//! The controller picks the autonomous routing vector `mu_a` every step. One
//! tick runs in a fixed order:
//!
//! 1. enqueue the step's demand;
//! 2. release queued vehicles against each road's first-cell supply using
//!    `(mu_h, mu_a)`;
//! 3. advance every road;
//! 4. estimate road latencies on the new state and apply the Hedge update to
//!    `mu_h`;
//! 5. open or close lanes for accidents;
//! 6. record the stage cost `J(k)` (queued plus on-road vehicles) and the
//!    proxy cost `J(k) - J(k-1)`, with `J(0) = 0`.

mod bridge;
mod policy;
mod ppo;
mod scenario;
mod search;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use bridge::{serve_bridge, serve_connection, serve_tcp, BridgeError};
pub use policy::{
    policy_greedy_min_latency, policy_static_equilibrium, policy_uniform, GreedyMinLatency,
    Policy, SelfishAv, StaticRouting,
};
pub use ppo::PpoDefaults;
pub use scenario::{
    AccidentEvent, AccidentProcess, DemandProcess, EquilibriumInit, ExplicitPath,
    InitialCondition, NetworkFile, RewardMode, Scenario,
};
pub use search::{evaluate_static_policy, optimize_static_policy, SearchOutcome};

use crate::choice::{hedge_update, learning_rate, RoutingVector};
use crate::ctm::{FlowTuple, PathState};
use crate::equilibrium::equilibrium_state;
use crate::error::{invalid, Error, Result};
use crate::network::NetworkSpec;
use crate::queue::VehicleQueue;

/// Outcome of one tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResult {
    pub observation: Vec<f64>,
    /// Stage cost `J(k)`.
    pub cost: f64,
    /// `J(k) - J(k-1)`.
    pub proxy_cost: f64,
    /// Road latencies `l(k)` on the post-flow state.
    pub latencies: Vec<f64>,
    pub done: bool,
    /// Demand that joined the queue this tick.
    pub arrived: FlowTuple,
    /// Vehicles that left the network this tick.
    pub exited: FlowTuple,
    reward_mode: RewardMode,
}

impl StepResult {
    /// Negated proxy or raw cost, as selected by the scenario.
    pub fn reward(&self) -> f64 {
        match self.reward_mode {
            RewardMode::Proxy => -self.proxy_cost,
            RewardMode::Raw => -self.cost,
        }
    }
}

/// `J = sum of queued vehicles + sum of vehicles on every cell`.
pub fn stage_cost(queue: &VehicleQueue, paths: &[PathState]) -> f64 {
    let q = queue.totals();
    paths
        .iter()
        .flat_map(|p| p.cells())
        .fold(q.human + q.auto, |acc, c| acc + c.human + c.auto)
}

/// Observation length for a network: both classes on every cell, the two
/// queue totals and one flag per lane.
pub fn observation_len(net: &NetworkSpec) -> usize {
    2 * net.cell_count() + 2 + net.lane_count()
}

/// `[n_h path-major, cell-minor] ++ [n_a same order] ++ [Q_h, Q_a] ++
/// [lane flags, 1.0 = closed, path-major, cell, lane-last]`.
pub fn observation(queue: &VehicleQueue, paths: &[PathState]) -> Vec<f64> {
    let cells = || paths.iter().flat_map(|p| p.cells());
    let q = queue.totals();
    cells()
        .map(|c| c.human)
        .chain(cells().map(|c| c.auto))
        .chain([q.human, q.auto])
        .chain(cells().flat_map(|c| c.closed.iter().map(|&x| if x { 1.0 } else { 0.0 })))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ActiveAccident {
    path: usize,
    cell: usize,
    lane: usize,
    end: u64,
}

/// A running episode.
#[derive(Debug, Clone)]
pub struct Environment {
    scenario: Scenario,
    network: NetworkSpec,
    paths: Vec<PathState>,
    queue: VehicleQueue,
    human_routing: RoutingVector,
    latencies: Vec<f64>,
    blocked: Vec<f64>,
    /// Closures covering each lane, indexed `[path][cell][lane]`.
    closures: Vec<Vec<Vec<u32>>>,
    active: Vec<ActiveAccident>,
    rng: ChaCha8Rng,
    time: u64,
    cost: f64,
}

impl Environment {
    /// Validates `scenario` and resets with its own seed.
    pub fn new(scenario: Scenario) -> Result<Self> {
        let network = scenario.validate()?;
        let paths: Vec<PathState> = network.paths().iter().cloned().map(PathState::empty).collect();
        let blocked = network
            .paths()
            .iter()
            .map(|p| scenario.blocked_latency_factor.unwrap_or(10.0) * p.free_flow_latency())
            .collect();
        let closures = paths
            .iter()
            .map(|p| p.cells().iter().map(|c| vec![0; c.closed.len()]).collect())
            .collect();
        let seed = scenario.seed;
        let mut env = Self {
            human_routing: RoutingVector::uniform(network.len()),
            latencies: vec![0.0; network.len()],
            scenario,
            network,
            paths,
            queue: VehicleQueue::new(),
            blocked,
            closures,
            active: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            time: 0,
            cost: 0.0,
        };
        env.reset(Some(seed))?;
        Ok(env)
    }

    /// Restores the initial condition. `None` reuses the scenario seed.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<Vec<f64>> {
        let seed = seed.unwrap_or(self.scenario.seed);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.queue = VehicleQueue::new();
        self.time = 0;
        self.cost = 0.0;
        self.active.clear();
        for lanes in self.closures.iter_mut().flatten() {
            lanes.fill(0);
        }
        let n = self.network.len();
        let mut routing = RoutingVector::uniform(n);
        self.paths = match &self.scenario.initial {
            InitialCondition::Empty => {
                self.network.paths().iter().cloned().map(PathState::empty).collect()
            }
            InitialCondition::Equilibrium { paths } => {
                let humans: Vec<f64> = paths.iter().map(|p| p.human).collect();
                if humans.iter().sum::<f64>() > 0.0 {
                    routing = RoutingVector::from_weights(humans)?;
                }
                self.network
                    .paths()
                    .iter()
                    .zip(paths)
                    .enumerate()
                    .map(|(p, (spec, init))| {
                        equilibrium_state(spec, FlowTuple::new(init.human, init.auto), init.gamma)
                            .map_err(|e| invalid(format!("initial state of path {p}: {e}")))
                    })
                    .collect::<Result<_>>()?
            }
            InitialCondition::Explicit { paths } => self
                .network
                .paths()
                .iter()
                .zip(paths)
                .enumerate()
                .map(|(p, (spec, init))| {
                    PathState::from_densities(spec.clone(), &init.human, &init.auto)
                        .map_err(|e| invalid(format!("initial state of path {p}: {e}")))
                })
                .collect::<Result<_>>()?,
        };
        if let Some(mu) = &self.scenario.initial_human_routing {
            routing = mu.clone();
        }
        self.human_routing = routing;
        self.update_accidents()?;
        self.latencies = self.compute_latencies();
        Ok(self.observation())
    }

    /// Runs one tick with autonomous routing `action`.
    pub fn step(&mut self, action: &RoutingVector) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::EpisodeDone);
        }
        let n = self.network.len();
        if action.len() != n {
            return Err(invalid(format!("action has {} entries for {n} paths", action.len())));
        }

        let (human, auto) = self.scenario.demand.sample(&mut self.rng);
        self.queue.enqueue(human, auto)?;

        let supplies: Vec<f64> = self.paths.iter().map(PathState::entry_supply).collect();
        let inflows = self.queue.disburse(&supplies, &self.human_routing, action)?;

        let mut exited = FlowTuple::ZERO;
        for (p, (path, inflow)) in self.paths.iter_mut().zip(&inflows).enumerate() {
            let report = path.step(*inflow).map_err(|e| match e {
                Error::SupplyExceeded { inflow, supply, .. } => Error::SupplyExceeded {
                    path: p,
                    inflow,
                    supply,
                },
                other => other,
            })?;
            exited += report.exit;
        }

        self.latencies = self.compute_latencies();
        let eta = learning_rate(&self.scenario.hedge, self.time);
        self.human_routing = hedge_update(&self.human_routing, &self.latencies, eta)?;

        self.time += 1;
        self.update_accidents()?;

        let cost = stage_cost(&self.queue, &self.paths);
        let proxy_cost = cost - self.cost;
        self.cost = cost;
        Ok(StepResult {
            observation: self.observation(),
            cost,
            proxy_cost,
            latencies: self.latencies.clone(),
            done: self.is_done(),
            arrived: FlowTuple::new(human, auto),
            exited,
            reward_mode: self.scenario.reward,
        })
    }

    /// [`step`](Self::step) with a raw action, renormalized if within the
    /// simplex tolerance.
    pub fn step_raw(&mut self, action: &[f64]) -> Result<StepResult> {
        let action = RoutingVector::new(action.to_vec())?;
        self.step(&action)
    }

    fn compute_latencies(&self) -> Vec<f64> {
        self.paths
            .iter()
            .zip(&self.blocked)
            .map(|(p, &b)| p.latency_estimate(Some(b)))
            .collect()
    }

    fn adjust_closure(&mut self, path: usize, cell: usize, lane: usize, delta: i32) -> Result<()> {
        let count = &mut self.closures[path][cell][lane];
        *count = count.saturating_add_signed(delta);
        let closed = *count > 0;
        self.paths[path].set_lane_closure(cell, lane, closed)
    }

    /// Applies closures that start and end at the current time.
    fn update_accidents(&mut self) -> Result<()> {
        let k = self.time;
        match self.scenario.accidents.clone() {
            AccidentProcess::None => {}
            AccidentProcess::Scheduled { events } => {
                for ev in &events {
                    if ev.start.saturating_add(ev.duration) == k {
                        self.adjust_closure(ev.path, ev.cell, ev.lane, -1)?;
                    }
                }
                for ev in &events {
                    if ev.start == k {
                        self.adjust_closure(ev.path, ev.cell, ev.lane, 1)?;
                    }
                }
            }
            AccidentProcess::Stochastic {
                rate,
                min_duration,
                max_duration,
            } => {
                let ending: Vec<ActiveAccident> =
                    self.active.iter().copied().filter(|a| a.end == k).collect();
                self.active.retain(|a| a.end != k);
                for a in ending {
                    self.adjust_closure(a.path, a.cell, a.lane, -1)?;
                }
                if self.rng.random::<f64>() < rate {
                    let lanes = self.network.lane_count();
                    let index = self.rng.random_range(0..lanes);
                    let (path, cell, lane) = self.locate_lane(index);
                    let duration = self.rng.random_range(min_duration..=max_duration);
                    self.active.push(ActiveAccident {
                        path,
                        cell,
                        lane,
                        end: k + duration,
                    });
                    self.adjust_closure(path, cell, lane, 1)?;
                }
            }
        }
        Ok(())
    }

    /// Maps a flat lane index (observation order) to `(path, cell, lane)`.
    fn locate_lane(&self, mut index: usize) -> (usize, usize, usize) {
        for (p, path) in self.network.paths().iter().enumerate() {
            for (i, cell) in path.cells().iter().enumerate() {
                let lanes = cell.lanes as usize;
                if index < lanes {
                    return (p, i, index);
                }
                index -= lanes;
            }
        }
        unreachable!("lane index beyond network lane count")
    }

    pub fn observation(&self) -> Vec<f64> {
        observation(&self.queue, &self.paths)
    }

    pub fn observation_len(&self) -> usize {
        observation_len(&self.network)
    }

    pub fn action_len(&self) -> usize {
        self.network.len()
    }

    pub fn episode_len(&self) -> u64 {
        self.scenario.episode_len
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.network
    }

    pub fn paths(&self) -> &[PathState] {
        &self.paths
    }

    pub fn queue(&self) -> &VehicleQueue {
        &self.queue
    }

    pub fn human_routing(&self) -> &RoutingVector {
        &self.human_routing
    }

    /// Latencies of the current state.
    pub fn latencies(&self) -> &[f64] {
        &self.latencies
    }

    /// Steps taken since reset.
    pub fn time(&self) -> u64 {
        self.time
    }

    /// Stage cost of the current state; 0 right after reset.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn is_done(&self) -> bool {
        self.time >= self.scenario.episode_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctm::RoadGeometry;

    fn geometry(cells: usize) -> RoadGeometry {
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

    #[test]
    fn empty_scenario_has_zero_cost() {
        let s = Scenario::new(vec![geometry(5), geometry(10)], 0.0, 0.0, 20);
        let mut env = Environment::new(s).unwrap();
        assert!(env.observation().iter().all(|&x| x == 0.0));
        let action = RoutingVector::uniform(2);
        for k in 1..=20 {
            let r = env.step(&action).unwrap();
            assert_eq!(r.cost, 0.0);
            assert_eq!(r.done, k == 20);
        }
        assert_eq!(env.step(&action).unwrap_err(), Error::EpisodeDone);
    }

    #[test]
    fn observation_layout() {
        let s = Scenario::new(vec![geometry(5), geometry(10)], 0.0, 0.0, 1);
        let env = Environment::new(s).unwrap();
        assert_eq!(env.observation().len(), 2 * 15 + 2 + 21);
        assert_eq!(env.observation_len(), env.observation().len());
    }

    #[test]
    fn stage_cost_example() {
        let mut q = VehicleQueue::new();
        q.enqueue(3.0, 4.0).unwrap();
        let spec = crate::ctm::PathSpec::single_bottleneck(&geometry(5)).unwrap();
        let path = PathState::from_densities(spec, &[1.0, 1.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 2.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(stage_cost(&q, &[path]), 12.0);
        assert_eq!(stage_cost(&VehicleQueue::new(), &[]), 0.0);
    }

    #[test]
    fn scheduled_closure_window() {
        let mut s = Scenario::new(vec![geometry(5)], 0.0, 0.0, 10);
        s.accidents = AccidentProcess::Scheduled {
            events: vec![AccidentEvent { path: 0, cell: 1, lane: 0, start: 2, duration: 3 }],
        };
        let mut env = Environment::new(s).unwrap();
        let flag = 2 * 5 + 2 + 2; // first lane of cell 1
        let mut closed = Vec::new();
        for _ in 0..8 {
            let r = env.step(&RoutingVector::uniform(1)).unwrap();
            closed.push(r.observation[flag] == 1.0);
        }
        // state k is closed for k in 2..5
        assert_eq!(closed, vec![false, true, true, true, false, false, false, false]);
    }

    #[test]
    fn overlapping_closures_counted() {
        let mut s = Scenario::new(vec![geometry(5)], 0.0, 0.0, 10);
        s.accidents = AccidentProcess::Scheduled {
            events: vec![
                AccidentEvent { path: 0, cell: 0, lane: 1, start: 1, duration: 4 },
                AccidentEvent { path: 0, cell: 0, lane: 1, start: 2, duration: 1 },
            ],
        };
        let mut env = Environment::new(s).unwrap();
        let flag = 2 * 5 + 2 + 1;
        let closed: Vec<bool> = (0..6)
            .map(|_| env.step(&RoutingVector::uniform(1)).unwrap().observation[flag] == 1.0)
            .collect();
        assert_eq!(closed, vec![true, true, true, true, false, false]);
    }

    #[test]
    fn reset_is_deterministic() {
        let mut s = Scenario::new(vec![geometry(5), geometry(10)], 0.0, 0.0, 30);
        s.demand = DemandProcess::Uniform { human: [0.0, 1.0], auto: [0.0, 0.5] };
        s.accidents = AccidentProcess::Stochastic { rate: 0.3, min_duration: 1, max_duration: 5 };
        let mut env = Environment::new(s).unwrap();
        let run = |env: &mut Environment| -> Vec<StepResult> {
            env.reset(Some(7)).unwrap();
            (0..30).map(|_| env.step_raw(&[0.3, 0.7]).unwrap()).collect()
        };
        let a = run(&mut env);
        let b = run(&mut env);
        assert_eq!(a, b);
    }

    #[test]
    fn action_off_simplex_rejected() {
        let s = Scenario::new(vec![geometry(5), geometry(10)], 0.5, 0.5, 3);
        let mut env = Environment::new(s).unwrap();
        assert!(env.step_raw(&[0.5, 0.6]).is_err());
        assert!(env.step_raw(&[1.0]).is_err());
        assert!(env.step_raw(&[0.5, 0.5 + 1e-7]).is_ok());
    }

    #[test]
    fn equilibrium_init_sets_routing() {
        let mut s = Scenario::new(vec![geometry(5), geometry(10)], 1.5, 0.0, 3);
        s.initial = InitialCondition::Equilibrium {
            paths: vec![
                EquilibriumInit { human: 1.0, auto: 0.0, gamma: 1 },
                EquilibriumInit { human: 0.5, auto: 0.0, gamma: 0 },
            ],
        };
        let env = Environment::new(s).unwrap();
        assert!((env.human_routing().get(0) - 2.0 / 3.0).abs() < 1e-12);
        let expected = equilibrium_state(
            env.network().path(0),
            FlowTuple::new(1.0, 0.0),
            1,
        )
        .unwrap();
        assert_eq!(env.paths()[0], expected);
    }
}
