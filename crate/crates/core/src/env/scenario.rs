use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::choice::{LearningSchedule, RoutingVector};
use crate::ctm::RoadGeometry;
use crate::error::{invalid, Result};
use crate::network::NetworkSpec;

/// Everything needed to run an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: NetworkFile,
    pub demand: DemandProcess,
    #[serde(default)]
    pub hedge: LearningSchedule,
    #[serde(default)]
    pub accidents: AccidentProcess,
    /// Steps per episode, `K`.
    pub episode_len: u64,
    #[serde(default)]
    pub initial: InitialCondition,
    /// Starting human routing; overrides the one implied by `initial`.
    #[serde(default)]
    pub initial_human_routing: Option<RoutingVector>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reward: RewardMode,
    /// Latency charged to a blocked cell, as a multiple of the road's
    /// free-flow latency. Defaults to 10.
    #[serde(default)]
    pub blocked_latency_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub paths: Vec<RoadGeometry>,
}

/// Vehicles entering the queue each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DemandProcess {
    Constant { human: f64, auto: f64 },
    /// Independent uniform draws on `[lo, hi]` per class and step.
    Uniform { human: [f64; 2], auto: [f64; 2] },
}

impl DemandProcess {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            DemandProcess::Constant { human, auto } => {
                if !(ok(human) && ok(auto)) {
                    return Err(invalid(format!("demand ({human}, {auto}) must be nonnegative")));
                }
            }
            DemandProcess::Uniform { human, auto } => {
                for (name, [lo, hi]) in [("human", human), ("auto", auto)] {
                    if !(ok(lo) && ok(hi) && lo <= hi) {
                        return Err(invalid(format!("{name} demand range [{lo}, {hi}] is invalid")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            DemandProcess::Constant { human, auto } => (human, auto),
            DemandProcess::Uniform { human, auto } => {
                let draw = |rng: &mut R, [lo, hi]: [f64; 2]| {
                    if hi > lo {
                        rng.random_range(lo..=hi)
                    } else {
                        lo
                    }
                };
                let h = draw(rng, human);
                let a = draw(rng, auto);
                (h, a)
            }
        }
    }

    /// Expected demand per step.
    pub fn mean(&self) -> (f64, f64) {
        match *self {
            DemandProcess::Constant { human, auto } => (human, auto),
            DemandProcess::Uniform { human, auto } => {
                (0.5 * (human[0] + human[1]), 0.5 * (auto[0] + auto[1]))
            }
        }
    }
}

/// A lane closure on cell `cell` of path `path`, active for steps
/// `start..start + duration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccidentEvent {
    pub path: usize,
    pub cell: usize,
    pub lane: usize,
    pub start: u64,
    pub duration: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AccidentProcess {
    #[default]
    None,
    Scheduled { events: Vec<AccidentEvent> },
    /// Each step, with probability `rate`, one uniformly chosen lane closes
    /// for a uniform integer duration in `[min_duration, max_duration]`.
    Stochastic {
        rate: f64,
        min_duration: u64,
        max_duration: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumInit {
    pub human: f64,
    pub auto: f64,
    /// Congested pre-bottleneck cells.
    pub gamma: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPath {
    pub human: Vec<f64>,
    pub auto: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Empty,
    /// Steady state of each road for the given flow and congested length.
    /// Humans start routed in proportion to their flows.
    Equilibrium { paths: Vec<EquilibriumInit> },
    Explicit { paths: Vec<ExplicitPath> },
}

/// Which quantity [`StepResult::reward`](super::StepResult::reward) negates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    /// `J(k) - J(k-1)`.
    #[default]
    Proxy,
    /// `J(k)`.
    Raw,
}

impl Scenario {
    /// Constant-demand scenario with default schedules and an empty start.
    pub fn new(paths: Vec<RoadGeometry>, human: f64, auto: f64, episode_len: u64) -> Self {
        Self {
            network: NetworkFile { paths },
            demand: DemandProcess::Constant { human, auto },
            hedge: LearningSchedule::default(),
            accidents: AccidentProcess::None,
            episode_len,
            initial: InitialCondition::Empty,
            initial_human_routing: None,
            seed: 0,
            reward: RewardMode::Proxy,
            blocked_latency_factor: None,
        }
    }

    pub fn build_network(&self) -> Result<NetworkSpec> {
        NetworkSpec::from_geometries(&self.network.paths)
    }

    /// Checks every invariant that the types alone do not enforce.
    pub fn validate(&self) -> Result<NetworkSpec> {
        let net = self.build_network()?;
        let paths = net.len();
        if self.episode_len == 0 {
            return Err(invalid("episode_len must be at least 1"));
        }
        self.demand.validate()?;
        self.hedge.validate()?;
        if let Some(f) = self.blocked_latency_factor {
            if !(f.is_finite() && f > 0.0) {
                return Err(invalid(format!("blocked_latency_factor {f} must be positive")));
            }
        }
        if let Some(mu) = &self.initial_human_routing {
            if mu.len() != paths {
                return Err(invalid(format!(
                    "initial_human_routing has {} entries for {paths} paths",
                    mu.len()
                )));
            }
        }
        match &self.accidents {
            AccidentProcess::None => {}
            AccidentProcess::Scheduled { events } => {
                for (e, ev) in events.iter().enumerate() {
                    check_lane(&net, ev.path, ev.cell, ev.lane)
                        .map_err(|err| invalid(format!("accident {e}: {err}")))?;
                    if ev.duration == 0 {
                        return Err(invalid(format!("accident {e} has zero duration")));
                    }
                }
            }
            AccidentProcess::Stochastic {
                rate,
                min_duration,
                max_duration,
            } => {
                if !(0.0..=1.0).contains(rate) {
                    return Err(invalid(format!("accident rate {rate} must lie in [0, 1]")));
                }
                if *min_duration == 0 || min_duration > max_duration {
                    return Err(invalid(format!(
                        "accident durations [{min_duration}, {max_duration}] are invalid"
                    )));
                }
            }
        }
        match &self.initial {
            InitialCondition::Empty => {}
            InitialCondition::Equilibrium { paths: init } => {
                if init.len() != paths {
                    return Err(invalid(format!(
                        "equilibrium initial condition lists {} paths, network has {paths}",
                        init.len()
                    )));
                }
            }
            InitialCondition::Explicit { paths: init } => {
                if init.len() != paths {
                    return Err(invalid(format!(
                        "explicit initial condition lists {} paths, network has {paths}",
                        init.len()
                    )));
                }
            }
        }
        Ok(net)
    }
}

fn check_lane(net: &NetworkSpec, path: usize, cell: usize, lane: usize) -> Result<()> {
    if path >= net.len() {
        return Err(invalid(format!("path {path} out of range (len {})", net.len())));
    }
    let spec = net.path(path);
    if cell >= spec.len() {
        return Err(invalid(format!("cell {cell} out of range (len {})", spec.len())));
    }
    let lanes = spec.cell(cell).lanes as usize;
    if lane >= lanes {
        return Err(invalid(format!("lane {lane} out of range (len {lanes})")));
    }
    Ok(())
}
