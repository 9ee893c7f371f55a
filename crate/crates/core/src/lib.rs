//! Mixed-autonomy routing on parallel roads.
//!
//! Traffic with human drivers and autonomous vehicles flows over parallel
//! single-bottleneck roads modelled by a two-class cell transmission model.
//! Humans adapt their routes with Hedge dynamics, autonomous vehicles follow a
//! routing controller, and the [`equilibrium`] module characterizes the steady
//! states both can settle into. The [`env`] module wraps the dynamics as a
//! control environment, reachable in process or through a line-delimited JSON
//! bridge.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choice;
pub mod cli;
pub mod ctm;
pub mod env;
pub mod equilibrium;
pub mod error;
pub mod lp;
pub mod network;
pub mod queue;

pub use choice::{hedge_update, learning_rate, LearningSchedule, RoutingVector};
pub use ctm::{
    apply_lane_closure, cell_outflow, fundamental_diagram, path_latency_estimate,
    split_flow_by_type, step_path, CellParams, CellState, FlowTuple, FundamentalDiagram, PathSpec,
    PathState, RoadGeometry,
};
pub use env::{Environment, Policy, Scenario, StepResult};
pub use equilibrium::{
    best_controlled_equilibrium, best_selfish_equilibrium, brute_force_equilibrium,
    EquilibriumSolution, Regime,
};
pub use error::{Error, Result};
pub use network::NetworkSpec;
pub use queue::{Packet, VehicleQueue};
