//! Command-line front end: `simulate`, `equilibrium` and `serve`.
//!
//! Data goes to stdout (or the requested file), diagnostics to stderr. The
//! log level is read from `MIXROUTE_LOG`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::choice::RoutingVector;
use crate::env::{
    policy_static_equilibrium, serve_bridge, serve_tcp, BridgeError, Environment,
    GreedyMinLatency, Policy, Scenario, SelfishAv, StaticRouting,
};
use crate::equilibrium::{
    best_controlled_equilibrium, best_selfish_equilibrium, brute_force_equilibrium,
    EquilibriumSolution, Regime,
};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mixroute", version, about = "Mixed-autonomy routing on parallel roads")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one episode under a baseline policy and write its time series as CSV.
    Simulate(SimulateArgs),
    /// Compute best equilibria for the scenario's (mean) demand.
    Equilibrium(EquilibriumArgs),
    /// Expose the environment over the line-delimited JSON bridge.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyName {
    Uniform,
    Greedy,
    StaticEquilibrium,
    Selfish,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "uniform")]
    policy: PolicyName,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Append per-cell densities `nh_<path>_<cell>`, `na_<path>_<cell>`.
    #[arg(long)]
    densities: bool,
    /// Hedge rate of the selfish autonomous policy.
    #[arg(long, default_value_t = 0.1)]
    selfish_eta: f64,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Selfish,
    Controlled,
    Both,
}

#[derive(Debug, Args)]
struct EquilibriumArgs {
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    mode: Mode,
    /// Cross-check against the grid-search oracle (at most three roads).
    #[arg(long)]
    oracle: bool,
    /// Oracle grid step on each autonomy level.
    #[arg(long, default_value_t = 1e-3)]
    resolution: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Transport {
    /// Serve one session on stdin/stdout.
    #[arg(long)]
    stdio: bool,
    /// Listen on this TCP port (0 picks a free one).
    #[arg(long)]
    port: Option<u16>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    scenario: PathBuf,
    #[command(flatten)]
    transport: Transport,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BridgeError> for CliError {
    fn from(e: BridgeError) -> Self {
        match e {
            BridgeError::Env(e) => e.into(),
            BridgeError::Io(e) => Self {
                code: EXIT_PROTOCOL,
                message: format!("bridge failure: {e}"),
            },
        }
    }
}

/// Reads and validates a scenario file. Parse errors carry the JSON path of
/// the offending field.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::input(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner()))
    })?;
    scenario
        .validate()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(scenario)
}

fn build_policy(
    name: PolicyName,
    scenario: &Scenario,
    selfish_eta: f64,
) -> Result<Box<dyn Policy>, CliError> {
    let paths = scenario.network.paths.len();
    Ok(match name {
        PolicyName::Uniform => Box::new(StaticRouting(RoutingVector::uniform(paths))),
        PolicyName::Greedy => Box::new(GreedyMinLatency),
        PolicyName::StaticEquilibrium => {
            let net = scenario.build_network()?;
            let (h, a) = scenario.demand.mean();
            let solution = best_controlled_equilibrium(&net, h, a)?;
            Box::new(StaticRouting(policy_static_equilibrium(&solution)))
        }
        PolicyName::Selfish => {
            if !(selfish_eta.is_finite() && selfish_eta >= 0.0) {
                return Err(CliError::input(format!("--selfish-eta {selfish_eta} must be nonnegative")));
            }
            Box::new(SelfishAv::new(paths, selfish_eta))
        }
    })
}

fn csv_header(env: &Environment, densities: bool) -> Vec<String> {
    let paths = env.action_len();
    let mut header: Vec<String> = ["k", "J", "proxy", "Qh", "Qa"].map(String::from).to_vec();
    for prefix in ["latency", "mu_h", "mu_a"] {
        header.extend((0..paths).map(|p| format!("{prefix}_{p}")));
    }
    if densities {
        for class in ["nh", "na"] {
            for (p, path) in env.paths().iter().enumerate() {
                header.extend((0..path.len()).map(|i| format!("{class}_{p}_{i}")));
            }
        }
    }
    header
}

/// Runs one episode and writes one CSV row per step. `mu_h` and `mu_a` are
/// the routings applied during the step.
pub fn simulate<W: Write>(
    scenario: &Scenario,
    policy: &mut dyn Policy,
    densities: bool,
    out: W,
) -> Result<(), CliError> {
    let mut env = Environment::new(scenario.clone())?;
    let mut writer = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| CliError::input(format!("cannot write CSV: {e}"));
    writer.write_record(csv_header(&env, densities)).map_err(io_err)?;
    policy.reset();
    let mut observation = env.observation();
    let mut latencies = env.latencies().to_vec();
    while !env.is_done() {
        let action = policy.action(&observation, &latencies)?;
        let mu_h = env.human_routing().clone();
        let r = env.step(&action)?;
        let q = env.queue().totals();
        let mut row = vec![r.cost, r.proxy_cost, q.human, q.auto];
        row.extend(&r.latencies);
        row.extend(mu_h.as_slice());
        row.extend(action.as_slice());
        if densities {
            let cells = || env.paths().iter().flat_map(|p| p.cells());
            row.extend(cells().map(|c| c.human));
            row.extend(cells().map(|c| c.auto));
        }
        let fields = std::iter::once(env.time().to_string()).chain(row.iter().map(f64::to_string));
        writer.write_record(fields).map_err(io_err)?;
        observation = r.observation;
        latencies = r.latencies;
    }
    writer.flush().map_err(|e| CliError::input(format!("cannot write CSV: {e}")))?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let mut policy = build_policy(args.policy, &scenario, args.selfish_eta)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
            simulate(&scenario, policy.as_mut(), args.densities, io::BufWriter::new(file))
        }
        None => simulate(&scenario, policy.as_mut(), args.densities, io::stdout().lock()),
    }
}

/// Solves the requested regimes and, optionally, the oracle; returns the
/// JSON report.
pub fn equilibrium_report(
    scenario: &Scenario,
    regimes: &[Regime],
    oracle_resolution: Option<f64>,
) -> Result<Value, CliError> {
    let net = scenario.build_network()?;
    let (h, a) = scenario.demand.mean();
    let mut report = Map::new();
    let mut oracle = Map::new();
    let mut delta = Map::new();
    for &regime in regimes {
        let key = match regime {
            Regime::Selfish => "selfish",
            Regime::Controlled => "controlled",
        };
        let solution: EquilibriumSolution = match regime {
            Regime::Selfish => best_selfish_equilibrium(&net, h, a)?,
            Regime::Controlled => best_controlled_equilibrium(&net, h, a)?,
        };
        if let Some(resolution) = oracle_resolution {
            let reference = brute_force_equilibrium(&net, h, a, resolution, regime)?;
            delta.insert(
                key.into(),
                json!((solution.total_latency - reference.total_latency).abs()),
            );
            oracle.insert(key.into(), json!(reference));
        }
        report.insert(key.into(), json!(solution));
    }
    report.insert("demand".into(), json!({"human": h, "auto": a}));
    if oracle_resolution.is_some() {
        report.insert("oracle".into(), Value::Object(oracle));
        report.insert("delta".into(), Value::Object(delta));
    }
    Ok(Value::Object(report))
}

fn cmd_equilibrium(args: EquilibriumArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let regimes: &[Regime] = match args.mode {
        Mode::Selfish => &[Regime::Selfish],
        Mode::Controlled => &[Regime::Controlled],
        Mode::Both => &[Regime::Selfish, Regime::Controlled],
    };
    let report = equilibrium_report(&scenario, regimes, args.oracle.then_some(args.resolution))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    if args.transport.stdio {
        return Ok(serve_bridge(&scenario)?);
    }
    let port = args.transport.port.expect("clap enforces one transport");
    let listener = TcpListener::bind((args.host.as_str(), port)).map_err(|e| CliError {
        code: EXIT_PROTOCOL,
        message: format!("cannot listen on {}:{port}: {e}", args.host),
    })?;
    let addr = listener.local_addr().map_err(BridgeError::from)?;
    eprintln!("listening on {addr}");
    Ok(serve_tcp(&scenario, listener)?)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("MIXROUTE_LOG", "warn"))
        .try_init();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Equilibrium(a) => cmd_equilibrium(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if e.code == EXIT_INFEASIBLE {
                eprintln!("infeasible: {}", e.message.trim_start_matches("infeasible: "));
            } else {
                eprintln!("error: {}", e.message);
            }
            e.code
        }
    }
}
