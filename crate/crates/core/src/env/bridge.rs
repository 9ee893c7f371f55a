//! Line-delimited JSON bridge for external trainers.
//!
//! Each request and reply is one JSON object on one line:
//!
//! ```text
//! {"cmd":"spec"}                   -> {"obs_len":N,"action_len":P,"episode_len":K}
//! {"cmd":"reset","seed":S}         -> {"obs":[...]}
//! {"cmd":"step","action":[...]}    -> {"obs":[...],"cost":c,"proxy_cost":d,"done":b,"latencies":[...]}
//! {"cmd":"close"}                  -> {"ok":true}
//! ```
//!
//! Failures reply `{"error":"<code>","detail":"..."}` and keep the connection
//! open. Floats are written in shortest round-trip form, so a client parsing
//! them recovers the exact `f64`.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::thread;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{Environment, Scenario};
use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Env(#[from] Error),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase", deny_unknown_fields)]
enum Request {
    Spec,
    Reset {
        #[serde(default)]
        seed: Option<u64>,
    },
    Step {
        action: Vec<f64>,
    },
    Close,
}

const COMMANDS: [&str; 4] = ["spec", "reset", "step", "close"];

fn error_reply(code: &str, detail: impl ToString) -> Value {
    json!({"error": code, "detail": detail.to_string()})
}

fn parse(line: &str) -> Result<Request, Value> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| error_reply("malformed_json", e))?;
    let cmd = value
        .get("cmd")
        .and_then(Value::as_str)
        .ok_or_else(|| error_reply("missing_command", "expected an object with a string \"cmd\""))?;
    if !COMMANDS.contains(&cmd) {
        return Err(error_reply("unknown_command", format!("unknown command {cmd:?}")));
    }
    serde_json::from_value(value).map_err(|e| error_reply("invalid_request", e))
}

/// Answers one request. Returns the reply and whether the session ends.
fn handle(env: &mut Environment, line: &str) -> (Value, bool) {
    let request = match parse(line) {
        Ok(r) => r,
        Err(reply) => return (reply, false),
    };
    match request {
        Request::Spec => (
            json!({
                "obs_len": env.observation_len(),
                "action_len": env.action_len(),
                "episode_len": env.episode_len(),
            }),
            false,
        ),
        Request::Reset { seed } => match env.reset(seed) {
            Ok(obs) => (json!({ "obs": obs }), false),
            Err(e) => (error_reply("reset_failed", e), false),
        },
        Request::Step { action } => match env.step_raw(&action) {
            Ok(r) => (
                json!({
                    "obs": r.observation,
                    "cost": r.cost,
                    "proxy_cost": r.proxy_cost,
                    "done": r.done,
                    "latencies": r.latencies,
                }),
                false,
            ),
            Err(e @ Error::EpisodeDone) => (error_reply("episode_done", e), false),
            Err(e @ (Error::NotOnSimplex(_) | Error::InvalidParams(_))) => {
                (error_reply("invalid_action", e), false)
            }
            Err(e) => (error_reply("simulation_error", e), false),
        },
        Request::Close => (json!({"ok": true}), true),
    }
}

/// Serves one session with a fresh environment until `close` or end of input.
pub fn serve_connection<R: BufRead, W: Write>(
    scenario: &Scenario,
    reader: R,
    mut writer: W,
) -> Result<(), BridgeError> {
    let mut env = Environment::new(scenario.clone())?;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (reply, close) = handle(&mut env, &line);
        serde_json::to_writer(&mut writer, &reply).map_err(io::Error::from)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if close {
            break;
        }
    }
    Ok(())
}

/// Serves a single session over standard input and output.
pub fn serve_bridge(scenario: &Scenario) -> Result<(), BridgeError> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_connection(scenario, stdin.lock(), BufWriter::new(stdout.lock()))
}

/// Accepts connections forever, one thread and one environment each.
pub fn serve_tcp(scenario: &Scenario, listener: TcpListener) -> Result<(), BridgeError> {
    // Fail early on an invalid scenario rather than per connection.
    Environment::new(scenario.clone())?;
    for stream in listener.incoming() {
        let stream = stream?;
        // One small request per reply; batching only adds latency.
        stream.set_nodelay(true)?;
        let scenario = scenario.clone();
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            log::info!("bridge connection from {peer:?}");
            let result = stream
                .try_clone()
                .map_err(BridgeError::from)
                .and_then(|w| serve_connection(&scenario, BufReader::new(stream), w));
            if let Err(e) = result {
                log::warn!("bridge connection {peer:?} ended with error: {e}");
            }
        });
    }
    Ok(())
}
