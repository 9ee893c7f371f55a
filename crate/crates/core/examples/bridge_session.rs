//! Driving the environment through the JSON bridge over TCP, as an external
//! trainer would.
//!
//! Run with `cargo run --example bridge_session`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use mixroute::cli::load_scenario;
use mixroute::env::{serve_tcp, PpoDefaults};
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/two_path_control.json");
    let scenario = load_scenario(path.as_ref()).map_err(|e| e.message)?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    thread::spawn(move || serve_tcp(&scenario, listener));

    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    let mut call = |request: Value| -> Result<Value, Box<dyn std::error::Error>> {
        writeln!(writer, "{request}")?;
        let mut line = String::new();
        reader.read_line(&mut line)?;
        Ok(serde_json::from_str(&line)?)
    };

    println!("spec  -> {}", call(json!({"cmd": "spec"}))?);
    let obs = call(json!({"cmd": "reset", "seed": 5}))?;
    println!("reset -> observation of length {}", obs["obs"].as_array().map_or(0, Vec::len));
    let mut total = 0.0;
    for k in 1..=200 {
        let reply = call(json!({"cmd": "step", "action": [0.8, 0.2]}))?;
        total += reply["cost"].as_f64().unwrap_or(f64::NAN);
        if k % 50 == 0 {
            println!("step {k:>3} -> cost {} latencies {}", reply["cost"], reply["latencies"]);
        }
    }
    println!("mean cost over 200 steps: {:.4}", total / 200.0);
    println!("bad action -> {}", call(json!({"cmd": "step", "action": [0.9, 0.9]}))?);
    println!("close -> {}", call(json!({"cmd": "close"}))?);
    println!("\nadvisory trainer settings: {}", serde_json::to_string(&PpoDefaults::default())?);
    Ok(())
}
