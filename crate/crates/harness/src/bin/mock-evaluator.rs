//! Test double for the external evaluator protocol.
//!
//! Usage: `mock-evaluator [MODE] [GOOD]`. Answers `GOOD` requests (default
//! unlimited for `sphere`, 0 otherwise) with `f = sum x_j^2, c = [-1]`, then
//! misbehaves according to MODE: `malformed`, `wrong-arity`, `nonnumeric`,
//! `wrong-id`, `sleep` or `exit`.

use std::io::{BufRead, Write};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("sphere").to_string();
    let good: usize = match args.get(1) {
        Some(n) => n.parse().expect("GOOD must be a count"),
        None if mode == "sphere" => usize::MAX,
        None => 0,
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    for (k, line) in stdin.lock().lines().enumerate() {
        let Ok(line) = line else { break };
        let req: serde_json::Value = serde_json::from_str(&line).expect("request is JSON");
        let id = req["id"].as_u64().expect("request id");
        let x: Vec<f64> = serde_json::from_value(req["x"].clone()).expect("request x");
        let f: f64 = x.iter().map(|v| v * v).sum();
        let reply = if k < good {
            serde_json::json!({ "id": id, "f": f, "c": [-1.0] }).to_string()
        } else {
            match mode.as_str() {
                "malformed" => "this is not json".to_string(),
                "wrong-arity" => serde_json::json!({ "id": id, "f": f, "c": [-1.0, -1.0] }).to_string(),
                "nonnumeric" => format!(r#"{{"id": {id}, "f": "abc", "c": [-1.0]}}"#),
                "wrong-id" => serde_json::json!({ "id": id + 1, "f": f, "c": [-1.0] }).to_string(),
                "sleep" => {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                    return;
                }
                "exit" => std::process::exit(3),
                _ => serde_json::json!({ "id": id, "f": f, "c": [-1.0] }).to_string(),
            }
        };
        writeln!(out, "{reply}").and_then(|_| out.flush()).expect("stdout");
    }
}
