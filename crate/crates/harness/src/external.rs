//! Line-delimited JSON protocol to an evaluator child process.
//!
//! For every design the harness writes one line `{"id": k, "x": [...]}`
//! (raw coordinates) to the child's stdin and waits for one line
//! `{"id": k, "f": <number>, "c": [<C numbers>]}` on its stdout. Only one
//! request is ever in flight.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;
use trace_core::problem::{EvalError, Evaluator, Outcome};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("failed to start evaluator `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed evaluator response ({reason}); offending line: {line}")]
    Malformed { line: String, reason: String },
    #[error("evaluator answered request {expected} with id {got}")]
    IdMismatch { expected: u64, got: u64 },
    #[error("evaluator returned {got} constraint values, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("evaluator did not answer request {id} within {secs:.1} s; process killed")]
    Timeout { id: u64, secs: f64 },
    #[error("evaluator exited before answering request {id} ({status})")]
    Exited { id: u64, status: String },
    #[error("i/o error talking to evaluator: {0}")]
    Io(#[from] std::io::Error),
}

pub struct ExternalEvaluator {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    num_constraints: usize,
    timeout: Duration,
}

impl ExternalEvaluator {
    pub fn spawn(command: &[String], num_constraints: usize, timeout: Duration) -> Result<Self, ProtocolError> {
        let (program, args) = command.split_first().ok_or_else(|| ProtocolError::Spawn {
            command: String::new(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ProtocolError::Spawn { command: command.join(" "), source })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx, next_id: 0, num_constraints, timeout })
    }

    fn exit_status(&mut self) -> String {
        // give a process that just closed stdout a moment to be reaped
        for _ in 0..50 {
            if let Ok(Some(status)) = self.child.try_wait() {
                return describe(status);
            }
            thread::sleep(Duration::from_millis(10));
        }
        "still running, stdout closed".into()
    }

    pub fn request(&mut self, x: &[f64]) -> Result<Outcome, ProtocolError> {
        self.next_id += 1;
        let id = self.next_id;
        let line = json!({ "id": id, "x": x }).to_string();
        let sent = match self.stdin.as_mut() {
            Some(stdin) => writeln!(stdin, "{line}").and_then(|_| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        if sent.is_err() {
            self.stdin = None;
            return Err(ProtocolError::Exited { id, status: self.exit_status() });
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => parse_response(&reply, id, self.num_constraints),
            Ok(Err(e)) => Err(e.into()),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                let _ = self.child.wait();
                self.stdin = None;
                Err(ProtocolError::Timeout { id, secs: self.timeout.as_secs_f64() })
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.stdin = None;
                Err(ProtocolError::Exited { id, status: self.exit_status() })
            }
        }
    }
}

fn describe(status: ExitStatus) -> String {
    match status.code() {
        Some(code) => format!("exit code {code}"),
        None => status.to_string(),
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&mut self, x: &[f64]) -> Result<Outcome, EvalError> {
        Ok(self.request(x)?)
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        // closing stdin is the polite shutdown signal
        self.stdin = None;
        if matches!(self.child.try_wait(), Ok(None)) {
            thread::sleep(Duration::from_millis(20));
            if matches!(self.child.try_wait(), Ok(None)) {
                let _ = self.child.kill();
            }
        }
        let _ = self.child.wait();
    }
}

/// Parses one response line for request `id`.
pub fn parse_response(line: &str, id: u64, num_constraints: usize) -> Result<Outcome, ProtocolError> {
    let malformed = |reason: &str| ProtocolError::Malformed { line: line.to_string(), reason: reason.to_string() };
    let v: Value = serde_json::from_str(line.trim()).map_err(|e| malformed(&format!("not JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| malformed("not an object"))?;
    let got = obj.get("id").and_then(Value::as_u64).ok_or_else(|| malformed("missing integer id"))?;
    if got != id {
        return Err(ProtocolError::IdMismatch { expected: id, got });
    }
    let f = obj
        .get("f")
        .ok_or_else(|| malformed("missing f"))?
        .as_f64()
        .ok_or_else(|| malformed("f is not a number"))?;
    let c = obj
        .get("c")
        .ok_or_else(|| malformed("missing c"))?
        .as_array()
        .ok_or_else(|| malformed("c is not an array"))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| malformed("c holds a non-number")))
        .collect::<Result<Vec<_>, _>>()?;
    if c.len() != num_constraints {
        return Err(ProtocolError::Arity { expected: num_constraints, got: c.len() });
    }
    Ok(Outcome { f, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_good_line() {
        let o = parse_response(r#"{"id": 3, "f": 1.5, "c": [-1, 0.25]}"#, 3, 2).unwrap();
        assert_eq!(o, Outcome { f: 1.5, c: vec![-1.0, 0.25] });
    }

    #[test]
    fn distinguishes_failures() {
        assert!(matches!(parse_response("oops", 1, 1), Err(ProtocolError::Malformed { .. })));
        assert!(matches!(
            parse_response(r#"{"id": 2, "f": 0, "c": [0]}"#, 1, 1),
            Err(ProtocolError::IdMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(
            parse_response(r#"{"id": 1, "f": 0, "c": [0, 1]}"#, 1, 1),
            Err(ProtocolError::Arity { expected: 1, got: 2 })
        ));
        let err = parse_response(r#"{"id": 1, "f": "abc", "c": [0]}"#, 1, 1).unwrap_err();
        assert!(err.to_string().contains(r#""f": "abc""#), "{err}");
    }
}
