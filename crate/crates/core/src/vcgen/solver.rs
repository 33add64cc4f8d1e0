//! External SMT solver sessions over standard input and output.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

pub const DEFAULT_COMMAND: &str = "z3 -in -smt2";
pub const SOLVER_ENV: &str = "LEV_SOLVER";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver unavailable: {command}: {reason}")]
    SolverUnavailable { command: String, reason: String },
    #[error("unexpected solver response: {response:?}")]
    SolverProtocolError { response: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Valid,
    Invalid { model: Option<String> },
    Unknown { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverVerdict {
    pub outcome: Outcome,
    pub time: Duration,
}

impl SolverVerdict {
    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::Valid
    }
}

/// A solver command line, split on whitespace, plus a per-query timeout.
#[derive(Clone, Debug)]
pub struct SolverClient {
    pub command: String,
    pub timeout: Duration,
}

impl Default for SolverClient {
    fn default() -> Self {
        SolverClient { command: DEFAULT_COMMAND.into(), timeout: DEFAULT_TIMEOUT }
    }
}

impl SolverClient {
    pub fn new(command: impl Into<String>, timeout: Duration) -> SolverClient {
        SolverClient { command: command.into(), timeout }
    }

    /// Command from `explicit`, else the environment, else the default.
    pub fn resolve_command(explicit: Option<&str>) -> String {
        explicit
            .map(str::to_string)
            .or_else(|| std::env::var(SOLVER_ENV).ok().filter(|s| !s.trim().is_empty()))
            .unwrap_or_else(|| DEFAULT_COMMAND.to_string())
    }

    /// Runs `script`, which ends in `(check-sat)`, and asks for a model.
    pub fn check(&self, script: &str) -> Result<SolverVerdict, SolverError> {
        let start = Instant::now();
        let mut parts = self.command.split_whitespace();
        let unavailable = |reason: String| SolverError::SolverUnavailable { command: self.command.clone(), reason };
        let program = parts.next().ok_or_else(|| unavailable("empty command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| unavailable(e.to_string()))?;
        let mut input = String::with_capacity(script.len() + 64);
        input.push_str(script);
        input.push_str("(get-model)\n(exit)\n");
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            let _ = tx.send(s);
        });
        let response = match rx.recv_timeout(self.timeout) {
            Ok(s) => s,
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                return Ok(SolverVerdict {
                    outcome: Outcome::Unknown { reason: "timeout".into() },
                    time: start.elapsed(),
                });
            }
        };
        let _ = child.wait();
        let _ = writer.join();
        let time = start.elapsed();
        let outcome = parse_response(&response)?;
        Ok(SolverVerdict { outcome, time })
    }
}

/// Interprets the first `sat`/`unsat`/`unknown` line; for `sat` the rest
/// of the output is kept as the model.
pub fn parse_response(response: &str) -> Result<Outcome, SolverError> {
    let mut lines = response.lines();
    for line in lines.by_ref() {
        match line.trim() {
            "unsat" => return Ok(Outcome::Valid),
            "sat" => {
                let rest: String = lines.collect::<Vec<_>>().join("\n");
                let model = Some(rest.trim().to_string()).filter(|m| !m.is_empty());
                return Ok(Outcome::Invalid { model });
            }
            "unknown" => return Ok(Outcome::Unknown { reason: "solver returned unknown".into() }),
            "" | "success" => continue,
            _ => break,
        }
    }
    Err(SolverError::SolverProtocolError { response: response.trim().chars().take(200).collect() })
}
