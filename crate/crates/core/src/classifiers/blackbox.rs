//! Subprocess adapter for external classifiers.
//!
//! The child reads one JSON array of points per line on stdin and answers
//! each with one JSON array of labels on stdout. Answers are memoized per
//! point so repeated queries agree within a run.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::Label;
use crate::error::{Error, Result};
use crate::space::Point;

pub const DEFAULT_TIMEOUT_MS: u64 = 5000;
pub const DEFAULT_BATCH: usize = 256;

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct State {
    process: Option<Process>,
    memo: HashMap<Point, usize>,
}

/// A classifier implemented by an external process.
pub struct BlackBox {
    cmd: Vec<String>,
    timeout: Duration,
    batch: usize,
    state: Mutex<State>,
}

fn external(message: impl Into<String>, payload: impl Into<String>) -> Error {
    Error::External {
        message: message.into(),
        payload: payload.into(),
    }
}

impl BlackBox {
    /// The process is started lazily on the first query.
    pub fn new(cmd: Vec<String>, timeout_ms: u64, batch: usize) -> Result<Self> {
        if cmd.is_empty() {
            return Err(Error::parse("cmd", "command must not be empty"));
        }
        if batch == 0 || timeout_ms == 0 {
            return Err(Error::parse("batch", "batch size and timeout must be positive"));
        }
        Ok(Self {
            cmd,
            timeout: Duration::from_millis(timeout_ms),
            batch,
            state: Mutex::new(State {
                process: None,
                memo: HashMap::new(),
            }),
        })
    }

    pub fn command(&self) -> &[String] {
        &self.cmd
    }

    fn spawn(&self) -> Result<Process> {
        let mut child = Command::new(&self.cmd[0])
            .args(&self.cmd[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| external(format!("cannot start `{}`", self.cmd[0]), e.to_string()))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Process {
            child,
            stdin,
            lines: rx,
        })
    }

    /// Label indices for `points`, querying the process only for unseen points.
    pub(crate) fn query(&self, labels: &[Label], points: &[Point]) -> Result<Vec<usize>> {
        let mut state = self.state.lock().unwrap_or_else(|p| p.into_inner());
        let mut pending: Vec<&Point> = Vec::new();
        {
            let mut seen = std::collections::HashSet::new();
            for p in points {
                if !state.memo.contains_key(p) && seen.insert(p) {
                    pending.push(p);
                }
            }
        }
        for chunk in pending.chunks(self.batch) {
            if state.process.is_none() {
                state.process = Some(self.spawn()?);
            }
            let answer = self.round_trip(state.process.as_mut().expect("spawned above"), labels, chunk);
            match answer {
                Ok(idx) => {
                    for (p, i) in chunk.iter().zip(idx) {
                        state.memo.insert((*p).clone(), i);
                    }
                }
                Err(e) => {
                    state.process = None;
                    return Err(e);
                }
            }
        }
        Ok(points.iter().map(|p| state.memo[p]).collect())
    }

    fn round_trip(&self, proc: &mut Process, labels: &[Label], chunk: &[&Point]) -> Result<Vec<usize>> {
        let request = serde_json::to_string(chunk).map_err(|e| external("cannot encode request", e.to_string()))?;
        writeln!(proc.stdin, "{request}")
            .and_then(|_| proc.stdin.flush())
            .map_err(|e| external("cannot write to the classifier process", e.to_string()))?;
        let line = match proc.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(external("cannot read from the classifier process", e.to_string())),
            Err(RecvTimeoutError::Timeout) => {
                return Err(external(
                    format!("no response within {} ms", self.timeout.as_millis()),
                    "",
                ))
            }
            Err(RecvTimeoutError::Disconnected) => return Err(external("classifier process closed its output", "")),
        };
        let parsed: Vec<Label> = serde_json::from_str(line.trim())
            .map_err(|e| external(format!("response is not a JSON array of labels: {e}"), line.clone()))?;
        if parsed.len() != chunk.len() {
            return Err(external(
                format!("expected {} labels, got {}", chunk.len(), parsed.len()),
                line,
            ));
        }
        parsed
            .iter()
            .map(|l| {
                labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| external(format!("label `{l}` is not in the label set"), line.clone()))
            })
            .collect()
    }
}
