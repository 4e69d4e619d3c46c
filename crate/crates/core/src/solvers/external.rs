//! External prover subprocess.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::logic::{QuantifiedQuery, UnknownReason, Verdict};

use super::smtlib::emit_smtlib;
use super::SolverError;

const POLL: Duration = Duration::from_millis(5);

/// Run `command <script-file>` and map its first output line to a verdict.
/// Models are not parsed back, so Invalid verdicts carry no witness.
pub fn decide(q: &QuantifiedQuery, command: &str, timeout: Duration) -> Result<Verdict, SolverError> {
    let mut file = tempfile::Builder::new()
        .prefix("floc-")
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| SolverError::Io(e.to_string()))?;
    file.write_all(emit_smtlib(q).as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| SolverError::Io(e.to_string()))?;

    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SolverError::ProverLaunch {
            command: command.to_string(),
            reason: "empty command".into(),
        })?;
    let mut child = Command::new(program)
        .args(parts)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolverError::ProverLaunch {
            command: command.to_string(),
            reason: e.to_string(),
        })?;

    // Drain stdout on a thread so a chatty prover cannot block on a full pipe.
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    let status = loop {
        if let Some(st) = child.try_wait().map_err(|e| SolverError::Io(e.to_string()))? {
            break st;
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return Ok(Verdict::Unknown(UnknownReason::Timeout));
        }
        thread::sleep(POLL);
    };
    let output = reader.join().unwrap_or_default();
    let first = output.lines().next().unwrap_or("").trim();
    match first {
        "unsat" => Ok(Verdict::Valid),
        "sat" => Ok(Verdict::Invalid { witness: None }),
        "unknown" => Ok(Verdict::Unknown(UnknownReason::ProverUnknown)),
        "timeout" => Ok(Verdict::Unknown(UnknownReason::Timeout)),
        "" if !status.success() => Ok(Verdict::Unknown(UnknownReason::ProverCrash)),
        other => Err(SolverError::MalformedProverOutput(other.to_string())),
    }
}
