//! Driving an external evaluator over stdin/stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::JoinHandle;
use std::time::Duration;

use super::blackbox::{EvalError, Objective};

/// Formats one coordinate for the wire: plain decimal notation (never
/// scientific) with 17 significant digits, enough for any `f64` to survive a
/// round trip through a decimal parser on the other side.
fn format_coordinate(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Builds the single request line for a query point (newline included).
fn request_line(x: &[f64]) -> String {
    let mut line = String::new();
    for (i, &v) in x.iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        line.push_str(&format_coordinate(v));
    }
    line.push('\n');
    line
}

/// An external objective spoken to over a line protocol.
///
/// The child process is spawned once and stays resident: each evaluation
/// writes one line of space-separated coordinates to its stdin and expects
/// one line back on stdout containing the observed value. Replies are read on
/// a dedicated thread so a wedged child surfaces as [`EvalError::Timeout`]
/// rather than hanging the solver. A reply of `nan`, anything unparseable, or
/// a child that exits mid-run all surface as evaluation errors. On drop the
/// request pipe is closed first (so a cooperative evaluator exits on EOF) and
/// the child is then killed.
#[derive(Debug)]
pub struct SubprocessBlackbox {
    child: Child,
    stdin: Option<ChildStdin>,
    replies: Receiver<std::io::Result<String>>,
    timeout: Duration,
    name: String,
    start: Vec<f64>,
    reader: Option<JoinHandle<()>>,
}

impl SubprocessBlackbox {
    /// Default deadline for a single reply.
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    /// Spawns `program args...` and prepares it for evaluation requests.
    ///
    /// `start` fixes both the initial incumbent and the problem dimension.
    /// The child's stderr is discarded.
    pub fn spawn(
        program: &str,
        args: &[String],
        start: Vec<f64>,
        timeout: Duration,
    ) -> Result<Self, EvalError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin was requested piped");
        let stdout = child.stdout.take().expect("stdout was requested piped");
        let (tx, rx) = mpsc::channel();
        let reader = std::thread::spawn(move || {
            let mut lines = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match lines.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(SubprocessBlackbox {
            child,
            stdin: Some(stdin),
            replies: rx,
            timeout,
            name: program.to_string(),
            start,
            reader: Some(reader),
        })
    }

    fn child_exited(&mut self) -> EvalError {
        match self.child.try_wait() {
            Ok(Some(status)) => EvalError::ChildExited {
                code: status.code(),
            },
            _ => EvalError::ChildExited { code: None },
        }
    }
}

impl Objective for SubprocessBlackbox {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.start.len()
    }

    fn start_point(&self) -> Vec<f64> {
        self.start.clone()
    }

    fn eval_noisy(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.start.len() {
            return Err(EvalError::DimensionMismatch {
                expected: self.start.len(),
                got: x.len(),
            });
        }
        let line = request_line(x);
        let write_failed = match self.stdin.as_mut() {
            Some(stdin) => {
                stdin.write_all(line.as_bytes()).is_err() || stdin.flush().is_err()
            }
            None => true,
        };
        if write_failed {
            return Err(self.child_exited());
        }
        match self.replies.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => {
                let trimmed = reply.trim();
                match trimmed.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(EvalError::MalformedReply {
                        reply: trimmed.to_string(),
                    }),
                }
            }
            Ok(Err(e)) => Err(EvalError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(EvalError::Timeout {
                seconds: self.timeout.as_secs_f64(),
            }),
            Err(RecvTimeoutError::Disconnected) => Err(self.child_exited()),
        }
    }
}

impl Drop for SubprocessBlackbox {
    fn drop(&mut self) {
        // Close the request pipe first: a cooperative child sees EOF and
        // exits, releasing its side of the output pipe.
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
        // The reader thread is detached rather than joined. Killing the
        // child does not reach grandchildren (a shell may fork rather than
        // exec its command), and a straggler that inherited the output pipe
        // would otherwise stall this drop until it exits.
        drop(self.reader.take());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip_through_the_wire_format() {
        for &v in &[
            0.0,
            0.1,
            -2.0,
            1.0 / 3.0,
            -1.2,
            1e-12,
            98765.4321,
            f64::MIN_POSITIVE,
            1.7e308,
        ] {
            let s = format_coordinate(v);
            assert!(!s.contains('e') && !s.contains('E'), "{s} is scientific");
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s} did not round-trip");
        }
    }

    #[test]
    fn tenth_is_written_with_seventeen_significant_digits() {
        assert_eq!(format_coordinate(0.1), "0.10000000000000001");
        assert_eq!(format_coordinate(0.0), "0");
    }

    #[test]
    fn request_line_is_space_separated() {
        let line = request_line(&[0.0, 0.5]);
        assert_eq!(line, "0 0.50000000000000000\n");
    }
}
