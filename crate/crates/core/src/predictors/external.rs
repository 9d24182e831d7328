//! Prediction function backed by an external program.
//!
//! Each `predict` call spawns the command once per batch, writes a CSV
//! (header of variable names, `.` decimals, LF line endings) to its standard
//! input and reads exactly one decimal prediction per line from its standard
//! output.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{check_width, ModelFamily, PredictionFunction};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPredictorConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout_secs: f64,
    pub max_batch_rows: usize,
}

impl ExternalPredictorConfig {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
            timeout_secs: 60.0,
            max_batch_rows: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.timeout_secs > 0.0) {
            return Err(Error::InvalidArgument("timeout must be positive".into()));
        }
        if self.max_batch_rows == 0 {
            return Err(Error::InvalidArgument("max_batch_rows must be positive".into()));
        }
        if self.program.is_empty() {
            return Err(Error::SpawnFailed("empty command".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct ExternalPredictor {
    config: ExternalPredictorConfig,
    names: Vec<String>,
    // subprocess invocations are serialized
    lock: Mutex<()>,
}

pub fn external_predictor(
    config: ExternalPredictorConfig,
    variable_names: Vec<String>,
) -> Result<ExternalPredictor> {
    config.validate()?;
    Ok(ExternalPredictor {
        config,
        names: variable_names,
        lock: Mutex::new(()),
    })
}

/// CSV body sent to the predictor.
pub fn encode_request(names: &[String], x: &Matrix) -> String {
    let mut out = String::with_capacity(x.rows() * x.cols() * 20 + 64);
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // shortest representation that parses back to the same f64
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out
}

/// Parses the predictor's output, requiring exactly `n` numeric lines.
pub fn decode_response(stdout: &str, n: usize) -> Result<Vec<f64>> {
    let lines: Vec<&str> = stdout.lines().collect();
    if lines.len() != n {
        return Err(Error::ProtocolViolation(format!(
            "expected {n} prediction lines, got {}",
            lines.len()
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| {
                Error::ProtocolViolation(format!("line {}: not a number: {l:?}", i + 1))
            })
        })
        .collect()
}

impl ExternalPredictor {
    pub fn config(&self) -> &ExternalPredictorConfig {
        &self.config
    }

    fn run_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut child = Command::new(&self.config.program)
            .args(&self.config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::SpawnFailed(format!("{}: {e}", self.config.program)))?;

        let body = encode_request(&self.names, x);
        let mut stdin = child.stdin.take().expect("stdin piped");
        let writer = thread::spawn(move || {
            // a predictor may exit before consuming all input
            let _ = stdin.write_all(body.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("stdout piped");
        let reader = thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let mut stderr = child.stderr.take().expect("stderr piped");
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });

        let deadline = Instant::now() + Duration::from_secs_f64(self.config.timeout_secs);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Error::Timeout(self.config.timeout_secs));
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => return Err(Error::SpawnFailed(e.to_string())),
            }
        };
        let _ = writer.join();
        let out = reader
            .join()
            .map_err(|_| Error::ProtocolViolation("reader thread panicked".into()))?
            .map_err(|e| Error::ProtocolViolation(format!("reading output: {e}")))?;
        let err_text = err_reader.join().unwrap_or_default();
        if !status.success() {
            return Err(Error::ProtocolViolation(format!(
                "predictor exited with {status}: {}",
                err_text.trim()
            )));
        }
        decode_response(&out, x.rows())
    }
}

impl PredictionFunction for ExternalPredictor {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_width(x, self.names.len())?;
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut out = Vec::with_capacity(x.rows());
        let rows: Vec<usize> = (0..x.rows()).collect();
        for chunk in rows.chunks(self.config.max_batch_rows) {
            let batch = x.select_rows(chunk);
            out.extend(self.run_batch(&batch)?);
        }
        if x.rows() == 0 {
            return Ok(Vec::new());
        }
        Ok(out)
    }

    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::External
    }

    fn hyperparameters(&self) -> Vec<(String, String)> {
        let mut cmd = vec![self.config.program.clone()];
        cmd.extend(self.config.args.iter().cloned());
        vec![("command".into(), cmd.join(" "))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_round_trips_values() {
        let x = Matrix::from_rows(&[[0.1, -2.5e-17], [1.0 / 3.0, 1e300]]).unwrap();
        let body = encode_request(&["a".into(), "b".into()], &x);
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("a,b"));
        for i in 0..2 {
            let vals: Vec<f64> = lines
                .next()
                .unwrap()
                .split(',')
                .map(|s| s.parse().unwrap())
                .collect();
            assert_eq!(vals, x.row(i));
        }
        assert!(body.ends_with('\n'));
    }

    #[test]
    fn response_line_count_enforced() {
        assert_eq!(decode_response("1\n2.5\n", 2).unwrap(), vec![1.0, 2.5]);
        assert!(matches!(
            decode_response("1\n", 2),
            Err(Error::ProtocolViolation(_))
        ));
        assert!(matches!(
            decode_response("1\nabc\n", 2),
            Err(Error::ProtocolViolation(_))
        ));
    }

    #[test]
    fn zero_timeout_rejected() {
        let mut cfg = ExternalPredictorConfig::new("cat", vec![]);
        cfg.timeout_secs = 0.0;
        assert!(external_predictor(cfg, vec!["a".into()]).is_err());
    }
}
