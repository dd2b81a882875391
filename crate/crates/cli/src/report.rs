use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use syl_core::{Error, Result};

pub const TOOL: &str = "syl";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a check compares `value` with `threshold`.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    /// `value ≤ threshold`
    AtMost,
    /// `value ≥ threshold`
    AtLeast,
    /// `value < threshold`
    Below,
    /// `value > threshold`
    Above,
    /// Pass/fail flag, `value` is 1 or 0.
    Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub compare: Compare,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, compare: Compare, threshold: f64) -> Self {
        let passed = match compare {
            Compare::AtMost => value <= threshold,
            Compare::AtLeast => value >= threshold,
            Compare::Below => value < threshold,
            Compare::Above => value > threshold,
            Compare::Flag => value != 0.0,
        };
        Check {
            name: name.into(),
            value,
            threshold,
            compare,
            passed,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, if ok { 1.0 } else { 0.0 }, Compare::Flag, 1.0)
    }
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the canonical config JSON followed by any input file bytes.
    pub input_hash: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub config: C,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub result: T,
}

impl<C: Serialize, T: Serialize> Report<C, T> {
    pub fn new(command: &'static str, config: C, inputs: &[Vec<u8>], seed: u64, checks: Vec<Check>, result: T) -> Result<Self> {
        let input_hash = hash_inputs(&config, inputs)?;
        Ok(Report {
            tool: TOOL,
            version: VERSION,
            command,
            input_hash,
            seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            pass: checks.iter().all(|c| c.passed),
            checks,
            warnings: Vec::new(),
            result,
        })
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}  input {}  seed {}", self.tool, self.version, self.command, &self.input_hash[..16], self.seed);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
        let _ = writeln!(s, "{:<width$}  {:>24}  {:>8}  {:>24}  result", "check", "value", "", "threshold");
        for c in &self.checks {
            let op = match c.compare {
                Compare::AtMost => "<=",
                Compare::AtLeast => ">=",
                Compare::Below => "<",
                Compare::Above => ">",
                Compare::Flag => "flag",
            };
            let _ = writeln!(
                s,
                "{:<width$}  {:>24}  {:>8}  {:>24}  {}",
                c.name,
                format!("{:.16e}", c.value),
                op,
                format!("{:.16e}", c.threshold),
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }
}

pub fn hash_inputs<C: Serialize>(config: &C, inputs: &[Vec<u8>]) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).map_err(|e| Error::Computation(format!("json encode: {e}")))?);
    for bytes in inputs {
        h.update(bytes);
    }
    let mut out = String::with_capacity(64);
    for b in h.finalize().iter() {
        let _ = write!(out, "{b:02x}");
    }
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Computation(format!("json encode: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
}
