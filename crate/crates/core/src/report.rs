//! Report plumbing: atomic file writes and the JSON envelope shared by
//! verification checks and invariance runs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Write-then-rename so concurrent readers never observe a torn file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("out")
        )),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("out")
        )),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Verdict shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// CLI exit code: 0 pass, 1 violation/fail, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Violation | Verdict::Fail => 1,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Machine-readable result of a named check.
///
/// `residuals` and `constants` hold every measured quantity; a verdict is
/// never reported without the numbers behind it. Wall-clock time lives in
/// `meta` so that reports with identical inputs compare byte-identical
/// once `meta` is stripped.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationResult {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<String>,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub residuals: BTreeMap<String, f64>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    pub meta: Meta,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Meta {
    pub wall_ms: f64,
}

impl VerificationResult {
    pub fn new(check: &str, n: usize, seed: u64, trials: usize) -> Self {
        Self {
            check: check.to_string(),
            cone: None,
            n,
            seed,
            trials,
            residuals: BTreeMap::new(),
            constants: BTreeMap::new(),
            witness: None,
            notes: Vec::new(),
            verdict: Verdict::Pass,
            meta: Meta::default(),
        }
    }

    pub fn residual(&mut self, key: &str, value: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn constant(&mut self, key: &str, value: f64) -> &mut Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Lower the verdict; never upgrades a failure back to pass.
    pub fn demote(&mut self, verdict: Verdict) -> &mut Self {
        let rank = |v: Verdict| match v {
            Verdict::Pass => 0,
            Verdict::Inconclusive => 1,
            Verdict::Violation => 2,
            Verdict::Fail => 3,
        };
        if rank(verdict) > rank(self.verdict) {
            self.verdict = verdict;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// JSON with the `meta` field removed, for byte-identity comparisons.
    pub fn to_json_without_meta(&self) -> String {
        let mut value = serde_json::to_value(self).expect("serializable");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("meta");
        }
        serde_json::to_string_pretty(&value).expect("serializable")
    }
}

/// Aggregate of several checks with a top-level verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub checks: Vec<VerificationResult>,
    pub verdict: Verdict,
}

impl Summary {
    pub fn new(checks: Vec<VerificationResult>) -> Self {
        let mut verdict = Verdict::Pass;
        for c in &checks {
            verdict = match (verdict, c.verdict) {
                (Verdict::Pass, v) => v,
                (Verdict::Inconclusive, Verdict::Violation | Verdict::Fail) => c.verdict,
                (v, _) => v,
            };
        }
        Self { checks, verdict }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
