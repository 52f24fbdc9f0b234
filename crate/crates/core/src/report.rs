//! Verification reports and the seeded, order-independent trial runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub const WITNESS_CAP: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub trials: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub min_slack: f64,
    pub seed: u64,
    pub runtime_ms: u64,
    /// Auxiliary measurements (estimates, ratios, flag counts).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Value>>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Fixed-order `key: value` rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check: {}", self.check);
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k}: {v}");
        }
        let _ = writeln!(out, "trials: {}", self.trials);
        let _ = writeln!(out, "violations: {}", self.violations);
        let _ = writeln!(out, "max_violation: {:e}", self.max_violation);
        let _ = writeln!(out, "min_slack: {:e}", self.min_slack);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "runtime_ms: {}", self.runtime_ms);
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "metric.{k}: {v}");
        }
        if let Some(w) = &self.witnesses {
            let _ = writeln!(out, "witnesses: {}", w.len());
        }
        out
    }
}

/// One trial: the (scale-normalized) slack and, on violation, a witness dump.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub slack: f64,
    pub witness: Option<Value>,
}

impl TrialOutcome {
    /// Builds the witness only when `slack` violates `tol`.
    pub fn new<W: FnOnce() -> Value>(slack: f64, tol: f64, witness: W) -> Self {
        let witness = is_violation(slack, tol).then(witness);
        Self { slack, witness }
    }
}

fn is_violation(slack: f64, tol: f64) -> bool {
    !slack.is_finite() || slack < -tol
}

pub fn trial_seed(master: u64, index: usize) -> u64 {
    master ^ index as u64
}

/// Runs `trials` independent trials in parallel; trial `i` receives seed `master ^ i`.
/// Results come back in index order regardless of scheduling.
pub fn run_trials<T, F>(trials: usize, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    (0..trials).into_par_iter().map(|i| f(i, trial_seed(master, i))).collect()
}

pub struct ReportBuilder {
    check: String,
    params: BTreeMap<String, Value>,
    metrics: BTreeMap<String, Value>,
    seed: u64,
    tol: f64,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(check: impl Into<String>, seed: u64, tol: f64) -> Self {
        Self {
            check: check.into(),
            params: BTreeMap::new(),
            metrics: BTreeMap::new(),
            seed,
            tol,
            start: Instant::now(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), to_value(value));
        self
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.into(), to_value(value));
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn finish(mut self, outcomes: &[TrialOutcome]) -> VerificationReport {
        self.params.insert("tol".into(), to_value(self.tol));
        let violations = outcomes.iter().filter(|o| is_violation(o.slack, self.tol)).count();
        let min_slack = outcomes.iter().map(|o| o.slack).fold(f64::INFINITY, f64::min);
        let min_slack = if min_slack.is_finite() { min_slack } else { 0.0 };
        let witnesses: Vec<Value> = outcomes.iter().filter_map(|o| o.witness.clone()).take(WITNESS_CAP).collect();
        VerificationReport {
            check: self.check,
            params: self.params,
            trials: outcomes.len(),
            violations,
            max_violation: if violations > 0 { (-min_slack).max(0.0) } else { 0.0 },
            min_slack,
            seed: self.seed,
            runtime_ms: self.start.elapsed().as_millis() as u64,
            metrics: self.metrics,
            witnesses: (violations > 0).then_some(witnesses),
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
