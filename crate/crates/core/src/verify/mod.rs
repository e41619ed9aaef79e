//! Falsification harnesses for the three propositions.
//!
//! A harness never declares a proposition true: a clean report means no
//! counterexample turned up under the configured budget. Every failed check
//! carries the parameters and settings needed to re-run it.

mod prop1;
mod prop2;
mod prop3;
pub mod singular;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use prop1::{quadratic_normal_form, translate, verify_prop1, NormalForm, Prop1Config};
pub use prop2::{verify_prop2, Prop2Config};
pub use prop3::{slow_fast_translated, verify_prop3, Prop3Config};
pub use singular::{field_singularities, quadratic_singularities, QuadraticSingularity, SingularityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposition {
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Measured,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub data: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, status: CheckStatus, data: Value) -> Self {
        Self { name: name.into(), status, data }
    }

    pub fn pass_if(name: impl Into<String>, ok: bool, data: Value) -> Self {
        Self::new(name, if ok { CheckStatus::Pass } else { CheckStatus::Fail }, data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub proposition: Proposition,
    /// Resolved configuration, sufficient to reproduce the run.
    pub config: Value,
    pub checks: Vec<Check>,
    pub counterexample_candidates: Vec<Value>,
}

impl PropositionReport {
    pub fn new(proposition: Proposition, config: Value) -> Self {
        Self { proposition, config, checks: Vec::new(), counterexample_candidates: Vec::new() }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    /// 0 when every check passed or was measured, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per check plus a verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:?} report", self.proposition);
        for c in &self.checks {
            let _ = writeln!(s, "  {:<13} {}", format!("{:?}", c.status), c.name);
        }
        let verdict = if self.failed() {
            format!("{} counterexample candidate(s)", self.counterexample_candidates.len())
        } else {
            "no counterexample found under this budget".to_string()
        };
        let _ = writeln!(s, "verdict: {verdict}");
        s
    }
}
