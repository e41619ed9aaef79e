//! Run configuration. Every block has documented defaults; unknown keys are
//! rejected so that a typo never silently falls back to a default.

use std::path::Path;

use anyhow::Context;
use limcyc::field::SystemDef;
use limcyc::verify::{Prop1Config, Prop2Config, Prop3Config};
use limcyc::IntegratorConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrateOpts {
    pub init: [f64; 2],
    pub t_end: f64,
    /// Write this many equally spaced rows instead of the raw steps.
    pub resample: Option<usize>,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self { init: [0.0, 1.0], t_end: 100.0, resample: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOpts {
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
}

impl Default for ScanOpts {
    fn default() -> Self {
        Self { y_min: 0.1, y_max: 4.0, n: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CyclesOpts {
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
    /// Also write one `x,y` CSV per cycle.
    pub polylines: bool,
}

impl Default for CyclesOpts {
    fn default() -> Self {
        Self { y_min: 0.01, y_max: 10.0, n: 60, polylines: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemistableOpts {
    pub b: f64,
    pub c: f64,
    /// Newton start `(a, y0)`; bracketed from scratch when absent.
    pub init: Option<[f64; 2]>,
    /// Offsets of `a` at which cycles near the solution are counted.
    pub perturb: Vec<f64>,
    /// Count cycles at `a = 0`, `a*/2` and `3a*/2`.
    pub counts: bool,
    pub uniqueness: bool,
}

impl Default for SemistableOpts {
    fn default() -> Self {
        Self { b: 1.0, c: -1.0, init: None, perturb: vec![-1e-3, 1e-3], counts: true, uniqueness: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiOpts {
    pub b_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
}

impl Default for PhiOpts {
    fn default() -> Self {
        Self { b_grid: vec![1.0, 2.0], c_grid: vec![-1.0, -2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOpts {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n: usize,
}

impl Default for SweepOpts {
    fn default() -> Self {
        Self { lambda_min: 0.5, lambda_max: 1.5, n: 11 }
    }
}

/// Everything a run needs. Defaults: `rtol 1e-10`, `atol 1e-12`,
/// `eps 0.1` for the slow-fast family, seed 0.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDef>,
    pub integrator: IntegratorConfig,
    pub integrate: IntegrateOpts,
    pub retmap: ScanOpts,
    pub cycles: CyclesOpts,
    pub semistable: SemistableOpts,
    pub phi: PhiOpts,
    pub sweep: SweepOpts,
    pub prop1: Prop1Config,
    pub prop2: Prop2Config,
    pub prop3: Prop3Config,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Echo written next to the outputs; loading it reproduces the run.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_documented_defaults() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.integrator.rtol, 1e-10);
        assert_eq!(c.integrator.atol, 1e-12);
        assert_eq!(c.prop1.seed, 0);
        assert_eq!(c.prop3.eps, 0.1);
        assert!(c.system.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"integrator": {"rtol": 1e-8, "rtoll": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"sytem": {}}"#).is_err());
        assert!(RunConfig::parse(r#"{"prop1": {"samples": 3, "extra": 1}}"#).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::parse(
            r#"{"system": {"kind": "quintic", "params": {"a": 0, "b": 1, "c": -1}}, "prop1": {"seed": 9}}"#,
        )
        .unwrap();
        let again = RunConfig::parse(&c.to_json()).unwrap();
        assert_eq!(c.to_json(), again.to_json());
    }
}
