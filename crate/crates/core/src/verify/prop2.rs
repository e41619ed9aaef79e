//! Structured confirmation of the semistable-cycle characterisation for the
//! quintic Liénard family on a `(b, c)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Check, CheckStatus, Proposition, PropositionReport};
use crate::bifurc::{
    count_cycles, semistable, solve_semistable, uniqueness_scan, FoldBracket, SemistableSolution, UniquenessScan,
    FOLD_TOL,
};
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop2Config {
    pub b_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Values of `a` tried at `bc > 0` nodes, in units of `b^2 / |c|`.
    pub a_probe: Vec<f64>,
    pub uniqueness: bool,
    /// Cross-check each `bc < 0` node against `(4b, c)`.
    pub scaling: bool,
    pub scaling_tol: f64,
}

impl Default for Prop2Config {
    fn default() -> Self {
        Self {
            b_grid: vec![1.0],
            c_grid: vec![-1.0, 1.0],
            a_probe: vec![-1.0, -0.3, 0.0, 0.3, 1.0],
            uniqueness: true,
            scaling: true,
            scaling_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProbeCount {
    a: f64,
    hyperbolic: Option<usize>,
    semistable: Option<usize>,
    candidates: Option<usize>,
    status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Scaled {
    solution: Option<SemistableSolution>,
    a_ratio: Option<f64>,
    y_ratio: Option<f64>,
    status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum NodeOutcome {
    Positive {
        b: f64,
        c: f64,
        probes: Vec<ProbeCount>,
    },
    Negative {
        b: f64,
        c: f64,
        bracket: Option<FoldBracket>,
        solution: Option<SemistableSolution>,
        status: String,
        uniqueness: Option<UniquenessScan>,
        scaled: Option<Scaled>,
    },
    Skipped {
        b: f64,
        c: f64,
    },
}

fn positive_node(b: f64, c: f64, pc: &Prop2Config, cfg: &IntegratorConfig) -> NodeOutcome {
    let unit = b * b / c.abs();
    let probes = pc
        .a_probe
        .iter()
        .map(|&k| {
            let a = k * unit;
            match count_cycles(b, c, a, cfg) {
                Ok(cnt) => ProbeCount {
                    a,
                    hyperbolic: Some(cnt.hyperbolic),
                    semistable: Some(cnt.semistable),
                    candidates: Some(cnt.set.candidates.len()),
                    status: "ok".into(),
                },
                Err(e) => {
                    ProbeCount { a, hyperbolic: None, semistable: None, candidates: None, status: e.tag().into() }
                }
            }
        })
        .collect();
    NodeOutcome::Positive { b, c, probes }
}

fn negative_node(b: f64, c: f64, pc: &Prop2Config, cfg: &IntegratorConfig) -> NodeOutcome {
    let (bracket, solution, status) = match semistable(b, c, cfg) {
        Ok((br, sol)) => (Some(br), Some(sol), "ok".to_string()),
        Err(e) => (None, None, e.tag().to_string()),
    };
    let good = solution.filter(|s| s.converged);
    let uniqueness = match good {
        Some(s) if pc.uniqueness => uniqueness_scan(b, c, s.a_star, cfg).ok(),
        _ => None,
    };
    let scaled = match good {
        Some(s) if pc.scaling => Some(match solve_semistable(4.0 * b, c, (16.0 * s.a_star, 0.5 * s.y0_star), cfg) {
            Ok(t) => Scaled {
                a_ratio: Some(t.a_star / s.a_star),
                y_ratio: Some(t.y0_star / s.y0_star),
                solution: Some(t),
                status: "ok".into(),
            },
            Err(e) => Scaled { solution: None, a_ratio: None, y_ratio: None, status: e.tag().into() },
        }),
        _ => None,
    };
    NodeOutcome::Negative { b, c, bracket, solution, status, uniqueness, scaled }
}

fn status_of(bad: usize, seen: usize) -> CheckStatus {
    if bad > 0 {
        CheckStatus::Fail
    } else if seen > 0 {
        CheckStatus::Pass
    } else {
        CheckStatus::NotApplicable
    }
}

/// Runs every `(b, c)` node of the grid: `bc > 0` nodes must show no
/// double cycle at any probed `a`; `bc < 0` nodes must yield a unique,
/// nondegenerate fold obeying the scaling law.
pub fn verify_prop2(pc: &Prop2Config, cfg: &IntegratorConfig) -> Result<PropositionReport> {
    if pc.b_grid.is_empty() || pc.c_grid.is_empty() {
        return Err(Error::InvalidArgument("empty (b, c) grid".into()));
    }
    if let Some(v) = pc.b_grid.iter().chain(&pc.c_grid).chain(&pc.a_probe).find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteParameter(format!("grid value {v}")));
    }
    if !(pc.scaling_tol > 0.0) {
        return Err(Error::InvalidArgument("scaling_tol must be positive".into()));
    }
    cfg.validate()?;
    let nodes: Vec<(f64, f64)> = pc.b_grid.iter().flat_map(|&b| pc.c_grid.iter().map(move |&c| (b, c))).collect();
    let outcomes: Vec<NodeOutcome> = nodes
        .par_iter()
        .map(|&(b, c)| {
            if b * c > 0.0 {
                positive_node(b, c, pc, cfg)
            } else if b * c < 0.0 {
                negative_node(b, c, pc, cfg)
            } else {
                NodeOutcome::Skipped { b, c }
            }
        })
        .collect();

    let mut report = PropositionReport::new(Proposition::P2, json!({ "prop2": pc, "integrator": cfg }));
    let mut candidates: Vec<Value> = Vec::new();
    let mut flag = |check: &str, o: &NodeOutcome| {
        candidates.push(json!({ "check": check, "node": o, "integrator": cfg }));
    };

    let (mut pos_seen, mut pos_bad) = (0, 0);
    let (mut fold_seen, mut fold_bad) = (0, 0);
    let (mut newton_bad, mut uniq_seen, mut uniq_bad, mut scale_seen, mut scale_bad) = (0, 0, 0, 0, 0);
    for o in &outcomes {
        match o {
            NodeOutcome::Positive { probes, .. } => {
                pos_seen += 1;
                if probes.iter().any(|p| p.semistable.unwrap_or(0) > 0 || p.candidates.unwrap_or(0) > 0) {
                    pos_bad += 1;
                    flag("no double cycle when bc > 0", o);
                }
            }
            NodeOutcome::Negative { bracket, solution, uniqueness, scaled, .. } => {
                fold_seen += 1;
                if bracket.is_none() {
                    fold_bad += 1;
                    flag("fold bracketed when bc < 0", o);
                }
                let ok = solution.is_some_and(|s| s.converged && s.res_d < FOLD_TOL && s.res_h < FOLD_TOL);
                if !ok {
                    newton_bad += 1;
                    flag("fold solved when bc < 0", o);
                }
                if pc.uniqueness {
                    uniq_seen += 1;
                    if !uniqueness.as_ref().is_some_and(|u| u.unique) {
                        uniq_bad += 1;
                        flag("single count transition in a", o);
                    }
                }
                if pc.scaling {
                    scale_seen += 1;
                    let tol = pc.scaling_tol;
                    let fine = scaled.as_ref().is_some_and(|s| {
                        s.a_ratio.is_some_and(|r| (r / 16.0 - 1.0).abs() <= tol)
                            && s.y_ratio.is_some_and(|r| (r / 0.5 - 1.0).abs() <= tol)
                    });
                    if !fine {
                        scale_bad += 1;
                        flag("scaling law under b -> 4b", o);
                    }
                }
            }
            NodeOutcome::Skipped { .. } => {}
        }
    }
    let nodes_json = serde_json::to_value(&outcomes).expect("outcomes serialise");
    report.checks.push(Check::new(
        "no double cycle when bc > 0",
        status_of(pos_bad, pos_seen),
        json!({ "nodes": pos_seen, "violations": pos_bad }),
    ));
    report.checks.push(Check::new(
        "fold bracketed when bc < 0",
        status_of(fold_bad, fold_seen),
        json!({ "nodes": fold_seen, "violations": fold_bad }),
    ));
    report.checks.push(Check::new(
        "fold solved when bc < 0",
        status_of(newton_bad, fold_seen),
        json!({ "nodes": fold_seen, "violations": newton_bad }),
    ));
    report.checks.push(Check::new(
        "single count transition in a",
        status_of(uniq_bad, uniq_seen),
        json!({ "nodes": uniq_seen, "violations": uniq_bad }),
    ));
    report.checks.push(Check::new(
        "scaling law under b -> 4b",
        status_of(scale_bad, scale_seen),
        json!({ "nodes": scale_seen, "violations": scale_bad }),
    ));
    report.checks.push(Check::new("node results", CheckStatus::Measured, nodes_json));
    report.counterexample_candidates = candidates;
    Ok(report)
}
