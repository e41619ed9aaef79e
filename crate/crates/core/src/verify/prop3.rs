//! Truth table of the slow-fast family: cycles exist exactly for `0 < |a| < 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{translate, Check, CheckStatus, Proposition, PropositionReport};
use crate::cycles::{find_cycles_with, CycleClass, DetectConfig, LimitCycle, Orientation};
use crate::error::{Error, Result};
use crate::field::{Family, VectorField2};
use crate::flow::{integrate, IntegratorConfig};
use crate::retmap::first_return;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop3Config {
    pub eps: f64,
    pub a_list: Vec<f64>,
    /// Section range in the translated frame.
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
    pub mirror_tol: f64,
    /// Values of `|a|` inside `(band, 1)` are reported but never fail.
    pub band: f64,
}

impl Default for Prop3Config {
    fn default() -> Self {
        Self {
            eps: crate::field::DEFAULT_EPS,
            a_list: vec![0.0, -0.2, 0.2, -0.5, 0.5, -0.8, 0.8, -1.0, 1.0, -1.3, 1.3],
            y_min: 0.01,
            y_max: 3.0,
            n: 60,
            mirror_tol: 1e-6,
            band: 0.9,
        }
    }
}

/// The slow-fast field with its equilibrium `(a, 2a^2 - a^4)` moved to the
/// origin.
pub fn slow_fast_translated(a: f64, eps: f64) -> Result<VectorField2> {
    let field = Family::SlowFast { a, eps }.build()?;
    translate(&field, a, 2.0 * a * a - a.powi(4))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Prop3Cycle {
    y0: f64,
    period: f64,
    multiplier: f64,
    h: f64,
    class: CycleClass,
    orientation: Orientation,
    /// Lowest point in the original coordinates.
    min_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AOutcome {
    a: f64,
    reversed: bool,
    center: bool,
    cycles: Vec<Prop3Cycle>,
    status: String,
    notes: Vec<String>,
    #[serde(skip)]
    raw: Vec<LimitCycle>,
}

fn flip(k: CycleClass) -> CycleClass {
    match k {
        CycleClass::Stable => CycleClass::Unstable,
        CycleClass::Unstable => CycleClass::Stable,
        CycleClass::SemistableOuterStable => CycleClass::SemistableInnerStable,
        CycleClass::SemistableInnerStable => CycleClass::SemistableOuterStable,
        CycleClass::Degenerate => CycleClass::Degenerate,
    }
}

fn run_a(a: f64, pc: &Prop3Config, cfg: &IntegratorConfig) -> AOutcome {
    let reversed = a > 0.0;
    let shift = 2.0 * a * a - a.powi(4);
    let mut out = AOutcome {
        a,
        reversed,
        center: false,
        cycles: Vec::new(),
        status: "ok".into(),
        notes: Vec::new(),
        raw: Vec::new(),
    };
    let field = match slow_fast_translated(a, pc.eps) {
        Ok(f) if reversed => f.time_reversed(),
        Ok(f) => f,
        Err(e) => {
            out.status = e.tag().into();
            return out;
        }
    };
    match find_cycles_with(&field, (pc.y_min, pc.y_max), pc.n, cfg, &DetectConfig::default()) {
        Ok(set) => {
            out.center = set.center_detected;
            out.notes = set.notes.clone();
            for c in &set.cycles {
                // report quantities of the forward flow
                let (multiplier, h, class, orientation) = if reversed {
                    (1.0 / c.multiplier, -c.h, flip(c.klass), c.orientation.flipped())
                } else {
                    (c.multiplier, c.h, c.klass, c.orientation)
                };
                out.cycles.push(Prop3Cycle {
                    y0: c.y0,
                    period: c.period,
                    multiplier,
                    h,
                    class,
                    orientation,
                    min_y: c.min_y + shift,
                });
            }
            out.raw = set.cycles;
        }
        Err(e) => out.status = e.tag().into(),
    }
    out
}

/// Largest deviation between `a`'s cycle and the mirror image of `-a`'s,
/// compared at equal times from the common section point. Both runs use
/// fields that are exact mirror images of each other.
fn mirror_gap(pos: &LimitCycle, neg: &LimitCycle, cfg: &IntegratorConfig) -> Result<f64> {
    let t = pos.period.min(neg.period);
    let tp = integrate(&pos.field, (0.0, pos.y0), &cfg.with_max_time(t), None)?;
    let tn = integrate(&neg.field, (0.0, neg.y0), &cfg.with_max_time(t), None)?;
    let mut gap = (pos.period - neg.period).abs() / t;
    for k in 0..=200 {
        let s = t * k as f64 / 200.0;
        let (p, q) =
            (tp.state_at(s).ok_or(Error::DegeneratePolyline)?, tn.state_at(s).ok_or(Error::DegeneratePolyline)?);
        gap = gap.max((p[0] + q[0]).abs()).max((p[1] - q[1]).abs());
    }
    Ok(gap)
}

/// Section ordinate where closed orbits of the `a = 0` center end, and how
/// far the first open orbit stays from the graphs `y = 2x^2 - x^4` (the
/// `x'`-nullcline) and `y = x^4 - 2x^2` while `1 <= |x| <= 1.4`.
fn boundary_orbit(pc: &Prop3Config, cfg: &IntegratorConfig) -> Value {
    let Ok(field) = slow_fast_translated(0.0, pc.eps) else { return Value::Null };
    let (mut lo, mut hi) = (pc.y_min, pc.y_max);
    if first_return(&field, lo, cfg).is_err() || first_return(&field, hi, cfg).is_ok() {
        return json!({ "status": "no boundary in range" });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if first_return(&field, mid, cfg).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut n, mut to_nullcline, mut to_quartic) = (0usize, 0.0f64, 0.0f64);
    for f in [field, field.time_reversed()] {
        let stop = |n: &crate::flow::Node| n.x.abs() > 3.0;
        if let Ok(tr) = integrate(&f, (0.0, hi), &cfg.with_max_time(1e4), Some(&stop)) {
            let dense = tr.resample(4000);
            for p in dense.iter().filter(|p| (1.0..=1.4).contains(&p.x.abs())) {
                let q = p.x.powi(4) - 2.0 * p.x * p.x;
                n += 1;
                to_nullcline = to_nullcline.max((p.y + q).abs());
                to_quartic = to_quartic.max((p.y - q).abs());
            }
        }
    }
    json!({
        "last_closed_y": lo, "first_open_y": hi, "samples": n,
        "max_distance_to_nullcline": to_nullcline, "max_distance_to_quartic": to_quartic,
    })
}

/// Confirms the truth table for each `a`, the mirror symmetry between `a`
/// and `-a`, and records where the cycles sit relative to `y = -1`.
pub fn verify_prop3(pc: &Prop3Config, cfg: &IntegratorConfig) -> Result<PropositionReport> {
    if !(pc.eps > 0.0 && pc.eps.is_finite()) {
        return Err(Error::NonPositiveEpsilon(pc.eps));
    }
    if let Some(a) = pc.a_list.iter().find(|a| !a.is_finite()) {
        return Err(Error::NonFiniteParameter(format!("a = {a}")));
    }
    if !(pc.y_min > 0.0 && pc.y_max > pc.y_min) || pc.n < 8 || !(pc.mirror_tol > 0.0) {
        return Err(Error::InvalidArgument("prop3 needs 0 < y_min < y_max, n >= 8, mirror_tol > 0".into()));
    }
    cfg.validate()?;
    let outcomes: Vec<AOutcome> = pc.a_list.par_iter().map(|&a| run_a(a, pc, cfg)).collect();
    let mut report = PropositionReport::new(Proposition::P3, json!({ "prop3": pc, "integrator": cfg }));
    let mut candidates = Vec::new();

    for o in &outcomes {
        let m = o.a.abs();
        let data = serde_json::to_value(o).expect("outcome serialises");
        let (name, ok) = if o.a == 0.0 {
            (format!("a = {}: center", o.a), o.center)
        } else if m < 1.0 {
            (format!("a = {}: at least one cycle", o.a), !o.cycles.is_empty())
        } else {
            (format!("a = {}: no cycle", o.a), o.cycles.is_empty() && !o.center)
        };
        let status = if m > pc.band && m < 1.0 {
            CheckStatus::Measured
        } else if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        if status == CheckStatus::Fail {
            candidates.push(json!({ "check": name, "eps": pc.eps, "outcome": data, "integrator": cfg }));
        }
        report.checks.push(Check::new(name, status, data));
    }

    for pos in outcomes.iter().filter(|o| o.a > 0.0) {
        let Some(neg) = outcomes.iter().find(|o| o.a == -pos.a) else { continue };
        let name = format!("mirror a = +-{}", pos.a);
        let in_band = pos.a > pc.band && pos.a < 1.0;
        let (ok, data) = if pos.raw.len() != neg.raw.len() || pos.center != neg.center {
            (false, json!({ "cycles": [pos.raw.len(), neg.raw.len()], "center": [pos.center, neg.center] }))
        } else {
            let mut worst_gap = 0.0f64;
            let mut worst_log = 0.0f64;
            let mut err = None;
            for (p, n) in pos.raw.iter().zip(&neg.raw) {
                match mirror_gap(p, n, cfg) {
                    Ok(g) => worst_gap = worst_gap.max(g),
                    Err(e) => err = Some(e.tag()),
                }
                let (cp, cn) = (pos.cycles.iter().find(|c| c.y0 == p.y0), neg.cycles.iter().find(|c| c.y0 == n.y0));
                if let (Some(cp), Some(cn)) = (cp, cn) {
                    worst_log = worst_log.max((cp.multiplier.ln() + cn.multiplier.ln()).abs());
                }
            }
            let ok = err.is_none() && worst_gap <= pc.mirror_tol && worst_log <= pc.mirror_tol;
            (
                ok,
                json!({ "cycles": pos.raw.len(), "max_gap": worst_gap, "max_log_multiplier_sum": worst_log, "error": err }),
            )
        };
        let status = if in_band {
            CheckStatus::Measured
        } else if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        if status == CheckStatus::Fail {
            candidates.push(json!({ "check": name, "eps": pc.eps, "a": pos.a, "detail": data, "integrator": cfg }));
        }
        report.checks.push(Check::new(name, status, data));
    }

    let rows: Vec<Value> = outcomes
        .iter()
        .flat_map(|o| {
            o.cycles
                .iter()
                .map(move |c| json!({ "a": o.a, "y0": c.y0, "min_y": c.min_y, "above_minus_one": c.min_y > -1.0 }))
        })
        .collect();
    report.checks.push(Check::new(
        "lowest point of each cycle against y = -1",
        CheckStatus::Measured,
        json!({ "cycles": rows }),
    ));
    if pc.a_list.contains(&0.0) {
        report.checks.push(Check::new("boundary orbit of the center", CheckStatus::Measured, boundary_orbit(pc, cfg)));
    }
    report.counterexample_candidates = candidates;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translated_field_has_equilibrium_at_origin() {
        for a in [-1.3, -0.5, 0.0, 0.7] {
            let f = slow_fast_translated(a, 0.1).unwrap();
            let (p, q) = f.eval(0.0, 0.0);
            assert!(p.abs() < 1e-14 && q.abs() < 1e-14);
        }
    }

    #[test]
    fn mirror_identity_of_fields() {
        // reversed field at a equals the x-mirror of the forward field at -a
        let (a, eps) = (0.5, 0.1);
        let r = slow_fast_translated(a, eps).unwrap().time_reversed();
        let f = slow_fast_translated(-a, eps).unwrap();
        for &(x, y) in &[(0.3, 0.2), (-1.1, 0.7), (0.9, -0.4)] {
            let (pr, qr) = r.eval(x, y);
            let (pf, qf) = f.eval(-x, y);
            assert!((pr + pf).abs() < 1e-14 && (qr - qf).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let pc = Prop3Config { eps: 0.0, ..Prop3Config::default() };
        assert!(matches!(verify_prop3(&pc, &IntegratorConfig::default()), Err(Error::NonPositiveEpsilon(_))));
    }
}
