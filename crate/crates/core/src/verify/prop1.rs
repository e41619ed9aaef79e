//! Randomised search for cycle configurations forbidden by the quadratic
//! proposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::singular::{quadratic_singularities, QuadraticSingularity, SingularityKind};
use super::{Check, CheckStatus, Proposition, PropositionReport};
use crate::cycles::{
    find_cycles_with, geometry, intersects_line, line_integral_positive, surrounds_point, DetectConfig, LimitCycle,
};
use crate::error::{Error, Result};
use crate::field::{Family, Polynomial2, VectorField2};
use crate::flow::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Prop1Config {
    pub samples: usize,
    pub seed: u64,
    /// Parameters are drawn uniformly from `[-bound, bound]`.
    pub bound: f64,
    /// Section range searched around each antisaddle.
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
    /// Random points used by the translation closure check.
    pub closure_points: usize,
    /// Cap on the integration time of one return. Orbits captured by an
    /// attractor away from the section otherwise run to `max_time`.
    pub return_time: f64,
}

impl Default for Prop1Config {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            bound: 2.0,
            y_min: 1e-3,
            y_max: 20.0,
            n: 40,
            closure_points: 100,
            return_time: 500.0,
        }
    }
}

/// Moves `(x0, y0)` to the origin.
pub fn translate(field: &VectorField2, x0: f64, y0: f64) -> Result<VectorField2> {
    let sx = Polynomial2::affine(x0, 1.0, 0.0);
    let sy = Polynomial2::affine(y0, 0.0, 1.0);
    Ok(VectorField2::new(field.p.compose(&sx, &sy)?, field.q.compose(&sx, &sy)?))
}

/// Quadratic-family coefficients of a translated field after the scaling
/// `y -> beta y`, `t -> gamma t` that restores the unit linear terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub beta: f64,
    /// Negative when the scaling reverses time.
    pub gamma: f64,
}

impl NormalForm {
    pub fn family(&self) -> Family {
        Family::Quadratic { a: self.a, b: self.b, c: self.c, d: self.d, f: self.f }
    }

    /// `c d (2a + f)`, the quantity in the sign conditions.
    pub fn sign_quantity(&self) -> f64 {
        self.c * self.d * (2.0 * self.a + self.f)
    }
}

/// Recovers the family coefficients of a field with an equilibrium at the
/// origin, or `None` when the field has monomials the family lacks
/// (`x'` with `xy`, `y'` with `y` or `y^2`) or a non-rotating linear part.
pub fn quadratic_normal_form(field: &VectorField2) -> Option<NormalForm> {
    let scale = field.p.terms().iter().chain(field.q.terms().iter()).fold(1.0f64, |m, t| m.max(t.2.abs()));
    let tiny = |v: f64| v.abs() <= 1e-10 * scale;
    let allowed_p = [(0, 1), (2, 0), (0, 2), (1, 0), (0, 0)];
    let allowed_q = [(1, 0), (2, 0), (1, 1), (0, 0)];
    if field.p.terms().iter().any(|&(i, j, c)| !allowed_p.contains(&(i, j)) && !tiny(c))
        || field.q.terms().iter().any(|&(i, j, c)| !allowed_q.contains(&(i, j)) && !tiny(c))
        || !tiny(field.p.coeff(0, 0))
        || !tiny(field.q.coeff(0, 0))
    {
        return None;
    }
    let k = field.p.coeff(0, 1);
    let m = field.q.coeff(1, 0);
    if !(k * m < 0.0) {
        return None;
    }
    let beta = (-m / k).sqrt();
    let gamma = 1.0 / (k * beta);
    Some(NormalForm {
        a: gamma * field.p.coeff(2, 0),
        b: gamma * field.p.coeff(0, 2) * beta * beta,
        c: gamma * field.p.coeff(1, 0),
        d: gamma * field.q.coeff(2, 0) / beta,
        f: gamma * field.q.coeff(1, 1),
        beta,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CycleRecord {
    focus: usize,
    y0: f64,
    period: f64,
    multiplier: f64,
    class: crate::cycles::CycleClass,
    orientation: crate::cycles::Orientation,
    min_y: f64,
    /// The ray from another antisaddle can cross a cycle around this one.
    surrounds_focus: Option<bool>,
    surrounds_origin: Option<bool>,
    meets_x0: bool,
    meets_line: bool,
    line_integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FocusOutcome {
    x: f64,
    y: f64,
    normal_form: Option<NormalForm>,
    y_range: Option<(f64, f64)>,
    center: bool,
    cycles: Vec<usize>,
    failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleOutcome {
    index: usize,
    params: [f64; 5],
    singularities: Vec<QuadraticSingularity>,
    foci: Vec<FocusOutcome>,
    cycles: Vec<CycleRecord>,
    closure_error: f64,
    /// Classified cycles around the origin once `c` is set to zero.
    c_zero_cycles: Option<usize>,
    /// Unclassifiable near-identity points there; the origin is then a weak
    /// focus and the displacement near it sits at the integration noise.
    c_zero_degenerate: Option<usize>,
    #[serde(skip)]
    polylines: Vec<Vec<geometry::Point>>,
}

fn draw(rng: &mut ChaCha8Rng, bound: f64) -> [f64; 5] {
    std::array::from_fn(|_| rng.gen_range(-bound..=bound))
}

/// Sum of the absolute values of the monomials of `p` at `(x, y)`, the
/// natural scale of rounding error in evaluating `p`.
fn magnitude(p: &Polynomial2, x: f64, y: f64) -> f64 {
    p.terms().iter().map(|&(i, j, c)| (c * x.powi(i as i32) * y.powi(j as i32)).abs()).sum()
}

fn closure_error(orig: &VectorField2, moved: &VectorField2, x0: f64, y0: f64, rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (x, y) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let (p0, q0) = orig.eval(x + x0, y + y0);
        let (p1, q1) = moved.eval(x, y);
        let sp = 1.0 + magnitude(&orig.p, x + x0, y + y0);
        let sq = 1.0 + magnitude(&orig.q, x + x0, y + y0);
        worst = worst.max((p0 - p1).abs() / sp).max((q0 - q1).abs() / sq);
    }
    worst
}

/// Largest section ordinate below the first tangency of the flow with the
/// positive y-axis.
fn section_limit(field: &VectorField2, y_max: f64) -> f64 {
    let k = field.p.coeff(0, 1);
    let b = field.p.coeff(0, 2);
    let mut lim = y_max;
    if b != 0.0 {
        let ystar = -k / b;
        if ystar > 0.0 {
            lim = lim.min(0.98 * ystar);
        }
    }
    lim
}

fn analyse(
    index: usize,
    params: [f64; 5],
    sing: Vec<QuadraticSingularity>,
    pc: &Prop1Config,
    cfg: &IntegratorConfig,
) -> SampleOutcome {
    let [a, b, c, d, f] = params;
    let field = Family::Quadratic { a, b, c, d, f }.build().expect("finite parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(pc.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let det = DetectConfig::default();
    let mut out = SampleOutcome {
        index,
        params,
        singularities: sing.clone(),
        foci: Vec::new(),
        cycles: Vec::new(),
        closure_error: 0.0,
        c_zero_cycles: None,
        c_zero_degenerate: None,
        polylines: Vec::new(),
    };
    if let Ok(f0) = (Family::Quadratic { a, b, c: 0.0, d, f }).build() {
        let ymax = section_limit(&f0, pc.y_max);
        if ymax > 2.0 * pc.y_min {
            if let Ok(set) = find_cycles_with(&f0, (pc.y_min, ymax), pc.n, cfg, &det) {
                let degenerate = set.cycles.iter().filter(|c| c.klass == crate::cycles::CycleClass::Degenerate).count();
                out.c_zero_cycles = Some(set.cycles.len() - degenerate);
                out.c_zero_degenerate = Some(degenerate);
            }
        }
    }
    for s in sing.iter().filter(|s| s.kind == SingularityKind::Antisaddle) {
        let moved = translate(&field, s.x, s.y).expect("quadratic stays in range");
        out.closure_error = out.closure_error.max(closure_error(&field, &moved, s.x, s.y, &mut rng, pc.closure_points));
        let mut focus = FocusOutcome {
            x: s.x,
            y: s.y,
            normal_form: quadratic_normal_form(&moved),
            y_range: None,
            center: false,
            cycles: Vec::new(),
            failures: Vec::new(),
        };
        let ymax = section_limit(&moved, pc.y_max);
        if ymax > 2.0 * pc.y_min {
            focus.y_range = Some((pc.y_min, ymax));
            match find_cycles_with(&moved, (pc.y_min, ymax), pc.n, cfg, &det) {
                Ok(set) => {
                    focus.center = set.center_detected;
                    focus.failures = set.failures.iter().map(|f| f.reason.clone()).collect();
                    for cy in &set.cycles {
                        focus.cycles.push(out.cycles.len());
                        out.cycles.push(record(cy, out.foci.len(), s, d, f, cfg));
                        out.polylines.push(cy.polyline.iter().map(|p| (p.0 + s.x, p.1 + s.y)).collect());
                    }
                }
                Err(e) => focus.failures.push(e.tag().into()),
            }
        }
        out.foci.push(focus);
    }
    out
}

fn record(
    cy: &LimitCycle,
    focus: usize,
    s: &QuadraticSingularity,
    d: f64,
    f: f64,
    cfg: &IntegratorConfig,
) -> CycleRecord {
    // original-frame lines and points, expressed in the translated frame
    let meets_x0 = intersects_line(cy, s.x, 1.0, 0.0).unwrap_or(true);
    let alpha = -1.0 + d * s.x + f * s.y;
    let meets_line = if d == 0.0 && f == 0.0 { false } else { intersects_line(cy, alpha, d, f).unwrap_or(true) };
    let n = Polynomial2::affine(alpha, d, f);
    let integral = line_integral_positive(cy, &Polynomial2::zero(), &n, cfg).ok();
    CycleRecord {
        focus,
        y0: cy.y0,
        period: cy.period,
        multiplier: cy.multiplier,
        class: cy.klass,
        orientation: cy.orientation,
        min_y: cy.min_y + s.y,
        surrounds_focus: surrounds_point(cy, (0.0, 0.0)).ok(),
        surrounds_origin: surrounds_point(cy, (-s.x, -s.y)).ok(),
        meets_x0,
        meets_line,
        line_integral: integral,
    }
}

/// Draws `samples` members of the quadratic family, finds the cycles around
/// each antisaddle and checks them against the claims listed in the
/// report.
pub fn verify_prop1(pc: &Prop1Config, cfg: &IntegratorConfig) -> Result<PropositionReport> {
    if pc.samples == 0
        || !(pc.bound > 0.0)
        || !(pc.y_min > 0.0 && pc.y_max > pc.y_min)
        || pc.n < 8
        || !(pc.return_time > 0.0)
    {
        return Err(Error::InvalidArgument(
            "prop1 needs samples >= 1, bound > 0, 0 < y_min < y_max, n >= 8, return_time > 0".into(),
        ));
    }
    cfg.validate()?;
    let run_cfg = cfg.with_max_time(cfg.max_time.min(pc.return_time));
    let mut rng = ChaCha8Rng::seed_from_u64(pc.seed);
    let mut accepted = Vec::with_capacity(pc.samples);
    let mut rejected = 0usize;
    let mut attempts = 0usize;
    while accepted.len() < pc.samples {
        attempts += 1;
        if attempts > 20 * pc.samples {
            return Err(Error::InvalidArgument("too many degenerate draws".into()));
        }
        let params = draw(&mut rng, pc.bound);
        let [a, b, c, d, f] = params;
        match quadratic_singularities(&Family::Quadratic { a, b, c, d, f }) {
            Ok(s) if s.iter().all(|s| s.kind != SingularityKind::Degenerate) => {
                accepted.push((attempts - 1, params, s))
            }
            _ => rejected += 1,
        }
    }
    let outcomes: Vec<SampleOutcome> =
        accepted.into_par_iter().map(|(idx, params, sing)| analyse(idx, params, sing, pc, &run_cfg)).collect();

    let mut report = PropositionReport::new(Proposition::P1, json!({ "prop1": pc, "integrator": cfg }));
    let mut candidates: Vec<Value> = Vec::new();
    let candidate = |check: &str, o: &SampleOutcome, detail: Value| {
        json!({
            "check": check,
            "sample": o.index,
            "seed": pc.seed,
            "params": {"a": o.params[0], "b": o.params[1], "c": o.params[2], "d": o.params[3], "f": o.params[4]},
            "integrator": cfg,
            "foci": o.foci,
            "cycles": o.cycles,
            "detail": detail,
        })
    };

    // singularity residuals and translation closure
    let worst_closure = outcomes.iter().map(|o| o.closure_error).fold(0.0, f64::max);
    let mut worst_residual = 0.0f64;
    for o in &outcomes {
        let [a, b, c, d, f] = o.params;
        let field = Family::Quadratic { a, b, c, d, f }.build()?;
        for s in &o.singularities {
            let (p, q) = field.eval(s.x, s.y);
            worst_residual = worst_residual.max(p.abs()).max(q.abs());
        }
    }
    report.checks.push(Check::pass_if(
        "singularity residual below 1e-10",
        worst_residual < 1e-10,
        json!({ "max": worst_residual }),
    ));
    report.checks.push(Check::pass_if(
        "translation closure within 1e-12",
        worst_closure <= 1e-12,
        json!({ "max": worst_closure }),
    ));

    // (A) disjoint interiors
    let mut pairs = 0usize;
    let mut disjoint = 0usize;
    for o in &outcomes {
        for i in 0..o.cycles.len() {
            for j in i + 1..o.cycles.len() {
                if o.cycles[i].focus == o.cycles[j].focus {
                    continue;
                }
                pairs += 1;
                if crate::cycles::polylines_disjoint(&o.polylines[i], &o.polylines[j]) {
                    disjoint += 1;
                    candidates.push(candidate("A", o, json!({ "pair": [i, j] })));
                }
            }
        }
    }
    report.checks.push(Check::pass_if(
        "A: no two cycles with disjoint interiors",
        disjoint == 0,
        json!({ "pairs_checked": pairs, "disjoint_pairs": disjoint }),
    ));

    // (B) a cycle around the origin needs cd(2a+f) > 0 in the family chart
    let (mut b_checked, mut b_na, mut b_bad) = (0usize, 0usize, 0usize);
    let mut b_rows = Vec::new();
    for o in &outcomes {
        for cy in o.cycles.iter().filter(|c| c.surrounds_focus == Some(true)) {
            match o.foci[cy.focus].normal_form {
                Some(nf) => {
                    b_checked += 1;
                    b_rows.push(json!({ "sample": o.index, "focus": cy.focus, "cd_2a_f": nf.sign_quantity(), "class": cy.class }));
                    if !(nf.sign_quantity() > 0.0) {
                        b_bad += 1;
                        candidates.push(candidate("B", o, json!({ "focus": cy.focus, "normal_form": nf })));
                    }
                }
                None => b_na += 1,
            }
        }
    }
    let status_b = if b_bad > 0 {
        CheckStatus::Fail
    } else if b_checked > 0 {
        CheckStatus::Pass
    } else {
        CheckStatus::NotApplicable
    };
    let negative = b_rows.iter().filter(|r| r["cd_2a_f"].as_f64().is_some_and(|v| v < 0.0)).count();
    report.checks.push(Check::new(
        "B: cycle around the origin implies cd(2a+f) > 0",
        status_b,
        json!({ "cycles_checked": b_checked, "not_in_family_form": b_na, "violations": b_bad,
                "negative": negative, "cycles": b_rows }),
    ));

    // (C) orientation against sign for cycles off the y-axis, measured only
    let rows: Vec<Value> = outcomes
        .iter()
        .flat_map(|o| {
            let q = o.params[2] * o.params[3] * (2.0 * o.params[0] + o.params[4]);
            o.cycles.iter().filter(|c| !c.meets_x0).map(move |c| {
                json!({ "sample": o.index, "orientation": c.orientation, "cd_2a_f": q,
                        "matches_table": matches!(c.orientation, crate::cycles::Orientation::Positive) == (q < 0.0) })
            })
        })
        .collect();
    report.checks.push(Check::new(
        "C: orientation and sign for cycles off x = 0",
        CheckStatus::Measured,
        json!({ "cycles": rows }),
    ));

    // (D) no cycle meets the line -1 + dx + fy = 0
    let mut d_bad = 0usize;
    let mut total = 0usize;
    for o in &outcomes {
        for (k, cy) in o.cycles.iter().enumerate() {
            total += 1;
            if cy.meets_line {
                d_bad += 1;
                candidates.push(candidate("D", o, json!({ "cycle": k })));
            }
        }
    }
    report.checks.push(Check::pass_if(
        "D: no cycle meets -1 + dx + fy = 0",
        d_bad == 0,
        json!({ "cycles_checked": total, "violations": d_bad }),
    ));

    // (E) the line integral against the sign of d, measured only
    let rows: Vec<Value> = outcomes
        .iter()
        .flat_map(|o| {
            let d = o.params[3];
            o.cycles.iter().map(move |c| {
                json!({ "sample": o.index, "integral": c.line_integral, "d": d,
                        "same_sign": c.line_integral.map(|v| v.signum() == d.signum()) })
            })
        })
        .collect();
    report.checks.push(Check::new(
        "E: line integral of (-1 + dx + fy) dy",
        CheckStatus::Measured,
        json!({ "cycles": rows }),
    ));

    // (F) c = 0 leaves no cycle: at translated foci where it happens to
    // hold, and at the origin of every sample with c replaced by zero
    let mut f_app = 0usize;
    let mut f_bad = 0usize;
    for o in &outcomes {
        for (k, fo) in o.foci.iter().enumerate() {
            if fo.normal_form.is_some_and(|nf| nf.c == 0.0) {
                f_app += 1;
                if !fo.cycles.is_empty() {
                    f_bad += 1;
                    candidates.push(candidate("F", o, json!({ "focus": k })));
                }
            }
        }
        if let Some(n) = o.c_zero_cycles {
            f_app += 1;
            if n > 0 {
                f_bad += 1;
                candidates.push(candidate("F", o, json!({ "c_zero_cycles": n })));
            }
        }
    }
    let status_f = if f_bad > 0 {
        CheckStatus::Fail
    } else if f_app > 0 {
        CheckStatus::Pass
    } else {
        CheckStatus::NotApplicable
    };
    let degenerate: usize = outcomes.iter().filter_map(|o| o.c_zero_degenerate).sum();
    report.checks.push(Check::new(
        "F: no cycle around a focus with c = 0",
        status_f,
        json!({ "systems": f_app, "violations": f_bad, "unclassified_points": degenerate }),
    ));

    let foci: usize = outcomes.iter().map(|o| o.foci.len()).sum();
    let centers: usize = outcomes.iter().flat_map(|o| &o.foci).filter(|f| f.center).count();
    let with_cycles: Vec<Value> = outcomes
        .iter()
        .filter(|o| !o.cycles.is_empty())
        .map(|o| json!({ "sample": o.index, "params": o.params, "cycles": o.cycles }))
        .collect();
    report.checks.push(Check::new(
        "sampling summary",
        CheckStatus::Measured,
        json!({
            "accepted": outcomes.len(), "rejected": rejected, "antisaddles": foci,
            "centers": centers, "cycles": total, "samples_with_cycles": with_cycles,
        }),
    ));
    report.counterexample_candidates = candidates;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_of_untranslated_member() {
        let fam = Family::Quadratic { a: 0.3, b: -0.7, c: 0.1, d: 1.2, f: -0.4 };
        let nf = quadratic_normal_form(&fam.build().unwrap()).unwrap();
        assert_eq!(nf.family(), fam);
        assert_eq!((nf.beta, nf.gamma), (1.0, 1.0));
    }

    #[test]
    fn translation_off_the_axis_leaves_the_family() {
        // equilibrium (1, 0) of x' = y, y' = -x + x^2 + x y
        let fam = Family::Quadratic { a: 0.0, b: 0.0, c: 0.0, d: 1.0, f: 1.0 };
        let moved = translate(&fam.build().unwrap(), 1.0, 0.0).unwrap();
        assert!(quadratic_normal_form(&moved).is_none());
    }

    #[test]
    fn normal_form_rescaling_is_exact() {
        // equilibrium (0, -1/b) keeps the family form up to scaling
        let (a, b, c, d, f) = (0.5, 0.8, -0.3, 0.9, -1.2);
        let field = Family::Quadratic { a, b, c, d, f }.build().unwrap();
        let y0 = -1.0 / b;
        let moved = translate(&field, 0.0, y0).unwrap();
        let nf = quadratic_normal_form(&moved).unwrap();
        let norm = nf.family().build().unwrap();
        for &(u, v) in &[(0.3, -0.2), (-1.0, 0.7), (1.5, 1.1)] {
            let (p, q) = moved.eval(u, nf.beta * v);
            let (pn, qn) = norm.eval(u, v);
            assert!((nf.gamma * p - pn).abs() < 1e-12);
            assert!((nf.gamma / nf.beta * q - qn).abs() < 1e-12);
        }
    }

    #[test]
    fn small_run_is_deterministic() {
        let pc = Prop1Config { samples: 6, seed: 7, n: 16, ..Prop1Config::default() };
        let cfg = IntegratorConfig::default();
        let r1 = verify_prop1(&pc, &cfg).unwrap();
        let r2 = verify_prop1(&pc, &cfg).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert!(r1.check("translation closure within 1e-12").is_some());
    }
}
