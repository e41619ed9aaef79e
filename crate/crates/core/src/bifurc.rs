//! Double cycles of the quintic Lienard family `x' = y + a x^5 + b x^3 + c x,
//! y' = -x`: cycle counting with multiplicity, the fold `a = phi(b, c)`,
//! its surface over a `(b, c)` grid, and rotated-family sweeps.
//!
//! Solvers work in the chart `b > 0, c < 0`. The other admissible chart is
//! mapped onto it: reversing time and reflecting `y -> -y` sends
//! `(a, b, c)` to `(-a, -b, -c)`, and the family is odd in `(x, y)`, so the
//! section point of a cycle is unchanged while `a*` changes sign.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cycles::{detect_in_scan, find_cycles_with, CycleSet, DetectConfig};
use crate::error::{Error, Result};
use crate::field::{Family, VectorField2};
use crate::flow::IntegratorConfig;
use crate::retmap::{first_return, geometric_grid, pprime2, scan_points, ScanEntry};

fn quintic(a: f64, b: f64, c: f64) -> Result<VectorField2> {
    Family::QuinticLienard { a, b, c }.build()
}

/// Natural amplitude of the family: where the cubic and linear terms (or
/// the quintic and linear ones) balance.
pub fn natural_scale(a: f64, b: f64, c: f64) -> f64 {
    if b != 0.0 && c != 0.0 {
        (c / b).abs().sqrt()
    } else if a != 0.0 && c != 0.0 {
        (c / a).abs().powf(0.25)
    } else {
        1.0
    }
}

/// Cycle counts over an adaptively grown section range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCount {
    pub hyperbolic: usize,
    pub semistable: usize,
    pub y_range: (f64, f64),
    pub set: CycleSet,
}

impl CycleCount {
    /// Hyperbolic cycles count once, semistable ones twice.
    pub fn multiplicity(&self) -> usize {
        self.hyperbolic + 2 * self.semistable
    }
}

/// Sampling policy of [`count_cycles_in`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountConfig {
    /// Initial range as multiples of the natural scale.
    pub lo: f64,
    pub hi: f64,
    /// Samples in the initial range.
    pub n: usize,
    /// Samples added per doubling of the upper end.
    pub n_grow: usize,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { lo: 0.02, hi: 4.0, n: 48, n_grow: 8 }
    }
}

fn outer_sign(e: &ScanEntry, det: &DetectConfig) -> Option<i8> {
    let s = e.sample()?;
    let d = s.displacement();
    Some(if d.abs() <= det.fixed_point_rel * s.y.max(1.0) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    })
}

/// Counts the cycles of `(a, b, c)` crossing the positive y-axis.
pub fn count_cycles(b: f64, c: f64, a: f64, cfg: &IntegratorConfig) -> Result<CycleCount> {
    let field = quintic(a, b, c)?;
    count_cycles_in(&field, natural_scale(a, b, c), &CountConfig::default(), cfg)
}

/// Counts cycles of `field` on `[lo, hi] * scale`, doubling the upper end
/// while the outermost orbits move outwards. The outer region is settled
/// once orbits escape, or once the displacement is negative at two
/// successive upper ends. Growth past the escape radius gives
/// [`Error::RangeUndetermined`].
pub fn count_cycles_in(
    field: &VectorField2,
    scale: f64,
    policy: &CountConfig,
    cfg: &IntegratorConfig,
) -> Result<CycleCount> {
    cfg.validate()?;
    if !(scale > 0.0 && scale.is_finite())
        || !(policy.lo > 0.0 && policy.hi > policy.lo)
        || policy.n < 8
        || policy.n_grow < 1
    {
        return Err(Error::InvalidArgument("invalid counting range".into()));
    }
    let det = DetectConfig::default();
    let ymin = policy.lo * scale;
    let mut ymax = policy.hi * scale;
    let mut entries = scan_points(field, &geometric_grid(ymin, ymax, policy.n), cfg);
    let mut prev_negative = false;
    loop {
        let last = entries.last().expect("non-empty scan");
        let sign = match outer_sign(last, &det) {
            None => break,
            Some(s) => s,
        };
        if sign < 0 && prev_negative {
            break;
        }
        prev_negative = sign < 0;
        if 2.0 * ymax > cfg.escape_radius {
            return Err(Error::RangeUndetermined);
        }
        let grow = geometric_grid(ymax, 2.0 * ymax, policy.n_grow + 1);
        entries.extend(scan_points(field, &grow[1..], cfg));
        ymax *= 2.0;
    }
    let set = detect_in_scan(field, &entries, cfg, &det);
    Ok(CycleCount {
        hyperbolic: set.hyperbolic_count(),
        semistable: set.semistable_count(),
        y_range: (ymin, ymax),
        set,
    })
}

fn check_chart(b: f64, c: f64) -> Result<()> {
    if !(b.is_finite() && c.is_finite()) {
        return Err(Error::NonFiniteParameter("b, c".into()));
    }
    if !(b * c < 0.0) {
        return Err(Error::InvalidArgument(format!("semistable cycles need bc < 0, got b = {b}, c = {c}")));
    }
    Ok(())
}

/// `(b, c, sign)` in the chart `b > 0, c < 0`; multiply `a` by `sign` to map
/// between charts.
fn canonical(b: f64, c: f64) -> (f64, f64, f64) {
    if b > 0.0 {
        (b, c, 1.0)
    } else {
        (-b, -c, -1.0)
    }
}

/// An interval of `a` across which the cycle count drops from two to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldBracket {
    pub a_two: f64,
    pub a_zero: f64,
    /// Section ordinate between the two cycles at `a_two`.
    pub y_guess: f64,
    pub evaluations: usize,
}

impl FoldBracket {
    pub fn width(&self) -> f64 {
        (self.a_two - self.a_zero).abs()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a_two + self.a_zero)
    }
}

fn pair_guess(count: &CycleCount) -> Option<f64> {
    let ys: Vec<f64> = count.set.cycles.iter().map(|c| c.y0).collect();
    match ys.as_slice() {
        [lo, hi] => Some((lo * hi).sqrt()),
        [y] => Some(*y),
        _ => None,
    }
}

/// Bisects on `a` between a two-cycle and a zero-cycle parameter until the
/// bracket is narrower than `1e-6 (1 + |a|)`.
pub fn bracket_fold(b: f64, c: f64, cfg: &IntegratorConfig) -> Result<FoldBracket> {
    check_chart(b, c)?;
    let (bc, cc, sign) = canonical(b, c);
    let br = bracket_fold_canonical(bc, cc, cfg)?;
    Ok(FoldBracket { a_two: sign * br.a_two, a_zero: sign * br.a_zero, ..br })
}

fn bracket_fold_canonical(b: f64, c: f64, cfg: &IntegratorConfig) -> Result<FoldBracket> {
    let unit = b * b / c.abs();
    let mut evaluations = 0;
    let mut count_at = |a: f64| -> Option<CycleCount> {
        evaluations += 1;
        count_cycles(b, c, a, cfg).ok()
    };
    // coarse outward search from a = 0-
    let mut two: Option<(f64, CycleCount)> = None;
    let mut zero: Option<f64> = None;
    let mut a = -0.01 * unit;
    for _ in 0..24 {
        match count_at(a) {
            Some(cnt) if cnt.multiplicity() == 0 => {
                zero = Some(a);
                break;
            }
            Some(cnt) if cnt.multiplicity() == 2 && cnt.semistable == 0 => two = Some((a, cnt)),
            _ => {}
        }
        a *= 2.0;
    }
    let Some(mut a_zero) = zero else {
        return Err(Error::NoFoldFound(format!("count never reached zero down to a = {a}")));
    };
    let Some((mut a_two, mut cnt_two)) = two else {
        return Err(Error::NoFoldFound(format!("no two-cycle parameter above a = {a_zero}")));
    };
    while (a_two - a_zero).abs() > 1e-6 * (1.0 + a_two.abs()) {
        let mid = 0.5 * (a_two + a_zero);
        match count_at(mid) {
            Some(cnt) if cnt.multiplicity() == 0 => a_zero = mid,
            Some(cnt) if cnt.multiplicity() >= 2 => {
                a_two = mid;
                cnt_two = cnt;
            }
            Some(cnt) => {
                return Err(Error::NoFoldFound(format!(
                    "count {} at a = {mid} between the two- and zero-cycle sides",
                    cnt.multiplicity()
                )))
            }
            None => return Err(Error::NoFoldFound(format!("count undetermined at a = {mid}"))),
        }
    }
    let y_guess = pair_guess(&cnt_two)
        .ok_or_else(|| Error::NoFoldFound(format!("cycles at a = {a_two} could not be located")))?;
    Ok(FoldBracket { a_two, a_zero, y_guess, evaluations })
}

/// A solved double cycle `P(y0) = y0`, `h(y0) = 0` at `a = a_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemistableSolution {
    pub b: f64,
    pub c: f64,
    pub a_star: f64,
    pub y0_star: f64,
    pub res_d: f64,
    pub res_h: f64,
    pub pprime2: f64,
    pub pprime2_error: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Residual tolerance on both components of the fold system.
pub const FOLD_TOL: f64 = 1e-8;

fn residual(b: f64, c: f64, a: f64, y: f64, cfg: &IntegratorConfig) -> Result<[f64; 2]> {
    let s = first_return(&quintic(a, b, c)?, y, cfg)?;
    Ok([s.displacement(), s.h])
}

/// Damped Newton on `F(a, y0) = (P_a(y0) - y0, h_a(y0))` from `init`.
///
/// The Jacobian is a central difference with relative steps `1e-5`. Steps
/// are halved until the residual norm drops, down to `2^-20`.
pub fn solve_semistable(b: f64, c: f64, init: (f64, f64), cfg: &IntegratorConfig) -> Result<SemistableSolution> {
    check_chart(b, c)?;
    let (bc, cc, sign) = canonical(b, c);
    let sol = solve_canonical(bc, cc, (sign * init.0, init.1), cfg)?;
    Ok(SemistableSolution { b, c, a_star: sign * sol.a_star, ..sol })
}

fn solve_canonical(b: f64, c: f64, init: (f64, f64), cfg: &IntegratorConfig) -> Result<SemistableSolution> {
    let (mut a, mut y) = init;
    if !(a.is_finite() && y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad initial guess {init:?}")));
    }
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut r = residual(b, c, a, y, cfg)?;
    for it in 0..=50 {
        if r[0].abs() < FOLD_TOL && r[1].abs() < FOLD_TOL {
            let d2 = pprime2(&quintic(a, b, c)?, y, cfg)?;
            return Ok(SemistableSolution {
                b,
                c,
                a_star: a,
                y0_star: y,
                res_d: r[0].abs(),
                res_h: r[1].abs(),
                pprime2: d2.value,
                pprime2_error: d2.error,
                converged: d2.value.abs() > 10.0 * d2.error,
                iterations: it,
            });
        }
        if it == 50 {
            break;
        }
        let da = 1e-5 * a.abs().max(1e-3);
        let dy = 1e-5 * y;
        let (ra_p, ra_m) = (residual(b, c, a + da, y, cfg)?, residual(b, c, a - da, y, cfg)?);
        let (ry_p, ry_m) = (residual(b, c, a, y + dy, cfg)?, residual(b, c, a, y - dy, cfg)?);
        let j = [
            [(ra_p[0] - ra_m[0]) / (2.0 * da), (ry_p[0] - ry_m[0]) / (2.0 * dy)],
            [(ra_p[1] - ra_m[1]) / (2.0 * da), (ry_p[1] - ry_m[1]) / (2.0 * dy)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = (j[0][0] * j[1][1]).abs() + (j[0][1] * j[1][0]).abs();
        if !det.is_finite() || det.abs() <= 1e-14 * scale {
            return Err(Error::JacobianSingular);
        }
        let step_a = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let step_y = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        loop {
            let (na, ny) = (a + lambda * step_a, y + lambda * step_y);
            let trial = if ny > 0.0 { residual(b, c, na, ny, cfg).ok() } else { None };
            if let Some(nr) = trial.filter(|nr| norm(*nr) < norm(r)) {
                a = na;
                y = ny;
                r = nr;
                break;
            }
            lambda *= 0.5;
            if lambda < 2f64.powi(-20) {
                return Err(Error::NewtonDiverged { iterations: it + 1 });
            }
        }
    }
    Err(Error::NewtonDiverged { iterations: 50 })
}

/// [`bracket_fold`] followed by [`solve_semistable`] from the bracket midpoint.
pub fn semistable(b: f64, c: f64, cfg: &IntegratorConfig) -> Result<(FoldBracket, SemistableSolution)> {
    let br = bracket_fold(b, c, cfg)?;
    let sol = solve_semistable(b, c, (br.midpoint(), br.y_guess), cfg)?;
    Ok((br, sol))
}

/// How a surface node obtained its initial guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WarmStart {
    Cold,
    Left,
    Up,
    /// Warm start failed; solved from a fresh fold bracket.
    ColdFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiNode {
    pub b: f64,
    pub c: f64,
    pub warm_start: WarmStart,
    pub solution: Option<SemistableSolution>,
    pub failure: Option<String>,
}

/// Solved fold points over a `(b, c)` grid, row-major in `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSurface {
    pub b_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    pub nodes: Vec<PhiNode>,
}

impl PhiSurface {
    pub fn node(&self, i: usize, j: usize) -> &PhiNode {
        &self.nodes[i * self.c_grid.len() + j]
    }

    pub fn all_converged(&self) -> bool {
        self.nodes.iter().all(|n| n.solution.is_some_and(|s| s.converged))
    }

    /// CSV with columns `b,c,a_star,y0_star,res_d,res_h,converged`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["b", "c", "a_star", "y0_star", "res_d", "res_h", "converged"])?;
        for n in &self.nodes {
            match &n.solution {
                Some(s) => wr.serialize((n.b, n.c, s.a_star, s.y0_star, s.res_d, s.res_h, s.converged))?,
                None => wr.serialize((n.b, n.c, "", "", "", "", false))?,
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Solves every grid node, warm-starting from the left neighbour (or the
/// node above at the start of a row) and falling back to a cold fold
/// bracket when the warm start fails.
pub fn phi_surface(b_grid: &[f64], c_grid: &[f64], cfg: &IntegratorConfig) -> Result<PhiSurface> {
    if b_grid.is_empty() || c_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    for &b in b_grid {
        for &c in c_grid {
            check_chart(b, c)?;
        }
    }
    cfg.validate()?;
    let nc = c_grid.len();
    let mut nodes: Vec<PhiNode> = Vec::with_capacity(b_grid.len() * nc);
    for (i, &b) in b_grid.iter().enumerate() {
        for (j, &c) in c_grid.iter().enumerate() {
            let solved = |k: usize| nodes.get(k).and_then(|n: &PhiNode| n.solution.filter(|s| s.converged));
            let neighbour = if j > 0 {
                solved(i * nc + j - 1).map(|s| (WarmStart::Left, s))
            } else if i > 0 {
                solved((i - 1) * nc + j).map(|s| (WarmStart::Up, s))
            } else {
                None
            };
            let node = match neighbour {
                Some((src, s)) => {
                    // exact rescaling in b, sign flips between charts
                    let (bn, _, sn) = canonical(s.b, s.c);
                    let (bt, _, st) = canonical(b, c);
                    let ratio = bt / bn;
                    let guess = (st * sn * s.a_star * ratio * ratio, s.y0_star / ratio.sqrt());
                    match solve_semistable(b, c, guess, cfg) {
                        Ok(sol) if sol.converged => {
                            PhiNode { b, c, warm_start: src, solution: Some(sol), failure: None }
                        }
                        _ => cold_node(b, c, WarmStart::ColdFallback, cfg),
                    }
                }
                None => cold_node(b, c, WarmStart::Cold, cfg),
            };
            nodes.push(node);
        }
    }
    Ok(PhiSurface { b_grid: b_grid.to_vec(), c_grid: c_grid.to_vec(), nodes })
}

fn cold_node(b: f64, c: f64, warm_start: WarmStart, cfg: &IntegratorConfig) -> PhiNode {
    match semistable(b, c, cfg) {
        Ok((_, sol)) => {
            let failure = (!sol.converged).then(|| "P'' not resolved above its error estimate".to_string());
            PhiNode { b, c, warm_start, solution: Some(sol), failure }
        }
        Err(e) => PhiNode { b, c, warm_start, solution: None, failure: Some(e.to_string()) },
    }
}

/// Cycle counts at `a* + delta` inside the window `y0* [1/2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbCount {
    pub delta: f64,
    pub a: f64,
    pub hyperbolic: usize,
    pub semistable: usize,
    pub candidates: usize,
}

impl PerturbCount {
    pub fn multiplicity(&self) -> usize {
        self.hyperbolic + 2 * self.semistable
    }
}

/// Counts cycles near a solved double cycle after moving `a` by each offset.
pub fn perturb_semistable(
    sol: &SemistableSolution,
    deltas: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<PerturbCount>> {
    if !sol.converged {
        return Err(Error::InvalidArgument("perturbation needs a converged solution".into()));
    }
    let limit = 1e-2 * (1.0 + sol.a_star.abs());
    let det = DetectConfig::default();
    deltas
        .iter()
        .map(|&delta| {
            if !(delta.abs() <= limit) {
                return Err(Error::InvalidArgument(format!("offset {delta} exceeds {limit}")));
            }
            let a = sol.a_star + delta;
            let field = quintic(a, sol.b, sol.c)?;
            let set = find_cycles_with(&field, (0.5 * sol.y0_star, 2.0 * sol.y0_star), 40, cfg, &det)?;
            Ok(PerturbCount {
                delta,
                a,
                hyperbolic: set.hyperbolic_count(),
                semistable: set.semistable_count(),
                candidates: set.candidates.len(),
            })
        })
        .collect()
}

/// One point of an `a`-scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub a: f64,
    /// Count with multiplicity, `None` when the range was undetermined.
    pub count: Option<usize>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessScan {
    pub b: f64,
    pub c: f64,
    pub a_star: f64,
    pub step: f64,
    pub points: Vec<ScanPoint>,
    /// Number of changes in the determined count sequence.
    pub transitions: usize,
    /// Exactly one change, from zero cycles (far side) to two.
    pub unique: bool,
}

/// Counts cycles on `a in [2 a*, 0)` with step `(|a*| + 1) 1e-2`.
pub fn uniqueness_scan(b: f64, c: f64, a_star: f64, cfg: &IntegratorConfig) -> Result<UniquenessScan> {
    check_chart(b, c)?;
    if !(a_star.is_finite() && a_star != 0.0) {
        return Err(Error::InvalidArgument(format!("a* = {a_star} must be finite and nonzero")));
    }
    let step = (a_star.abs() + 1.0) * 1e-2;
    let n = (a_star.abs() / step).ceil() as usize * 2;
    let a_list: Vec<f64> =
        (0..n).map(|k| 2.0 * a_star - a_star.signum() * step * k as f64).filter(|a| a * a_star > 0.0).collect();
    use rayon::prelude::*;
    let points: Vec<ScanPoint> = a_list
        .par_iter()
        .map(|&a| match count_cycles(b, c, a, cfg) {
            Ok(cnt) => ScanPoint { a, count: Some(cnt.multiplicity()), status: "ok".into() },
            Err(e) => ScanPoint { a, count: None, status: e.tag().into() },
        })
        .collect();
    let seq: Vec<usize> = points.iter().filter_map(|p| p.count).collect();
    let changes: Vec<(usize, usize)> = seq.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0], w[1])).collect();
    let unique = changes == [(0, 2)];
    Ok(UniquenessScan { b, c, a_star, step, transitions: changes.len(), points, unique })
}

/// Cycle section points at one value of the rotation parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub y_star: Vec<f64>,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: String,
    pub params: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// Per tracked cycle: +1 increasing in lambda, -1 decreasing, 0 if not
    /// strictly monotone (or a single row).
    pub monotone: Vec<i8>,
    /// `(lambda, last_good)` where tracking failed.
    pub lost: Option<(f64, f64)>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda", "cycle", "y_star", "multiplier"])?;
        for r in &self.rows {
            for (k, (y, m)) in r.y_star.iter().zip(&r.multipliers).enumerate() {
                wr.serialize((r.lambda, k, y, m))?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Tracks each hyperbolic cycle of `family` across `lambda = -c` on
/// `n` equally spaced values. The starting cycles come from a full count;
/// later values refine inside a bracket grown around the previous point.
///
/// Returns [`Error::CycleLost`] when a tracked cycle disappears; use
/// [`rotated_sweep_table`] to keep the partial table.
pub fn rotated_sweep(
    family: &Family,
    lambda_range: (f64, f64),
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<SweepTable> {
    let t = rotated_sweep_table(family, lambda_range, n, cfg)?;
    match t.lost {
        Some((lambda, last_good)) => Err(Error::CycleLost { lambda, last_good }),
        None => Ok(t),
    }
}

pub fn rotated_sweep_table(
    family: &Family,
    lambda_range: (f64, f64),
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<SweepTable> {
    let (lo, hi) = lambda_range;
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) || n == 0 {
        return Err(Error::InvalidArgument(format!("bad sweep range {lambda_range:?} with n = {n}")));
    }
    family.rotation_param().ok_or_else(|| {
        Error::InvalidArgument(format!("{} has no designated rotation parameter", family.kind().name()))
    })?;
    let lambdas: Vec<f64> = if n == 1 || lo == hi {
        vec![lo]
    } else {
        (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
    };
    let start = family.with_rotation(lambdas[0])?;
    let field = start.build()?;
    let scale = match start {
        Family::QuinticLienard { a, b, c } => natural_scale(a, b, c),
        _ => 1.0,
    };
    let first = count_cycles_in(&field, scale, &CountConfig::default(), cfg)?;
    let tracked: Vec<_> = first.set.cycles.iter().filter(|c| c.klass.is_hyperbolic()).collect();
    let mut rows = vec![SweepRow {
        lambda: lambdas[0],
        y_star: tracked.iter().map(|c| c.y0).collect(),
        multipliers: tracked.iter().map(|c| c.multiplier).collect(),
    }];
    let mut lost = None;
    'sweep: for &lambda in &lambdas[1..] {
        let field = family.with_rotation(lambda)?.build()?;
        let prev = rows.last().expect("first row present");
        let mut row = SweepRow { lambda, y_star: Vec::new(), multipliers: Vec::new() };
        for &y in &prev.y_star {
            match track(&field, y, cfg) {
                Ok((ys, m)) => {
                    row.y_star.push(ys);
                    row.multipliers.push(m);
                }
                Err(_) => {
                    lost = Some((lambda, prev.lambda));
                    break 'sweep;
                }
            }
        }
        rows.push(row);
    }
    let ncyc = rows[0].y_star.len();
    let monotone = (0..ncyc)
        .map(|k| {
            if rows.len() < 2 {
                return 0;
            }
            let diffs: Vec<f64> = rows.windows(2).map(|w| w[1].y_star[k] - w[0].y_star[k]).collect();
            if diffs.iter().all(|&d| d > 1e-9) {
                1
            } else if diffs.iter().all(|&d| d < -1e-9) {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(SweepTable { family: family.kind().name().into(), params: family.params(), rows, monotone, lost })
}

/// The hyperbolic cycle nearest `y` (in log scale) inside `[y/2, 2y]`.
fn track(field: &VectorField2, y: f64, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    let set = find_cycles_with(field, (0.5 * y, 2.0 * y), 24, cfg, &DetectConfig::default())?;
    set.cycles
        .iter()
        .filter(|c| c.klass.is_hyperbolic())
        .min_by(|a, b| (a.y0 / y).ln().abs().total_cmp(&(b.y0 / y).ln().abs()))
        .map(|c| (c.y0, c.multiplier))
        .ok_or(Error::NoReturn { y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_preconditions() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(bracket_fold(1.0, 1.0, &cfg), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_semistable(1.0, 1.0, (-0.2, 1.0), &cfg), Err(Error::InvalidArgument(_))));
        assert!(matches!(phi_surface(&[1.0, -1.0], &[-1.0], &cfg), Err(Error::InvalidArgument(_))));
        assert_eq!(canonical(-2.0, 3.0), (2.0, -3.0, -1.0));
    }

    #[test]
    fn counts_at_origin_of_a() {
        let cfg = IntegratorConfig::default();
        let c = count_cycles(1.0, -1.0, 0.0, &cfg).unwrap();
        assert_eq!((c.hyperbolic, c.semistable), (1, 0));
        let c = count_cycles(1.0, -1.0, -10.0, &cfg).unwrap();
        assert_eq!((c.hyperbolic, c.semistable), (0, 0));
    }

    #[test]
    fn zero_width_sweep() {
        let fam = Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 };
        let t = rotated_sweep(&fam, (1.0, 1.0), 5, &IntegratorConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].y_star.len(), 1);
    }
}
