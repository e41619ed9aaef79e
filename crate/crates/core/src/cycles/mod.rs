//! Limit cycle detection from the displacement `d(y) = P(y) - y`, stability
//! classification, and the geometry of detected cycles.

pub mod geometry;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Polynomial2, VectorField2};
use crate::flow::dopri::Stepper;
use crate::flow::{integrate, IntegratorConfig};
use crate::retmap::{first_return, geometric_grid, scan_points, ReturnSample, ScanEntry};
use crate::roots::try_bracketed_root;
use geometry::Point;

/// Stability class of a cycle, read off `h(y0)` and, when `h` is
/// numerically zero, from the one-sided displacement signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleClass {
    Stable,
    Unstable,
    /// Attracting from outside, repelling inside: `d < 0` on both sides.
    SemistableOuterStable,
    /// Attracting from inside, repelling outside: `d > 0` on both sides.
    SemistableInnerStable,
    Degenerate,
}

impl CycleClass {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, CycleClass::Stable | CycleClass::Unstable)
    }

    pub fn is_semistable(self) -> bool {
        matches!(self, CycleClass::SemistableOuterStable | CycleClass::SemistableInnerStable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Counter-clockwise.
    Positive,
    /// Clockwise.
    Negative,
}

impl Orientation {
    pub fn from_area(area: f64) -> Self {
        if area >= 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// Thresholds used by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectConfig {
    /// `|h(y0)|` below which a cycle is not hyperbolic.
    pub tol_h: f64,
    /// Fixed-point tolerance, relative to `max(1, y0)`.
    pub fixed_point_rel: f64,
    /// `|d| < center_rel * y` marks an identity-map sample.
    pub center_rel: f64,
    /// Consecutive identity samples needed to declare a center.
    pub center_run: usize,
    /// Shorter identity runs of at least this length are reported as a
    /// degenerate band.
    pub degenerate_run: usize,
    pub candidate_d: f64,
    pub candidate_h: f64,
    /// Maximum deviation between the orbit and a polyline chord.
    pub chord_tol: f64,
    /// Refine local minima of `|d|` to uncover closely spaced cycle pairs.
    pub probe_extrema: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            tol_h: 1e-7,
            fixed_point_rel: 1e-9,
            center_rel: 1e-7,
            center_run: 20,
            degenerate_run: 3,
            candidate_d: 1e-5,
            candidate_h: 1e-4,
            chord_tol: 1e-3,
            probe_extrema: true,
        }
    }
}

/// Bounding box summary of a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

/// A refined periodic orbit through `(0, y0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub y0: f64,
    pub period: f64,
    pub multiplier: f64,
    pub h: f64,
    /// `|P(y0) - y0|` at the refined point.
    pub residual: f64,
    #[serde(rename = "class")]
    pub klass: CycleClass,
    pub orientation: Orientation,
    pub min_y: f64,
    pub bbox: BoundingBox,
    /// Test points found inside the cycle (the section focus at the origin
    /// when it is enclosed).
    pub surrounds: Vec<Point>,
    #[serde(skip)]
    pub polyline: Vec<Point>,
    #[serde(skip)]
    pub field: VectorField2,
}

/// Summary of a cycle's closed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleGeometry {
    pub orientation: Orientation,
    pub min_y: f64,
    pub bbox: BoundingBox,
    pub signed_area: f64,
}

/// A tangential zero of the displacement, to be polished by the fold solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemistableCandidate {
    pub y: f64,
    pub d: f64,
    pub h: f64,
}

/// A bracket or refinement that could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectFailure {
    pub y_lo: f64,
    pub y_hi: f64,
    pub reason: String,
}

/// Detected cycles ordered by `y0`, plus scan metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSet {
    pub cycles: Vec<LimitCycle>,
    pub candidates: Vec<SemistableCandidate>,
    pub center_detected: bool,
    pub range: (f64, f64),
    pub n: usize,
    /// Scan samples that failed, with their error tag.
    pub sample_failures: Vec<(f64, String)>,
    pub failures: Vec<DetectFailure>,
    pub notes: Vec<String>,
}

impl CycleSet {
    pub fn hyperbolic_count(&self) -> usize {
        self.cycles.iter().filter(|c| c.klass.is_hyperbolic()).count()
    }

    pub fn semistable_count(&self) -> usize {
        self.cycles.iter().filter(|c| c.klass.is_semistable()).count()
    }

    /// Number of cycles counted with multiplicity (semistable cycles twice).
    pub fn multiplicity(&self) -> usize {
        self.hyperbolic_count() + 2 * self.semistable_count()
    }

    /// JSON array of `{y0, period, multiplier, class, orientation, min_y}`.
    pub fn export_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .cycles
            .iter()
            .map(|c| {
                serde_json::json!({
                    "y0": c.y0,
                    "period": c.period,
                    "multiplier": c.multiplier,
                    "class": c.klass,
                    "orientation": c.orientation,
                    "min_y": c.min_y,
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

impl CycleSet {
    /// Bisects between a good sample and a NoReturn ordinate looking for a
    /// successful sample of the opposite displacement sign; refines the
    /// resulting bracket when one turns up.
    fn push_bracket(
        &mut self,
        field: &VectorField2,
        good: &ReturnSample,
        sg: i8,
        bad: f64,
        cfg: &IntegratorConfig,
        det: &DetectConfig,
    ) {
        let (mut near, mut far) = (good.y, bad);
        for _ in 0..50 {
            let mid = 0.5 * (near + far);
            match first_return(field, mid, cfg) {
                Ok(s) => match significant_sign(s.displacement(), mid, det) {
                    0 => {
                        if let Ok(c) = build_cycle(field, mid, cfg, det) {
                            self.cycles.push(c);
                        }
                        return;
                    }
                    x if x == sg => near = mid,
                    _ => {
                        let (lo, hi) = if good.y < mid { (good, &s) } else { (&s, good) };
                        match refine_bracket(field, lo, hi, cfg, det) {
                            Ok(c) => self.cycles.push(c),
                            Err(err) => {
                                self.failures.push(DetectFailure { y_lo: lo.y, y_hi: hi.y, reason: err.tag().into() })
                            }
                        }
                        return;
                    }
                },
                Err(_) => far = mid,
            }
            if (far - near).abs() <= 1e-12 * near.abs().max(1.0) {
                return;
            }
        }
    }
}

/// Writes a cycle polyline as CSV with header `x,y`.
pub fn write_polyline_csv<W: Write>(poly: &[Point], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y"])?;
    for p in poly {
        wr.serialize(p)?;
    }
    wr.flush()?;
    Ok(())
}

fn significant_sign(d: f64, y: f64, det: &DetectConfig) -> i8 {
    if d.abs() <= det.fixed_point_rel * y.max(1.0) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Scans `[ymin, ymax]` with `n` geometric samples and detects cycles.
pub fn find_cycles(field: &VectorField2, y_range: (f64, f64), n: usize, cfg: &IntegratorConfig) -> Result<CycleSet> {
    find_cycles_with(field, y_range, n, cfg, &DetectConfig::default())
}

pub fn find_cycles_with(
    field: &VectorField2,
    y_range: (f64, f64),
    n: usize,
    cfg: &IntegratorConfig,
    det: &DetectConfig,
) -> Result<CycleSet> {
    let (ymin, ymax) = y_range;
    if !(ymin > 0.0 && ymax > ymin && ymax.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cycle search range must satisfy 0 < ymin < ymax, got {y_range:?}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidArgument("cycle search needs at least 8 samples".into()));
    }
    cfg.validate()?;
    let entries = scan_points(field, &geometric_grid(ymin, ymax, n), cfg);
    Ok(detect_in_scan(field, &entries, cfg, det))
}

/// Cycle detection on an existing scan (entries sorted by `y`).
pub fn detect_in_scan(
    field: &VectorField2,
    entries: &[ScanEntry],
    cfg: &IntegratorConfig,
    det: &DetectConfig,
) -> CycleSet {
    let mut set = CycleSet {
        cycles: Vec::new(),
        candidates: Vec::new(),
        center_detected: false,
        range: (entries.first().map_or(0.0, |e| e.y), entries.last().map_or(0.0, |e| e.y)),
        n: entries.len(),
        sample_failures: entries
            .iter()
            .filter_map(|e| e.result.as_ref().err().map(|err| (e.y, err.tag().to_string())))
            .collect(),
        failures: Vec::new(),
        notes: Vec::new(),
    };

    // identity-map runs
    let mut best_run = (0usize, 0usize);
    let mut run_start = None;
    for (k, e) in entries.iter().enumerate() {
        let ident = e.sample().is_some_and(|s| s.displacement().abs() < det.center_rel * s.y);
        match (ident, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(st)) => {
                if k - st > best_run.1 - best_run.0 {
                    best_run = (st, k);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = run_start {
        if entries.len() - st > best_run.1 - best_run.0 {
            best_run = (st, entries.len());
        }
    }
    let run_len = best_run.1 - best_run.0;
    if run_len >= det.center_run {
        set.center_detected = true;
        set.notes.push(format!(
            "CenterDetected: {run_len} consecutive identity samples on y in [{}, {}]",
            entries[best_run.0].y,
            entries[best_run.1 - 1].y
        ));
        return set;
    }
    if run_len >= det.degenerate_run {
        let mid = &entries[best_run.0 + run_len / 2];
        set.notes.push(format!(
            "warning: {run_len} identity samples (fewer than {} needed for a center) around y = {}",
            det.center_run, mid.y
        ));
        match build_cycle(field, mid.y, cfg, det) {
            Ok(mut c) => {
                c.klass = CycleClass::Degenerate;
                set.cycles.push(c);
            }
            Err(e) => set.failures.push(DetectFailure { y_lo: mid.y, y_hi: mid.y, reason: e.tag().into() }),
        }
    }

    // sign changes between consecutive significant samples; a run of
    // NoReturn samples next to a good one is probed for a hidden bracket
    let mut prev: Option<(&ReturnSample, i8)> = None;
    let mut last_noreturn: Option<f64> = None;
    for e in entries {
        let s = match &e.result {
            Ok(s) => s,
            Err(err) => {
                if let (Some((ps, psg)), Error::NoReturn { .. }) = (prev, err) {
                    set.push_bracket(field, ps, psg, e.y, cfg, det);
                }
                prev = None;
                last_noreturn = matches!(err, Error::NoReturn { .. }).then_some(e.y);
                continue;
            }
        };
        let sg = significant_sign(s.displacement(), s.y, det);
        if sg == 0 {
            continue;
        }
        if let Some(bad) = last_noreturn.take() {
            set.push_bracket(field, s, sg, bad, cfg, det);
        }
        if let Some((ps, psg)) = prev {
            if psg != sg {
                match refine_bracket(field, ps, s, cfg, det) {
                    Ok(c) => set.cycles.push(c),
                    Err(err) => set.failures.push(DetectFailure { y_lo: ps.y, y_hi: s.y, reason: err.tag().into() }),
                }
            }
        }
        prev = Some((s, sg));
    }

    // local minima of |d| between samples of one sign: a pair of nearby
    // cycles can hide there, otherwise the minimum is a tangency candidate
    for k in 1..entries.len().saturating_sub(1) {
        let (Some(a), Some(b), Some(c)) = (entries[k - 1].sample(), entries[k].sample(), entries[k + 1].sample())
        else {
            continue;
        };
        let (da, db, dc) = (a.displacement(), b.displacement(), c.displacement());
        let sg = significant_sign(db, b.y, det);
        let side = significant_sign(da, a.y, det);
        if side == 0 || significant_sign(dc, c.y, det) != side {
            continue;
        }
        if sg == 0 {
            // the sample itself touches zero without a sign change
            if b.h.abs() < det.candidate_h {
                set.candidates.push(SemistableCandidate { y: b.y, d: db, h: b.h });
            }
            continue;
        }
        if sg != side {
            continue;
        }
        if !(db.abs() < da.abs() && db.abs() < dc.abs()) {
            continue;
        }
        let best = if det.probe_extrema { probe_extremum(field, a, b, c, sg, cfg, det) } else { Probe::Min(*b) };
        match best {
            Probe::Flip(m) => {
                for (lo, hi) in [(a, &m), (&m, c)] {
                    match refine_bracket(field, lo, hi, cfg, det) {
                        Ok(cy) => set.cycles.push(cy),
                        Err(err) => {
                            set.failures.push(DetectFailure { y_lo: lo.y, y_hi: hi.y, reason: err.tag().into() })
                        }
                    }
                }
            }
            Probe::Min(m) => {
                if m.displacement().abs() < det.candidate_d && m.h.abs() < det.candidate_h {
                    set.candidates.push(SemistableCandidate { y: m.y, d: m.displacement(), h: m.h });
                }
            }
        }
    }

    set.cycles.sort_by(|a, b| a.y0.total_cmp(&b.y0));
    set.cycles.dedup_by(|b, a| (a.y0 - b.y0).abs() <= 1e-9 * a.y0.max(1.0));
    set
}

enum Probe {
    Flip(ReturnSample),
    Min(ReturnSample),
}

/// Golden-section search for the minimum of `sg * d` on `[a.y, c.y]`,
/// stopping early once the displacement changes sign.
fn probe_extremum(
    field: &VectorField2,
    a: &ReturnSample,
    b: &ReturnSample,
    c: &ReturnSample,
    sg: i8,
    cfg: &IntegratorConfig,
    det: &DetectConfig,
) -> Probe {
    const G: f64 = 0.381_966_011_250_105_1;
    let sgf = f64::from(sg);
    let (mut lo, mut hi, mut x) = (a.y, c.y, *b);
    for _ in 0..60 {
        if hi - lo <= 1e-10 * x.y {
            break;
        }
        let right = hi - x.y > x.y - lo;
        let t = if right { x.y + G * (hi - x.y) } else { x.y - G * (x.y - lo) };
        let Ok(s) = first_return(field, t, cfg) else { break };
        let sgn = significant_sign(s.displacement(), t, det);
        if sgn == -sg {
            return Probe::Flip(s);
        }
        if sgf * s.displacement() < sgf * x.displacement() {
            if right {
                lo = x.y;
            } else {
                hi = x.y;
            }
            x = s;
        } else if right {
            hi = t;
        } else {
            lo = t;
        }
    }
    Probe::Min(x)
}

fn refine_bracket(
    field: &VectorField2,
    lo: &ReturnSample,
    hi: &ReturnSample,
    cfg: &IntegratorConfig,
    det: &DetectConfig,
) -> Result<LimitCycle> {
    let scale = hi.y.max(1.0);
    let ftol = 0.5 * det.fixed_point_rel * scale;
    let d = |y: f64| first_return(field, y, cfg).map(|s| s.displacement());
    let root = try_bracketed_root(d, lo.y, hi.y, lo.displacement(), hi.displacement(), 1e-14 * scale, ftol, 200)?;
    if root.fx.abs() >= det.fixed_point_rel * root.x.max(1.0) {
        return Err(Error::NoFoldFound(format!("refinement stalled at y = {} with d = {:e}", root.x, root.fx)));
    }
    build_cycle(field, root.x, cfg, det)
}

/// Builds the full [`LimitCycle`] record for a fixed point `y0`.
pub fn build_cycle(field: &VectorField2, y0: f64, cfg: &IntegratorConfig, det: &DetectConfig) -> Result<LimitCycle> {
    let s = first_return(field, y0, cfg)?;
    let klass = classify(field, &s, cfg, det)?;
    let polyline = trace_polyline(field, y0, s.t, cfg, det.chord_tol)?;
    let geom = polyline_geometry(&polyline)?;
    let mut cycle = LimitCycle {
        y0,
        period: s.t,
        multiplier: s.pprime,
        h: s.h,
        residual: s.displacement().abs(),
        klass,
        orientation: geom.orientation,
        min_y: geom.min_y,
        bbox: geom.bbox,
        surrounds: Vec::new(),
        polyline,
        field: *field,
    };
    if let Ok(true) = surrounds_point(&cycle, (0.0, 0.0)) {
        cycle.surrounds.push((0.0, 0.0));
    }
    Ok(cycle)
}

fn classify(field: &VectorField2, s: &ReturnSample, cfg: &IntegratorConfig, det: &DetectConfig) -> Result<CycleClass> {
    if s.h < -det.tol_h {
        return Ok(CycleClass::Stable);
    }
    if s.h > det.tol_h {
        return Ok(CycleClass::Unstable);
    }
    let delta = 1e-3 * s.y;
    let inner = first_return(field, s.y - delta, cfg)?.displacement();
    let outer = first_return(field, s.y + delta, cfg)?.displacement();
    Ok(match (inner < 0.0, outer < 0.0) {
        (true, true) => CycleClass::SemistableOuterStable,
        (false, false) => CycleClass::SemistableInnerStable,
        _ => CycleClass::Degenerate,
    })
}

/// Samples the orbit from `(0, y0)` over one period as a closed polyline
/// whose chords deviate from the orbit by at most `chord_tol`. The extreme
/// points in x and y are located on the orbit and included as vertices, so
/// the bounding box is exact to the integrator tolerance.
pub fn trace_polyline(
    field: &VectorField2,
    y0: f64,
    period: f64,
    cfg: &IntegratorConfig,
    chord_tol: f64,
) -> Result<Vec<Point>> {
    let tr = integrate(field, (0.0, y0), &cfg.with_max_time(period), None)?;
    let at = |t: f64| {
        let u = tr.state_at(t).expect("time within trajectory");
        (u[0], u[1])
    };
    fn subdivide(
        at: &dyn Fn(f64) -> Point,
        a: (f64, Point),
        b: (f64, Point),
        tol: f64,
        depth: u32,
        out: &mut Vec<(f64, Point)>,
    ) {
        let tm = 0.5 * (a.0 + b.0);
        let pm = at(tm);
        let dev = (pm.0 - 0.5 * (a.1 .0 + b.1 .0)).hypot(pm.1 - 0.5 * (a.1 .1 + b.1 .1));
        if dev > tol && depth < 40 {
            subdivide(at, a, (tm, pm), tol, depth + 1, out);
            subdivide(at, (tm, pm), b, tol, depth + 1, out);
        } else {
            out.push(b);
        }
    }
    let first = tr.nodes[0];
    let mut samples = vec![(first.t, (first.x, first.y))];
    for w in tr.nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        subdivide(&at, (a.t, (a.x, a.y)), (b.t, (b.x, b.y)), chord_tol, 0, &mut samples);
    }
    // the last node coincides with the start up to the return tolerance
    samples.pop();

    let mut out = Vec::with_capacity(samples.len() + 8);
    let n = samples.len();
    for k in 0..n {
        let (ta, pa) = samples[k];
        out.push(pa);
        if k + 1 == n {
            break;
        }
        let tb = samples[k + 1].0;
        let mut extra: Vec<f64> = Vec::new();
        for comp in [0usize, 1] {
            let g = |t: f64| {
                let p = at(t);
                let v = field.eval(p.0, p.1);
                if comp == 0 {
                    v.0
                } else {
                    v.1
                }
            };
            let (ga, gb) = (g(ta), g(tb));
            if ga != 0.0 && gb != 0.0 && ga.signum() != gb.signum() {
                let r = crate::roots::bracketed_root(g, ta, tb, ga, gb, 1e-14 * tb.abs().max(1.0), 0.0, 80);
                if r.x > ta && r.x < tb {
                    extra.push(r.x);
                }
            }
        }
        extra.sort_by(f64::total_cmp);
        out.extend(extra.into_iter().map(at));
    }
    if out.len() < 3 {
        return Err(Error::DegeneratePolyline);
    }
    Ok(out)
}

fn polyline_geometry(poly: &[Point]) -> Result<CycleGeometry> {
    if poly.len() < 3 {
        return Err(Error::DegeneratePolyline);
    }
    let area = geometry::signed_area(poly);
    if area == 0.0 || !area.is_finite() {
        return Err(Error::DegeneratePolyline);
    }
    let (xmin, xmax, ymin, ymax) = geometry::bounding_box(poly);
    Ok(CycleGeometry {
        orientation: Orientation::from_area(area),
        min_y: ymin,
        bbox: BoundingBox { xmin, xmax, ymin, ymax },
        signed_area: area,
    })
}

/// Orientation (sign of the enclosed signed area), lowest point and
/// bounding box of a refined cycle.
pub fn cycle_geometry(cycle: &LimitCycle) -> Result<CycleGeometry> {
    polyline_geometry(&cycle.polyline)
}

/// Distance below which a point counts as lying on a cycle.
pub const ON_BOUNDARY_TOL: f64 = 1e-9;

/// Winding-number containment test.
pub fn surrounds_point(cycle: &LimitCycle, pt: Point) -> Result<bool> {
    polyline_surrounds(&cycle.polyline, pt)
}

pub fn polyline_surrounds(poly: &[Point], pt: Point) -> Result<bool> {
    if poly.len() < 3 {
        return Err(Error::DegeneratePolyline);
    }
    if geometry::distance_to_polyline(poly, pt) < ON_BOUNDARY_TOL {
        return Err(Error::OnBoundary);
    }
    Ok(geometry::winding_number(poly, pt) != 0)
}

/// Whether the cycle meets the line `alpha + beta x + gamma y = 0`.
///
/// Polyline sign changes are confirmed on the orbit itself: each candidate
/// edge is re-evaluated on the dense trajectory, and a cycle whose polyline
/// only grazes the line within the chord tolerance is checked against the
/// dense samples too.
pub fn intersects_line(cycle: &LimitCycle, alpha: f64, beta: f64, gamma: f64) -> Result<bool> {
    if beta == 0.0 && gamma == 0.0 {
        return Err(Error::InvalidArgument("degenerate line".into()));
    }
    if geometry::polyline_meets_line(&cycle.polyline, alpha, beta, gamma) {
        return Ok(true);
    }
    let norm = beta.hypot(gamma);
    let closest =
        cycle.polyline.iter().map(|p| (alpha + beta * p.0 + gamma * p.1).abs() / norm).fold(f64::INFINITY, f64::min);
    if closest > 10.0 * DetectConfig::default().chord_tol {
        return Ok(false);
    }
    // near-tangent: resample densely
    let cfg = IntegratorConfig::default();
    let tr = integrate(&cycle.field, (0.0, cycle.y0), &cfg.with_max_time(cycle.period), None)?;
    let dense: Vec<Point> = tr.resample(20_000).iter().map(|n| (n.x, n.y)).collect();
    Ok(geometry::polyline_meets_line(&dense, alpha, beta, gamma))
}

/// True iff the closed curves neither cross nor nest.
pub fn disjoint_interiors(c1: &LimitCycle, c2: &LimitCycle) -> bool {
    polylines_disjoint(&c1.polyline, &c2.polyline)
}

pub fn polylines_disjoint(a: &[Point], b: &[Point]) -> bool {
    if geometry::polylines_intersect(a, b) {
        return false;
    }
    let contains_vertex =
        |outer: &[Point], inner: &[Point]| inner.iter().any(|&p| geometry::winding_number(outer, p) != 0);
    !contains_vertex(a, b) && !contains_vertex(b, a)
}

/// Integral of `m dx + n dy` once around the cycle, in the direction of
/// the flow, computed on the orbit (not the polyline) as an augmented ODE.
pub fn line_integral(cycle: &LimitCycle, m: &Polynomial2, n: &Polynomial2, cfg: &IntegratorConfig) -> Result<f64> {
    let field = cycle.field;
    let rhs = |u: &[f64; 3]| {
        let (p, q) = field.eval(u[0], u[1]);
        [p, q, m.eval(u[0], u[1]) * p + n.eval(u[0], u[1]) * q]
    };
    let mut stepper = Stepper::new(rhs, [0.0, cycle.y0, 0.0], cfg)?;
    while stepper.t < cycle.period {
        stepper.step(cycle.period)?;
    }
    Ok(stepper.y[2])
}

/// [`line_integral`] taken with the positive (counter-clockwise) orientation.
pub fn line_integral_positive(
    cycle: &LimitCycle,
    m: &Polynomial2,
    n: &Polynomial2,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    Ok(cycle.orientation.sign() * line_integral(cycle, m, n, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Family;
    use std::f64::consts::PI;

    fn unit_cycle(ccw: bool) -> LimitCycle {
        let field = if ccw { VectorField2::harmonic().time_reversed() } else { VectorField2::harmonic() };
        build_cycle(&field, 1.0, &IntegratorConfig::default(), &DetectConfig::default()).unwrap()
    }

    #[test]
    fn harmonic_is_center() {
        let set = find_cycles(&VectorField2::harmonic(), (0.1, 5.0), 40, &IntegratorConfig::default()).unwrap();
        assert!(set.center_detected);
        assert!(set.cycles.is_empty());
    }

    #[test]
    fn harmonic_orbit_geometry() {
        let c = unit_cycle(false);
        let g = cycle_geometry(&c).unwrap();
        assert_eq!(g.orientation, Orientation::Negative);
        assert!((g.min_y + 1.0).abs() < 1e-6);
        assert!(geometry::is_simple(&c.polyline));
        assert_eq!(c.surrounds, vec![(0.0, 0.0)]);
        // chords stay within tolerance of the unit circle
        for w in c.polyline.windows(2) {
            let mid = (0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1));
            assert!(1.0 - mid.0.hypot(mid.1) <= 1e-3 + 1e-9);
        }
    }

    #[test]
    fn containment_and_lines() {
        let c = unit_cycle(false);
        assert!(surrounds_point(&c, (0.0, 0.0)).unwrap());
        assert!(!surrounds_point(&c, (2.0, 0.0)).unwrap());
        assert_eq!(surrounds_point(&c, c.polyline[5]), Err(Error::OnBoundary));
        assert!(intersects_line(&c, 0.0, 1.0, 0.0).unwrap());
        assert!(!intersects_line(&c, -2.0, 1.0, 0.0).unwrap());
        // tangent within the chord tolerance is resolved on the orbit
        assert!(intersects_line(&c, -0.9999999, 1.0, 0.0).unwrap());
        assert!(!intersects_line(&c, -1.0001, 1.0, 0.0).unwrap());
    }

    #[test]
    fn disjointness() {
        let a = geometry::circle(0.0, 0.0, 1.0, 400, true);
        let b = geometry::circle(0.0, 0.0, 0.5, 400, true);
        let c = geometry::circle(5.0, 0.0, 1.0, 400, true);
        assert!(!polylines_disjoint(&a, &b));
        assert!(!polylines_disjoint(&b, &a));
        assert!(polylines_disjoint(&a, &c));
        assert!(polylines_disjoint(&c, &a));
    }

    #[test]
    fn line_integrals() {
        let cfg = IntegratorConfig::default();
        let c = unit_cycle(true);
        assert_eq!(c.orientation, Orientation::Positive);
        let zero = Polynomial2::zero();
        let x = Polynomial2::affine(0.0, 1.0, 0.0);
        let y = Polynomial2::affine(0.0, 0.0, 1.0);
        let v = line_integral(&c, &zero, &x, &cfg).unwrap();
        assert!((v - PI).abs() < 1e-8 * PI, "{v}");
        let exact = line_integral(&c, &y, &x, &cfg).unwrap();
        assert!(exact.abs() < 1e-9);
        // clockwise orbit: flow-direction integral flips, positive one does not
        let cw = unit_cycle(false);
        assert!((line_integral(&cw, &zero, &x, &cfg).unwrap() + PI).abs() < 1e-8);
        assert!((line_integral_positive(&cw, &zero, &x, &cfg).unwrap() - PI).abs() < 1e-8);
    }

    #[test]
    fn quintic_lienard_single_cycle() {
        let f = Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 }.build().unwrap();
        let cfg = IntegratorConfig::default();
        let set = find_cycles(&f, (0.05, 10.0), 60, &cfg).unwrap();
        assert_eq!(set.cycles.len(), 1, "{:?}", set.notes);
        let c = &set.cycles[0];
        assert_eq!(c.klass, CycleClass::Unstable);
        assert_eq!(c.orientation, Orientation::Negative);
        assert!(c.residual < 1e-9 * c.y0.max(1.0));
        assert_eq!(set.multiplicity(), 1);
    }
}
