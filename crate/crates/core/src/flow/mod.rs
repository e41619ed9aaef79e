//! Trajectories of planar fields with an augmented divergence accumulator,
//! dense output and section-crossing events.

pub mod dopri;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Polynomial2, VectorField2};
use crate::roots::bracketed_root;
use dopri::{restep, DenseStep, Stepper};

/// Tolerances and guards shared by every integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub escape_radius: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: 1.0, max_time: 1e6, escape_radius: 1e4 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.max_step > 0.0
            && self.max_time > 0.0
            && self.escape_radius > 0.0
            && [self.rtol, self.atol, self.max_step, self.max_time, self.escape_radius].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid integrator configuration {self:?}")))
        }
    }

    pub fn with_max_time(self, max_time: f64) -> Self {
        Self { max_time, ..self }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    Escaped,
    EventStop,
}

/// A node of a planar trajectory: time, position and `s(t)`, the integral of
/// the divergence along the orbit up to `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub s: f64,
}

impl Node {
    fn from_state(t: f64, u: &[f64; 3]) -> Self {
        Node { t, x: u[0], y: u[1], s: u[2] }
    }
}

/// Right-hand side of the planar flow augmented with `ds/dt = div(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct AugmentedField {
    pub field: VectorField2,
    pub div: Polynomial2,
}

impl AugmentedField {
    pub fn new(field: &VectorField2) -> Self {
        Self { field: *field, div: field.divergence() }
    }

    #[inline]
    pub fn rhs(&self, u: &[f64; 3]) -> [f64; 3] {
        let (p, q) = self.field.eval(u[0], u[1]);
        [p, q, self.div.eval(u[0], u[1])]
    }
}

/// A computed orbit with its per-step dense interpolants.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub nodes: Vec<Node>,
    steps: Vec<DenseStep<3>>,
    pub termination: Termination,
    aug: AugmentedField,
}

/// A refined crossing of the section `{x = 0, y > 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionCrossing {
    pub t: f64,
    pub y: f64,
    pub s: f64,
    /// `dx/dt` at the crossing.
    pub xdot: f64,
}

/// Minimum `|dx/dt|` for a section point to count as transverse.
pub const TRANSVERSALITY_FLOOR: f64 = 1e-6;
/// Target `|x(t*)|` of a refined section crossing.
pub const CROSSING_TOL: f64 = 1e-12;
const EVENT_MAX_ITER: usize = 80;

fn check_init(init: (f64, f64), cfg: &IntegratorConfig) -> Result<()> {
    if !init.0.is_finite() || !init.1.is_finite() {
        return Err(Error::NonFiniteState { t: 0.0 });
    }
    if init.0.hypot(init.1) > cfg.escape_radius {
        return Err(Error::OutsideEscapeRadius);
    }
    Ok(())
}

/// Integrates `field` from `init` until `cfg.max_time`, escape from
/// `cfg.escape_radius`, or until `stop` returns true at a node.
pub fn integrate(
    field: &VectorField2,
    init: (f64, f64),
    cfg: &IntegratorConfig,
    stop: Option<&dyn Fn(&Node) -> bool>,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_init(init, cfg)?;
    let aug = AugmentedField::new(field);
    let mut stepper = Stepper::new(|u: &[f64; 3]| aug.rhs(u), [init.0, init.1, 0.0], cfg)?;
    let mut nodes = vec![Node::from_state(0.0, &stepper.y)];
    let mut steps = Vec::new();
    let termination = loop {
        if stepper.t >= cfg.max_time {
            break Termination::TimeLimit;
        }
        let st = match stepper.step(cfg.max_time) {
            Ok(st) => st,
            Err(Error::StepSizeUnderflow { .. }) if stepper.blowing_up() => break Termination::Escaped,
            Err(e) => return Err(e),
        };
        steps.push(st);
        let node = Node::from_state(stepper.t, &stepper.y);
        nodes.push(node);
        if stepper.planar_radius() > cfg.escape_radius {
            break Termination::Escaped;
        }
        if let Some(stop) = stop {
            if stop(&node) {
                break Termination::EventStop;
            }
        }
    };
    Ok(Trajectory { nodes, steps, termination, aug })
}

impl Trajectory {
    pub fn field(&self) -> &VectorField2 {
        &self.aug.field
    }

    pub fn last(&self) -> &Node {
        self.nodes.last().expect("trajectory has at least the initial node")
    }

    pub fn duration(&self) -> f64 {
        self.last().t
    }

    /// Dense state `(x, y, s)` at time `t` within the integrated span.
    pub fn state_at(&self, t: f64) -> Option<[f64; 3]> {
        if self.steps.is_empty() {
            return (t == 0.0).then(|| [self.nodes[0].x, self.nodes[0].y, self.nodes[0].s]);
        }
        if t < 0.0 || t > self.duration() {
            return None;
        }
        let idx = self.steps.partition_point(|st| st.t1() < t).min(self.steps.len() - 1);
        Some(self.steps[idx].eval(t))
    }

    /// Crossings of `{x = 0, y > 0}` whose `dx/dt` has the sign of
    /// `direction`, in time order.
    pub fn section_crossings(&self, direction: f64) -> Result<Vec<SectionCrossing>> {
        let rhs = |u: &[f64; 3]| self.aug.rhs(u);
        let mut out = Vec::new();
        for st in &self.steps {
            if let Some(c) = crossing_in_step(&rhs, st, direction)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Node table as CSV with header `t,x,y,s`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "x", "y", "s"])?;
        for n in &self.nodes {
            wr.serialize((n.t, n.x, n.y, n.s))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Dense output resampled at `n` uniform times over the whole span.
    pub fn resample(&self, n: usize) -> Vec<Node> {
        let n = n.max(2);
        let tend = self.duration();
        (0..n)
            .map(|k| {
                let t = tend * k as f64 / (n - 1) as f64;
                let u = self.state_at(t).expect("t within span");
                Node::from_state(t, &u)
            })
            .collect()
    }

    pub fn write_resampled_csv<W: Write>(&self, w: W, n: usize) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "x", "y", "s"])?;
        for node in self.resample(n) {
            wr.serialize((node.t, node.x, node.y, node.s))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Finds a crossing of the section inside one accepted step, if the
/// sampled `x` changes sign in the requested direction and the crossing
/// lies on `y > 0`.
///
/// The event time is located on the interpolant and then re-evaluated by a
/// partial step from the step start plus one linear correction, so the
/// returned state carries the full order of the method.
pub(crate) fn crossing_in_step<const N: usize, F>(
    rhs: &F,
    st: &DenseStep<N>,
    direction: f64,
) -> Result<Option<SectionCrossing>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    crossing_state(rhs, st, direction)
        .map(|o| o.map(|(t, u, xdot)| SectionCrossing { t, y: u[1], s: if N > 2 { u[2] } else { 0.0 }, xdot }))
}

pub(crate) fn crossing_state<const N: usize, F>(
    rhs: &F,
    st: &DenseStep<N>,
    direction: f64,
) -> Result<Option<(f64, [f64; N], f64)>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let x0 = st.y0[0] * direction;
    let x1 = st.y1[0] * direction;
    if !(x0 < 0.0 && x1 >= 0.0) {
        return Ok(None);
    }
    let (ta, tb) = (st.t0, st.t1());
    let root = if x1 == 0.0 {
        tb
    } else {
        bracketed_root(|t| st.component(t, 0), ta, tb, st.y0[0], st.y1[0], 0.0, CROSSING_TOL, EVENT_MAX_ITER).x
    };
    let mut t = root;
    let mut u = restep(rhs, st, t - st.t0);
    for _ in 0..3 {
        let f = rhs(&u);
        if f[0] == 0.0 || u[0].abs() <= 0.1 * CROSSING_TOL {
            break;
        }
        let dt = -u[0] / f[0];
        t += dt;
        for i in 0..N {
            u[i] += f[i] * dt;
        }
    }
    if u[1] <= 0.0 {
        return Ok(None);
    }
    let xdot = rhs(&u)[0];
    if xdot.abs() < TRANSVERSALITY_FLOOR {
        return Err(Error::NonTransverse { xdot });
    }
    Ok(Some((t, u, xdot)))
}

/// Integrates an augmented state from a point on the section until the
/// first crossing of `{x = 0, y > 0}` in `direction`.
///
/// Returns `Ok(None)` when the orbit escapes, settles on an equilibrium or
/// exhausts `max_time`.
pub(crate) fn first_crossing<const N: usize, F>(
    rhs: F,
    init: [f64; N],
    cfg: &IntegratorConfig,
    direction: f64,
) -> Result<Option<(f64, [f64; N], f64)>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut stepper = Stepper::new(rhs, init, cfg)?;
    while stepper.t < cfg.max_time {
        let st = match stepper.step(cfg.max_time) {
            Ok(st) => st,
            Err(Error::StepSizeUnderflow { .. }) if stepper.blowing_up() => return Ok(None),
            Err(e) => return Err(e),
        };
        if let Some(hit) = crossing_state(stepper.rhs(), &st, direction)? {
            return Ok(Some(hit));
        }
        if stepper.planar_radius() > cfg.escape_radius || stepper.stalled() {
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Family;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_full_turn() {
        let cfg = IntegratorConfig::default().with_max_time(2.0 * PI);
        let tr = integrate(&VectorField2::harmonic(), (0.0, 1.0), &cfg, None).unwrap();
        let end = tr.last();
        assert_eq!(tr.termination, Termination::TimeLimit);
        assert!((end.t - 2.0 * PI).abs() < 1e-15);
        assert!(end.x.abs() < 1e-8 && (end.y - 1.0).abs() < 1e-8);
        assert!(end.s.abs() < 1e-9);
        assert!(tr.nodes.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(tr.nodes[0].s, 0.0);
    }

    #[test]
    fn harmonic_section_return() {
        let cfg = IntegratorConfig::default().with_max_time(7.0);
        let tr = integrate(&VectorField2::harmonic(), (0.0, 1.0), &cfg, None).unwrap();
        let hits = tr.section_crossings(1.0).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits[0].t - 2.0 * PI).abs() < 1e-8);
        assert!((hits[0].y - 1.0).abs() < 1e-8);
        // opposite direction crossing is on y < 0 and is not reported
        assert!(tr.section_crossings(-1.0).unwrap().is_empty());
    }

    #[test]
    fn no_crossings_when_x_keeps_sign() {
        // x' = 1, y' = 0 from x = 1 never reaches x = 0
        let f = VectorField2::new(Polynomial2::constant(1.0), Polynomial2::zero());
        let tr = integrate(&f, (1.0, 1.0), &IntegratorConfig::default().with_max_time(10.0), None).unwrap();
        assert!(tr.section_crossings(1.0).unwrap().is_empty());
        assert!(tr.section_crossings(-1.0).unwrap().is_empty());
    }

    #[test]
    fn escape_guard() {
        let cfg = IntegratorConfig::default();
        let err = integrate(&VectorField2::harmonic(), (2e4, 0.0), &cfg, None).unwrap_err();
        assert_eq!(err, Error::OutsideEscapeRadius);
        // x' = x^2 blows up in finite time and is reported as escape
        let f = VectorField2::new(Polynomial2::from_terms(&[(2, 0, 1.0)]).unwrap(), Polynomial2::zero());
        let tr = integrate(&f, (1.0, 0.0), &cfg.with_max_time(10.0), None).unwrap();
        assert_eq!(tr.termination, Termination::Escaped);
    }

    #[test]
    fn event_stop() {
        let cfg = IntegratorConfig::default().with_max_time(100.0);
        let stop = |n: &Node| n.t > 1.0;
        let tr = integrate(&VectorField2::harmonic(), (0.0, 1.0), &cfg, Some(&stop)).unwrap();
        assert_eq!(tr.termination, Termination::EventStop);
        assert!(tr.duration() < 3.0);
    }

    #[test]
    fn lienard_orbit_stays_bounded() {
        let f = Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 }.build().unwrap();
        let tr = integrate(&f, (0.0, 0.01), &IntegratorConfig::default().with_max_time(100.0), None).unwrap();
        assert_eq!(tr.termination, Termination::TimeLimit);
        assert!(tr.nodes.iter().all(|n| n.x.is_finite() && n.y.hypot(n.x) < 1.0));
    }

    #[test]
    fn dense_output_reproduces_nodes() {
        let f = Family::SlowFast { a: 0.5, eps: 0.1 }.build().unwrap();
        let cfg = IntegratorConfig::default().with_max_time(50.0);
        let tr = integrate(&f, (0.0, 1.0), &cfg, None).unwrap();
        for n in &tr.nodes {
            let u = tr.state_at(n.t).unwrap();
            assert!((u[0] - n.x).abs() <= 10.0 * cfg.atol);
            assert!((u[1] - n.y).abs() <= 10.0 * cfg.atol);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = IntegratorConfig::default().with_max_time(1.0);
        let tr = integrate(&VectorField2::harmonic(), (0.0, 1.0), &cfg, None).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,s"));
        assert_eq!(lines.count(), tr.nodes.len());
    }
}
