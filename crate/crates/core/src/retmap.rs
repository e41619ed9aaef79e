//! The Poincare return map on the positive y-axis.
//!
//! For a start point `(0, y)` the map follows the orbit to its first
//! crossing of `{x = 0, y > 0}` with the same sign of `dx/dt` as at
//! departure. Along the way the divergence integral `h(y)` is accumulated,
//! and the multiplier follows from
//!
//! ```text
//! P'(y) = xdot(0, y) / xdot(0, P(y)) * exp(h(y))
//! ```
//!
//! which for Lienard-type fields (`xdot(0, y) = y`) is `y / P(y) * exp(h(y))`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Polynomial2, VectorField2};
use crate::flow::{first_crossing, AugmentedField, IntegratorConfig, TRANSVERSALITY_FLOOR};

/// One evaluation of the return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub y: f64,
    #[serde(rename = "Py")]
    pub py: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub h: f64,
    #[serde(rename = "Pprime")]
    pub pprime: f64,
}

impl ReturnSample {
    /// `P(y) - y`.
    pub fn displacement(&self) -> f64 {
        self.py - self.y
    }
}

fn start_direction(field: &VectorField2, y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("section ordinate must be positive, got {y}")));
    }
    let xdot = field.p.eval(0.0, y);
    if !(xdot.abs() >= TRANSVERSALITY_FLOOR) {
        return Err(Error::NonTransverse { xdot });
    }
    Ok(xdot.signum())
}

/// `P(y)`, `T(y)`, `h(y)` and the formula multiplier for one start point.
pub fn first_return(field: &VectorField2, y: f64, cfg: &IntegratorConfig) -> Result<ReturnSample> {
    cfg.validate()?;
    let dir = start_direction(field, y)?;
    let aug = AugmentedField::new(field);
    let hit = first_crossing(|u: &[f64; 3]| aug.rhs(u), [0.0, y, 0.0], cfg, dir)?;
    let (t, u, xdot_ret) = hit.ok_or(Error::NoReturn { y })?;
    let xdot0 = field.p.eval(0.0, y);
    let (py, h) = (u[1], u[2]);
    Ok(ReturnSample { y, py, t, h, pprime: xdot0 / xdot_ret * h.exp() })
}

/// `dP/dy` from the first variational equation along the orbit.
///
/// With `(u, v)` the derivative of the flow with respect to the start
/// ordinate, the return time varies as `-u / xdot`, hence
/// `P'(y) = v - ydot * u / xdot` at the return point.
pub fn pprime_variational(field: &VectorField2, y: f64, cfg: &IntegratorConfig) -> Result<f64> {
    cfg.validate()?;
    let dir = start_direction(field, y)?;
    let aug = AugmentedField::new(field);
    let jac: [Polynomial2; 4] = [field.p.d_dx(), field.p.d_dy(), field.q.d_dx(), field.q.d_dy()];
    let rhs = |w: &[f64; 5]| {
        let [a, b] = [w[0], w[1]];
        let base = aug.rhs(&[a, b, w[2]]);
        let (px, py, qx, qy) = (jac[0].eval(a, b), jac[1].eval(a, b), jac[2].eval(a, b), jac[3].eval(a, b));
        [base[0], base[1], base[2], px * w[3] + py * w[4], qx * w[3] + qy * w[4]]
    };
    let hit = first_crossing(rhs, [0.0, y, 0.0, 0.0, 1.0], cfg, dir)?;
    let (_, w, xdot) = hit.ok_or(Error::NoReturn { y })?;
    let ydot = field.q.eval(w[0], w[1]);
    Ok(w[4] - ydot * w[3] / xdot)
}

/// One entry of a [`scan`]: the sample or the reason it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub y: f64,
    pub result: std::result::Result<ReturnSample, Error>,
}

impl ScanEntry {
    pub fn status(&self) -> &'static str {
        match &self.result {
            Ok(_) => "ok",
            Err(e) => e.tag(),
        }
    }

    pub fn sample(&self) -> Option<&ReturnSample> {
        self.result.as_ref().ok()
    }
}

/// `n` geometrically spaced ordinates spanning `[ymin, ymax]`.
pub fn geometric_grid(ymin: f64, ymax: f64, n: usize) -> Vec<f64> {
    let ratio = (ymax / ymin).ln();
    (0..n).map(|k| if k + 1 == n { ymax } else { ymin * (ratio * k as f64 / (n - 1) as f64).exp() }).collect()
}

/// Evaluates the return map on a geometric grid. Failed samples keep their
/// error; the output is ordered by `y` regardless of evaluation order.
pub fn scan(field: &VectorField2, y_range: (f64, f64), n: usize, cfg: &IntegratorConfig) -> Result<Vec<ScanEntry>> {
    let (ymin, ymax) = y_range;
    if !(ymin > 0.0 && ymax > ymin && ymax.is_finite()) {
        return Err(Error::InvalidArgument(format!("scan range must satisfy 0 < ymin < ymax, got {y_range:?}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("scan needs at least two samples".into()));
    }
    cfg.validate()?;
    Ok(scan_points(field, &geometric_grid(ymin, ymax, n), cfg))
}

pub(crate) fn scan_points(field: &VectorField2, ys: &[f64], cfg: &IntegratorConfig) -> Vec<ScanEntry> {
    ys.par_iter().map(|&y| ScanEntry { y, result: first_return(field, y, cfg) }).collect()
}

/// CSV export with columns `y,Py,T,h,Pprime,status`; failed rows leave the
/// numeric columns empty.
pub fn write_scan_csv<W: Write>(entries: &[ScanEntry], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["y", "Py", "T", "h", "Pprime", "status"])?;
    for e in entries {
        match &e.result {
            Ok(s) => wr.serialize((s.y, s.py, s.t, s.h, s.pprime, "ok"))?,
            Err(err) => wr.serialize((e.y, "", "", "", "", err.tag()))?,
        }
    }
    wr.flush()?;
    Ok(())
}

/// Second derivative of the return map with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivative {
    pub value: f64,
    pub error: f64,
    pub step: f64,
}

/// `P''(y0)` by centred second differences of `P`, step
/// `max(1e-4, 1e-4 y0)`, with one Richardson level. The error estimate is
/// the size of the Richardson correction.
pub fn pprime2(field: &VectorField2, y0: f64, cfg: &IntegratorConfig) -> Result<SecondDerivative> {
    let eta = (1e-4f64).max(1e-4 * y0);
    if y0 - eta <= 0.0 {
        return Err(Error::InvalidArgument(format!("y0 = {y0} too close to the section end")));
    }
    let p = |y: f64| first_return(field, y, cfg).map(|s| s.py);
    let center = p(y0)?;
    let d2 = |e: f64| -> Result<f64> { Ok((p(y0 + e)? - 2.0 * center + p(y0 - e)?) / (e * e)) };
    let coarse = d2(eta)?;
    let fine = d2(0.5 * eta)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(SecondDerivative { value, error: (fine - coarse).abs() / 3.0, step: eta })
}
