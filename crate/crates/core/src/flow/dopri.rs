//! Dormand-Prince 5(4) with the order-4 continuous extension of Hairer,
//! Norsett & Wanner. Generic over the state dimension so the same stepper
//! drives the planar flow, its divergence accumulator and the variational
//! equations.

use super::IntegratorConfig;
use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th order solution and the embedded 4th order one
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
/// Smallest admissible step, relative to `max(1, |t|)`.
pub const MIN_STEP: f64 = 1e-14;

/// Planar speed below which an orbit counts as settled on an equilibrium.
pub const STALL_SPEED: f64 = 1e-11;
/// Speed-to-radius ratio beyond which an underflowing orbit counts as escaped.
const BLOWUP_RATE: f64 = 1e6;

/// One accepted step together with its dense interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// Derivative at `t0`, needed to re-take a partial step exactly.
    pub f0: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` (meaningful for `t` in `[t0, t0 + h]`).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.component(t, i);
        }
        out
    }

    #[inline]
    pub fn component(&self, t: f64, i: usize) -> f64 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
    }
}

struct Stages<const N: usize> {
    y5: [f64; N],
    err: [f64; N],
    k: [[f64; N]; 7],
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for &(c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// A single Dormand-Prince step of size `h` from `(y, f0)` without error
/// control. `k[6]` is the derivative at the new point (FSAL).
fn raw_step<const N: usize, F>(rhs: &F, y: &[f64; N], f0: &[f64; N], h: f64) -> Stages<N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = *f0;
    let k2 = rhs(&axpy(y, h, &[(A21, &k1)]));
    let k3 = rhs(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(&axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(&y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Stages { y5, err, k: [k1, k2, k3, k4, k5, k6, k7] }
}

/// State after a step of exactly `h` from the start of `step`.
///
/// Used to evaluate event points at full order instead of through the
/// lower-order interpolant.
pub fn restep<const N: usize, F>(rhs: &F, step: &DenseStep<N>, h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    if h == 0.0 {
        return step.y0;
    }
    raw_step(rhs, &step.y0, &step.f0, h).y5
}

/// Adaptive stepper; the first two state components are the planar point.
pub struct Stepper<'a, const N: usize, F> {
    rhs: F,
    cfg: &'a IntegratorConfig,
    pub t: f64,
    pub y: [f64; N],
    f: [f64; N],
    h: f64,
    err_old: f64,
    rejected: bool,
    pub evaluations: usize,
}

impl<'a, const N: usize, F> Stepper<'a, N, F>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, y0: [f64; N], cfg: &'a IntegratorConfig) -> Result<Self> {
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: 0.0 });
        }
        let f = rhs(&y0);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: 0.0 });
        }
        let mut s = Self { rhs, cfg, t: 0.0, y: y0, f, h: 0.0, err_old: 1e-4, rejected: false, evaluations: 1 };
        s.h = s.initial_step();
        Ok(s)
    }

    pub fn rhs(&self) -> &F {
        &self.rhs
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.cfg.atol + self.cfg.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.f[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
        h = h.min(self.cfg.max_step);
        let y1 = axpy(&self.y, h, &[(1.0, &self.f)]);
        let f1 = (self.rhs)(&y1);
        self.evaluations += 1;
        let mut der2 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            der2 += ((f1[i] - self.f[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (1e-6f64).max(h * 1e-3) } else { (0.01 / der12).powf(0.2) };
        (100.0 * h).min(h1).min(self.cfg.max_step)
    }

    /// Advances by one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        loop {
            let mut h = self.h.min(self.cfg.max_step);
            let mut last = false;
            if self.t + h >= t_limit {
                h = t_limit - self.t;
                last = true;
            }
            if h < MIN_STEP * self.t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let st = raw_step(&self.rhs, &self.y, &self.f, h);
            self.evaluations += 6;

            let mut err = 0.0;
            for i in 0..N {
                let sk = self.scale(self.y[i], st.y5[i]);
                err += (st.err[i] / sk).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || st.y5.iter().any(|v| !v.is_finite()) {
                self.h = 0.25 * h;
                self.rejected = true;
                if self.h < MIN_STEP * self.t.abs().max(1.0) {
                    return Err(Error::NonFiniteState { t: self.t });
                }
                continue;
            }

            // Lund-stabilised PI controller
            let fac11 = err.powf(0.2 - BETA * 0.75);
            let mut fac = fac11 / self.err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if err <= 1.0 {
                self.err_old = err.max(1e-4);
                let mut h_new = h / fac;
                if self.rejected {
                    h_new = h_new.min(h);
                }
                self.rejected = false;

                let k = &st.k;
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = st.y5[i] - self.y[i];
                    let bspl = h * k[0][i] - dy;
                    rcont[0][i] = self.y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k[6][i] - bspl;
                    rcont[4][i] =
                        h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
                }
                let out = DenseStep { t0: self.t, h, y0: self.y, y1: st.y5, f0: self.f, rcont };
                self.t = if last { t_limit } else { self.t + h };
                self.y = st.y5;
                self.f = k[6];
                if !last {
                    self.h = h_new;
                }
                return Ok(out);
            }
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.rejected = true;
        }
    }

    pub fn planar_radius(&self) -> f64 {
        self.y[0].hypot(self.y[1])
    }

    /// True when the planar speed dwarfs the radius, i.e. the orbit is in
    /// finite-time blow-up and step-size underflow just means "escaped".
    pub fn blowing_up(&self) -> bool {
        let speed = self.f[0].hypot(self.f[1]);
        speed > BLOWUP_RATE * self.planar_radius().max(1.0)
    }

    /// True when the orbit has come to rest at an equilibrium.
    pub fn stalled(&self) -> bool {
        self.f[0].hypot(self.f[1]) < STALL_SPEED * self.planar_radius().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_accuracy() {
        let cfg = IntegratorConfig::default();
        let rhs = |y: &[f64; 1]| [-y[0]];
        let mut s = Stepper::new(rhs, [1.0], &cfg).unwrap();
        while s.t < 3.0 {
            s.step(3.0).unwrap();
        }
        assert!((s.y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn dense_output_matches_nodes_and_exact() {
        let cfg = IntegratorConfig { max_step: 0.5, ..Default::default() };
        let rhs = |y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Stepper::new(rhs, [0.0, 1.0], &cfg).unwrap();
        let mut worst: f64 = 0.0;
        while s.t < 6.0 {
            let st = s.step(6.0).unwrap();
            let end = st.eval(st.t1());
            assert!((end[0] - st.y1[0]).abs() < 10.0 * cfg.atol);
            for k in 1..10 {
                let t = st.t0 + st.h * k as f64 / 10.0;
                let v = st.eval(t);
                worst = worst.max((v[0] - t.sin()).abs());
            }
            // partial re-step agrees with the interpolant to its order
            let mid = restep(s.rhs(), &st, 0.5 * st.h);
            assert!((mid[0] - (st.t0 + 0.5 * st.h).sin()).abs() < 1e-10);
        }
        assert!(worst < 1e-8, "dense error {worst}");
    }
}
