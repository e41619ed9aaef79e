//! Equilibria of quadratic vector fields via a resultant in `x`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Family, VectorField2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    /// Positive Jacobian determinant: focus, node or center.
    Antisaddle,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSingularity {
    pub x: f64,
    pub y: f64,
    pub kind: SingularityKind,
    pub det: f64,
    pub trace: f64,
}

/// `|det J|` below which an equilibrium is classed as degenerate.
pub const DEGENERATE_DET: f64 = 1e-10;

/// Univariate polynomial, lowest degree first.
type Poly = Vec<f64>;

fn padd(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn pscale(a: &Poly, k: f64) -> Poly {
    a.iter().map(|v| v * k).collect()
}

fn peval(a: &Poly, x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn pderiv(a: &Poly) -> Poly {
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// Drops leading coefficients that are negligible against the largest one.
fn trim(mut a: Poly) -> Poly {
    let big = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while let Some(&last) = a.last() {
        if last.abs() <= 1e-13 * big || last == 0.0 {
            a.pop();
        } else {
            break;
        }
    }
    a
}

/// Real roots via eigenvalues of the companion matrix, Newton-polished.
pub fn real_roots(a: &[f64]) -> Vec<f64> {
    let a = trim(a.to_vec());
    let n = a.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = a[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -a[n - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let da = pderiv(&a);
    let mut roots: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let d = peval(&da, x);
                if d == 0.0 {
                    break;
                }
                let step = peval(&a, x) / d;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    roots
}

/// Coefficients of `p(x, y)` as a polynomial in `y` with coefficients in `x`.
fn y_coeffs(p: &crate::field::Polynomial2) -> Vec<Poly> {
    let deg = p.degree();
    let mut out: Vec<Poly> = (0..=deg).map(|j| (0..=deg - j).map(|i| p.coeff(i, j)).collect()).collect();
    while out.len() > 1 && out.last().is_some_and(|c| c.iter().all(|v| *v == 0.0)) {
        out.pop();
    }
    out
}

fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Poly = Vec::new();
    for j in 0..n {
        if m[0][j].iter().all(|v| *v == 0.0) {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = pmul(&m[0][j], &det(&minor));
        acc = padd(&acc, &if j % 2 == 0 { term } else { pscale(&term, -1.0) });
    }
    acc
}

/// Sylvester resultant of `P` and `Q` with respect to `y`.
fn resultant(p: &[Poly], q: &[Poly]) -> Poly {
    let (m, n) = (p.len() - 1, q.len() - 1);
    let size = m + n;
    let zero: Poly = Vec::new();
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![zero.clone(); size];
        for (k, c) in p.iter().rev().enumerate() {
            row[r + k] = c.clone();
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![zero.clone(); size];
        for (k, c) in q.iter().rev().enumerate() {
            row[r + k] = c.clone();
        }
        rows.push(row);
    }
    det(&rows)
}

fn y_roots_at(coeffs: &[Poly], x: f64) -> Option<Vec<f64>> {
    let c: Poly = coeffs.iter().map(|cj| peval(cj, x)).collect();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    Some(real_roots(&c))
}

fn classify(field: &VectorField2, x: f64, y: f64) -> QuadraticSingularity {
    let j = field.jacobian(x, y);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let trace = j[0][0] + j[1][1];
    let kind = if det.abs() < DEGENERATE_DET {
        SingularityKind::Degenerate
    } else if det > 0.0 {
        SingularityKind::Antisaddle
    } else {
        SingularityKind::Saddle
    };
    QuadraticSingularity { x, y, kind, det, trace }
}

fn polish(field: &VectorField2, mut x: f64, mut y: f64) -> (f64, f64) {
    for _ in 0..20 {
        let (p, q) = field.eval(x, y);
        let j = field.jacobian(x, y);
        let d = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let dx = (j[1][1] * p - j[0][1] * q) / d;
        let dy = (-j[1][0] * p + j[0][0] * q) / d;
        x -= dx;
        y -= dy;
        if dx.hypot(dy) <= 1e-15 * x.hypot(y).max(1.0) {
            break;
        }
    }
    (x, y)
}

/// All real equilibria of a field of degree at most two.
pub fn field_singularities(field: &VectorField2) -> Result<Vec<QuadraticSingularity>> {
    if field.degree() > 2 {
        return Err(Error::InvalidArgument("singularity search needs a quadratic field".into()));
    }
    let p = y_coeffs(&field.p);
    let q = y_coeffs(&field.q);
    // a factor free of y gives its x-roots directly
    let xs: Vec<f64> = match (p.len(), q.len()) {
        (1, 1) => {
            // both free of y: any common x-root is a whole line of equilibria
            if real_roots(&p[0]).iter().any(|&x| peval(&q[0], x).abs() < 1e-12) || q[0].iter().all(|v| *v == 0.0) {
                return Err(Error::DegenerateSystem);
            }
            return Ok(Vec::new());
        }
        (1, _) => real_roots(&p[0]),
        (_, 1) => real_roots(&q[0]),
        _ => {
            let r = trim(resultant(&p, &q));
            if r.iter().all(|v| *v == 0.0) {
                return Err(Error::DegenerateSystem);
            }
            real_roots(&r)
        }
    };
    let mut out: Vec<QuadraticSingularity> = Vec::new();
    for x in xs {
        let mut ys = Vec::new();
        for c in [&p, &q] {
            if c.len() > 1 {
                if let Some(r) = y_roots_at(c, x) {
                    ys.extend(r);
                }
            }
        }
        for y in ys {
            let (px, py) = polish(field, x, y);
            let (rp, rq) = field.eval(px, py);
            let tol = 1e-10 * (1.0 + px.hypot(py));
            if !(rp.abs() < tol && rq.abs() < tol) {
                continue;
            }
            if out.iter().any(|s| (s.x - px).hypot(s.y - py) <= 1e-8 * (1.0 + px.hypot(py))) {
                continue;
            }
            out.push(classify(field, px, py));
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(out)
}

/// Equilibria of a member of the quadratic family.
pub fn quadratic_singularities(family: &Family) -> Result<Vec<QuadraticSingularity>> {
    if !matches!(family, Family::Quadratic { .. }) {
        return Err(Error::InvalidArgument("expected a quadratic family member".into()));
    }
    field_singularities(&family.build()?)
}
