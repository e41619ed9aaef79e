//! Planar polynomial vector fields and the parametric families under study.
//!
//! Coefficients are stored densely up to total degree [`MAX_DEGREE`], so
//! evaluation never allocates. Divergence and partial derivatives are exact
//! coefficient manipulations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest total degree a [`Polynomial2`] can hold.
pub const MAX_DEGREE: usize = 6;
const DIM: usize = MAX_DEGREE + 1;

/// Bivariate polynomial `sum c[i][j] x^i y^j` with `i + j <= MAX_DEGREE`.
#[derive(Clone, Copy, PartialEq)]
pub struct Polynomial2 {
    coeffs: [[f64; DIM]; DIM],
}

impl Default for Polynomial2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Polynomial2 {
    pub const fn zero() -> Self {
        Self { coeffs: [[0.0; DIM]; DIM] }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.coeffs[0][0] = c;
        p
    }

    /// Builds a polynomial from `(i, j, coefficient)` triples; repeated
    /// monomials accumulate.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut p = Self::zero();
        for &(i, j, c) in terms {
            p.add_term(i, j, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        if i + j > MAX_DEGREE {
            return Err(Error::DegreeTooHigh(i + j));
        }
        if !c.is_finite() {
            return Err(Error::NonFiniteParameter(format!("x^{i} y^{j}")));
        }
        self.coeffs[i][j] += c;
        Ok(())
    }

    /// Coefficient of `x^i y^j` (zero outside the stored range).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > MAX_DEGREE {
            0.0
        } else {
            self.coeffs[i][j]
        }
    }

    /// Nonzero monomials as `(i, j, c)`, ordered by `(i, j)`.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM - i {
                if self.coeffs[i][j] != 0.0 {
                    out.push((i, j, self.coeffs[i][j]));
                }
            }
        }
        out
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms().iter().map(|&(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms().is_empty()
    }

    /// Nested Horner evaluation: outer in `x`, inner in `y`.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..DIM).rev() {
            let row = &self.coeffs[i];
            let mut inner = 0.0;
            for j in (0..DIM - i).rev() {
                inner = inner * y + row[j];
            }
            acc = acc * x + inner;
        }
        acc
    }

    pub fn d_dx(&self) -> Self {
        let mut out = Self::zero();
        for i in 1..DIM {
            for j in 0..DIM - i {
                out.coeffs[i - 1][j] = i as f64 * self.coeffs[i][j];
            }
        }
        out
    }

    pub fn d_dy(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..DIM {
            for j in 1..DIM - i {
                out.coeffs[i][j - 1] = j as f64 * self.coeffs[i][j];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for row in out.coeffs.iter_mut() {
            for c in row.iter_mut() {
                *c *= k;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..DIM {
            for j in 0..DIM - i {
                out.coeffs[i][j] += other.coeffs[i][j];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in other.terms() {
                out.add_term(i1 + i2, j1 + j2, c1 * c2)?;
            }
        }
        Ok(out)
    }

    fn powi(&self, n: usize) -> Result<Self> {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Substitutes `x -> sx`, `y -> sy` where `sx`, `sy` are polynomials
    /// (typically affine). Fails if the result exceeds [`MAX_DEGREE`].
    pub fn compose(&self, sx: &Self, sy: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            let term = sx.powi(i)?.mul(&sy.powi(j)?)?.scale(c);
            out = out.add(&term);
        }
        Ok(out)
    }

    /// The affine polynomial `c0 + cx x + cy y`.
    pub fn affine(c0: f64, cx: f64, cy: f64) -> Self {
        let mut p = Self::zero();
        p.coeffs[0][0] = c0;
        p.coeffs[1][0] = cx;
        p.coeffs[0][1] = cy;
        p
    }
}

impl fmt::Debug for Polynomial2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial2(")?;
        let terms = self.terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (k, (i, j, c)) in terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if *i > 0 {
                write!(f, "*x^{i}")?;
            }
            if *j > 0 {
                write!(f, "*y^{j}")?;
            }
        }
        write!(f, ")")
    }
}

/// Planar vector field `(dx/dt, dy/dt) = (p(x, y), q(x, y))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VectorField2 {
    pub p: Polynomial2,
    pub q: Polynomial2,
}

impl VectorField2 {
    pub fn new(p: Polynomial2, q: Polynomial2) -> Self {
        Self { p, q }
    }

    /// `dx/dt = y, dy/dt = -x`: clockwise rotation with period `2 pi`.
    pub fn harmonic() -> Self {
        Self::new(Polynomial2::affine(0.0, 0.0, 1.0), Polynomial2::affine(0.0, -1.0, 0.0))
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.p.eval(x, y), self.q.eval(x, y))
    }

    pub fn divergence(&self) -> Polynomial2 {
        self.p.d_dx().add(&self.q.d_dy())
    }

    /// Jacobian `[[p_x, p_y], [q_x, q_y]]` at a point.
    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        [[self.p.d_dx().eval(x, y), self.p.d_dy().eval(x, y)], [self.q.d_dx().eval(x, y), self.q.d_dy().eval(x, y)]]
    }

    /// Same orbits traversed backwards in time.
    pub fn time_reversed(&self) -> Self {
        Self::new(self.p.scale(-1.0), self.q.scale(-1.0))
    }

    pub fn degree(&self) -> usize {
        self.p.degree().max(self.q.degree())
    }
}

/// `P1 Q2 - Q1 P2` at a point: the orientation of `X2` relative to `X1`.
pub fn det_fields(f1: &VectorField2, f2: &VectorField2, x: f64, y: f64) -> f64 {
    let (p1, q1) = f1.eval(x, y);
    let (p2, q2) = f2.eval(x, y);
    p1 * q2 - q1 * p2
}

/// Which of the studied families a [`Family`] value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `x' = y + a x^2 + b y^2 + c x`, `y' = -x + d x^2 + f x y`
    #[serde(rename = "quadratic")]
    Quadratic,
    /// `x' = y + a x^5 + b x^3 + c x`, `y' = -x`
    #[serde(rename = "quintic")]
    QuinticLienard,
    /// `x' = y + x^4 - 2 x^2`, `y' = eps (a - x)`
    #[serde(rename = "slow_fast")]
    SlowFast,
    /// `x' = y - (a x^4 + b x^3 + c x^2 + d x)`, `y' = -x`
    #[serde(rename = "quartic")]
    QuarticLienard,
}

impl FamilyKind {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::Quadratic => &["a", "b", "c", "d", "f"],
            FamilyKind::QuinticLienard => &["a", "b", "c"],
            FamilyKind::SlowFast => &["a", "eps"],
            FamilyKind::QuarticLienard => &["a", "b", "c", "d"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Quadratic => "quadratic",
            FamilyKind::QuinticLienard => "quintic",
            FamilyKind::SlowFast => "slow_fast",
            FamilyKind::QuarticLienard => "quartic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "quadratic" => Some(FamilyKind::Quadratic),
            "quintic" => Some(FamilyKind::QuinticLienard),
            "slow_fast" => Some(FamilyKind::SlowFast),
            "quartic" => Some(FamilyKind::QuarticLienard),
            _ => None,
        }
    }
}

/// A member of one of the four parametric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Quadratic { a: f64, b: f64, c: f64, d: f64, f: f64 },
    QuinticLienard { a: f64, b: f64, c: f64 },
    SlowFast { a: f64, eps: f64 },
    QuarticLienard { a: f64, b: f64, c: f64, d: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Quadratic { .. } => FamilyKind::Quadratic,
            Family::QuinticLienard { .. } => FamilyKind::QuinticLienard,
            Family::SlowFast { .. } => FamilyKind::SlowFast,
            Family::QuarticLienard { .. } => FamilyKind::QuarticLienard,
        }
    }

    /// Parameter values in the order of [`FamilyKind::param_names`].
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::Quadratic { a, b, c, d, f } => vec![a, b, c, d, f],
            Family::QuinticLienard { a, b, c } => vec![a, b, c],
            Family::SlowFast { a, eps } => vec![a, eps],
            Family::QuarticLienard { a, b, c, d } => vec![a, b, c, d],
        }
    }

    pub fn from_params(kind: FamilyKind, v: &[f64]) -> Result<Self> {
        let n = kind.param_names().len();
        if v.len() != n {
            return Err(Error::InvalidSystem(format!("{} expects {n} parameters, got {}", kind.name(), v.len())));
        }
        Ok(match kind {
            FamilyKind::Quadratic => Family::Quadratic { a: v[0], b: v[1], c: v[2], d: v[3], f: v[4] },
            FamilyKind::QuinticLienard => Family::QuinticLienard { a: v[0], b: v[1], c: v[2] },
            FamilyKind::SlowFast => Family::SlowFast { a: v[0], eps: v[1] },
            FamilyKind::QuarticLienard => Family::QuarticLienard { a: v[0], b: v[1], c: v[2], d: v[3] },
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.kind().param_names().iter().zip(self.params()) {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter((*name).to_string()));
            }
        }
        if let Family::SlowFast { eps, .. } = *self {
            if eps <= 0.0 {
                return Err(Error::NonPositiveEpsilon(eps));
            }
        }
        Ok(())
    }

    /// Instantiates the vector field with exact coefficients.
    pub fn build(&self) -> Result<VectorField2> {
        self.validate()?;
        let t = Polynomial2::from_terms;
        let field = match *self {
            Family::Quadratic { a, b, c, d, f } => VectorField2::new(
                t(&[(0, 1, 1.0), (2, 0, a), (0, 2, b), (1, 0, c)])?,
                t(&[(1, 0, -1.0), (2, 0, d), (1, 1, f)])?,
            ),
            Family::QuinticLienard { a, b, c } => {
                VectorField2::new(t(&[(0, 1, 1.0), (5, 0, a), (3, 0, b), (1, 0, c)])?, t(&[(1, 0, -1.0)])?)
            }
            Family::SlowFast { a, eps } => {
                VectorField2::new(t(&[(0, 1, 1.0), (4, 0, 1.0), (2, 0, -2.0)])?, t(&[(0, 0, eps * a), (1, 0, -eps)])?)
            }
            Family::QuarticLienard { a, b, c, d } => VectorField2::new(
                t(&[(0, 1, 1.0), (4, 0, -a), (3, 0, -b), (2, 0, -c), (1, 0, -d)])?,
                t(&[(1, 0, -1.0)])?,
            ),
        };
        Ok(field)
    }

    /// Recovers the parameters of `kind` from a field's coefficients.
    ///
    /// Fails if the field carries monomials that the family does not have.
    pub fn extract(kind: FamilyKind, field: &VectorField2) -> Result<Self> {
        let (p, q) = (&field.p, &field.q);
        let fam = match kind {
            FamilyKind::Quadratic => Family::Quadratic {
                a: p.coeff(2, 0),
                b: p.coeff(0, 2),
                c: p.coeff(1, 0),
                d: q.coeff(2, 0),
                f: q.coeff(1, 1),
            },
            FamilyKind::QuinticLienard => {
                Family::QuinticLienard { a: p.coeff(5, 0), b: p.coeff(3, 0), c: p.coeff(1, 0) }
            }
            FamilyKind::SlowFast => {
                let eps = -q.coeff(1, 0);
                if eps == 0.0 {
                    return Err(Error::InvalidSystem("dy/dt has no x term".into()));
                }
                Family::SlowFast { a: q.coeff(0, 0) / eps, eps }
            }
            FamilyKind::QuarticLienard => {
                Family::QuarticLienard { a: -p.coeff(4, 0), b: -p.coeff(3, 0), c: -p.coeff(2, 0), d: -p.coeff(1, 0) }
            }
        };
        if fam.build()? != *field {
            return Err(Error::InvalidSystem(format!("field is not of {} form", kind.name())));
        }
        Ok(fam)
    }

    /// The rotation parameter `lambda = -c` for the c-families of the quadratic and quintic systems.
    pub fn rotation_param(&self) -> Option<f64> {
        match *self {
            Family::Quadratic { c, .. } | Family::QuinticLienard { c, .. } => Some(-c),
            _ => None,
        }
    }

    /// Copy of this family with the rotation parameter set to `lambda`.
    pub fn with_rotation(&self, lambda: f64) -> Result<Self> {
        match *self {
            Family::Quadratic { a, b, d, f, .. } => Ok(Family::Quadratic { a, b, c: -lambda, d, f }),
            Family::QuinticLienard { a, b, .. } => Ok(Family::QuinticLienard { a, b, c: -lambda }),
            _ => Err(Error::InvalidArgument(format!("{} has no designated rotation parameter", self.kind().name()))),
        }
    }
}

/// `Det(X_{lambda1}, X_{lambda2})` at a point, with rotation parameter
/// `lambda = -c`. For the quintic c-family this is `x^2 (lambda1 - lambda2)`;
/// for the quadratic one it is `x^2 (1 - dx - fy) (lambda1 - lambda2)`, which also
/// vanishes on the line `-1 + dx + fy = 0`.
pub fn rotated_det(family: &Family, lambda1: f64, lambda2: f64, x: f64, y: f64) -> Result<f64> {
    let f1 = family.with_rotation(lambda1)?.build()?;
    let f2 = family.with_rotation(lambda2)?.build()?;
    Ok(det_fields(&f1, &f2, x, y))
}

/// A parameter value in a system file: JSON number or decimal string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl ParamValue {
    fn parse(&self, name: &str) -> Result<f64> {
        let v = match self {
            ParamValue::Number(v) => *v,
            ParamValue::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSystem(format!("parameter `{name}`: cannot parse `{s}`")))?,
        };
        if !v.is_finite() {
            return Err(Error::NonFiniteParameter(name.to_string()));
        }
        Ok(v)
    }
}

/// JSON system definition.
///
/// Either a named family, `{"kind": "quintic", "params": {"a": 0, "b": 1, "c": -1}}`,
/// or an inline field, `{"kind": "poly", "p": [[0, 1, 1.0]], "q": [[1, 0, -1.0]]}`
/// with `[i, j, coefficient]` monomial triples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, ParamValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<(usize, usize, f64)>>,
}

/// Default eps for the slow-fast family when a system file omits it.
pub const DEFAULT_EPS: f64 = 0.1;

/// A resolved system: a family member or an arbitrary polynomial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Family(Family),
    Inline(VectorField2),
}

impl System {
    pub fn field(&self) -> Result<VectorField2> {
        match self {
            System::Family(f) => f.build(),
            System::Inline(v) => Ok(*v),
        }
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            System::Family(f) => Some(*f),
            System::Inline(_) => None,
        }
    }
}

impl SystemDef {
    pub fn resolve(&self) -> Result<System> {
        if self.kind == "poly" {
            if self.params.is_some() {
                return Err(Error::InvalidSystem("`poly` systems take `p` and `q`, not `params`".into()));
            }
            let p = self.p.as_ref().ok_or_else(|| Error::InvalidSystem("missing `p`".into()))?;
            let q = self.q.as_ref().ok_or_else(|| Error::InvalidSystem("missing `q`".into()))?;
            return Ok(System::Inline(VectorField2::new(Polynomial2::from_terms(p)?, Polynomial2::from_terms(q)?)));
        }
        let kind = FamilyKind::from_name(&self.kind)
            .ok_or_else(|| Error::InvalidSystem(format!("unknown kind `{}`", self.kind)))?;
        if self.p.is_some() || self.q.is_some() {
            return Err(Error::InvalidSystem(format!("`{}` systems take `params` only", self.kind)));
        }
        let empty = BTreeMap::new();
        let given = self.params.as_ref().unwrap_or(&empty);
        for key in given.keys() {
            if !kind.param_names().contains(&key.as_str()) {
                return Err(Error::InvalidSystem(format!("unknown parameter `{key}` for {}", self.kind)));
            }
        }
        let mut values = Vec::new();
        for &name in kind.param_names() {
            let v = match given.get(name) {
                Some(v) => v.parse(name)?,
                None if kind == FamilyKind::SlowFast && name == "eps" => DEFAULT_EPS,
                None => return Err(Error::InvalidSystem(format!("missing parameter `{name}`"))),
            };
            values.push(v);
        }
        let fam = Family::from_params(kind, &values)?;
        fam.validate()?;
        Ok(System::Family(fam))
    }

    pub fn from_system(sys: &System) -> Self {
        match sys {
            System::Family(fam) => {
                let kind = fam.kind();
                let params = kind
                    .param_names()
                    .iter()
                    .zip(fam.params())
                    .map(|(n, v)| ((*n).to_string(), ParamValue::Number(v)))
                    .collect();
                SystemDef { kind: kind.name().into(), params: Some(params), p: None, q: None }
            }
            System::Inline(f) => {
                SystemDef { kind: "poly".into(), params: None, p: Some(f.p.terms()), q: Some(f.q.terms()) }
            }
        }
    }
}
