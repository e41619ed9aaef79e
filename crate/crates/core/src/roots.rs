//! Bracketed scalar root finding.

/// Outcome of [`bracketed_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection-safeguarded secant (Illinois variant) on `[a, b]`.
///
/// Requires `fa` and `fb` of opposite sign (or one of them zero). Stops when
/// `|f(x)| <= ftol`, when the bracket is narrower than `xtol`, or after
/// `max_iter` evaluations. A secant proposal that falls outside the
/// bracket, or fails to shrink it by half every other step, is replaced by
/// a bisection step.
#[allow(clippy::too_many_arguments)]
pub fn bracketed_root<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, ftol: f64, max_iter: usize) -> Root
where
    F: FnMut(f64) -> f64,
{
    let r: Result<Root, std::convert::Infallible> =
        try_bracketed_root(|x| Ok(f(x)), a, b, fa, fb, xtol, ftol, max_iter);
    match r {
        Ok(root) => root,
        Err(never) => match never {},
    }
}

/// [`bracketed_root`] for functions whose evaluation can fail; the first
/// error aborts the search.
#[allow(clippy::too_many_arguments)]
pub fn try_bracketed_root<F, E>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Root, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, converged: true });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, converged: true });
    }
    debug_assert!(fa.signum() != fb.signum(), "root not bracketed");

    let mut side = 0i8;
    let mut last_width = (b - a).abs();
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=max_iter {
        let width = (b - a).abs();
        let mut x = (a * fb - b * fa) / (fb - fa);
        let lo = a.min(b);
        let hi = a.max(b);
        if !x.is_finite() || x <= lo || x >= hi || (it % 2 == 0 && width > 0.5 * last_width) {
            x = 0.5 * (a + b);
        }
        if it % 2 == 0 {
            last_width = width;
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= ftol {
            return Ok(Root { x, fx, iterations: it, converged: true });
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= xtol {
            return Ok(Root { x: best.0, fx: best.1, iterations: it, converged: true });
        }
    }
    Ok(Root { x: best.0, fx: best.1, iterations: max_iter, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0 * x - 5.0;
        let r = bracketed_root(f, 2.0, 3.0, f(2.0), f(3.0), 1e-15, 1e-14, 80);
        assert!(r.converged);
        assert!((r.x - 2.094_551_481_542_326_5).abs() < 1e-12);
    }

    #[test]
    fn handles_flat_sides() {
        // strongly asymmetric function where plain regula falsi stalls
        let f = |x: f64| x.powi(9) - 1e-3;
        let r = bracketed_root(f, 0.0, 2.0, f(0.0), f(2.0), 1e-14, 1e-18, 200);
        assert!(r.converged);
        assert!((r.x - 1e-3f64.powf(1.0 / 9.0)).abs() < 1e-10);
    }

    #[test]
    fn endpoint_root() {
        let r = bracketed_root(|x| x, 0.0, 1.0, 0.0, 1.0, 1e-12, 0.0, 10);
        assert_eq!(r.x, 0.0);
        assert_eq!(r.iterations, 0);
    }
}
