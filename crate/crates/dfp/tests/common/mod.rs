//! Shared oracles for the integration suites: adaptive tensor-product
//! quadrature over the phase plane, kept independent of the closed-form
//! overlap code it checks.

fn simpson_value(a: f64, fa: f64, fm: f64, b: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_value(a, fa, flm, m, fm);
    let right = simpson_value(m, fm, frm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + adaptive_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_value(a, fa, fm, b, fb);
    adaptive_step(&f, a, fa, b, fb, m, fm, whole, tol, 28)
}

/// Adaptive tensor-product quadrature of f(x, y) over [-l, l]^2.
pub fn integrate_2d(f: impl Fn(f64, f64) -> f64 + Copy, l: f64, tol: f64) -> f64 {
    integrate_1d(|x| integrate_1d(|y| f(x, y), -l, l, tol / 50.0), -l, l, tol)
}
