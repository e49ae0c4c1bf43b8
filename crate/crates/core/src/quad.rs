//! Adaptive Simpson quadrature for the compound ball-volume integrals.

/// Absolute tolerance floor; below this the interval estimate is accepted.
pub const ABS_TOL: f64 = 1e-12;
/// Relative tolerance target for the whole integral.
pub const REL_TOL: f64 = 1e-8;
/// Maximum bisection depth.
pub const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` by adaptive Simpson with interval bisection.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    // scale the relative target by a first estimate of the magnitude
    let eps = (REL_TOL * whole.abs()).max(ABS_TOL);
    recurse(&f, a, m, b, fa, fm, fb, whole, eps, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}
