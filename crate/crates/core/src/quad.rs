//! Adaptive Simpson quadrature.

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is pre-split into `pieces` panels so that narrow features are
/// not missed by the first coarse estimate.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    let pieces = pieces.max(1);
    let w = (b - a) / pieces as f64;
    let panel_tol = tol / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + w * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + w };
            let fa = f(lo);
            let fb = f(hi);
            let fm = f(0.5 * (lo + hi));
            refine(
                &f,
                lo,
                hi,
                fa,
                fm,
                fb,
                simpson(fa, fm, fb, lo, hi),
                panel_tol,
                48,
            )
        })
        .sum()
}
