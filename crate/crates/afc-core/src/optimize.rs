//! Derivative-free one-dimensional maximization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximize a unimodal `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `rel_tol` times its midpoint (absolute `rel_tol` near zero).
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if hi - lo <= rel_tol * (0.5 * (lo + hi)).abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    (x, fx)
}

/// Scan `points` logarithmically spaced nodes on `[a, b]` (both > 0) and return the
/// neighbours of the best node as a bracket for a local search.
pub fn log_scan_bracket<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> (f64, f64) {
    assert!(a > 0.0 && b > a && points >= 3);
    let ratio = (b / a).ln() / (points - 1) as f64;
    let node = |i: usize| a * (ratio * i as f64).exp();
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(node(i));
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    (node(best.saturating_sub(1)), node((best + 1).min(points - 1)))
}

/// Maximize `f` on `[a, b]`: coarse log-spaced scan, then golden section on the bracket.
pub fn maximize_log_bracketed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let (lo, hi) = log_scan_bracket(&mut f, a, b, 200);
    // searching in x = ln F keeps the tolerance relative
    let (u, v) = golden_section_max(|u| f(u.exp()), lo.ln(), hi.ln(), rel_tol);
    (u.exp(), v)
}
