//! Scalar root bracketing and bisection. All solvers in the crate are
//! deterministic; bisection is preferred over faster methods because every
//! target function here is cheap and the brackets are known.

/// Bisects f on [lo, hi] (f(lo), f(hi) of opposite sign) to absolute
/// tolerance `tol` on the argument.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || hi - lo < tol {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Scans [lo, hi] with `n` intervals and returns each bracket where f
/// changes sign.
pub fn sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let mut brackets = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for k in 1..=n {
        let x = lo + step * k as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            brackets.push((x_prev, x_prev));
        } else if f_prev.signum() != fx.signum() {
            brackets.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    brackets
}
