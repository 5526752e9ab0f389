//! Small numerical helpers: combinatorics, log-space powers, 1-D search.

/// Binomial coefficient C(n, k) as a float. Exact for results below 2^53.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_integral()
}

trait RoundIntegral {
    fn round_if_integral(self) -> Self;
}

impl RoundIntegral for f64 {
    // The running product is an integer after every step; strip roundoff.
    fn round_if_integral(self) -> Self {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// Number of subsets of an `n`-set with at most `k` elements, saturating.
pub fn subsets_up_to(n: u64, k: u64) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 0..=k.min(n) {
        if i > 0 {
            term = term.saturating_mul((n - i + 1) as u128) / i as u128;
        }
        total = total.saturating_add(term);
    }
    total
}

/// M-th harmonic number.
pub fn harmonic(m: u32) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

/// `(1 - p)^n` evaluated in log space.
#[inline]
pub fn pow_complement(p: f64, n: f64) -> f64 {
    if p >= 1.0 {
        return if n == 0.0 { 1.0 } else { 0.0 };
    }
    (n * (-p).ln_1p()).exp()
}

/// `1 - (1 - p)^n` without cancellation for small `p`.
#[inline]
pub fn one_minus_pow_complement(p: f64, n: f64) -> f64 {
    if p >= 1.0 {
        return if n == 0.0 { 0.0 } else { 1.0 };
    }
    -(n * (-p).ln_1p()).exp_m1()
}

/// Bisection for the boundary of a predicate that is true at `lo` and false
/// at `hi`. Returns the last point known to satisfy it.
pub fn bisect_boundary<F>(mut lo: f64, mut hi: f64, tol: f64, pred: F) -> f64
where
    F: Fn(f64) -> bool,
{
    debug_assert!(pred(lo));
    for _ in 0..200 {
        if (hi - lo).abs() <= tol * lo.abs().max(hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Returns `(x, f(x))`. The bracket endpoints are evaluated too, so a
/// maximum sitting on the boundary is reported exactly.
pub fn golden_section_max<F>(a: f64, b: f64, tol: f64, f: F) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (hi - lo) > tol * (lo.abs() + hi.abs()).max(tol) && iters < 500 {
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
        iters += 1;
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}
