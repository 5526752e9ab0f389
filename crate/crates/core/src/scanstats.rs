//! The window problem: expected number of Bernoulli(p) attempts until `s`
//! successes fall inside a sliding window of `w` attempts, plus the
//! semiclassical multiplexing limits built on it.
//!
//! The exact solver runs first-step analysis on an absorbing Markov chain.
//! Runs of failures are collapsed: a state is the set of ages of the
//! successes still inside the window, observed right after a success, and
//! the gap to the next success is geometric. That leaves
//! `sum_{k <= s-2} C(w-2, k)` transient states, solved with a dense LU.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, one_minus_pow_complement, subsets_up_to};
use crate::types::GainReport;

/// Largest transient state count the dense solver accepts by default.
pub const DEFAULT_STATE_LIMIT: usize = 3000;

/// Window length in attempts. `Infinite` is an explicit sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowLength {
    Finite(u64),
    Infinite,
}

impl WindowLength {
    pub fn finite(self) -> Option<u64> {
        match self {
            WindowLength::Finite(w) => Some(w),
            WindowLength::Infinite => None,
        }
    }

    /// Window scaled by the multiplexing factor `m`.
    pub fn scaled(self, m: u64) -> Result<Self> {
        match self {
            WindowLength::Finite(w) => w
                .checked_mul(m)
                .map(WindowLength::Finite)
                .ok_or(Error::Overflow("window length")),
            WindowLength::Infinite => Ok(WindowLength::Infinite),
        }
    }
}

impl fmt::Display for WindowLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowLength::Finite(w) => write!(f, "{w}"),
            WindowLength::Infinite => write!(f, "inf"),
        }
    }
}

/// `(w, s, p)`: window length, required successes, per-attempt success
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    w: WindowLength,
    s: u32,
    p: f64,
}

impl WindowSpec {
    pub fn new(w: WindowLength, s: u32, p: f64) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter {
                field: "s",
                reason: "at least one success is required".into(),
            });
        }
        if let WindowLength::Finite(w) = w {
            if w < s as u64 {
                return Err(Error::InvalidParameter {
                    field: "w",
                    reason: format!("window {w} cannot hold {s} successes"),
                });
            }
        }
        crate::error::finite("p", p)?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::OutOfRange {
                field: "p",
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self { w, s, p })
    }

    pub fn finite(w: u64, s: u32, p: f64) -> Result<Self> {
        Self::new(WindowLength::Finite(w), s, p)
    }

    pub fn w(&self) -> WindowLength {
        self.w
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    fn with_window(&self, w: WindowLength) -> Result<Self> {
        Self::new(w, self.s, self.p)
    }

    fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.w, self.s, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMethod {
    ExactMarkov,
    AsymptoticLowP,
    InfiniteWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowExpectation {
    pub expected_attempts: f64,
    pub method: ExpectationMethod,
}

/// Exact `E[tau_{w,s,p}]` with the default state limit.
pub fn expected_attempts_exact(spec: WindowSpec) -> Result<WindowExpectation> {
    expected_attempts_exact_with_limit(spec, DEFAULT_STATE_LIMIT)
}

/// Number of transient states the exact solver needs for `spec`.
pub fn exact_state_count(spec: &WindowSpec) -> u128 {
    match spec.w {
        WindowLength::Infinite => 0,
        WindowLength::Finite(_) if spec.s <= 1 => 0,
        WindowLength::Finite(w) => subsets_up_to(w - 2, spec.s as u64 - 2),
    }
}

pub fn expected_attempts_exact_with_limit(
    spec: WindowSpec,
    state_limit: usize,
) -> Result<WindowExpectation> {
    let WindowSpec { w, s, p } = spec;
    let w = match w {
        WindowLength::Infinite => {
            return Ok(WindowExpectation {
                expected_attempts: s as f64 / p,
                method: ExpectationMethod::InfiniteWindow,
            })
        }
        WindowLength::Finite(w) => w,
    };
    let exact = |e: f64| WindowExpectation {
        expected_attempts: e,
        method: ExpectationMethod::ExactMarkov,
    };
    if s == 1 {
        return Ok(exact(1.0 / p));
    }
    if p == 1.0 {
        return Ok(exact(s as f64));
    }

    let states = exact_state_count(&spec);
    if states > state_limit as u128 {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: state_limit,
        });
    }

    let chain = PostSuccessChain::build(w, s, p);
    let from_first_success = chain.solve()?;
    Ok(exact(1.0 / p + from_first_success))
}

/// Transient states are sorted nonzero ages (age 0 is the success that was
/// just observed and is implicit).
struct PostSuccessChain {
    w: u64,
    s: u32,
    p: f64,
    states: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
}

enum Step {
    Absorbed,
    Moved(Vec<u64>),
}

impl PostSuccessChain {
    fn build(w: u64, s: u32, p: f64) -> Self {
        let mut states = Vec::new();
        let mut current = Vec::new();
        enumerate_subsets(1, w.saturating_sub(2), s as usize - 2, &mut current, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, st)| (st.clone(), i))
            .collect();
        Self {
            w,
            s,
            p,
            states,
            index,
        }
    }

    /// Outcome of the next success arriving `gap` attempts after the last one.
    fn step(&self, ages: &[u64], gap: u64) -> Step {
        let w = self.w;
        // previous successes still inside the window that ends at the new one
        let in_window = 1 + ages.iter().filter(|&&a| a + gap <= w - 1).count();
        if in_window + 1 >= self.s as usize {
            return Step::Absorbed;
        }
        let mut next: Vec<u64> = std::iter::once(gap)
            .chain(ages.iter().map(|&a| a + gap))
            .filter(|&a| a <= w.saturating_sub(2))
            .collect();
        next.sort_unstable();
        Step::Moved(next)
    }

    /// Expected attempts to absorption, starting right after a success with
    /// no other success in the window.
    fn solve(&self) -> Result<f64> {
        let n = self.states.len();
        let p = self.p;
        let q = 1.0 - p;
        let w = self.w;
        let mut a = DMatrix::<f64>::zeros(n, n);
        let empty = self.index[&Vec::new()];
        // Past w - 1 failures the window holds only the newest success.
        let tail = if w >= 1 { q.powf((w - 1) as f64) } else { 1.0 };

        for (i, ages) in self.states.iter().enumerate() {
            // Diagonal of (I - T) is the probability of leaving `ages`; it is
            // accumulated from positive terms to avoid 1 - (1 - eps).
            let mut leave = 0.0;
            let mut q_pow = 1.0;
            for gap in 1..w {
                let prob = p * q_pow;
                q_pow *= q;
                match self.step(ages, gap) {
                    Step::Absorbed => leave += prob,
                    Step::Moved(next) => {
                        let j = self.index[&next];
                        if j != i {
                            a[(i, j)] -= prob;
                            leave += prob;
                        }
                    }
                }
            }
            if i != empty {
                a[(i, empty)] -= tail;
                leave += tail;
            }
            a[(i, i)] += leave;
        }

        // Every row has right-hand side E[gap] = 1/p.
        let b = DVector::from_element(n, 1.0 / p);
        let lu = a.lu();
        let x = lu
            .solve(&b)
            .ok_or_else(|| Error::Degenerate("window chain matrix is singular".into()))?;
        let value = x[empty];
        if !value.is_finite() {
            return Err(Error::Overflow("window expectation"));
        }
        Ok(value)
    }
}

fn enumerate_subsets(
    start: u64,
    end: u64,
    max_len: usize,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    out.push(current.clone());
    if current.len() == max_len {
        return;
    }
    for a in start..=end {
        if a == 0 {
            continue;
        }
        current.push(a);
        enumerate_subsets(a + 1, end, max_len, current, out);
        current.pop();
    }
}

/// Small-`p` asymptote `1 / (C(w-1, s-1) p^s)`.
pub fn expected_attempts_low_p(spec: WindowSpec) -> Result<WindowExpectation> {
    let w = spec.w.finite().ok_or(Error::InvalidParameter {
        field: "w",
        reason: "the low-p asymptote needs a finite window".into(),
    })?;
    let s = spec.s as i32;
    let c = binomial(w - 1, spec.s as u64 - 1);
    let log_value = -(c.ln() + s as f64 * spec.p.ln());
    if log_value >= f64::MAX.ln() {
        return Err(Error::Overflow("low-p window expectation"));
    }
    let value = 1.0 / (c * spec.p.powi(s));
    if !value.is_finite() {
        return Err(Error::Overflow("low-p window expectation"));
    }
    Ok(WindowExpectation {
        expected_attempts: value,
        method: ExpectationMethod::AsymptoticLowP,
    })
}

/// Gain from batching `m` attempts per time slot, for a single qubit.
pub fn temporal_gain_single(p: f64, m: u32) -> Result<GainReport> {
    check_p(p)?;
    check_m(m)?;
    let batch_success = one_minus_pow_complement(p, m as f64);
    GainReport::new(batch_success, p, m as f64)
}

/// Upper bound `m_s* = M E[tau_w] / E[tau_{Mw}]` on the `s`-qubit gain.
///
/// The report is flagged as an upper bound; its classical bound is
/// `M C(Ms-1, s-1)`.
pub fn temporal_gain_s(p: f64, w: WindowLength, m: u32, s: u32) -> Result<GainReport> {
    check_m(m)?;
    let base = WindowSpec::new(w, s, p)?;
    let mux = base.with_window(w.scaled(m as u64)?)?;
    let e_base = expected_attempts_exact(base)?.expected_attempts;
    let e_mux = expected_attempts_exact(mux)?.expected_attempts;
    // multiplexed attempts last tau/M each
    let rate_mux = m as f64 / e_mux;
    let rate_base = 1.0 / e_base;
    Ok(GainReport::new(rate_mux, rate_base, classical_bound_s(m, s, BoundRegime::General))?.upper_bound())
}

/// The `p -> 0` value of [`temporal_gain_s`]: `M C(Mw-1, s-1) / C(w-1, s-1)`.
pub fn temporal_gain_s_low_p_limit(w: u64, m: u32, s: u32) -> f64 {
    let k = s as u64 - 1;
    m as f64 * binomial(m as u64 * w - 1, k) / binomial(w - 1, k)
}

/// Single-qubit limit: the gain is at most `M`, and `M` cannot exceed the
/// available channel count `M_c`.
pub fn classical_bound_single(m: u32, m_c: u32) -> Result<f64> {
    check_m(m)?;
    if m > m_c {
        return Err(Error::ChannelCapacityExceeded {
            requested: m,
            available: m_c,
        });
    }
    Ok(m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// `M C(Ms-1, s-1)`, valid for any window.
    General,
    /// `M^s`, valid when the window is much longer than `s`.
    LargeWindow,
}

pub fn classical_bound_s(m: u32, s: u32, regime: BoundRegime) -> f64 {
    match regime {
        BoundRegime::General => {
            m as f64 * binomial(m as u64 * s as u64 - 1, s as u64 - 1)
        }
        BoundRegime::LargeWindow => (m as f64).powi(s as i32),
    }
}

/// Longest window (in attempts) that keeps `s` stored qubits above `f_min`
/// when every qubit depolarizes for the whole window.
///
/// Returns [`WindowLength::Infinite`] when `f_min <= 2^-s`, where no window
/// constraint exists.
pub fn window_bound_for_fidelity(
    f_min: f64,
    f0: f64,
    s: u32,
    t2: f64,
    tau_e: f64,
) -> Result<WindowLength> {
    crate::error::finite("f_min", f_min)?;
    crate::error::in_range("f0", f0, 0.0, 1.0)?;
    crate::error::positive("t2", t2)?;
    crate::error::positive("tau_e", tau_e)?;
    if s == 0 {
        return Err(Error::InvalidParameter {
            field: "s",
            reason: "at least one qubit".into(),
        });
    }
    if f0 <= 0.5 {
        return Err(Error::Infeasible(format!(
            "intrinsic fidelity {f0} carries no coherence"
        )));
    }
    if f_min > f0 {
        return Err(Error::Infeasible(format!(
            "target fidelity {f_min} exceeds intrinsic fidelity {f0}"
        )));
    }
    let floor = 0.5f64.powi(s as i32);
    if f_min <= floor {
        return Ok(WindowLength::Infinite);
    }
    let arg = (2.0 * f0 - 1.0) * (1.0 - floor) / (f_min - floor);
    let w = (t2 / tau_e) * arg.ln();
    if !w.is_finite() || w >= u64::MAX as f64 {
        return Ok(WindowLength::Infinite);
    }
    Ok(WindowLength::Finite((w.floor() as u64).max(1)))
}

/// One grid point of the monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityPoint {
    pub p: f64,
    pub d_expect_w: f64,
    pub d_expect_mw: f64,
    pub m_star: f64,
    pub derivative_ordering_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub points: Vec<MonotonicityPoint>,
    /// `0 >= dE[tau_Mw]/dp >= dE[tau_w]/dp` at every grid point.
    pub derivative_ordering_holds: bool,
    /// `m_s*(p)` is non-increasing along the grid.
    pub m_star_decreasing: bool,
    pub violations: usize,
}

/// Central-difference step used by the monotonicity check.
pub fn difference_step(p: f64) -> f64 {
    (p * 1e-3).max(1e-4)
}

/// Numerically checks the derivative ordering of `E[tau]` between windows
/// `w` and `M w`, and monotonicity of `m_s*` in `p`.
pub fn check_monotonicity_assumption(
    w: u64,
    s: u32,
    m: u32,
    p_grid: &[f64],
) -> Result<MonotonicityReport> {
    check_m(m)?;
    if p_grid.windows(2).any(|pair| pair[1] <= pair[0]) {
        return Err(Error::InvalidParameter {
            field: "p_grid",
            reason: "must be strictly ascending".into(),
        });
    }
    let window = WindowLength::Finite(w);
    let wide = window.scaled(m as u64)?;
    let expect = |win: WindowLength, p: f64| -> Result<f64> {
        Ok(expected_attempts_exact(WindowSpec::new(win, s, p)?)?.expected_attempts)
    };
    let derivative = |win: WindowLength, p: f64| -> Result<f64> {
        let h = difference_step(p);
        let (lo, hi) = if p + h <= 1.0 { (p - h, p + h) } else { (p - 2.0 * h, p) };
        Ok((expect(win, hi)? - expect(win, lo)?) / (hi - lo))
    };

    let mut points = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfRange {
                field: "p_grid",
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        // Validates (w, s, p) before differencing.
        let base = WindowSpec::new(window, s, p)?;
        let _ = base.with_p(p)?;
        let d_w = derivative(window, p)?;
        let d_mw = derivative(wide, p)?;
        let m_star = m as f64 * expect(window, p)? / expect(wide, p)?;
        let slack = 1e-9 * d_w.abs().max(d_mw.abs());
        let holds = d_mw <= slack && d_mw >= d_w - slack;
        points.push(MonotonicityPoint {
            p,
            d_expect_w: d_w,
            d_expect_mw: d_mw,
            m_star,
            derivative_ordering_holds: holds,
        });
    }
    let derivative_violations = points.iter().filter(|pt| !pt.derivative_ordering_holds).count();
    let m_star_violations = points
        .windows(2)
        .filter(|pair| pair[1].m_star > pair[0].m_star * (1.0 + 1e-12))
        .count();
    Ok(MonotonicityReport {
        derivative_ordering_holds: derivative_violations == 0,
        m_star_decreasing: m_star_violations == 0,
        violations: derivative_violations + m_star_violations,
        points,
    })
}

fn check_p(p: f64) -> Result<()> {
    crate::error::finite("p", p)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange {
            field: "p",
            value: p,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            field: "M",
            reason: "multiplexing factor must be at least 1".into(),
        });
    }
    Ok(())
}
