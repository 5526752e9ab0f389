//! M-to-1 quantum-multiplexed entanglement generation between a node `A`
//! holding `M` memories and a node `B` holding one.
//!
//! `B`'s photon is split over `M` temporal modes, each interfering with one
//! of `A`'s modes; exactly one click heralds a pair. Rates are per attempt.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numeric::{bisect_boundary, golden_section_max, pow_complement};
use crate::types::{BrightState, Efficiency, GainReport, RatePoint};

/// `xi_B^2` above this marks the bright state of `B` as saturated.
pub const SATURATION_THRESHOLD: f64 = 0.99;

const SEARCH_TOL: f64 = 1e-10;
const XI_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgConfig {
    pub m: u32,
    pub eta_a: Efficiency,
    pub eta_b: Efficiency,
    pub xi_a2: BrightState,
    /// Optimized per `xi_a2` when absent.
    #[serde(default)]
    pub xi_b2: Option<BrightState>,
    /// Attempt duration in seconds, used only for absolute rates.
    #[serde(default = "unit_tau")]
    pub tau_e: f64,
}

fn unit_tau() -> f64 {
    1.0
}

impl EgConfig {
    pub fn new(m: u32, eta_a: Efficiency, eta_b: Efficiency, xi_a2: BrightState) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                field: "M",
                reason: "node A needs at least one memory".into(),
            });
        }
        Ok(Self {
            m,
            eta_a,
            eta_b,
            xi_a2,
            xi_b2: None,
            tau_e: 1.0,
        })
    }

    pub fn with_xi_b2(mut self, xi_b2: BrightState) -> Self {
        self.xi_b2 = Some(xi_b2);
        self
    }

    pub fn with_tau_e(mut self, tau_e: f64) -> Result<Self> {
        self.tau_e = positive("tau_e", tau_e)?;
        Ok(self)
    }

    /// The configured `xi_B^2`, or the fidelity-optimal one.
    pub fn resolved_xi_b2(&self) -> Result<f64> {
        match self.xi_b2 {
            Some(x) => Ok(x.get()),
            None => optimal_xi_b2(self.m, self.eta_a, self.eta_b, self.xi_a2.get()),
        }
    }
}

/// Fidelity-maximizing `xi_B^2` for a given `xi_A^2`. Never exceeds 1.
pub fn optimal_xi_b2(m: u32, eta_a: Efficiency, eta_b: Efficiency, xi_a2: f64) -> Result<f64> {
    crate::error::in_range("xi_a2", xi_a2, 0.0, 1.0)?;
    let (ea, eb) = (eta_a.get(), eta_b.get() / m as f64);
    let num = ea * xi_a2;
    let den = eb + (ea - eb) * xi_a2;
    if den == 0.0 {
        return Err(Error::Degenerate(
            "optimal xi_B^2 undefined with no emission from either side".into(),
        ));
    }
    Ok((num / den).min(1.0))
}

fn fidelity_raw(m: f64, ea: f64, eb: f64, xa: f64, xb: f64) -> Result<f64> {
    let amp = (xb * eb * (1.0 - xa)).sqrt() + (xa * m * ea * (1.0 - xb)).sqrt();
    let den = xb * eb * (1.0 - ea * xa) + xa * m * ea * (1.0 - eb * xb);
    if den == 0.0 {
        return Err(Error::Degenerate("no heralding photon can reach the station".into()));
    }
    Ok((0.5 * amp * amp / den).clamp(0.0, 1.0))
}

/// Fidelity of the heralded pair to `Psi+`.
pub fn eg_fidelity(cfg: &EgConfig) -> Result<f64> {
    let xb = cfg.resolved_xi_b2()?;
    fidelity_raw(
        cfg.m as f64,
        cfg.eta_a.get(),
        cfg.eta_b.get(),
        cfg.xi_a2.get(),
        xb,
    )
}

fn click_raw(m: u32, ea: f64, eb: f64, xa: f64, xb: f64) -> f64 {
    let pa = ea * xa;
    let pb = eb * xb;
    let mut p = pb * pow_complement(pa, m as f64);
    if m >= 1 {
        p += m as f64 * pa * pow_complement(pa, (m - 1) as f64) * (1.0 - pb);
    }
    p
}

/// Probability of exactly one click across all `2M` detectors.
pub fn eg_click_probability(cfg: &EgConfig) -> Result<f64> {
    let xb = cfg.resolved_xi_b2()?;
    Ok(click_raw(
        cfg.m,
        cfg.eta_a.get(),
        cfg.eta_b.get(),
        cfg.xi_a2.get(),
        xb,
    ))
}

/// Rate per attempt and fidelity at the configured bright states.
pub fn eg_rate_point(cfg: &EgConfig) -> Result<RatePoint> {
    let xb = cfg.resolved_xi_b2()?;
    let (m, ea, eb, xa) = (cfg.m, cfg.eta_a.get(), cfg.eta_b.get(), cfg.xi_a2.get());
    let rate = click_raw(m, ea, eb, xa, xb);
    let fidelity = fidelity_raw(m as f64, ea, eb, xa, xb)?;
    Ok(RatePoint::new(rate, fidelity)?
        .with_param("M", m as f64)
        .with_param("xi_a2", xa)
        .with_param("xi_b2", xb))
}

/// First-order fidelity slope `(1 - F) / xi_A^2` as `xi_A -> 0`.
pub fn small_xi_infidelity_slope(m: u32, eta_a: Efficiency, eta_b: Efficiency) -> f64 {
    let (ea, eb) = (eta_a.get(), eta_b.get());
    (m as f64 * ea * (1.0 - eb) + (1.0 - ea) * eb) / (2.0 * eb)
}

/// High-loss rate at fidelity `f`: `4(1-F) [(1-eta_B)/eta_B + (1-eta_A)/(M eta_A)]^-1`.
pub fn small_eta_rate_at_fidelity(m: u32, eta_a: Efficiency, eta_b: Efficiency, f: f64) -> f64 {
    let (ea, eb) = (eta_a.get(), eta_b.get());
    4.0 * (1.0 - f) / ((1.0 - eb) / eb + (1.0 - ea) / (m as f64 * ea))
}

/// Best rate subject to a fidelity floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgOptimum {
    pub point: RatePoint,
    /// `xi_B^2` at the optimum exceeds [`SATURATION_THRESHOLD`].
    pub saturated: bool,
    /// Fidelity was found to increase somewhere along `xi_A^2`.
    pub non_monotone_fidelity: bool,
}

/// Maximizes the rate over `xi_A^2` with `xi_B^2` optimized, subject to
/// `F >= f_min`.
pub fn eg_rate_at_fidelity(
    m: u32,
    eta_a: Efficiency,
    eta_b: Efficiency,
    f_min: f64,
) -> Result<EgOptimum> {
    crate::error::finite("f_min", f_min)?;
    if !(f_min > 0.5 && f_min < 1.0) {
        return Err(Error::OutOfRange {
            field: "f_min",
            value: f_min,
            min: 0.5,
            max: 1.0,
        });
    }
    let base = EgConfig::new(m, eta_a, eta_b, BrightState::new(0.0)?)?;
    let eval = |xa: f64| -> Option<(f64, f64)> {
        let xb = optimal_xi_b2(m, eta_a, eta_b, xa).ok()?;
        let f = fidelity_raw(m as f64, eta_a.get(), eta_b.get(), xa, xb).ok()?;
        let r = click_raw(m, eta_a.get(), eta_b.get(), xa, xb);
        (f.is_finite() && r.is_finite()).then_some((f, r))
    };
    let feasible = |xa: f64| eval(xa).is_some_and(|(f, _)| f >= f_min);

    if !feasible(XI_FLOOR) {
        return Err(Error::Infeasible(format!(
            "fidelity {f_min} is above the ceiling for M={m}, eta_A={}, eta_B={}",
            eta_a.get(),
            eta_b.get()
        )));
    }

    // Coarse log-spaced scan locates the first infeasible point and detects
    // any non-monotone stretch of the fidelity curve.
    const SCAN: usize = 400;
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| XI_FLOOR * (1.0 / XI_FLOOR).powf(i as f64 / SCAN as f64))
        .collect();
    let mut non_monotone = false;
    let mut prev_f = f64::INFINITY;
    let mut last_ok = XI_FLOOR;
    let mut first_bad = None;
    for &xa in &grid {
        let Some((f, _)) = eval(xa) else { continue };
        if f > prev_f + 1e-12 {
            non_monotone = true;
        }
        prev_f = f;
        if f >= f_min {
            if first_bad.is_none() {
                last_ok = xa;
            }
        } else if first_bad.is_none() {
            first_bad = Some(xa);
        }
    }
    if non_monotone {
        log::warn!("EG fidelity is not monotone in xi_A^2 for M={m}; using guarded search");
    }
    let xi_max = match first_bad {
        None => 1.0,
        Some(bad) => bisect_boundary(last_ok, bad, SEARCH_TOL, feasible),
    };

    let objective = |xa: f64| match eval(xa) {
        Some((f, r)) if f >= f_min => r,
        _ => f64::NEG_INFINITY,
    };
    let (best_xa, _) = golden_section_max(0.0, xi_max, SEARCH_TOL, objective);
    let point = eg_rate_point(&EgConfig {
        xi_a2: BrightState::new(best_xa)?,
        ..base
    })?;
    let saturated = point.param("xi_b2").unwrap_or(0.0) > SATURATION_THRESHOLD;
    Ok(EgOptimum {
        point,
        saturated,
        non_monotone_fidelity: non_monotone,
    })
}

/// Gain of `M` memories over one, at equal fidelity floor.
///
/// The semiclassical bound is 1: classical multiplexing cannot use the extra
/// memories at `A` when `B` has a single one.
pub fn eg_gain(m: u32, eta_a: Efficiency, eta_b: Efficiency, f_min: f64) -> Result<GainReport> {
    let mux = eg_rate_at_fidelity(m, eta_a, eta_b, f_min)?;
    let base = if m == 1 {
        mux.clone()
    } else {
        eg_rate_at_fidelity(1, eta_a, eta_b, f_min)?
    };
    GainReport::new(mux.point.rate, base.point.rate, 1.0)
}
