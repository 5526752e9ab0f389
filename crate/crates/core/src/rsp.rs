//! M-client single-click remote state preparation onto one server.
//!
//! Each client sends a weak coherent pulse; the server splits its bright
//! state over `M` channels, one per client. A click in exactly one channel
//! prepares that client's state on the server. Everything is written in
//! terms of `gamma = eta_c |alpha|^2` and `e = 1 - exp(-gamma/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::numeric::{bisect_boundary, golden_section_max, harmonic};
use crate::types::{BrightState, Efficiency, GainReport, MeanPhotonNumber, RatePoint};

/// Default cap on the client mean photon number.
pub const DEFAULT_ALPHA2_CAP: f64 = 0.5;

const GAMMA_FLOOR: f64 = 1e-30;
const SEARCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RspConfig {
    pub m: u32,
    pub eta_c: Efficiency,
    pub eta_s: Efficiency,
    pub alpha2: MeanPhotonNumber,
    /// Fidelity-optimal when absent.
    #[serde(default)]
    pub xi2: Option<BrightState>,
    #[serde(default = "unit_tau")]
    pub tau_e: f64,
}

fn unit_tau() -> f64 {
    1.0
}

impl RspConfig {
    pub fn new(
        m: u32,
        eta_c: Efficiency,
        eta_s: Efficiency,
        alpha2: MeanPhotonNumber,
    ) -> Result<Self> {
        check_m(m)?;
        Ok(Self {
            m,
            eta_c,
            eta_s,
            alpha2,
            xi2: None,
            tau_e: 1.0,
        })
    }

    pub fn with_xi2(mut self, xi2: BrightState) -> Self {
        self.xi2 = Some(xi2);
        self
    }

    pub fn with_tau_e(mut self, tau_e: f64) -> Result<Self> {
        self.tau_e = positive("tau_e", tau_e)?;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.eta_c.get() * self.alpha2.get()
    }

    pub fn resolved_xi2(&self) -> f64 {
        match self.xi2 {
            Some(x) => x.get(),
            None => optimal_xi2_gamma(self.m, self.eta_s.get(), self.gamma()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandModel {
    /// One user drives all `M` client devices.
    SingleUserAllDevices,
    /// `M` users, each continuously requesting qubits.
    ContinuousMultiUser,
    /// `M` users, each leaving after one qubit.
    SingleUseMultiUser,
}

impl DemandModel {
    pub const ALL: [DemandModel; 3] = [
        DemandModel::SingleUserAllDevices,
        DemandModel::ContinuousMultiUser,
        DemandModel::SingleUseMultiUser,
    ];
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            field: "M",
            reason: "at least one client device".into(),
        });
    }
    Ok(())
}

#[inline]
fn e_of(gamma: f64) -> f64 {
    -(-gamma / 2.0).exp_m1()
}

fn optimal_xi2_gamma(m: u32, eta_s: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let e = e_of(gamma);
    let m = m as f64;
    e / (2.0 * e + eta_s * ((1.0 + gamma / 2.0) / (2.0 * m) - e))
}

/// Fidelity-maximizing server bright-state probability.
pub fn rsp_optimal_xi2(m: u32, eta_c: Efficiency, eta_s: Efficiency, alpha2: f64) -> Result<f64> {
    check_m(m)?;
    let alpha2 = MeanPhotonNumber::new(alpha2)?.get();
    Ok(optimal_xi2_gamma(m, eta_s.get(), eta_c.get() * alpha2))
}

/// Per-channel heralding weight `e (1 - eta_s xi^2) + xi^2 eta_s (2 + gamma) / (4M)`.
fn channel_weight(m: f64, eta_s: f64, gamma: f64, xi2: f64) -> f64 {
    e_of(gamma) * (1.0 - eta_s * xi2) + xi2 * eta_s * (2.0 + gamma) / (4.0 * m)
}

/// Fidelity at an arbitrary bright state.
fn fidelity_full(m: u32, eta_s: f64, gamma: f64, xi2: f64) -> Result<f64> {
    let m = m as f64;
    let den = channel_weight(m, eta_s, gamma, xi2);
    if den == 0.0 {
        return Err(Error::Degenerate(
            "no client light and no server emission: nothing can herald".into(),
        ));
    }
    let coh = (gamma * eta_s / m * (1.0 - xi2)).sqrt() * xi2.sqrt();
    Ok((0.5 * (1.0 + coh / den)).clamp(0.0, 1.0))
}

/// Fidelity with the bright state optimized.
///
/// `1/2 (1 + sqrt( (gamma eta_s / M) / (4 e (e + eta_s ((2 + gamma)/(4M) - e))) ))`
fn fidelity_optimized(m: u32, eta_s: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let m = m as f64;
    let e = e_of(gamma);
    let inner = (gamma * eta_s / m) / (4.0 * e * (e + eta_s * ((2.0 + gamma) / (4.0 * m) - e)));
    (0.5 * (1.0 + inner.sqrt())).clamp(0.0, 1.0)
}

/// Fidelity of the prepared qubit to its target equatorial state.
pub fn rsp_fidelity(cfg: &RspConfig) -> Result<f64> {
    let gamma = cfg.gamma();
    match cfg.xi2 {
        None => Ok(fidelity_optimized(cfg.m, cfg.eta_s.get(), gamma)),
        Some(x) => fidelity_full(cfg.m, cfg.eta_s.get(), gamma, x.get()),
    }
}

/// Small-amplitude fidelity `1 - [M(1 - eta_s) + eta_s/4] / (4 eta_s) gamma`.
pub fn rsp_fidelity_small_alpha(m: u32, eta_s: Efficiency, gamma: f64) -> f64 {
    let (m, es) = (m as f64, eta_s.get());
    1.0 - (m * (1.0 - es) + es / 4.0) / (4.0 * es) * gamma
}

fn rate_total_optimized(m: u32, eta_s: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let e = e_of(gamma);
    let num = 4.0
        * (-(mf - 0.5) * gamma).exp()
        * e
        * (4.0 * mf * (1.0 - eta_s) * e + eta_s * (2.0 + gamma));
    let den = 4.0 * (2.0 - eta_s) * e + eta_s * (2.0 + gamma) / mf;
    num / den
}

fn rate_channel_general(m: u32, eta_s: f64, gamma: f64, xi2: f64) -> f64 {
    let mf = m as f64;
    2.0 * (-(mf - 0.5) * gamma).exp() * channel_weight(mf, eta_s, gamma, xi2)
}

/// Probability per attempt that exactly one channel heralds.
///
/// With the bright state optimized this is the closed form; otherwise it is
/// `M` times the per-channel probability at the given `xi^2`.
pub fn rsp_rate(cfg: &RspConfig) -> f64 {
    let gamma = cfg.gamma();
    match cfg.xi2 {
        None => rate_total_optimized(cfg.m, cfg.eta_s.get(), gamma),
        Some(x) => cfg.m as f64 * rate_channel_general(cfg.m, cfg.eta_s.get(), gamma, x.get()),
    }
}

/// Probability per attempt that one particular client succeeds.
pub fn rsp_rate_per_channel(cfg: &RspConfig) -> f64 {
    let gamma = cfg.gamma();
    let es = cfg.eta_s.get();
    match cfg.xi2 {
        None => {
            let mf = cfg.m as f64;
            let e = e_of(gamma);
            if gamma == 0.0 {
                return 0.0;
            }
            let num = 4.0
                * (-(mf - 0.5) * gamma).exp()
                * e
                * (4.0 * mf * (1.0 - es) * e + 2.0 * es * (1.0 + gamma / 2.0));
            let den = 4.0 * mf * (2.0 - es) * e + 2.0 * es * (1.0 + gamma / 2.0);
            num / den
        }
        Some(x) => rate_channel_general(cfg.m, es, gamma, x.get()),
    }
}

/// Best operating point for `m` clients under a fidelity floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RspOptimum {
    pub gamma: f64,
    pub xi2: f64,
    pub fidelity: f64,
    /// All-channel success probability per attempt.
    pub rate_total: f64,
    /// The amplitude cap, not the fidelity floor, limits `gamma`.
    pub cap_bound: bool,
}

impl RspOptimum {
    pub fn rate_per_channel(&self, m: u32) -> f64 {
        self.rate_total / m as f64
    }
}

/// Maximizes the total rate over `gamma in (0, eta_c * alpha2_cap]` subject
/// to the optimized fidelity reaching `f_min`.
pub fn rsp_max_rate_at_fidelity(
    m: u32,
    eta_c: Efficiency,
    eta_s: Efficiency,
    f_min: f64,
    alpha2_cap: f64,
) -> Result<RspOptimum> {
    check_m(m)?;
    finite("f_min", f_min)?;
    if !(f_min > 0.5 && f_min < 1.0) {
        return Err(Error::OutOfRange {
            field: "f_min",
            value: f_min,
            min: 0.5,
            max: 1.0,
        });
    }
    positive("alpha2_cap", alpha2_cap)?;
    let es = eta_s.get();
    if es == 0.0 {
        return Err(Error::Degenerate("server efficiency eta_s is zero".into()));
    }
    let gamma_cap = eta_c.get() * alpha2_cap;
    if gamma_cap <= 0.0 {
        return Err(Error::Infeasible("client efficiency eta_c is zero".into()));
    }
    let feasible = |g: f64| fidelity_optimized(m, es, g) >= f_min;
    if !feasible(GAMMA_FLOOR.min(gamma_cap)) {
        return Err(Error::Infeasible(format!(
            "fidelity {f_min} unreachable for M={m}, eta_s={es}"
        )));
    }
    let (gamma_max, cap_bound) = if feasible(gamma_cap) {
        (gamma_cap, true)
    } else {
        let ln = bisect_boundary(GAMMA_FLOOR.ln(), gamma_cap.ln(), SEARCH_TOL, |lg| {
            feasible(lg.exp())
        });
        (ln.exp(), false)
    };
    let (gamma, rate) = golden_section_max(0.0, gamma_max, SEARCH_TOL, |g| {
        rate_total_optimized(m, es, g)
    });
    Ok(RspOptimum {
        gamma,
        xi2: optimal_xi2_gamma(m, es, gamma),
        fidelity: fidelity_optimized(m, es, gamma),
        rate_total: rate,
        cap_bound: cap_bound && gamma == gamma_cap,
    })
}

/// Multiplexed rate for `M` single-use clients: `[sum_m 1/(m R_k(m))]^-1`,
/// re-optimizing `gamma` and `xi^2` for every remaining client count.
pub fn single_use_rate(
    m: u32,
    eta_c: Efficiency,
    eta_s: Efficiency,
    f_min: f64,
    alpha2_cap: f64,
) -> Result<f64> {
    check_m(m)?;
    let mut total_time = 0.0;
    for k in 1..=m {
        let opt = rsp_max_rate_at_fidelity(k, eta_c, eta_s, f_min, alpha2_cap).map_err(|e| {
            match e {
                Error::Infeasible(msg) => Error::Infeasible(format!(
                    "large drop: stage with {k} remaining clients cannot hold the target ({msg})"
                )),
                other => other,
            }
        })?;
        // R_k(k) is the per-channel rate; k channels compete.
        total_time += 1.0 / opt.rate_total;
    }
    Ok(1.0 / total_time)
}

/// Gain of `M`-client multiplexing over the un-multiplexed reference of the
/// given demand model, with the default amplitude cap.
pub fn rsp_gain(
    m: u32,
    eta_c: Efficiency,
    eta_s: Efficiency,
    f_min: f64,
    demand: DemandModel,
) -> Result<GainReport> {
    rsp_gain_with_cap(m, eta_c, eta_s, f_min, demand, DEFAULT_ALPHA2_CAP)
}

/// As [`rsp_gain`] with an explicit `|alpha|^2` cap.
///
/// The semiclassical bound is 1: the server holds a single resource.
pub fn rsp_gain_with_cap(
    m: u32,
    eta_c: Efficiency,
    eta_s: Efficiency,
    f_min: f64,
    demand: DemandModel,
    alpha2_cap: f64,
) -> Result<GainReport> {
    let single = rsp_max_rate_at_fidelity(1, eta_c, eta_s, f_min, alpha2_cap)?;
    let mf = m as f64;
    let (mux, base) = match demand {
        DemandModel::SingleUserAllDevices => {
            let opt = rsp_max_rate_at_fidelity(m, eta_c, eta_s, f_min, alpha2_cap)?;
            (opt.rate_total, single.rate_total)
        }
        DemandModel::ContinuousMultiUser => {
            // per user: multiplexed channel rate vs a 1/M time share
            let opt = rsp_max_rate_at_fidelity(m, eta_c, eta_s, f_min, alpha2_cap)?;
            (opt.rate_per_channel(m), single.rate_total / mf)
        }
        DemandModel::SingleUseMultiUser => (
            single_use_rate(m, eta_c, eta_s, f_min, alpha2_cap)?,
            single.rate_total / mf,
        ),
    };
    GainReport::new(mux, base, 1.0)
}

/// High-fidelity gain for the given demand model.
pub fn rsp_gain_high_fidelity(m: u32, eta_s: Efficiency, demand: DemandModel) -> f64 {
    let (mf, es) = (m as f64, eta_s.get());
    match demand {
        DemandModel::SingleUserAllDevices | DemandModel::ContinuousMultiUser => {
            mf * (1.0 - es + es / 4.0) / (mf * (1.0 - es) + es / 4.0)
        }
        DemandModel::SingleUseMultiUser => {
            mf * (1.0 - 3.0 * es / 4.0) / (mf * (1.0 - es) + harmonic(m) * es / 4.0)
        }
    }
}

/// Large-`M` limit `1 + eta_s / (4 (1 - eta_s))`, shared by all demand models.
pub fn rsp_gain_limit(eta_s: Efficiency) -> f64 {
    let es = eta_s.get();
    1.0 + es / (4.0 * (1.0 - es))
}

/// Rate-fidelity curve parameterized by `gamma`, bright state optimized.
///
/// Rates follow the demand model: the total rate for a single user, the
/// per-user rate for continuous demand, and the single-use completion rate
/// holding each point's fidelity for single-use demand.
pub fn rsp_rate_fidelity_sweep(
    m: u32,
    eta_c: Efficiency,
    eta_s: Efficiency,
    gamma_grid: &[f64],
    demand: DemandModel,
) -> Result<Vec<RatePoint>> {
    check_m(m)?;
    let es = eta_s.get();
    gamma_grid
        .iter()
        .map(|&gamma| {
            positive("gamma", gamma)?;
            let fidelity = fidelity_optimized(m, es, gamma);
            let total = rate_total_optimized(m, es, gamma);
            let rate = match demand {
                DemandModel::SingleUserAllDevices => total,
                DemandModel::ContinuousMultiUser => total / m as f64,
                DemandModel::SingleUseMultiUser => {
                    let cap = (gamma / eta_c.get()).max(DEFAULT_ALPHA2_CAP);
                    if m == 1 {
                        total
                    } else {
                        single_use_rate(m, eta_c, eta_s, fidelity.min(1.0 - 1e-15), cap)?
                    }
                }
            };
            Ok(RatePoint::new(rate, fidelity)?
                .with_param("M", m as f64)
                .with_param("gamma", gamma)
                .with_param("xi2", optimal_xi2_gamma(m, es, gamma)))
        })
        .collect()
}
