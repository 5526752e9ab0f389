//! One table per target. Column order is fixed per target.

use super::config::{Params, SweepSpec, Target};
use super::CliError;
use crate::eg::{eg_gain, eg_rate_point, EgConfig};
use crate::multiserver::{
    analytic_rate_s2, baseline_rate, optimize_hub, run_sampler, OptimizeRequest, SamplerConfig,
    Strategy,
};
use crate::rsp::{rsp_gain_high_fidelity, rsp_gain_limit, rsp_gain_with_cap, rsp_rate_fidelity_sweep};
use crate::scanstats::{
    classical_bound_s, expected_attempts_exact, expected_attempts_low_p, temporal_gain_s,
    temporal_gain_s_low_p_limit, BoundRegime, WindowLength, WindowSpec,
};
use crate::types::{BrightState, Efficiency};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Config(format!("{field}: empty grid")));
    }
    Ok(())
}

fn at_least_one(field: &str, v: u32) -> Result<(), CliError> {
    if v == 0 {
        return Err(CliError::Config(format!("{field}: must be at least 1")));
    }
    Ok(())
}

fn demand_name(d: crate::rsp::DemandModel) -> &'static str {
    use crate::rsp::DemandModel::*;
    match d {
        SingleUserAllDevices => "single_user_all_devices",
        ContinuousMultiUser => "continuous_multi_user",
        SingleUseMultiUser => "single_use_multi_user",
    }
}

/// Computes the table for `spec` on the current thread pool.
pub fn compute(spec: &SweepSpec) -> Result<Table, CliError> {
    match (&spec.params, spec.target) {
        (Params::Window(p), Target::Window) => {
            nonempty("window.p", &p.p)?;
            let mut t = Table::new(&[
                "p", "w", "s", "M", "expected_exact", "expected_low_p", "gain", "gain_bound",
            ]);
            for &pv in &p.p {
                let ws = WindowSpec::finite(p.w, p.s, pv)?;
                let exact = expected_attempts_exact(ws)?.expected_attempts;
                let low = expected_attempts_low_p(ws)?.expected_attempts;
                let g = temporal_gain_s(pv, WindowLength::Finite(p.w), p.m, p.s)?;
                t.push(row![pv, p.w, p.s, p.m, exact, low, g.gain, g.classical_bound]);
            }
            Ok(t)
        }
        (Params::Limits(p), Target::Limits) => {
            nonempty("limits.s", &p.s)?;
            at_least_one("limits.m_max", p.m_max)?;
            let mut t = Table::new(&["M", "s", "bound_general", "bound_large_window", "low_p_gain"]);
            for m in 1..=p.m_max {
                for &s in &p.s {
                    at_least_one("limits.s", s)?;
                    t.push(row![
                        m,
                        s,
                        classical_bound_s(m, s, BoundRegime::General),
                        classical_bound_s(m, s, BoundRegime::LargeWindow),
                        temporal_gain_s_low_p_limit(p.w, m, s),
                    ]);
                }
            }
            Ok(t)
        }
        (Params::EgCurve(p), Target::EgCurve) => {
            nonempty("eg_curve.m", &p.m)?;
            nonempty("eg_curve.xi_a2", &p.xi_a2)?;
            let (ea, eb) = (Efficiency::new(p.eta_a)?, Efficiency::new(p.eta_b)?);
            let mut t = Table::new(&["M", "xi_a2", "xi_b2", "fidelity", "rate"]);
            for &m in &p.m {
                for &x in &p.xi_a2 {
                    let pt = eg_rate_point(&EgConfig::new(m, ea, eb, BrightState::new(x)?)?)?;
                    let xb = pt.param("xi_b2").unwrap_or(f64::NAN);
                    t.push(row![m, x, xb, pt.fidelity, pt.rate]);
                }
            }
            Ok(t)
        }
        (Params::EgGain(p), Target::EgGain) => {
            at_least_one("eg_gain.m_max", p.m_max)?;
            let (ea, eb) = (Efficiency::new(p.eta_a)?, Efficiency::new(p.eta_b)?);
            let mut t = Table::new(&["M", "gain", "bound"]);
            for m in 1..=p.m_max {
                let g = eg_gain(m, ea, eb, p.f_min)?;
                t.push(row![m, g.gain, g.classical_bound]);
            }
            Ok(t)
        }
        (Params::RspCurve(p), Target::RspCurve) => {
            nonempty("rsp_curve.m", &p.m)?;
            nonempty("rsp_curve.gamma", &p.gamma)?;
            let (ec, es) = (Efficiency::new(p.eta_c)?, Efficiency::new(p.eta_s)?);
            let mut t = Table::new(&["M", "gamma", "xi2", "fidelity", "rate"]);
            for &m in &p.m {
                for pt in rsp_rate_fidelity_sweep(m, ec, es, &p.gamma, p.demand)? {
                    t.push(row![
                        m,
                        pt.param("gamma").unwrap_or(f64::NAN),
                        pt.param("xi2").unwrap_or(f64::NAN),
                        pt.fidelity,
                        pt.rate,
                    ]);
                }
            }
            Ok(t)
        }
        (Params::RspGain(p), Target::RspGain) => {
            at_least_one("rsp_gain.m_max", p.m_max)?;
            nonempty("rsp_gain.demand", &p.demand)?;
            let (ec, es) = (Efficiency::new(p.eta_c)?, Efficiency::new(p.eta_s)?);
            let limit = rsp_gain_limit(es);
            let mut t = Table::new(&["M", "demand", "gain", "high_fidelity_gain", "limit"]);
            for &d in &p.demand {
                for m in 1..=p.m_max {
                    let g = rsp_gain_with_cap(m, ec, es, p.f_min, d, p.alpha2_cap)?;
                    t.push(row![m, demand_name(d), g.gain, rsp_gain_high_fidelity(m, es, d), limit]);
                }
            }
            Ok(t)
        }
        (Params::Multiserver(p), Target::MultiserverCurve | Target::MultiserverGain) => {
            nonempty("multiserver.m", &p.m)?;
            nonempty("multiserver.f_min", &p.f_min)?;
            nonempty("multiserver.grids.alpha2", &p.grids.alpha2)?;
            nonempty("multiserver.grids.n_o", &p.grids.n_o)?;
            let gain = spec.target == Target::MultiserverGain;
            let mut t = if gain {
                Table::new(&[
                    "M", "s", "f_min", "rate", "reference_rate", "gain", "classical_bound",
                ])
            } else {
                Table::new(&[
                    "M", "s", "f_min", "rate", "stderr", "rate_hz", "alpha2", "n_o",
                    "worst_case_fidelity", "saturated",
                ])
            };
            for &m in &p.m {
                for &f_min in &p.f_min {
                    let req = OptimizeRequest {
                        m,
                        s: p.s,
                        physical: p.physical,
                        f_min,
                        grids: p.grids.clone(),
                        n_rounds: p.n_rounds,
                        seed: spec.seed,
                    };
                    let best = optimize_hub(&req)?;
                    let r = &best.result;
                    if gain {
                        let base = baseline_rate(&req)?;
                        t.push(row![
                            m,
                            p.s,
                            f_min,
                            r.rate,
                            base.result.rate,
                            r.rate / base.result.rate,
                            (m as f64).powi(p.s as i32),
                        ]);
                    } else {
                        t.push(row![
                            m,
                            p.s,
                            f_min,
                            r.rate,
                            r.stderr_rate,
                            r.rate / p.physical.tau_e,
                            best.params.alpha2,
                            best.params.n_o,
                            r.worst_case_fidelity,
                            best.saturated,
                        ]);
                    }
                }
            }
            Ok(t)
        }
        (Params::MultiserverSample(p), Target::MultiserverSample) => {
            let cfg = SamplerConfig {
                hub: p.hub,
                n_rounds: p.n_rounds,
                seed: spec.seed,
                f_min: p.f_min,
            };
            let r = run_sampler(&cfg)?;
            if !r.feasible {
                return Err(CliError::Infeasible(format!(
                    "worst-case fidelity {:.6} is below f_min = {}",
                    r.worst_case_fidelity, p.f_min
                )));
            }
            let analytic = if p.hub.s == 2 {
                analytic_rate_s2(&p.hub, Strategy::Multiplex)?.rate
            } else {
                f64::NAN
            };
            let mut t = Table::new(&[
                "M", "s", "n_rounds", "n_success", "rate", "stderr", "rate_hz", "p_success",
                "mean_attempts", "worst_case_fidelity", "analytic_rate",
            ]);
            t.push(row![
                p.hub.m,
                p.hub.s,
                r.n_rounds,
                r.n_success,
                r.rate,
                r.stderr_rate,
                r.rate / p.hub.tau_e,
                r.p_success,
                r.mean_attempts,
                r.worst_case_fidelity,
                analytic,
            ]);
            Ok(t)
        }
        (_, target) => Err(CliError::Config(format!(
            "parameters do not match target {}",
            target.name()
        ))),
    }
}
