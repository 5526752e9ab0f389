//! Per-attempt success probabilities and fidelities of the elementary
//! single-server protocols, plus the single-click EG primitives.
//!
//! The table formulas are leading order in `|alpha|^2` and `xi^2`. Outside
//! the validity budget the result is still returned, with a warning flag.

use serde::{Deserialize, Serialize};

use crate::error::{in_range, Error, Result};
use crate::types::{BrightState, Efficiency, MeanPhotonNumber};

/// Largest `|alpha|^2` for which the linearized formulas are trusted.
pub const ALPHA2_VALIDITY: f64 = 0.5;
/// Largest `xi^2` for which the linearized formulas are trusted.
pub const XI2_VALIDITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    SingleClickRsp,
    SingleClickEg,
    DoubleClickRsp,
    DoubleSingleClickRsp,
    MeasurementOnlyRsp,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::SingleClickRsp,
        ProtocolKind::SingleClickEg,
        ProtocolKind::DoubleClickRsp,
        ProtocolKind::DoubleSingleClickRsp,
        ProtocolKind::MeasurementOnlyRsp,
    ];
}

/// Inputs for [`table_stats`]. Each protocol reads only the fields it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub eta_c: Option<Efficiency>,
    pub eta_s: Option<Efficiency>,
    pub eta_a: Option<Efficiency>,
    pub eta_b: Option<Efficiency>,
    pub alpha2: Option<MeanPhotonNumber>,
    pub xi2: Option<BrightState>,
}

impl ProtocolParams {
    /// Client and server efficiencies with a WCP mean photon number.
    pub fn rsp(eta_c: Efficiency, eta_s: Efficiency, alpha2: MeanPhotonNumber) -> Self {
        Self {
            eta_c: Some(eta_c),
            eta_s: Some(eta_s),
            alpha2: Some(alpha2),
            ..Self::default()
        }
    }

    /// Two-sided entanglement generation.
    pub fn eg(eta_a: Efficiency, eta_b: Efficiency, xi2: BrightState) -> Self {
        Self {
            eta_a: Some(eta_a),
            eta_b: Some(eta_b),
            xi2: Some(xi2),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptStats {
    pub p_success: f64,
    pub fidelity: f64,
    /// A raw formula value fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
    /// Inputs exceed the low-amplitude budget.
    pub outside_validity: bool,
}

fn need<T>(value: Option<T>, field: &'static str, kind: ProtocolKind) -> Result<T> {
    value.ok_or(Error::MissingParameter {
        field,
        context: match kind {
            ProtocolKind::SingleClickRsp => "single-click RSP",
            ProtocolKind::SingleClickEg => "single-click EG",
            ProtocolKind::DoubleClickRsp => "double-click RSP",
            ProtocolKind::DoubleSingleClickRsp => "double single-click RSP",
            ProtocolKind::MeasurementOnlyRsp => "measurement-only RSP",
        },
    })
}

fn nonzero_eta_s(eta_s: f64) -> Result<f64> {
    if eta_s == 0.0 {
        return Err(Error::Degenerate("server efficiency eta_s is zero".into()));
    }
    Ok(eta_s)
}

/// Success probability and fidelity of one attempt of `kind`.
pub fn table_stats(kind: ProtocolKind, params: &ProtocolParams) -> Result<AttemptStats> {
    use ProtocolKind::*;
    let (p, f, outside) = match kind {
        SingleClickRsp | DoubleClickRsp | DoubleSingleClickRsp => {
            let eta_c = need(params.eta_c, "eta_c", kind)?.get();
            let eta_s = nonzero_eta_s(need(params.eta_s, "eta_s", kind)?.get())?;
            let a2 = need(params.alpha2, "alpha2", kind)?.get();
            let (p, infid) = match kind {
                SingleClickRsp => (
                    2.0 * eta_c * a2,
                    eta_c * (4.0 - 3.0 * eta_s) / (16.0 * eta_s) * a2,
                ),
                DoubleClickRsp => (
                    eta_c * eta_s * a2 / 2.0,
                    (eta_c / eta_s) * (4.0 - 3.0 * eta_s) / 16.0 * a2,
                ),
                _ => (
                    4.0 / 3.0 * eta_c * a2,
                    (eta_c / eta_s) * (4.0 - 3.0 * eta_s) / 8.0 * a2,
                ),
            };
            (p, 1.0 - infid, a2 > ALPHA2_VALIDITY)
        }
        SingleClickEg => {
            let eta_a = need(params.eta_a, "eta_a", kind)?.get();
            let eta_b = need(params.eta_b, "eta_b", kind)?.get();
            let xi2 = need(params.xi2, "xi2", kind)?.get();
            (2.0 * eta_a * eta_b * xi2, 1.0 - xi2, xi2 > XI2_VALIDITY)
        }
        MeasurementOnlyRsp => {
            let eta_c = need(params.eta_c, "eta_c", kind)?.get();
            let eta_s = need(params.eta_s, "eta_s", kind)?.get();
            // quoted as approximately 1; taken as exact
            (eta_s * eta_c, 1.0, false)
        }
    };
    let (p_c, f_c) = (p.clamp(0.0, 1.0), f.clamp(0.0, 1.0));
    Ok(AttemptStats {
        p_success: p_c,
        fidelity: f_c,
        clamped: p_c != p || f_c != f,
        outside_validity: outside,
    })
}

/// Bell-state fidelity of single-click EG with HOM visibility `v` and
/// phase-error probability `p_ph`: `(1 - xi^2)(1 + sqrt V)(1 - p_ph)/2`.
pub fn single_click_bell_fidelity(xi2: BrightState, v: f64, p_ph: f64) -> Result<f64> {
    in_range("V", v, 0.0, 1.0)?;
    in_range("p_ph", p_ph, 0.0, 1.0)?;
    Ok(0.5 * (1.0 - xi2.get()) * (1.0 + v.sqrt()) * (1.0 - p_ph))
}

/// Fidelity of a qubit teleported through a Bell pair of fidelity `f`.
pub fn teleport_fidelity(f: f64) -> Result<f64> {
    in_range("F_SC", f, 0.0, 1.0)?;
    Ok((2.0 * f + 1.0) / 3.0)
}

/// Exact single-click success probability `2 eta (1 - eta)(1 - xi^2) xi^2`.
pub fn single_click_probability(eta: Efficiency, xi2: BrightState) -> f64 {
    let (e, x) = (eta.get(), xi2.get());
    2.0 * e * (1.0 - e) * (1.0 - x) * x
}

/// High-loss approximation `2 eta xi^2`.
pub fn single_click_probability_approx(eta: Efficiency, xi2: BrightState) -> f64 {
    2.0 * eta.get() * xi2.get()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eff(v: f64) -> Efficiency {
        Efficiency::new(v).unwrap()
    }
    fn bright(v: f64) -> BrightState {
        BrightState::new(v).unwrap()
    }
    fn wcp(v: f64) -> MeanPhotonNumber {
        MeanPhotonNumber::new(v).unwrap()
    }

    #[test]
    fn single_click_rsp_row() {
        let st = table_stats(
            ProtocolKind::SingleClickRsp,
            &ProtocolParams::rsp(eff(1e-3), eff(0.1), wcp(0.5)),
        )
        .unwrap();
        assert!((st.p_success - 1e-3).abs() < 1e-18);
        assert!((st.fidelity - (1.0 - 1.15625e-3)).abs() < 1e-15);
        assert!(!st.clamped && !st.outside_validity);
    }

    #[test]
    fn eg_without_emission() {
        let st = table_stats(
            ProtocolKind::SingleClickEg,
            &ProtocolParams::eg(eff(0.3), eff(0.4), bright(0.0)),
        )
        .unwrap();
        assert_eq!((st.p_success, st.fidelity), (0.0, 1.0));
    }

    #[test]
    fn measurement_only_row() {
        let st = table_stats(
            ProtocolKind::MeasurementOnlyRsp,
            &ProtocolParams::rsp(eff(0.5), eff(0.5), wcp(0.1)),
        )
        .unwrap();
        assert_eq!((st.p_success, st.fidelity), (0.25, 1.0));
    }

    #[test]
    fn double_click_rows() {
        let p = ProtocolParams::rsp(eff(0.01), eff(0.5), wcp(0.2));
        let dc = table_stats(ProtocolKind::DoubleClickRsp, &p).unwrap();
        assert!((dc.p_success - 0.01 * 0.5 * 0.2 / 2.0).abs() < 1e-18);
        assert!((dc.fidelity - (1.0 - 0.02 * 2.5 / 16.0 * 0.2)).abs() < 1e-15);
        let dsc = table_stats(ProtocolKind::DoubleSingleClickRsp, &p).unwrap();
        assert!((dsc.p_success - 4.0 / 3.0 * 0.01 * 0.2).abs() < 1e-18);
        assert!((dsc.fidelity - (1.0 - 0.02 * 2.5 / 8.0 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn missing_field_is_named() {
        let p = ProtocolParams {
            eta_c: Some(eff(0.1)),
            eta_s: Some(eff(0.1)),
            ..Default::default()
        };
        let err = table_stats(ProtocolKind::SingleClickRsp, &p).unwrap_err();
        assert!(matches!(err, Error::MissingParameter { field: "alpha2", .. }));
        let err = table_stats(ProtocolKind::SingleClickEg, &p).unwrap_err();
        assert!(err.to_string().contains("eta_a"));
    }

    #[test]
    fn large_amplitude_is_clamped_and_flagged() {
        let st = table_stats(
            ProtocolKind::DoubleSingleClickRsp,
            &ProtocolParams::rsp(eff(1.0), eff(0.01), wcp(5.0)),
        )
        .unwrap();
        assert!(st.clamped && st.outside_validity);
        assert_eq!(st.fidelity, 0.0);
        assert_eq!(st.p_success, 1.0);
    }

    #[test]
    fn known_values() {
        assert_eq!(single_click_bell_fidelity(bright(0.0), 1.0, 0.0).unwrap(), 1.0);
        assert!((single_click_bell_fidelity(bright(0.1), 1.0, 0.0).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(single_click_bell_fidelity(bright(0.0), 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(teleport_fidelity(1.0).unwrap(), 1.0);
        assert_eq!(teleport_fidelity(0.25).unwrap(), 0.5);
        let xi2 = 0.07;
        assert!((teleport_fidelity(1.0 - xi2).unwrap() - (1.0 - 2.0 * xi2 / 3.0)).abs() < 1e-15);
        assert!(teleport_fidelity(1.1).is_err());
        assert_eq!(single_click_probability(eff(0.5), bright(0.5)), 0.125);
        assert_eq!(single_click_probability(eff(0.4), bright(0.0)), 0.0);
        let exact = single_click_probability(eff(0.01), bright(0.1));
        let approx = single_click_probability_approx(eff(0.01), bright(0.1));
        assert!((approx - 2e-3).abs() < 1e-18);
        assert!((approx - exact) / approx < 0.11);
    }

    proptest! {
        #[test]
        fn stats_in_unit_interval(
            eta_c in 0.0f64..=1.0,
            eta_s in 1e-3f64..=1.0,
            eta_a in 0.0f64..=1.0,
            eta_b in 0.0f64..=1.0,
            a2 in 0.0f64..=ALPHA2_VALIDITY,
            xi2 in 0.0f64..=XI2_VALIDITY,
        ) {
            let params = ProtocolParams {
                eta_c: Some(eff(eta_c)),
                eta_s: Some(eff(eta_s)),
                eta_a: Some(eff(eta_a)),
                eta_b: Some(eff(eta_b)),
                alpha2: Some(wcp(a2)),
                xi2: Some(bright(xi2)),
            };
            for kind in ProtocolKind::ALL {
                let st = table_stats(kind, &params).unwrap();
                prop_assert!((0.0..=1.0).contains(&st.p_success));
                prop_assert!((0.0..=1.0).contains(&st.fidelity));
                prop_assert!(!st.outside_validity);
            }
        }

        #[test]
        fn single_click_probability_symmetries(eta in 0.0f64..=1.0, xi2 in 0.0f64..=1.0) {
            let p = single_click_probability(eff(eta), bright(xi2));
            let flipped_eta = single_click_probability(eff(1.0 - eta), bright(xi2));
            let flipped_xi = single_click_probability(eff(eta), bright(1.0 - xi2));
            prop_assert!((p - flipped_eta).abs() <= 1e-15);
            prop_assert!((p - flipped_xi).abs() <= 1e-15);
        }

        #[test]
        fn teleport_is_order_preserving(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (fa, fb) = (teleport_fidelity(a).unwrap(), teleport_fidelity(b).unwrap());
            if a < b {
                prop_assert!(fa <= fb);
            }
        }
    }
}
