//! Closed-form predictions of the MPA model: the degree-trajectory
//! exponent, the degree-distribution exponent, peer and provider
//! distributions, and event-rate accounting for the mean degree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MpaParams;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid time arguments: need 0 < s <= t, got s = {s}, t = {t}")]
    InvalidTime { s: f64, t: f64 },
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

fn check(params: &MpaParams) -> Result<(), AnalyticError> {
    params
        .validate()
        .map_err(|e| AnalyticError::InvalidParams(e.to_string()))
}

/// Bundle of derived quantities for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Degree-trajectory exponent.
    pub alpha: f64,
    /// Peer-rate coefficient.
    pub beta: f64,
    /// Degree-distribution exponent, 1/alpha + 1.
    pub gamma: f64,
    /// Exponential parameter of the ISP provider distribution.
    pub provider_rate: f64,
    /// Expected average total degree from event-rate accounting.
    pub mean_total_degree: f64,
}

/// Trajectory exponent: the mean degree of a node born at time s grows
/// as (s/t)^(-alpha).
pub fn alpha(params: &MpaParams) -> Result<f64, AnalyticError> {
    check(params)?;
    let MpaParams { rho, nu, c, m, mu } = *params;
    Ok((1.0 + 2.0 * nu + m * rho + 2.0 * c + m * mu) / (2.0 + 2.0 * nu + m * rho + 2.0 * c))
}

/// Degree-distribution exponent, gamma = 1/alpha + 1.
///
/// Expands to 2 + (1 - m*mu) / (1 + 2nu + m*rho + 2c + m*mu), which for
/// mu = 0 (the measured regime) is 2 + 1 / (1 + 2nu + m*rho + 2c).
pub fn gamma(params: &MpaParams) -> Result<f64, AnalyticError> {
    Ok(1.0 / alpha(params)? + 1.0)
}

/// Peer-rate coefficient beta = 2c / (2 + 2nu + m*rho + 2c).
pub fn beta(params: &MpaParams) -> Result<f64, AnalyticError> {
    check(params)?;
    let MpaParams { rho, nu, c, m, .. } = *params;
    Ok(2.0 * c / (2.0 + 2.0 * nu + m * rho + 2.0 * c))
}

/// Exponent of the two-class model: 2 + 1/(1 + rho), equivalently 3 - r.
pub fn two_class_exponent(rho: f64) -> Result<f64, AnalyticError> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(AnalyticError::InvalidParams(
            "rho must be finite and non-negative".into(),
        ));
    }
    Ok(2.0 + 1.0 / (1.0 + rho))
}

/// Mean degree at time t of an ISP born at time s in the two-class model:
/// (s/t)^(-(1+rho)/(2+rho)).
pub fn two_class_trajectory(s: f64, t: f64, rho: f64) -> Result<f64, AnalyticError> {
    two_class_exponent(rho)?;
    mean_degree_trajectory(s, t, &MpaParams::two_class(rho))
}

/// Mean total degree at time t of an ISP born at time s:
/// (s/t)^(-alpha) + mu/alpha.
pub fn mean_degree_trajectory(s: f64, t: f64, params: &MpaParams) -> Result<f64, AnalyticError> {
    let a = alpha(params)?;
    if !(s > 0.0 && s <= t) {
        return Err(AnalyticError::InvalidTime { s, t });
    }
    Ok((s / t).powf(-a) + params.mu / a)
}

/// Mean peer count at time t of an ISP born at time s:
/// (beta/alpha) * (s/t)^(-alpha). Derived for mu = 0 only.
pub fn peer_trajectory(s: f64, t: f64, params: &MpaParams) -> Result<f64, AnalyticError> {
    if params.mu != 0.0 {
        return Err(AnalyticError::UnsupportedRegime(
            "peer trajectory is derived for mu = 0".into(),
        ));
    }
    let a = alpha(params)?;
    let b = beta(params)?;
    if !(s > 0.0 && s <= t) {
        return Err(AnalyticError::InvalidTime { s, t });
    }
    Ok(b / a * (s / t).powf(-a))
}

/// Predicted fraction of ISPs with at least p providers beyond the first:
/// exp(-p/nu). The implied mean provider count is 1 + nu.
pub fn provider_ccdf(p: f64, nu: f64) -> Result<f64, AnalyticError> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(AnalyticError::InvalidParams("p must be >= 0".into()));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(AnalyticError::InvalidParams("nu must be positive".into()));
    }
    Ok((-p / nu).exp())
}

/// Solves c from the measured fraction f of links that are peering:
/// c = f * (1 + nu + m*rho) / (1 - f). For f = 0.1 this is the customary
/// (1 + nu + m*rho) / 9.
pub fn derive_peering_rate(
    peering_fraction: f64,
    nu: f64,
    m: f64,
    rho: f64,
) -> Result<f64, AnalyticError> {
    if !(peering_fraction.is_finite() && (0.0..1.0).contains(&peering_fraction)) {
        return Err(AnalyticError::InvalidParams(
            "peering fraction must lie in [0, 1)".into(),
        ));
    }
    if nu < 0.0 || rho < 0.0 || m < 1.0 {
        return Err(AnalyticError::InvalidParams(
            "need nu >= 0, rho >= 0, m >= 1".into(),
        ));
    }
    Ok(peering_fraction * (1.0 + nu + m * rho) / (1.0 - peering_fraction))
}

/// Evaluates the whole prediction bundle.
///
/// Links arrive at rate 1 + nu + c + m*rho while nodes arrive at 1 + rho,
/// so the expected mean total degree is 2(1 + nu + c + m*rho)/(1 + rho).
pub fn predict(params: &MpaParams) -> Result<Prediction, AnalyticError> {
    let a = alpha(params)?;
    let MpaParams { rho, nu, c, m, .. } = *params;
    Ok(Prediction {
        alpha: a,
        beta: beta(params)?,
        gamma: 1.0 / a + 1.0,
        provider_rate: nu,
        mean_total_degree: 2.0 * (1.0 + nu + c + m * rho) / (1.0 + rho),
    })
}
