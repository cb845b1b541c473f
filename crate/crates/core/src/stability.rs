//! Stability constants `Λ(m, N)`, `Γ(m, N)`, the critical mass and the
//! spectral lower bound.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::find_root;

/// Physical configuration: mass ratio `m` of the distinct particle (fermion
/// mass 1), fermion count `N`, coupling `alpha`, spectral shift `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub m: f64,
    pub n_fermions: usize,
    pub alpha: f64,
    pub lambda: f64,
}

impl SystemParams {
    pub fn new(m: f64, n_fermions: usize, alpha: f64, lambda: f64) -> Result<Self> {
        check_m(m)?;
        check_n(n_fermions)?;
        if !alpha.is_finite() {
            return domain(format!("alpha must be finite, got {alpha}"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("lambda must be positive, got {lambda}"));
        }
        Ok(Self {
            m,
            n_fermions,
            alpha,
            lambda,
        })
    }
}

pub(crate) fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return domain(format!("mass ratio must be positive and finite, got {m}"));
    }
    Ok(())
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("need at least two fermions, got N = {n}"));
    }
    Ok(())
}

/// `arcsin(1/(m+1))`, accurate as `m -> 0`.
pub(crate) fn arcsin_inv(m: f64) -> f64 {
    1f64.atan2((m * (m + 2.0)).sqrt())
}

/// `(m+1)^2 [ (m(m+2))^{-1/2} - arcsin(1/(m+1)) ]`, with a series in
/// `u = 1/(m+1)` for large `m` where the bracket cancels.
fn lambda_core(m: f64) -> f64 {
    let u = 1.0 / (m + 1.0);
    if u < 0.1 {
        // u^{-2} sum_{j>=1} c_j 2j/(2j+1) u^{2j+1},  c_j = binom(2j, j)/4^j
        let u2 = u * u;
        let mut c = 1.0;
        let mut pow = u;
        let mut sum = 0.0;
        for j in 1..60 {
            let jf = j as f64;
            c *= (2.0 * jf - 1.0) / (2.0 * jf);
            pow *= u2;
            let term = c * 2.0 * jf / (2.0 * jf + 1.0) * pow;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum / u2
    } else {
        (m + 1.0).powi(2) * (1.0 / (m * (m + 2.0)).sqrt() - arcsin_inv(m))
    }
}

/// `Λ(m, N) = 2π^{-1} (N-1) (m+1)^2 [ (m(m+2))^{-1/2} - arcsin(1/(m+1)) ]`.
pub fn lambda_param(m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    Ok(2.0 / PI * (n - 1) as f64 * lambda_core(m))
}

/// `Γ(m, N) = (N-1) (m+1)^2 (m(m+2))^{-1/2} arcsin(1/(m+1))`.
pub fn gamma_param(m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    Ok((n - 1) as f64 * (m + 1.0).powi(2) / (m * (m + 2.0)).sqrt() * arcsin_inv(m))
}

/// Residual of the angular form of the critical-mass equation,
/// `cot 2θ + 2θ - (π/2)(1 - cos^2 2θ / (N-1))` with `θ = arctan sqrt(1 + 2/m)`.
pub fn theta_residual(m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    let theta = (1.0 + 2.0 / m).sqrt().atan();
    let c = (2.0 * theta).cos();
    let cot = c / (2.0 * theta).sin();
    Ok(cot + 2.0 * theta - FRAC_PI_2 * (1.0 - c * c / (n - 1) as f64))
}

fn bracketed_root<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let lo = 1e-4;
    let mut hi = 1e2;
    while f(lo) * f(hi) > 0.0 && hi < 1e8 {
        hi *= 10.0;
    }
    find_root(f, lo, hi, tol)
}

/// `m*(N)`: the unique root of `Λ(m, N) = 1`.
pub fn critical_mass(n: usize, tol: f64) -> Result<f64> {
    check_n(n)?;
    bracketed_root(|m| lambda_param(m, n).map_or(f64::NAN, |l| l - 1.0), tol)
}

/// Root of [`theta_residual`]; coincides with [`critical_mass`].
pub fn critical_mass_theta(n: usize, tol: f64) -> Result<f64> {
    check_n(n)?;
    bracketed_root(|m| theta_residual(m, n).unwrap_or(f64::NAN), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `m > m*(N)`: the form is bounded below.
    StableProven,
    /// `m < m*(2)`: the form is unbounded below.
    UnstableProven,
    /// `m*(2) <= m <= m*(N)`, `N > 2`: no result either way.
    Unresolved,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::StableProven => "StableProven",
            Regime::UnstableProven => "UnstableProven",
            Regime::Unresolved => "Unresolved",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub m: f64,
    pub n_fermions: usize,
    pub lambda_mn: f64,
    pub gamma_mn: f64,
    pub m_star_2: f64,
    pub m_star_n: f64,
    pub regime: Regime,
}

pub fn classify(m: f64, m_star_2: f64, m_star_n: f64) -> Regime {
    if m > m_star_n {
        Regime::StableProven
    } else if m < m_star_2 {
        Regime::UnstableProven
    } else {
        Regime::Unresolved
    }
}

pub fn stability_report(m: f64, n: usize, tol: f64) -> Result<StabilityReport> {
    let lambda_mn = lambda_param(m, n)?;
    let gamma_mn = gamma_param(m, n)?;
    let m_star_2 = critical_mass(2, tol)?;
    let m_star_n = if n == 2 { m_star_2 } else { critical_mass(n, tol)? };
    Ok(StabilityReport {
        m,
        n_fermions: n,
        lambda_mn,
        gamma_mn,
        m_star_2,
        m_star_n,
        regime: classify(m, m_star_2, m_star_n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralThreshold {
    /// `-α^2 / (4π^4 (1-Λ))` for `α < 0`, else 0.
    pub bound: f64,
    /// `α^2 / (4π^4 (1-Λ)^2)`: shift above which the charge form is non-negative.
    pub lambda_min: f64,
}

pub fn spectral_threshold(params: &SystemParams) -> Result<SpectralThreshold> {
    let lambda_mn = lambda_param(params.m, params.n_fermions)?;
    threshold_for(params.alpha, lambda_mn)
}

/// [`spectral_threshold`] for a given value of `Λ`.
pub fn threshold_for(alpha: f64, lambda_mn: f64) -> Result<SpectralThreshold> {
    if lambda_mn >= 1.0 {
        return Err(Error::UnstableRegime { lambda_mn });
    }
    if alpha >= 0.0 {
        return Ok(SpectralThreshold {
            bound: 0.0,
            lambda_min: 0.0,
        });
    }
    let gap = 1.0 - lambda_mn;
    let a2 = alpha * alpha / (4.0 * PI.powi(4));
    Ok(SpectralThreshold {
        bound: -a2 / gap,
        lambda_min: a2 / (gap * gap),
    })
}
