//! Trial charges `Q_{n,γ}`, bump orbitals, the Slater-determinant charge and
//! the energy scans showing that the form is unbounded below for small mass
//! ratios.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::breakdown::FormBreakdown;
use crate::error::{domain, Error, Result};
use crate::numerics::{erf, integrate_adaptive, LogGrid, QuadratureConfig, RadialFunction};
use crate::partial_wave::{f_form, g_diag, g_off, GOffMethod, PartialWaveCharge};
use crate::stability::{check_m, check_n, lambda_param};

/// Dilation `n`, log-width parameter `γ`, bump scale `β` and bump angular
/// momentum `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub n: f64,
    pub gamma: f64,
    pub beta: f64,
    pub ell: usize,
}

impl TrialParams {
    pub fn new(n: f64, gamma: f64, beta: f64, ell: usize) -> Result<Self> {
        check_gamma(gamma)?;
        if !(n >= 1.0 && n.is_finite()) {
            return domain(format!("n must be at least 1, got {n}"));
        }
        if !(beta > 0.0 && beta <= n) {
            return domain(format!("beta must lie in (0, n], got {beta}"));
        }
        if ell < 1 {
            return domain("bump angular momentum must be at least 1");
        }
        Ok(Self { n, gamma, beta, ell })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    Ok(())
}

/// `c_γ^2 = 2 / (1 + erf(1/(2γ)))`.
pub fn c_gamma_norm(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(2.0 / (1.0 + erf(0.5 / gamma)))
}

fn log_amplitude(gamma: f64) -> f64 {
    let c2 = 2.0 / (1.0 + erf(0.5 / gamma));
    -0.25 * PI.ln() + 0.5 * (c2 * gamma).ln() - 1.0 / (8.0 * gamma * gamma)
}

/// `Q_γ(p) = π^{-1/4} c_γ γ^{1/2} p^{-1} e^{-1/(8γ^2)} e^{-γ^2 (ln p)^2 / 2}` for `p >= 1`, else 0.
pub fn q_gamma(p: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(p > 0.0) {
        return domain(format!("momentum must be positive, got {p}"));
    }
    if p < 1.0 {
        return Ok(0.0);
    }
    let x = p.ln();
    Ok((log_amplitude(gamma) - x - 0.5 * gamma * gamma * x * x).exp())
}

/// `Q_γ` as a radial profile, supported on `x = ln p` in `[0, 1/γ^2 + 9/γ]`.
pub fn q_gamma_radial(gamma: f64) -> Result<RadialFunction> {
    check_gamma(gamma)?;
    let ln_a = log_amplitude(gamma);
    // h(x) = e^{2x} Q_γ(e^x) is a Gaussian in x of width 1/γ centred at 1/γ^2
    let hi = 1.0 / (gamma * gamma) + 9.0 / gamma;
    let grid = LogGrid::covering(0.0, hi, 0.02 / gamma.max(0.1))?;
    RadialFunction::from_weighted(grid, (0.0, hi), move |x: f64| {
        (ln_a + x - 0.5 * gamma * gamma * x * x).exp()
    })
}

/// `int_0^inf p^{2+a} |Q_γ(p)|^2 dp = c_γ^2/2 (1 + erf((1+a)/(2γ))) exp((2a + a^2)/(4γ^2))`.
pub fn q_moment(gamma: f64, a: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(a >= -1.0) {
        return domain(format!("moment order must be at least -1, got {a}"));
    }
    let c2 = c_gamma_norm(gamma)?;
    Ok(0.5 * c2 * (1.0 + erf((1.0 + a) / (2.0 * gamma))) * ((2.0 * a + a * a) / (4.0 * gamma * gamma)).exp())
}

/// `Q_{n,γ}(k) = n^{-3/2} Q_γ(k/n)` in the channel `(l, m_z) = (1, 0)`.
pub fn trial_charge_q(params: &TrialParams) -> Result<PartialWaveCharge> {
    let q = q_gamma_radial(params.gamma)?;
    PartialWaveCharge::new(1, 0, q.dilate(params.n.ln(), params.n.sqrt()))
}

/// A smooth radial profile `Ξ` supported in `(0, 1)` with
/// `int_0^1 k^2 Ξ(k)^2 dk = 1`.
#[derive(Clone)]
pub struct BumpProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for BumpProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BumpProfile")
    }
}

impl BumpProfile {
    /// Wraps `f` after checking that it vanishes outside `(0, 1)` and is normalised.
    pub fn new<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for k in [-0.5, 0.0, 1.0, 1.0 + 1e-9, 1.5, 3.0] {
            if f(k) != 0.0 {
                return Err(Error::BadProfile(format!("nonzero value {} at k = {k}", f(k))));
            }
        }
        let cfg = QuadratureConfig::default().with_rel_tol(1e-13);
        let norm = integrate_adaptive(|k| k * k * f(k) * f(k), 0.0, 1.0, &cfg)
            .map_err(|e| Error::BadProfile(e.to_string()))?;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::BadProfile(format!("int k^2 Ξ^2 = {norm}, expected 1")));
        }
        Ok(Self { f: Arc::new(f) })
    }

    /// `Ξ(k) ∝ exp(-1/(k(1-k)))` on `(0, 1)`, normalised numerically.
    pub fn standard() -> Self {
        let raw = |k: f64| {
            if k > 0.0 && k < 1.0 {
                (-1.0 / (k * (1.0 - k))).exp()
            } else {
                0.0
            }
        };
        let cfg = QuadratureConfig::default().with_rel_tol(1e-14);
        let norm = integrate_adaptive(|k| k * k * raw(k) * raw(k), 0.0, 1.0, &cfg).expect("smooth bump integrates");
        let c = 1.0 / norm.sqrt();
        Self::new(move |k| c * raw(k)).expect("standard bump is valid")
    }

    pub fn eval(&self, k: f64) -> f64 {
        (self.f)(k)
    }
}

/// `Ξ_{β,l}(k) = (4π)^{-1/2} β^{-3/2} Ξ(|k|/β) e^{i l φ_k}`.
#[derive(Debug, Clone)]
pub struct BumpOrbital {
    pub beta: f64,
    pub ell: i64,
    pub profile: BumpProfile,
}

impl BumpOrbital {
    /// Radial part `β^{-3/2} Ξ(k/β)`, normalised in `L^2(k^2 dk)`.
    pub fn radial(&self, k: f64) -> f64 {
        self.beta.powf(-1.5) * self.profile.eval(k / self.beta)
    }

    pub fn eval(&self, k: &[f64; 3]) -> Complex64 {
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let phi = k[1].atan2(k[0]);
        Complex64::from_polar(self.radial(r) / (4.0 * PI).sqrt(), self.ell as f64 * phi)
    }
}

pub fn bump_charge_xi(beta: f64, ell: usize, profile: &BumpProfile) -> Result<BumpOrbital> {
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive, got {beta}"));
    }
    if ell < 1 {
        return domain("bump angular momentum must be at least 1");
    }
    Ok(BumpOrbital {
        beta,
        ell: ell as i64,
        profile: profile.clone(),
    })
}

/// Antisymmetrised product of `Q_{n,γ}` and the bumps `Ξ_{β,2}, ..., Ξ_{β,N-1}`,
/// as a charge in the momenta of `N - 1` fermions.
#[derive(Debug, Clone)]
pub struct SlaterCharge {
    pub params: TrialParams,
    pub n_fermions: usize,
    /// Radial profile of `Q_{n,γ}`; the angular factor is `Y_1^0`.
    pub q: RadialFunction,
    pub bumps: Vec<BumpOrbital>,
}

pub fn slater_charge(params: &TrialParams, n_fermions: usize) -> Result<SlaterCharge> {
    slater_charge_with(params, n_fermions, &BumpProfile::standard())
}

pub fn slater_charge_with(params: &TrialParams, n_fermions: usize, profile: &BumpProfile) -> Result<SlaterCharge> {
    if n_fermions < 3 {
        return domain(format!("a Slater charge needs N >= 3, got {n_fermions}"));
    }
    if params.beta > params.n {
        return Err(Error::SupportOverlap {
            beta: params.beta,
            n: params.n,
        });
    }
    let q = trial_charge_q(params)?.radial;
    let bumps = (2..n_fermions)
        .map(|l| bump_charge_xi(params.beta, l, profile))
        .collect::<Result<Vec<_>>>()?;
    Ok(SlaterCharge {
        params: *params,
        n_fermions,
        q,
        bumps,
    })
}

impl SlaterCharge {
    /// `Q_{n,γ}(|k|) Y_1^0(k̂)`.
    pub fn q_orbital(&self, k: &[f64; 3]) -> f64 {
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        (3.0 / (4.0 * PI)).sqrt() * k[2] / r * self.q.eval(r)
    }

    /// `det[φ_i(k_j)] / sqrt((N-1)!)` for the `N - 1` momenta `ks`.
    pub fn eval(&self, ks: &[[f64; 3]]) -> Result<Complex64> {
        let dim = self.n_fermions - 1;
        if ks.len() != dim {
            return domain(format!("expected {dim} momenta, got {}", ks.len()));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (j, k) in ks.iter().enumerate() {
            a[j] = Complex64::new(self.q_orbital(k), 0.0);
            for (i, b) in self.bumps.iter().enumerate() {
                a[(i + 1) * dim + j] = b.eval(k);
            }
        }
        let fact: f64 = (1..=dim).map(|i| i as f64).product();
        Ok(determinant(&mut a, dim) / fact.sqrt())
    }
}

/// `a / b` without forming `|b|^2`, which underflows for tiny pivots.
fn smith_div(a: Complex64, b: Complex64) -> Complex64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Determinant by Gaussian elimination with partial pivoting; `a` is row-major
/// and is overwritten.
fn determinant(a: &mut [Complex64], n: usize) -> Complex64 {
    if n == 2 {
        return a[0] * a[3] - a[1] * a[2];
    }
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
            .unwrap();
        if a[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = smith_div(a[r * n + col], p);
            for c in col..n {
                let v = a[col * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    det
}

/// `F_1[Q_{n,γ}]` through the scaling law
/// `F_1[Q_{n,γ}] = n (G^diag_{n^{-2}}[Q_γ] + G^off_{n^{-2},1}[Q_γ])`.
pub fn f1_trial_energy(params: &TrialParams, m: f64, n: usize, cfg: &QuadratureConfig) -> Result<FormBreakdown> {
    f1_trial_energy_at_zeta(params, m, n, params.n.powi(-2), cfg)
}

/// The scaling-law evaluation with `ζ` supplied; `ζ = 0` freezes the
/// `n`-dependence to the explicit prefactor.
pub fn f1_trial_energy_at_zeta(
    params: &TrialParams,
    m: f64,
    n: usize,
    zeta: f64,
    cfg: &QuadratureConfig,
) -> Result<FormBreakdown> {
    check_m(m)?;
    check_n(n)?;
    let q = q_gamma_radial(params.gamma)?;
    let diagonal = g_diag(&q, zeta, m, cfg)?;
    let off = g_off(&q, 1, zeta, m, n, GOffMethod::Direct, cfg)?;
    Ok(FormBreakdown::exact(0.0, params.n * diagonal, params.n * off))
}

/// `F_1[Q_{n,γ}]` evaluated directly on the dilated charge (no scaling law).
pub fn f1_trial_energy_direct(params: &TrialParams, m: f64, n: usize, cfg: &QuadratureConfig) -> Result<FormBreakdown> {
    f_form(&[trial_charge_q(params)?], 1.0, m, n, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// `E(n) < 0` throughout and `E(2n)/E(n)` in the divergence window.
    Diverging,
    /// `E(n) >= 0` throughout.
    Bounded,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Diverging => "Diverging",
            Verdict::Bounded => "Bounded",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Range of `E(2n)/E(n)` accepted as linear divergence.
pub const DIVERGENCE_RATIO: (f64, f64) = (1.5, 2.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub n: f64,
    pub energy: FormBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub m: f64,
    pub n_fermions: usize,
    pub gamma: f64,
    pub points: Vec<ScanPoint>,
    pub verdict: Verdict,
}

impl ScanResult {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].energy.total < w[0].energy.total)
    }

    /// Rows of the scan CSV (no header).
    pub fn write_rows<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.points {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.m,
                self.n_fermions,
                self.gamma,
                p.n,
                p.energy.total,
                p.energy.diagonal,
                p.energy.off_diagonal,
                self.verdict
            )?;
        }
        Ok(())
    }
}

pub const SCAN_CSV_HEADER: &str = "m,N,gamma,n,E_total,E_diag,E_off,verdict";

/// Classifies a series `E(n)` evaluated on increasing `ns`.
pub fn classify_series(ns: &[f64], energies: &[f64]) -> Verdict {
    if energies.iter().all(|e| *e >= 0.0) {
        return Verdict::Bounded;
    }
    if energies.iter().any(|e| *e >= 0.0) {
        return Verdict::Inconclusive;
    }
    let mut pairs = 0;
    for (i, n) in ns.iter().enumerate() {
        if let Some(j) = ns.iter().position(|n2| (n2 - 2.0 * n).abs() <= 1e-12 * n2.abs()) {
            let r = energies[j] / energies[i];
            if !(r >= DIVERGENCE_RATIO.0 && r <= DIVERGENCE_RATIO.1) {
                return Verdict::Inconclusive;
            }
            pairs += 1;
        }
    }
    if pairs == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Diverging
    }
}

/// Evaluates `E(n) = F_1[Q_{n,γ}]` along `n_list` and classifies the trend.
pub fn instability_scan(m: f64, n: usize, gamma: f64, n_list: &[f64], cfg: &QuadratureConfig) -> Result<ScanResult> {
    check_m(m)?;
    check_n(n)?;
    check_gamma(gamma)?;
    if n_list.len() < 4 {
        return domain(format!("scan needs at least 4 values of n, got {}", n_list.len()));
    }
    if n_list.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("n_list must be strictly increasing");
    }
    // G_ζ[Q_γ] is shared by every n with the same ζ, but ζ = n^{-2} differs per point
    let points = n_list
        .par_iter()
        .map(|&nn| {
            let params = TrialParams::new(nn, gamma, 1.0, 1)?;
            Ok(ScanPoint {
                n: nn,
                energy: f1_trial_energy(&params, m, n, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = points.iter().map(|p| p.energy.total).collect();
    Ok(ScanResult {
        m,
        n_fermions: n,
        gamma,
        verdict: classify_series(n_list, &energies),
        points,
    })
}

/// Scans every `γ` in `gammas`.
pub fn instability_scan_grid(
    m: f64,
    n: usize,
    gammas: &[f64],
    n_list: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<ScanResult>> {
    gammas
        .par_iter()
        .map(|&g| instability_scan(m, n, g, n_list, cfg))
        .collect()
}

/// The pieces of the final energy estimate: `leading * (1 - Λ(m,2) + c_N * correction)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    /// `2π^2 n sqrt(m(m+2))/(m+1) e^{3/(4γ^2)}`.
    pub prefactor: f64,
    pub one_minus_lambda: f64,
    /// `α/n + sqrt(γ) + sqrt(nβ) e^{9/(16γ^2)} + (β^2/n + β) e^{5/(4γ^2)}`.
    pub correction: f64,
}

pub fn bound_terms(params: &TrialParams, m: f64, alpha: f64) -> Result<BoundTerms> {
    check_m(m)?;
    let TrialParams { n, gamma, beta, .. } = *params;
    let g2 = gamma * gamma;
    Ok(BoundTerms {
        prefactor: 2.0 * PI * PI * n * (m * (m + 2.0)).sqrt() / (m + 1.0) * (0.75 / g2).exp(),
        one_minus_lambda: 1.0 - lambda_param(m, 2)?,
        correction: alpha / n
            + gamma.sqrt()
            + (n * beta).sqrt() * (9.0 / (16.0 * g2)).exp()
            + (beta * beta / n + beta) * (1.25 / g2).exp(),
    })
}

/// Upper bound on the energy of the Slater trial charge with constant `c_n`.
pub fn analytic_bound(params: &TrialParams, m: f64, n: usize, alpha: f64, c_n: f64) -> Result<f64> {
    check_n(n)?;
    if !(c_n >= 0.0) {
        return domain(format!("c_N must be non-negative, got {c_n}"));
    }
    let t = bound_terms(params, m, alpha)?;
    Ok(t.prefactor * (t.one_minus_lambda + c_n * t.correction))
}

/// One Monte Carlo observation used to fit `c_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub params: TrialParams,
    pub m: f64,
    pub alpha: f64,
    pub total: f64,
}

/// Smallest `c_N >= 0` for which [`analytic_bound`] lies above every sample.
/// This is a fitted value, not the (unspecified) constant of the estimate.
pub fn fit_c_n(samples: &[BoundSample]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for s in samples {
        let t = bound_terms(&s.params, s.m, s.alpha)?;
        let excess = s.total - t.prefactor * t.one_minus_lambda;
        if excess > 0.0 {
            let slope = t.prefactor * t.correction;
            if !(slope > 0.0) {
                return domain("bound correction is not positive; no c_N can cover this sample");
            }
            c = c.max(excess / slope);
        }
    }
    Ok(c)
}
