//! N-body charge-form ingredients: the Green function `G_λ`, the diagonal
//! weight `L_λ`, `D(K)`, the charge form `Φ_α^λ` (exact at `N = 2`, Monte
//! Carlo at `N = 3`) and the cut-off renormalisation residual.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::breakdown::FormBreakdown;
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_with_breaks, mc_integrate, standard_normal, MCEstimate, Proposal, QuadratureConfig};
use crate::partial_wave::{f_form, PartialWaveCharge};
use crate::stability::{check_m, gamma_param, lambda_param, SystemParams};
use crate::trials::{BumpOrbital, SlaterCharge};

/// Momenta `k_1, ..., k_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumConfig {
    pub vectors: Vec<[f64; 3]>,
}

impl MomentumConfig {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        if vectors.is_empty() {
            return domain("a momentum configuration needs at least one vector");
        }
        if vectors.iter().flatten().any(|c| !c.is_finite()) {
            return domain("momentum components must be finite");
        }
        Ok(Self { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(sum k_i^2, sum_{i<j} k_i . k_j)`, summed in a canonical order so the
/// result does not depend on how the momenta are listed.
fn quadratic_sums(vectors: &[[f64; 3]]) -> (f64, f64) {
    let mut v = vectors.to_vec();
    v.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    let mut sq = 0.0;
    let mut cross = 0.0;
    for i in 0..v.len() {
        sq += dot(&v[i], &v[i]);
        for j in i + 1..v.len() {
            cross += dot(&v[i], &v[j]);
        }
    }
    (sq, cross)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    Ok(())
}

/// `G_λ(k_1, ..., k_N) = [sum k_i^2 + 2/(m+1) sum_{i<j} k_i . k_j + λ]^{-1}`.
pub fn green_g(kvecs: &MomentumConfig, lambda: f64, m: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_m(m)?;
    let (sq, cross) = quadratic_sums(&kvecs.vectors);
    Ok(1.0 / (sq + 2.0 / (m + 1.0) * cross + lambda))
}

fn green_raw(vectors: &[[f64; 3]], lambda: f64, m: f64) -> f64 {
    let (sq, cross) = quadratic_sums(vectors);
    1.0 / (sq + 2.0 / (m + 1.0) * cross + lambda)
}

/// `L_λ(k_1, ..., k_{N-1}) = 2π^2 [m(m+2)/(m+1)^2 sum k_i^2 + 2m/(m+1)^2 sum_{i<j} k_i . k_j + λ]^{1/2}`.
pub fn l_lambda(kvecs: &MomentumConfig, lambda: f64, m: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_m(m)?;
    Ok(l_lambda_raw(&kvecs.vectors, lambda, m))
}

fn l_lambda_raw(vectors: &[[f64; 3]], lambda: f64, m: f64) -> f64 {
    let (sq, cross) = quadratic_sums(vectors);
    let mp1 = m + 1.0;
    let arg = m * (m + 2.0) / (mp1 * mp1) * sq + 2.0 * m / (mp1 * mp1) * cross + lambda;
    2.0 * PI * PI * arg.max(0.0).sqrt()
}

/// `D(K) = m/((m+1)(m+2)) [(m+3) sum k_i^2 + 2 sum_{i<j} k_i . k_j]` for the
/// `N - 2` spectator momenta `K = (k_2, ..., k_{N-1})`.
pub fn d_of_k(kvecs: &[[f64; 3]], m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    if n < 3 {
        return domain(format!("D(K) needs N >= 3, got N = {n}"));
    }
    if kvecs.len() != n - 2 {
        return domain(format!("D(K) needs {} momenta for N = {n}, got {}", n - 2, kvecs.len()));
    }
    let (sq, cross) = quadratic_sums(kvecs);
    Ok(m / ((m + 1.0) * (m + 2.0)) * ((m + 3.0) * sq + 2.0 * cross))
}

/// Weighted integral `2π^2 sum over channels of int p^2 g^2 sqrt(a p^2 + λ) dp`.
fn weighted_sqrt_norm(xi: &[PartialWaveCharge], a: f64, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let mut sum = 0.0;
    for c in xi {
        sum += c
            .radial
            .integrate_x(|x, h| (-x).exp() * h * h * (a * (2.0 * x).exp() + lambda).sqrt(), cfg)?;
    }
    Ok(2.0 * PI * PI * sum)
}

fn norm_sq(xi: &[PartialWaveCharge], cfg: &QuadratureConfig) -> Result<f64> {
    xi.iter().map(|c| c.radial.norm_sq(cfg)).sum()
}

fn require_two(params: &SystemParams) -> Result<()> {
    if params.n_fermions != 2 {
        return Err(Error::WrongN {
            expected: 2,
            got: params.n_fermions,
        });
    }
    Ok(())
}

/// Lower envelope `α‖ξ‖^2 + (1-Λ) 2π^2 int |ξ|^2 sqrt(m/(m+1) k^2 + λ)` at `N = 2`.
pub fn envelope_lower(xi: &[PartialWaveCharge], params: &SystemParams, cfg: &QuadratureConfig) -> Result<f64> {
    require_two(params)?;
    let m = params.m;
    let lam = lambda_param(m, 2)?;
    Ok(params.alpha * norm_sq(xi, cfg)? + (1.0 - lam) * weighted_sqrt_norm(xi, m / (m + 1.0), params.lambda, cfg)?)
}

/// Upper envelope `α‖ξ‖^2 + (1+Γ) 2π^2 int |ξ|^2 sqrt(m(m+N)/(m+1)^2 k^2 + λ)` at `N = 2`.
pub fn envelope_upper(xi: &[PartialWaveCharge], params: &SystemParams, cfg: &QuadratureConfig) -> Result<f64> {
    require_two(params)?;
    let m = params.m;
    let gam = gamma_param(m, 2)?;
    let a = m * (m + 2.0) / ((m + 1.0) * (m + 1.0));
    Ok(params.alpha * norm_sq(xi, cfg)? + (1.0 + gam) * weighted_sqrt_norm(xi, a, params.lambda, cfg)?)
}

/// `Φ_α^λ[ξ]` at `N = 2`, through `Φ_α^λ[ξ] - α‖ξ‖^2 = sqrt(λ) F_1[Q]` with
/// `Q(p) = λ^{3/4} ξ(sqrt(λ) p)`.
pub fn phi_two_body(xi: &[PartialWaveCharge], params: &SystemParams, cfg: &QuadratureConfig) -> Result<FormBreakdown> {
    require_two(params)?;
    let lambda = params.lambda;
    let shift = -0.5 * lambda.ln();
    let amp = lambda.powf(-0.25);
    let rescaled = xi
        .iter()
        .map(|c| PartialWaveCharge::new(c.l, c.m_z, c.radial.dilate(shift, amp)))
        .collect::<Result<Vec<_>>>()?;
    let f1 = f_form(&rescaled, 1.0, params.m, 2, cfg)?;
    let s = lambda.sqrt();
    Ok(FormBreakdown::exact(
        params.alpha * norm_sq(xi, cfg)?,
        s * f1.diagonal,
        s * f1.off_diagonal,
    ))
}

const HIST_CELLS: usize = 4096;

/// One-body proposal: a radial density that is piecewise constant in `t`
/// (with `r = e^t` or `r = t`), times the uniform distribution on the sphere.
struct RadialHistogram {
    t0: f64,
    dt: f64,
    log: bool,
    /// Cumulative cell masses, last entry 1.
    cdf: Vec<f64>,
    /// Density in `t` per cell.
    dens: Vec<f64>,
}

impl RadialHistogram {
    fn new<W: Fn(f64) -> f64>(t0: f64, t1: f64, log: bool, weight: W) -> Result<Self> {
        let dt = (t1 - t0) / HIST_CELLS as f64;
        let mut mass = Vec::with_capacity(HIST_CELLS);
        let mut left = weight(t0);
        for i in 0..HIST_CELLS {
            let a = t0 + i as f64 * dt;
            let right = weight(a + dt);
            mass.push((left + 4.0 * weight(a + 0.5 * dt) + right) * dt / 6.0);
            left = right;
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return domain("radial proposal weight has no mass");
        }
        let mut acc = 0.0;
        let cdf = mass
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect::<Vec<_>>();
        let dens = mass.iter().map(|w| w / (total * dt)).collect();
        let mut cdf = cdf;
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self { t0, dt, log, cdf, dens })
    }

    /// Radial weight `p |Q(p)|` (power 1) or `p^2 |Q(p)|^2` (power 2) of the
    /// `Y_1^0` orbital, in `x = ln p`. The first makes `Q(s) Q(t) G_λ / density`
    /// bounded, since `|s||t| G_λ` is.
    fn for_q(charge: &SlaterCharge, power: i32) -> Result<Self> {
        let q = &charge.q;
        let (a, b) = q.window();
        match power {
            1 => Self::new(a, b, true, |x| q.weighted(x).abs()),
            _ => Self::new(a, b, true, |x| (-x).exp() * q.weighted(x).powi(2)),
        }
    }

    /// `|Ξ|^p` profile of a bump orbital, linear in `u = k/β`.
    fn for_bump(bump: &BumpOrbital, power: i32) -> Result<Self> {
        let mut h = Self::new(0.0, 1.0, false, |u| u * u * bump.profile.eval(u).abs().powi(power))?;
        h.t0 = 0.0;
        h.dt *= bump.beta;
        for d in &mut h.dens {
            *d /= bump.beta;
        }
        Ok(h)
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c < u).min(HIST_CELLS - 1);
        let t = self.t0 + (i as f64 + rng.gen::<f64>()) * self.dt;
        let r = if self.log { t.exp() } else { t };
        let mut d = [standard_normal(rng), standard_normal(rng), standard_normal(rng)];
        let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        for c in &mut d {
            *c /= len;
        }
        out[0] = r * d[0];
        out[1] = r * d[1];
        out[2] = r * d[2];
    }

    /// Density in `R^3`.
    fn density(&self, k: &[f64]) -> f64 {
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        if !(r > 0.0) {
            return 0.0;
        }
        let t = if self.log { r.ln() } else { r };
        let pos = (t - self.t0) / self.dt;
        if !(pos >= 0.0 && pos < HIST_CELLS as f64) {
            return 0.0;
        }
        let dt_dr = if self.log { 1.0 / r } else { 1.0 };
        self.dens[pos as usize] * dt_dr / (4.0 * PI * r * r)
    }
}

/// Equal-weight mixture of products of one-body proposals.
struct ProductMixture {
    components: Vec<Vec<RadialHistogram>>,
    dim: usize,
}

impl ProductMixture {
    fn new(components: Vec<Vec<RadialHistogram>>) -> Self {
        let dim = 3 * components[0].len();
        Self { components, dim }
    }
}

impl Proposal for ProductMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng, point: &mut [f64]) {
        let c = if self.components.len() == 1 {
            0
        } else {
            rng.gen_range(0..self.components.len())
        };
        for (j, h) in self.components[c].iter().enumerate() {
            h.sample(rng, &mut point[3 * j..3 * j + 3]);
        }
    }

    fn density(&self, point: &[f64]) -> f64 {
        let sum: f64 = self
            .components
            .iter()
            .map(|comp| {
                comp.iter()
                    .enumerate()
                    .map(|(j, h)| h.density(&point[3 * j..3 * j + 3]))
                    .product::<f64>()
            })
            .sum();
        sum / self.components.len() as f64
    }
}

fn vec3(p: &[f64]) -> [f64; 3] {
    [p[0], p[1], p[2]]
}

/// Seeds of the independent Monte Carlo runs derived from the master seed.
fn sub_seed(seed: u64, part: u64) -> u64 {
    seed ^ part.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn require_three(charge: &SlaterCharge, params: &SystemParams) -> Result<()> {
    if params.n_fermions != 3 {
        return Err(Error::UnsupportedN(params.n_fermions));
    }
    if charge.n_fermions != 3 {
        return Err(Error::WrongN {
            expected: 3,
            got: charge.n_fermions,
        });
    }
    Ok(())
}

fn eval_pair(charge: &SlaterCharge, a: [f64; 3], b: [f64; 3]) -> num_complex::Complex64 {
    charge.eval(&[a, b]).expect("two momenta for N = 3")
}

/// `Φ_α^λ[ξ]` for a Slater charge at `N = 3` by importance sampling.
///
/// The diagonal part `int |ξ|^2 L_λ` (6 dimensions) uses the mixture
/// `(|Q|^2 ⊗ |Ξ|^2 + |Ξ|^2 ⊗ |Q|^2)/2`; the off-diagonal part
/// `2 int ξ*(s,k) ξ(t,k) G_λ(s,t,k)` (9 dimensions) uses
/// `(|pQ| ⊗ |pQ| ⊗ |Ξ|^2 + |Ξ| ⊗ |Ξ| ⊗ |Q|^2)/2`. The orbitals are orthonormal, so
/// `α‖ξ‖^2 = α`.
pub fn phi_slater_mc(charge: &SlaterCharge, params: &SystemParams, n_samples: u64, seed: u64) -> Result<FormBreakdown> {
    require_three(charge, params)?;
    let (m, lambda) = (params.m, params.lambda);
    let bump = &charge.bumps[0];

    let diag_prop = ProductMixture::new(vec![
        vec![RadialHistogram::for_q(charge, 2)?, RadialHistogram::for_bump(bump, 2)?],
        vec![RadialHistogram::for_bump(bump, 2)?, RadialHistogram::for_q(charge, 2)?],
    ]);
    let diag = mc_integrate(
        6,
        &diag_prop,
        |p| {
            let (k1, k2) = (vec3(&p[0..3]), vec3(&p[3..6]));
            eval_pair(charge, k1, k2).norm_sqr() * l_lambda_raw(&[k1, k2], lambda, m)
        },
        n_samples,
        sub_seed(seed, 1),
    )?;

    let off_prop = ProductMixture::new(vec![
        vec![
            RadialHistogram::for_q(charge, 1)?,
            RadialHistogram::for_q(charge, 1)?,
            RadialHistogram::for_bump(bump, 2)?,
        ],
        vec![
            RadialHistogram::for_bump(bump, 1)?,
            RadialHistogram::for_bump(bump, 1)?,
            RadialHistogram::for_q(charge, 2)?,
        ],
    ]);
    let off = mc_integrate(
        9,
        &off_prop,
        |p| {
            let (s, t, k) = (vec3(&p[0..3]), vec3(&p[3..6]), vec3(&p[6..9]));
            let a = eval_pair(charge, s, k);
            if a.norm_sqr() == 0.0 {
                return 0.0;
            }
            let b = eval_pair(charge, t, k);
            2.0 * (a.conj() * b).re * green_raw(&[s, t, k], lambda, m)
        },
        n_samples,
        sub_seed(seed, 2),
    )?;

    Ok(FormBreakdown::sampled(
        params.alpha,
        (diag.mean, diag.std_err),
        (off.mean, off.std_err),
        n_samples,
        seed,
    ))
}

/// Monte Carlo estimate of `‖ξ‖^2 = int |ξ(k_1, k_2)|^2` with the one-body
/// mixture `ρ ⊗ ρ`, `ρ = (|Q|^2 + |Ξ|^2)/2`.
pub fn slater_norm_mc(charge: &SlaterCharge, n_samples: u64, seed: u64) -> Result<MCEstimate> {
    if charge.n_fermions != 3 {
        return Err(Error::UnsupportedN(charge.n_fermions));
    }
    let bump = &charge.bumps[0];
    let prop = ProductMixture::new(vec![
        vec![RadialHistogram::for_q(charge, 2)?, RadialHistogram::for_q(charge, 2)?],
        vec![RadialHistogram::for_q(charge, 2)?, RadialHistogram::for_bump(bump, 2)?],
        vec![RadialHistogram::for_bump(bump, 2)?, RadialHistogram::for_q(charge, 2)?],
        vec![RadialHistogram::for_bump(bump, 2)?, RadialHistogram::for_bump(bump, 2)?],
    ]);
    let est = mc_integrate(
        6,
        &prop,
        |p| eval_pair(charge, vec3(&p[0..3]), vec3(&p[3..6])).norm_sqr(),
        n_samples,
        sub_seed(seed, 3),
    )?;
    Ok(MCEstimate { seed, ..est })
}

/// The diagonal part reduced by orthogonality of the orbitals:
/// `int |Q(k_1)|^2 |Ξ(k_2)|^2 L_λ(k_1, k_2)`, sampled from `|Q|^2 ⊗ |Ξ|^2`.
pub fn slater_diagonal_reduced_mc(
    charge: &SlaterCharge,
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    require_three(charge, params)?;
    let (m, lambda) = (params.m, params.lambda);
    let bump = &charge.bumps[0];
    let prop = ProductMixture::new(vec![vec![
        RadialHistogram::for_q(charge, 2)?,
        RadialHistogram::for_bump(bump, 2)?,
    ]]);
    let est = mc_integrate(
        6,
        &prop,
        |p| {
            let (k1, k2) = (vec3(&p[0..3]), vec3(&p[3..6]));
            charge.q_orbital(&k1).powi(2) * bump.eval(&k2).norm_sqr() * l_lambda_raw(&[k1, k2], lambda, m)
        },
        n_samples,
        sub_seed(seed, 4),
    )?;
    Ok(MCEstimate { seed, ..est })
}

/// Result of the cut-off renormalisation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormResidual {
    pub r: f64,
    /// `int_{|s| < R} G_λ(s, k_1, ..., k_{N-1}) ds`.
    pub integral: f64,
    /// `integral - 4πR + L_λ(k_1, ..., k_{N-1})`.
    pub residual: f64,
    /// Coupling `μ(α, R) = -(2π)^3 / (4πR + α)`.
    pub mu: f64,
}

/// `μ(α, R) = -(2π)^3 / (4πR + α)`.
pub fn coupling_mu(alpha: f64, r: f64) -> f64 {
    -(2.0 * PI).powi(3) / (4.0 * PI * r + alpha)
}

/// The ball integral of `G_λ` in the free momentum `s` against its large-`R`
/// asymptotics `4πR - L_λ`.
///
/// The angular integral is done in closed form; with `P = sum k_i` and
/// `A = sum k_i^2 + 2/(m+1) sum_{i<j} k_i.k_j + λ` the denominator is
/// `s^2 + A + b s cos θ`, `b = 2|P|/(m+1)`, whose sphere average is
/// `atanh(τ)/(τ (s^2 + A))` with `τ = b s/(s^2 + A)`.
pub fn cutoff_renorm_residual(
    kvecs: &[[f64; 3]],
    r: f64,
    lambda: f64,
    m: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<RenormResidual> {
    check_lambda(lambda)?;
    check_m(m)?;
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("cut-off radius must be positive, got {r}"));
    }
    if kvecs.iter().flatten().any(|c| !c.is_finite()) {
        return domain("momentum components must be finite");
    }
    let (sq, cross) = quadratic_sums(kvecs);
    let a = sq + 2.0 / (m + 1.0) * cross + lambda;
    let p = kvecs.iter().fold([0.0; 3], |acc, k| [acc[0] + k[0], acc[1] + k[1], acc[2] + k[2]]);
    let b = 2.0 * dot(&p, &p).sqrt() / (m + 1.0);
    // s^2 * (sphere integral) - 4π, written to avoid cancellation at large s
    let integrand = |s: f64| {
        let d = s * s + a;
        let tau = b * s / d;
        let ratio = if tau < 1e-4 {
            let t2 = tau * tau;
            1.0 + t2 / 3.0 + t2 * t2 / 5.0
        } else {
            tau.atanh() / tau
        };
        4.0 * PI * (s * s * (ratio - 1.0) - a) / d
    };
    let mut breaks = Vec::new();
    let mut x = a.sqrt().max(b);
    while x < r {
        breaks.push(x);
        x *= 4.0;
    }
    let l = if kvecs.is_empty() {
        2.0 * PI * PI * lambda.sqrt()
    } else {
        l_lambda_raw(kvecs, lambda, m)
    };
    // the excess is of size L_λ; panels far out contribute ~ 1/s
    let local = cfg.with_abs_tol(cfg.abs_tol.max(1e-3 * cfg.rel_tol * l));
    let excess = integrate_with_breaks(integrand, 0.0, r, &breaks, &local)?;
    let integral = 4.0 * PI * r + excess;
    Ok(RenormResidual {
        r,
        integral,
        residual: excess + l,
        mu: coupling_mu(alpha, r),
    })
}
