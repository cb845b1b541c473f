//! One-charge forms by partial wave: the angular kernel, the symbols
//! `S_l(k)`, the series coefficients `B_{l,k}`, the diagonal and off-diagonal
//! forms `G^diag_ζ`, `G^off_{ζ,l}` and their sum `F_ζ` over channels.
//!
//! All radial integrals run over `x = ln p` using the weighted profile
//! `h(x) = e^{2x} g(e^x)` of [`RadialFunction`].

use std::cell::RefCell;
use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::breakdown::FormBreakdown;
use crate::error::{domain, Error, Result};
use crate::numerics::{
    integrate_adaptive, integrate_with_breaks, legendre_p_unchecked, legendre_q, QuadratureConfig, RadialFunction,
    SharpSampler, SHARP_TOL,
};
use crate::stability::{arcsin_inv, check_m, check_n};

/// A radial profile in the angular channel `(l, m_z)`.
#[derive(Debug, Clone)]
pub struct PartialWaveCharge {
    pub l: usize,
    pub m_z: i64,
    pub radial: RadialFunction,
}

impl PartialWaveCharge {
    pub fn new(l: usize, m_z: i64, radial: RadialFunction) -> Result<Self> {
        if m_z.unsigned_abs() as usize > l {
            return domain(format!("|m_z| = {} exceeds l = {l}", m_z.abs()));
        }
        Ok(Self { l, m_z, radial })
    }
}

/// `int_{-1}^{1} P_l(y) / (p^2 + q^2 + ζ + 2pqy/(m+1)) dy`
/// `= (-1)^l (m+1)/(pq) Q_l(z)`, `z = (m+1)(p^2 + q^2 + ζ)/(2pq)`.
pub fn angular_kernel(l: usize, p: f64, q: f64, zeta: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    if !(p > 0.0 && q > 0.0) {
        return domain(format!("momenta must be positive, got p = {p}, q = {q}"));
    }
    if !(zeta >= 0.0) {
        return domain(format!("zeta must be non-negative, got {zeta}"));
    }
    let z = (m + 1.0) * (p * p + q * q + zeta) / (2.0 * p * q);
    Ok(parity(l) * (m + 1.0) / (p * q) * legendre_q(l, z)?)
}

fn parity(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Accuracy used for the `y`-integral inside [`s_kernel`].
fn s_cfg() -> QuadratureConfig {
    QuadratureConfig::default().with_rel_tol(1e-13).with_abs_tol(1e-300)
}

/// `sinh(ka)/sinh(πk/2)` (odd) or `cosh(ka)/cosh(πk/2)` (even) for `|a| < π/2`,
/// written with decaying exponentials so that large `k` does not overflow.
fn hyperbolic_ratio(odd: bool, k: f64, a: f64) -> f64 {
    let k = k.abs();
    if odd {
        if k == 0.0 {
            return 2.0 * a / PI;
        }
        let b = a.abs();
        let r = (k * (b - FRAC_PI_2)).exp() * (-(-2.0 * k * b).exp_m1()) / (-(-PI * k).exp_m1());
        r.copysign(a)
    } else {
        let b = a.abs();
        (k * (b - FRAC_PI_2)).exp() * (1.0 + (-2.0 * k * b).exp()) / (1.0 + (-PI * k).exp())
    }
}

/// The symbol `S_l(k)` of `G^off_{0,l}` after diagonalisation in log momentum:
///
/// odd `l`:  `-π^2 (N-1) int P_l(y) sinh(ka) / (cos a sinh(πk/2)) dy`,
/// even `l`: ` π^2 (N-1) int P_l(y) cosh(ka) / (cos a cosh(πk/2)) dy`,
///
/// with `a = arcsin(y/(m+1))`.
pub fn s_kernel(l: usize, k: f64, m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    if !k.is_finite() {
        return domain(format!("k must be finite, got {k}"));
    }
    let odd = l % 2 == 1;
    let mp1 = m + 1.0;
    // the integrand is even in y
    let f = |y: f64| {
        let s = y / mp1;
        let a = s.asin();
        let cos_a = ((1.0 - s) * (1.0 + s)).sqrt();
        legendre_p_unchecked(l, y) * hyperbolic_ratio(odd, k, a) / cos_a
    };
    // |P_l| <= 1 and the ratio peaks at y = 1, which bounds the integrand;
    // an absolute floor at that scale lets cancelling channels converge
    let edge = 1.0 / mp1;
    let scale = hyperbolic_ratio(odd, k, edge.asin()).abs() / ((1.0 - edge) * (1.0 + edge)).sqrt();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let cfg = s_cfg().with_abs_tol(1e-16 * scale);
    let integral = 2.0 * integrate_adaptive(f, 0.0, 1.0, &cfg)?;
    Ok(parity(l) * PI * PI * (n - 1) as f64 * integral)
}

/// `S_0(0) = 2π^2 (N-1)(m+1) arcsin(1/(m+1))`, the maximum of every even symbol.
pub fn s0_at_zero(m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    Ok(2.0 * PI * PI * (n - 1) as f64 * (m + 1.0) * arcsin_inv(m))
}

/// `S_1(0) = -4π (N-1)(m+1) [1 - sqrt(m(m+2)) arcsin(1/(m+1))]`, the minimum of every odd symbol.
pub fn s1_at_zero(m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    Ok(-4.0 * PI * (n - 1) as f64 * (m + 1.0) * (1.0 - (m * (m + 2.0)).sqrt() * arcsin_inv(m)))
}

/// Samples of `S_l(k)` for `k >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub l: usize,
    pub m: f64,
    pub n_fermions: usize,
    pub k_values: Vec<f64>,
    pub s_values: Vec<f64>,
}

impl KernelTable {
    /// `steps` equal intervals on `[0, k_max]`.
    pub fn build(l: usize, m: f64, n: usize, k_max: f64, steps: usize) -> Result<Self> {
        check_m(m)?;
        check_n(n)?;
        if !(k_max > 0.0 && k_max.is_finite()) || steps == 0 {
            return domain("kernel table needs k_max > 0 and at least one step");
        }
        let k_values: Vec<f64> = (0..=steps).map(|i| k_max * i as f64 / steps as f64).collect();
        let s_values = k_values
            .par_iter()
            .map(|&k| s_kernel(l, k, m, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            l,
            m,
            n_fermions: n,
            k_values,
            s_values,
        })
    }

    /// CSV with header `l,m,N,k,S_l_k` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "l,m,N,k,S_l_k")?;
        for (k, s) in self.k_values.iter().zip(&self.s_values) {
            writeln!(out, "{},{:.16e},{},{:.16e},{:.16e}", self.l, self.m, self.n_fermions, k, s)?;
        }
        Ok(())
    }
}

/// Series coefficient
/// `B_{l,k} = 2π(N-1) (-2/(m+1))^k / (k! 2^l l!) int (1-y^2)^l (d/dy)^l y^k dy`,
/// which reduces to
/// `2π(N-1) (-2/(m+1))^k / (2^l (k-l)!) * prod_{i=0}^{l} ((j+1)/2 + i)^{-1}`, `j = k - l`,
/// and vanishes unless `k >= l` and `k - l` is even.
pub fn b_coeff(l: usize, k: usize, m: f64, n: usize) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    if k < l || (k - l) % 2 == 1 {
        return Ok(0.0);
    }
    let j = k - l;
    let mut log = (2.0 * PI * (n - 1) as f64).ln() + k as f64 * (2.0 / (m + 1.0)).ln() - l as f64 * 2f64.ln();
    for i in 1..=j {
        log -= (i as f64).ln();
    }
    for i in 0..=l {
        log -= ((j as f64 + 1.0) / 2.0 + i as f64).ln();
    }
    Ok(parity(k) * log.exp())
}

/// Unwraps `value`, remembering the first error so that it can be raised
/// once the enclosing quadrature returns.
pub(crate) fn first_error(slot: &RefCell<Option<Error>>, value: Result<f64>) -> f64 {
    value.unwrap_or_else(|e| {
        slot.borrow_mut().get_or_insert(e);
        0.0
    })
}

/// `max |h|` on the window; sets absolute tolerances of nested integrals.
fn weighted_scale(g: &RadialFunction) -> f64 {
    let (a, b) = g.window();
    let n = 4096;
    (0..=n)
        .map(|i| g.weighted(a + (b - a) * i as f64 / n as f64).abs())
        .fold(0.0, f64::max)
}

/// `2π^2 int_0^inf p^2 sqrt(m(m+2)p^2/(m+1)^2 + ζ) |g(p)|^2 dp`.
pub fn g_diag(g: &RadialFunction, zeta: f64, m: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_m(m)?;
    if !(zeta >= 0.0) {
        return domain(format!("zeta must be non-negative, got {zeta}"));
    }
    let c2 = m * (m + 2.0) / (m + 1.0).powi(2);
    let v = g.integrate_x(
        |x, h| {
            let w = if x >= 0.0 {
                (c2 + zeta * (-2.0 * x).exp()).sqrt()
            } else {
                (-x).exp() * (c2 * (2.0 * x).exp() + zeta).sqrt()
            };
            h * h * w
        },
        cfg,
    )?;
    Ok(2.0 * PI * PI * v)
}

/// Evaluation route for [`g_off`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GOffMethod {
    /// Double radial quadrature of the angular kernel.
    Direct,
    /// Laplace-type expansion in powers of `2pq/(m+1)`, summed up to `k_max`.
    Series { k_max: usize },
    /// `int S_l(k) |g♯(k)|^2 dk`; only at `ζ = 0`.
    Mellin,
}

/// Relative size of the estimated series tail above which
/// [`Error::TruncationWarning`] is raised.
pub const SERIES_TAIL_TOL: f64 = 1e-7;

/// Cut-off of the `k`-integral in the Mellin route.
pub const MELLIN_K_MAX: f64 = 40.0;

/// `2π(N-1) int int p^2 g(p) q^2 g(q) angular_kernel(l, p, q, ζ, m) dp dq`.
pub fn g_off(
    g: &RadialFunction,
    l: usize,
    zeta: f64,
    m: f64,
    n: usize,
    method: GOffMethod,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_m(m)?;
    check_n(n)?;
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return domain(format!("zeta must be non-negative, got {zeta}"));
    }
    match method {
        GOffMethod::Direct => g_off_direct(g, l, zeta, m, n, cfg),
        GOffMethod::Series { k_max } => {
            if k_max < l {
                return domain(format!("series needs k_max >= l, got k_max = {k_max}, l = {l}"));
            }
            g_off_series(g, l, zeta, m, n, k_max, cfg)
        }
        GOffMethod::Mellin => {
            if zeta != 0.0 {
                return Err(Error::MethodMismatch { zeta });
            }
            g_off_mellin(g, l, m, n, cfg)
        }
    }
}

fn g_off_direct(g: &RadialFunction, l: usize, zeta: f64, m: f64, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let (a, b) = g.window();
    let scale = weighted_scale(g);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let inner_cfg = cfg
        .with_rel_tol(cfg.rel_tol * 0.1)
        .with_abs_tol(cfg.rel_tol * 1e-3 * scale);
    let mp1 = m + 1.0;
    // symmetric integrand: twice the triangle x2 < x1
    let outer = |x1: f64| -> Result<f64> {
        let h1 = g.weighted(x1);
        if h1 == 0.0 || x1 <= a {
            return Ok(0.0);
        }
        let inner = integrate_adaptive(
            |x2| {
                let z = mp1 * ((x1 - x2).cosh() + 0.5 * zeta * (-(x1 + x2)).exp());
                g.weighted(x2) * legendre_q(l, z).unwrap_or(0.0)
            },
            a,
            x1,
            &inner_cfg,
        )?;
        Ok(h1 * inner)
    };
    let failure = RefCell::new(None);
    let v = integrate_adaptive(|x1| first_error(&failure, outer(x1)), a, b, cfg)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * 2.0 * PI * (n - 1) as f64 * parity(l) * mp1 * v)
}

fn g_off_series(
    g: &RadialFunction,
    l: usize,
    zeta: f64,
    m: f64,
    n: usize,
    k_max: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (a, b) = g.window();
    let scale = weighted_scale(g);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let inner_cfg = cfg
        .with_rel_tol(cfg.rel_tol * 0.1)
        .with_abs_tol(cfg.rel_tol * 1e-3 * scale);
    let mut terms: Vec<f64> = Vec::new();
    for k in (l..=k_max).step_by(2) {
        let kp1 = (k + 1) as f64;
        // kernel e^{(k+1)u} exp(-e^{2u}) peaks at u = ln((k+1)/2)/2
        let u_peak = 0.5 * (kp1 / 2.0).ln();
        let j_k = |s: f64| -> f64 {
            let hi = (s + u_peak + 4.5).min(b);
            if hi <= a {
                return 0.0;
            }
            integrate_with_breaks(
                |x| {
                    let u = x - s;
                    g.weighted(x) * (kp1 * u - (2.0 * u).exp()).exp()
                },
                a,
                hi,
                &[s + u_peak],
                &inner_cfg,
            )
            .unwrap_or(f64::NAN)
        };
        let s_lo = a - u_peak.max(0.0) - 6.0;
        let s_hi = b + 40.0 / kp1 + 2.0;
        let integral = integrate_adaptive(
            |s| {
                let j = j_k(s);
                (-zeta * (-2.0 * s).exp()).exp() * j * j
            },
            s_lo,
            s_hi,
            cfg,
        )?;
        if !integral.is_finite() {
            return domain("series term is not finite");
        }
        terms.push(2.0 * b_coeff(l, k, m, n)? * integral);
        if geometric_tail(&terms) < 1e-3 * SERIES_TAIL_TOL * terms.iter().sum::<f64>().abs() {
            break;
        }
    }
    let value: f64 = terms.iter().sum();
    let tail = geometric_tail(&terms);
    if tail > SERIES_TAIL_TOL * value.abs() && tail > cfg.abs_tol {
        return Err(Error::TruncationWarning { value, tail, k_max });
    }
    Ok(value)
}

/// Tail of a series extrapolated geometrically from its last two terms.
fn geometric_tail(terms: &[f64]) -> f64 {
    match terms.len() {
        0 | 1 => f64::INFINITY,
        len => {
            let (prev, last) = (terms[len - 2].abs(), terms[len - 1].abs());
            if last == 0.0 {
                0.0
            } else if prev > 0.0 && last < prev {
                let r = last / prev;
                last * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        }
    }
}

fn g_off_mellin(g: &RadialFunction, l: usize, m: f64, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let sampler = SharpSampler::new(g, MELLIN_K_MAX);
    let failure = RefCell::new(None);
    let v = integrate_adaptive(
        |k| {
            let value = sampler
                .eval(k, SHARP_TOL)
                .and_then(|s| Ok(s.norm_sqr() * s_kernel(l, k, m, n)?));
            first_error(&failure, value)
        },
        0.0,
        MELLIN_K_MAX,
        cfg,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * v)
}

/// `F_ζ[f] = sum over channels of G^diag_ζ + G^off_{ζ,l}` (direct method).
pub fn f_form(
    charges: &[PartialWaveCharge],
    zeta: f64,
    m: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<FormBreakdown> {
    check_m(m)?;
    check_n(n)?;
    let mut seen = HashSet::new();
    for c in charges {
        if !seen.insert((c.l, c.m_z)) {
            return Err(Error::DuplicateChannel { l: c.l, m_z: c.m_z });
        }
    }
    let parts = charges
        .par_iter()
        .map(|c| {
            Ok((
                g_diag(&c.radial, zeta, m, cfg)?,
                g_off(&c.radial, c.l, zeta, m, n, GOffMethod::Direct, cfg)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let diagonal = parts.iter().map(|p| p.0).sum();
    let off = parts.iter().map(|p| p.1).sum();
    Ok(FormBreakdown::exact(0.0, diagonal, off))
}
