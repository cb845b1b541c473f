//! Globally adaptive Gauss-Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point Gauss-Legendre rule on the whole
//! panel and on its two halves; the difference is the panel's error estimate
//! and the two-half value is kept. The panel with the largest estimate is
//! bisected until the summed estimate drops below the tolerance.
//!
//! Semi-infinite ranges `[a, +inf)` are mapped to `[0, 1)` with
//! `x = a + t / (1 - t)`, `dx = dt / (1 - t)^2`. Gauss nodes never touch
//! `t = 1`, so the integrand is never evaluated at infinity.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Gauss-Legendre nodes per panel.
    pub base_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            base_order: 15,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, base_order: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
            base_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return domain(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return domain(format!("abs_tol must be non-negative, got {}", self.abs_tol));
        }
        if self.max_subdivisions < 1 {
            return domain("max_subdivisions must be at least 1");
        }
        if self.base_order < 2 {
            return domain(format!("base_order must be at least 2, got {}", self.base_order));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Nodes and weights of the Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Fixed-rule integral over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + h * x);
        }
        sum * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

thread_local! {
    static RULES: RefCell<HashMap<usize, Rc<GaussRule>>> = RefCell::new(HashMap::new());
}

/// Per-thread cache of Gauss-Legendre rules keyed by order.
pub fn gauss_rule(n: usize) -> Rc<GaussRule> {
    RULES.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(GaussRule::new(n)))
            .clone()
    })
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, rule: &GaussRule, a: f64, b: f64, whole: f64) -> Result<Panel> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(f, a, mid);
    let right = rule.integrate(f, mid, b);
    if !(left.is_finite() && right.is_finite()) {
        return domain(format!("non-finite integrand on [{a}, {b}]"));
    }
    Ok(Panel {
        a,
        b,
        left,
        right,
        error: (whole - left - right).abs(),
    })
}

fn adapt_finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let rule = gauss_rule(cfg.base_order);
    let whole = rule.integrate(f, a, b);
    if !whole.is_finite() {
        return domain(format!("non-finite integrand on [{a}, {b}]"));
    }
    let mut heap = BinaryHeap::new();
    heap.push(make_panel(f, &rule, a, b, whole)?);
    let mut subdivisions = 0;
    let (mut value, mut error) = (heap.peek().unwrap().value(), heap.peek().unwrap().error);
    loop {
        if error <= (cfg.rel_tol * value.abs()).max(cfg.abs_tol) {
            // running sums drift; confirm with exact sums before accepting
            (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value(), e + p.error));
            if error <= (cfg.rel_tol * value.abs()).max(cfg.abs_tol) {
                return Ok(value);
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let left = make_panel(f, &rule, worst.a, mid, worst.left)?;
        let right = make_panel(f, &rule, mid, worst.b, worst.right)?;
        value += left.value() + right.value() - worst.value();
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Integrates `f` over `[a, b]`; either bound may be infinite.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidRange { a, b });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt_finite(&f, a, b, cfg),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adapt_finite(&g, 0.0, 1.0, cfg)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            };
            adapt_finite(&g, 0.0, 1.0, cfg)
        }
        (false, false) => {
            let lower = |t: f64| {
                let s = 1.0 - t;
                f(-t / s) / (s * s)
            };
            let upper = |t: f64| {
                let s = 1.0 - t;
                f(t / s) / (s * s)
            };
            Ok(adapt_finite(&lower, 0.0, 1.0, cfg)? + adapt_finite(&upper, 0.0, 1.0, cfg)?)
        }
    }
}

/// Integrates over consecutive sub-intervals split at `breakpoints`
/// (values outside `(a, b)` are ignored).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidRange { a, b });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        if hi > lo {
            total += integrate_adaptive(&f, lo, hi, cfg)?;
        }
        lo = hi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_on_unit_interval() {
        let v = integrate_adaptive(|_| 1.0, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_on_half_line() {
        let v = integrate_adaptive(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &QuadratureConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logarithm_cross_checked_at_two_orders() {
        let exact = 3f64.ln();
        for order in [7, 15, 21] {
            let cfg = QuadratureConfig {
                base_order: order,
                ..Default::default()
            };
            let v = integrate_adaptive(|y: f64| 1.0 / (2.0 + y), -1.0, 1.0, &cfg).unwrap();
            assert!((v - exact).abs() < 1e-12, "order {order}: {v}");
        }
    }

    #[test]
    fn gaussian_on_whole_line() {
        let v = integrate_adaptive(
            |x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let deg = 2 * cfg.base_order - 1;
        // integral of x^deg over [0, 2]
        let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
        let v = integrate_adaptive(|x: f64| x.powi(deg as i32), 0.0, 2.0, &cfg).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn rejects_empty_range() {
        let err = integrate_adaptive(|x| x, 1.0, 1.0, &QuadratureConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidRange { .. }));
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            max_subdivisions: 3,
            ..Default::default()
        };
        let err = integrate_adaptive(|x: f64| (1.0 / x).sin() / x.sqrt(), 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        for n in [2, 5, 15, 40] {
            let rule = GaussRule::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
        }
    }
}
