//! Radial profiles on logarithmic grids and the ♯-transform.
//!
//! A radial profile `g(p)` is stored together with its weighted form
//! `h(x) = e^{2x} g(e^x)`. Every form in this crate is an integral over
//! `x = ln p` of products of `h`, so working with `h` avoids the overflow
//! of `p^k` factors for very wide profiles. Outside `window()` the profile is
//! treated as zero; a jump at a window edge is allowed.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::quadrature::{integrate_adaptive, QuadratureConfig};
use crate::error::{domain, Error, Result};

/// Uniform grid in `x = ln p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Default for LogGrid {
    /// `[-12, 12]` with 4096 intervals.
    fn default() -> Self {
        Self {
            x_min: -12.0,
            x_max: 12.0,
            n_points: 4097,
        }
    }
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return domain(format!("log grid needs finite x_min < x_max, got [{x_min}, {x_max}]"));
        }
        if n_points < 16 {
            return domain(format!("log grid needs at least 16 points, got {n_points}"));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Smallest grid on `[x_min, x_max]` whose spacing does not exceed `max_spacing`.
    pub fn covering(x_min: f64, x_max: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return domain("grid spacing must be positive");
        }
        let intervals = ((x_max - x_min) / max_spacing).ceil().max(15.0) as usize;
        Self::new(x_min, x_max, intervals + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// The same grid translated by `dx`.
    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            x_max: self.x_max + dx,
            n_points: self.n_points,
        }
    }
}

/// Evaluator for `h(x) = e^{2x} g(e^x)`.
pub type WeightedProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Closed(WeightedProfile),
    Spline(Arc<CubicSpline>),
}

/// A radial profile `g(p)` sampled on a [`LogGrid`], with an evaluator for
/// off-grid queries (closed form when available, a natural cubic spline of
/// `h` through the samples otherwise).
#[derive(Clone)]
pub struct RadialFunction {
    grid: LogGrid,
    values: Vec<f64>,
    eval: Evaluator,
    window: (f64, f64),
}

impl std::fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialFunction")
            .field("grid", &self.grid)
            .field("window", &self.window)
            .field("closed_form", &self.has_closed_form())
            .finish()
    }
}

impl RadialFunction {
    /// Profile from samples `g(e^{x_i})`; off-grid values come from a spline.
    pub fn from_values(grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return domain(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            ));
        }
        let weighted: Vec<f64> = grid
            .nodes()
            .zip(&values)
            .map(|(x, g)| (2.0 * x).exp() * g)
            .collect();
        let spline = CubicSpline::new(grid.x_min(), grid.spacing(), weighted);
        let f = Self {
            grid,
            values,
            eval: Evaluator::Spline(Arc::new(spline)),
            window: (grid.x_min(), grid.x_max()),
        };
        f.check()?;
        Ok(f)
    }

    /// Profile from a closed form `g(p)`, supported on the grid range.
    pub fn from_fn<G>(grid: LogGrid, g: G) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let window = (grid.x_min(), grid.x_max());
        Self::from_weighted(grid, window, move |x: f64| (2.0 * x).exp() * g(x.exp()))
    }

    /// Profile from a closed form of `h(x) = e^{2x} g(e^x)`, zero outside `window`.
    pub fn from_weighted<H>(grid: LogGrid, window: (f64, f64), h: H) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(window.0 < window.1) || window.0.is_nan() || window.1.is_nan() {
            return domain(format!("empty window [{}, {}]", window.0, window.1));
        }
        let values = grid
            .nodes()
            .map(|x| {
                if x < window.0 || x > window.1 {
                    0.0
                } else {
                    (-2.0 * x).exp() * h(x)
                }
            })
            .collect();
        let f = Self {
            grid,
            values,
            eval: Evaluator::Closed(Arc::new(h)),
            window,
        };
        f.check()?;
        Ok(f)
    }

    fn check(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return domain("radial samples must be finite");
        }
        // integral of p^2 sqrt(p^2 + 1) g^2 dp = integral of e^{-x} sqrt(e^{2x} + 1) h^2 dx
        let (a, b) = self.window;
        let steps = 2048;
        let dx = (b - a) / steps as f64;
        let mut sum = 0.0;
        for i in 0..=steps {
            let x = a + i as f64 * dx;
            let h = self.weighted(x);
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let weight = if x > 0.0 {
                (1.0 + (-2.0 * x).exp()).sqrt()
            } else {
                (-x).exp() * (1.0 + (2.0 * x).exp()).sqrt()
            };
            sum += w * h * h * weight;
        }
        if !(sum * dx).is_finite() {
            return domain("weighted norm of the radial profile is not finite");
        }
        Ok(())
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    /// Samples `g(e^{x_i})`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interval in `x` outside which the profile vanishes.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.eval, Evaluator::Closed(_))
    }

    /// `h(x) = e^{2x} g(e^x)`.
    pub fn weighted(&self, x: f64) -> f64 {
        if x < self.window.0 || x > self.window.1 {
            return 0.0;
        }
        match &self.eval {
            Evaluator::Closed(h) => h(x),
            Evaluator::Spline(s) => s.eval(x),
        }
    }

    /// `g(p)`.
    pub fn eval(&self, p: f64) -> f64 {
        if !(p > 0.0) {
            return 0.0;
        }
        let x = p.ln();
        (-2.0 * x).exp() * self.weighted(x)
    }

    /// `amplitude * h(x - shift)`: the profile `amplitude * e^{-2 shift} g(p e^{-shift})`.
    pub fn dilate(&self, shift: f64, amplitude: f64) -> Self {
        let inner = self.clone();
        let window = (self.window.0 + shift, self.window.1 + shift);
        let grid = self.grid.shifted(shift);
        let values = grid
            .nodes()
            .map(|x| amplitude * (-2.0 * x).exp() * inner.weighted(x - shift))
            .collect();
        Self {
            grid,
            values,
            eval: Evaluator::Closed(Arc::new(move |x| amplitude * inner.weighted(x - shift))),
            window,
        }
    }

    /// The profile multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        self.dilate(0.0, c)
    }

    /// `integral of f(x, h(x)) dx` over the window.
    pub fn integrate_x<F: Fn(f64, f64) -> f64>(&self, f: F, cfg: &QuadratureConfig) -> Result<f64> {
        let (a, b) = self.window;
        integrate_adaptive(|x| f(x, self.weighted(x)), a, b, cfg)
    }

    /// `integral of p^{2+a} g(p)^2 dp`.
    pub fn moment(&self, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
        self.integrate_x(|x, h| ((a - 1.0) * x).exp() * h * h, cfg)
    }

    /// Squared norm in `L^2((0, inf), p^2 dp)`.
    pub fn norm_sq(&self, cfg: &QuadratureConfig) -> Result<f64> {
        self.moment(0.0, cfg)
    }
}

/// Natural cubic spline on a uniform grid.
#[derive(Debug)]
struct CubicSpline {
    x0: f64,
    dx: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn new(x0: f64, dx: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i-1} - 2y_i + y_{i+1}) / dx^2
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (y[i] - 2.0 * y[i + 1] + y[i + 2]) / (dx * dx);
                let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
                c[i] = 1.0 / denom;
                d[i] = (rhs - if i > 0 { d[i - 1] } else { 0.0 }) / denom;
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { 0.0 };
                m[i + 1] = d[i] - c[i] * next;
            }
        }
        Self { x0, dx, y, m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.dx;
        let i = (t.floor().max(0.0) as usize).min(n - 2);
        let a = (i + 1) as f64 - t;
        let b = t - i as f64;
        let h2 = self.dx * self.dx / 6.0;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }
}

/// Default relative tolerance of the half-resolution check in [`mellin_sharp`].
pub const SHARP_TOL: f64 = 1e-6;

/// Largest `|k| * dx` used when resampling closed-form profiles.
const PHASE_STEP: f64 = 0.1;

/// Samples of `h` on a uniform grid, ready for repeated ♯-transforms.
#[derive(Debug, Clone)]
pub struct SharpSampler {
    x0: f64,
    dx: f64,
    samples: Vec<f64>,
    scale: f64,
}

impl SharpSampler {
    /// Samples the profile finely enough for `|k| <= k_max`. Closed forms are
    /// resampled from the lower window edge; spline profiles use their own grid.
    pub fn new(g: &RadialFunction, k_max: f64) -> Self {
        let (a, b) = g.window();
        let (x0, dx, samples) = match g.eval {
            Evaluator::Closed(_) => {
                let target = g.grid().spacing().min(PHASE_STEP / k_max.abs().max(1e-300));
                let mut intervals = ((b - a) / target).ceil() as usize;
                intervals = intervals.max(16).div_ceil(4) * 4;
                let dx = (b - a) / intervals as f64;
                let samples: Vec<f64> = (0..=intervals)
                    .map(|i| g.weighted(if i == intervals { b } else { a + i as f64 * dx }))
                    .collect();
                (a, dx, samples)
            }
            Evaluator::Spline(_) => {
                let grid = g.grid();
                let samples = grid.nodes().map(|x| g.weighted(x)).collect();
                (grid.x_min(), grid.spacing(), samples)
            }
        };
        let scale = samples.iter().map(|v: &f64| v.abs()).sum::<f64>() * dx / (2.0 * PI).sqrt();
        Self { x0, dx, samples, scale }
    }

    /// `(2 pi)^{-1/2} * integral of e^{-ikx} h(x) dx`.
    pub fn eval(&self, k: f64, rel_tol: f64) -> Result<Complex64> {
        let n = self.samples.len() - 1;
        let fine = self.rule(k, 1);
        let coarse = self.rule(k, 2);
        let norm = 1.0 / (2.0 * PI).sqrt();
        let (fine, coarse) = (fine * norm, coarse * norm);
        let tolerance = rel_tol * self.scale;
        let difference = (fine - coarse).norm();
        if n >= 4 && difference > tolerance {
            return Err(Error::GridTooCoarse { difference, tolerance });
        }
        Ok(fine)
    }

    /// Composite Simpson (or trapezoid if the node count does not allow it)
    /// over every `stride`-th node.
    fn rule(&self, k: f64, stride: usize) -> Complex64 {
        let n = self.samples.len() - 1;
        let intervals = n / stride;
        let dx = self.dx * stride as f64;
        let simpson = intervals % 2 == 0 && intervals >= 2;
        let step = Complex64::from_polar(1.0, -k * dx);
        let mut phase = Complex64::from_polar(1.0, -k * self.x0);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..=intervals {
            if j % 256 == 0 {
                phase = Complex64::from_polar(1.0, -k * (self.x0 + j as f64 * dx));
            }
            let w = if j == 0 || j == intervals {
                if simpson {
                    1.0 / 3.0
                } else {
                    0.5
                }
            } else if simpson {
                if j % 2 == 1 {
                    4.0 / 3.0
                } else {
                    2.0 / 3.0
                }
            } else {
                1.0
            };
            sum += phase * (w * self.samples[j * stride]);
            phase *= step;
        }
        let mut total = sum * dx;
        // nodes left over when the stride does not divide the node count
        let last = intervals * stride;
        if last < n {
            let mut tail = Complex64::new(0.0, 0.0);
            for j in last..n {
                let xa = self.x0 + j as f64 * self.dx;
                let pa = Complex64::from_polar(1.0, -k * xa);
                let pb = Complex64::from_polar(1.0, -k * (xa + self.dx));
                tail += (pa * self.samples[j] + pb * self.samples[j + 1]) * (0.5 * self.dx);
            }
            total += tail;
        }
        total
    }
}

/// `g♯(k) = (2 pi)^{-1/2} * integral of e^{-ikx} e^{2x} g(e^x) dx`.
pub fn mellin_sharp(g: &RadialFunction, k: f64) -> Result<Complex64> {
    mellin_sharp_with(g, k, SHARP_TOL)
}

pub fn mellin_sharp_with(g: &RadialFunction, k: f64, rel_tol: f64) -> Result<Complex64> {
    if !k.is_finite() {
        return domain(format!("k must be finite, got {k}"));
    }
    SharpSampler::new(g, k.abs().max(1.0)).eval(k, rel_tol)
}
