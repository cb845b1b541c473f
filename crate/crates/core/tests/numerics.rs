mod common;

use common::{cfg, p_gauss};
use fermi_stability::numerics::*;
use fermi_stability::trials::{q_gamma_radial, q_moment};
use proptest::prelude::*;

#[test]
fn legendre_recurrence_residual() {
    for i in 0..=200 {
        let y = -1.0 + i as f64 / 100.0;
        for l in 1..40 {
            let lf = l as f64;
            let r = (lf + 1.0) * legendre_p(l + 1, y).unwrap() - (2.0 * lf + 1.0) * y * legendre_p(l, y).unwrap()
                + lf * legendre_p(l - 1, y).unwrap();
            assert!(r.abs() < 1e-12, "l={l} y={y}: {r}");
        }
    }
}

#[test]
fn legendre_orthogonality() {
    let c = QuadratureConfig::default().with_rel_tol(1e-13);
    for l in 0..=12 {
        for k in 0..=12 {
            let v = integrate_adaptive(|y| legendre_p(l, y).unwrap() * legendre_p(k, y).unwrap(), -1.0, 1.0, &c).unwrap();
            let expect = if l == k { 2.0 / (2.0 * l as f64 + 1.0) } else { 0.0 };
            assert!((v - expect).abs() < 1e-10, "({l},{k}): {v}");
        }
    }
}

#[test]
fn quadrature_examples() {
    assert!((integrate_adaptive(|_| 1.0, 0.0, 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-14);
    assert!((integrate_adaptive(|x| (-x).exp(), 0.0, f64::INFINITY, &cfg()).unwrap() - 1.0).abs() < 1e-10);
    let v = integrate_adaptive(|y| 1.0 / (2.0 + y), -1.0, 1.0, &cfg()).unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn polynomials_of_maximal_degree_are_exact() {
    let c = cfg();
    let deg = 2 * c.base_order - 1;
    let v = integrate_adaptive(|x| x.powi(deg as i32), 0.0, 2.0, &c).unwrap();
    let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
    assert!((v - exact).abs() < 1e-13 * exact);
}

#[test]
fn root_examples() {
    assert!((find_root(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    assert!((find_root(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert!((find_root(f64::cos, 1.0, 2.0, 1e-12).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

fn plancherel_lhs(g: &RadialFunction) -> f64 {
    let sampler = SharpSampler::new(g, 60.0);
    let c = QuadratureConfig::default().with_rel_tol(1e-8);
    2.0 * integrate_adaptive(|k| sampler.eval(k, SHARP_TOL).unwrap().norm_sqr(), 0.0, 60.0, &c).unwrap()
}

#[test]
fn plancherel_for_trial_profile() {
    let q = q_gamma_radial(0.5).unwrap();
    let lhs = plancherel_lhs(&q);
    let rhs = q_moment(0.5, 1.0).unwrap();
    assert!((rhs - 21.75).abs() < 5e-3);
    assert!((lhs - rhs).abs() < 1e-4 * rhs, "{lhs} vs {rhs}");
}

#[test]
fn plancherel_for_smooth_profile() {
    let g = p_gauss();
    let lhs = plancherel_lhs(&g);
    let rhs = g.moment(1.0, &cfg()).unwrap();
    assert!((lhs - rhs).abs() < 1e-4 * rhs, "{lhs} vs {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sharp_transform_of_real_profile_is_hermitian(k in 0.0f64..20.0) {
        let g = p_gauss();
        let a = mellin_sharp(&g, k).unwrap();
        let b = mellin_sharp(&g, -k).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn sharp_transform_is_linear(c in -3.0f64..3.0, k in -10.0f64..10.0) {
        let g = p_gauss();
        let a = mellin_sharp(&g.scaled(c), k).unwrap();
        let b = mellin_sharp(&g, k).unwrap() * c;
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
    }
}

struct Normal;

impl Proposal for Normal {
    fn dim(&self) -> usize {
        1
    }
    fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng, point: &mut [f64]) {
        point[0] = standard_normal(rng);
    }
    fn density(&self, point: &[f64]) -> f64 {
        (-0.5 * point[0] * point[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
}

#[test]
fn monte_carlo_gaussian_and_determinism() {
    let f = |x: &[f64]| (-x[0] * x[0]).exp();
    let a = mc_integrate(1, &Normal, f, 200_000, 11).unwrap();
    let b = mc_integrate(1, &Normal, f, 200_000, 11).unwrap();
    assert_eq!(a, b);
    let exact = std::f64::consts::PI.sqrt();
    assert!((a.mean - exact).abs() < 3.0 * a.std_err, "{a:?}");
}
