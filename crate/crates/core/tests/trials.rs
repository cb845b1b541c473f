mod common;

use std::f64::consts::PI;

use common::cfg;
use fermi_stability::nbody_forms::{phi_slater_mc, slater_diagonal_reduced_mc, slater_norm_mc};
use fermi_stability::numerics::{integrate_adaptive, QuadratureConfig, SharpSampler, SHARP_TOL};
use fermi_stability::stability::lambda_param;
use fermi_stability::trials::*;
use fermi_stability::SystemParams;
use proptest::prelude::*;

fn n_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
}

fn gamma_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.05 * i as f64).collect()
}

#[test]
fn light_particle_scan_diverges() {
    let scans = instability_scan_grid(0.05, 2, &gamma_grid(), &n_list(), &cfg()).unwrap();
    for s in &scans {
        assert_eq!(s.verdict, Verdict::Diverging, "gamma = {}", s.gamma);
        assert!(s.is_strictly_decreasing());
        assert!(s.points.iter().all(|p| p.energy.total < 0.0));
    }
}

#[test]
fn equal_mass_scan_is_bounded() {
    let scans = instability_scan_grid(1.0, 2, &[0.1, 0.3, 0.5], &n_list(), &cfg()).unwrap();
    for s in &scans {
        assert_eq!(s.verdict, Verdict::Bounded, "gamma = {}", s.gamma);
    }
}

#[test]
fn scaling_law_matches_direct_evaluation() {
    for &(n, gamma) in &[(1.0, 0.5), (4.0, 0.3), (16.0, 0.5)] {
        let p = TrialParams::new(n, gamma, 1.0, 1).unwrap();
        let a = f1_trial_energy(&p, 0.05, 2, &cfg()).unwrap();
        let b = f1_trial_energy_direct(&p, 0.05, 2, &cfg()).unwrap();
        assert!((a.total - b.total).abs() < 1e-7 * b.total.abs(), "n={n}: {} vs {}", a.total, b.total);
    }
}

fn sharp_sq(gamma: f64) -> impl Fn(f64) -> f64 {
    let q = q_gamma_radial(gamma).unwrap();
    let sampler = SharpSampler::new(&q, 40.0);
    move |k| sampler.eval(k, SHARP_TOL).unwrap().norm_sqr()
}

#[test]
fn sharp_norm_equals_moment() {
    let c = QuadratureConfig::default().with_rel_tol(1e-9);
    for gamma in [0.25, 0.5] {
        let f = sharp_sq(gamma);
        let lhs = 2.0 * integrate_adaptive(&f, 0.0, 40.0, &c).unwrap();
        let rhs = q_moment(gamma, 1.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-4 * rhs, "gamma={gamma}: {lhs} vs {rhs}");
    }
}

/// Untruncated Gaussian part of `|Q♯_γ(k)|^2`.
fn gaussian_part(gamma: f64, k: f64) -> f64 {
    let g2 = gamma * gamma;
    c_gamma_norm(gamma).unwrap() / (PI.sqrt() * gamma) * ((0.75 - k * k) / g2).exp()
}

#[test]
fn sharp_transform_is_gaussian_plus_small_remainder() {
    let gamma = 0.25;
    let f = sharp_sq(gamma);
    let peak = gaussian_part(gamma, 0.0);
    let fitted_c = (0..=300)
        .map(|i| {
            let k = i as f64 * 0.01;
            (f(k) - gaussian_part(gamma, k)).abs() * (1.0 + k * k)
        })
        .fold(0.0, f64::max);
    assert!(fitted_c < 1e-2 * peak, "C = {fitted_c}, peak = {peak}");
    assert!((f(0.0) - peak).abs() < 1e-2 * peak);
}

#[test]
fn sqrt_k_moment_scales_as_predicted() {
    let c = QuadratureConfig::default().with_rel_tol(1e-8);
    let ratios: Vec<f64> = [0.1, 0.2, 0.3]
        .iter()
        .map(|&gamma| {
            let f = sharp_sq(gamma);
            let v = 2.0 * integrate_adaptive(|k| k.sqrt() * f(k), 0.0, 12.0 * gamma, &c).unwrap();
            v / (gamma.sqrt() * (0.75 / (gamma * gamma)).exp())
        })
        .collect();
    let fitted = ratios.iter().cloned().fold(0.0, f64::max);
    let least = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(fitted / least < 1.5, "{ratios:?}");
    // leading order of the ratio: c_γ^2 Γ(3/4)/sqrt(π)
    let lead = 1.225_416_702_465_178 / PI.sqrt() * c_gamma_norm(0.1).unwrap();
    assert!((ratios[0] - lead).abs() < 1e-3 * lead, "{} vs {lead}", ratios[0]);
}

#[test]
fn bound_sign_and_correction() {
    let p = TrialParams::new(4.0, 0.3, 1.0 / 16.0, 1).unwrap();
    assert!(analytic_bound(&p, 0.05, 2, 0.0, 0.0).unwrap() < 0.0);
    assert!(analytic_bound(&p, 1.0, 2, 0.0, 0.0).unwrap() > 0.0);
    let lead = 2.0 * PI * PI * 4.0 * (0.05f64 * 2.05).sqrt() / 1.05 * (0.75 / 0.09f64).exp()
        * (1.0 - lambda_param(0.05, 2).unwrap());
    assert!((analytic_bound(&p, 0.05, 2, 0.0, 0.0).unwrap() - lead).abs() < 1e-12 * lead.abs());
    let corr = |n: f64| bound_terms(&TrialParams::new(n, 0.3, n.powi(-2), 1).unwrap(), 0.05, 0.0).unwrap().correction;
    assert!(corr(1e4) < corr(1e2));
    assert!((corr(1e14) - 0.3f64.sqrt()).abs() < 1e-3);
}

#[test]
fn slater_trial_tracks_two_body_energy() {
    // the bump sits at momenta ~β, so the N = 3 form reduces to F_1[Q_{n,γ}]
    let m = 0.05;
    let params = SystemParams::new(m, 3, 0.0, 1.0).unwrap();
    let mut samples = Vec::new();
    for &n in &[1.0, 4.0] {
        let tp = TrialParams::new(n, 0.5, n.powi(-2), 1).unwrap();
        let charge = slater_charge(&tp, 3).unwrap();
        let mc = phi_slater_mc(&charge, &params, 400_000, 9).unwrap();
        let two = f1_trial_energy_direct(&tp, m, 2, &cfg()).unwrap().total;
        assert!((mc.total - two).abs() < 4.0 * mc.std_err + 0.02 * two.abs(), "n={n}: {} ± {} vs {two}", mc.total, mc.std_err);
        let reduced = slater_diagonal_reduced_mc(&charge, &params, 400_000, 9).unwrap();
        assert!((mc.diagonal - reduced.mean).abs() < 3.0 * mc.diagonal_std_err.hypot(reduced.std_err));
        samples.push((tp, mc));
    }
    let bound_samples: Vec<BoundSample> = samples
        .iter()
        .map(|(tp, mc)| BoundSample { params: *tp, m, alpha: 0.0, total: mc.total })
        .collect();
    let c_n = fit_c_n(&bound_samples).unwrap();
    for (tp, mc) in &samples {
        let b = analytic_bound(tp, m, 3, 0.0, c_n).unwrap();
        assert!(mc.total <= b + 3.0 * mc.std_err);
    }
}

#[test]
fn slater_norm_is_one() {
    let charge = slater_charge(&TrialParams::new(3.0, 0.4, 0.1, 1).unwrap(), 3).unwrap();
    let est = slater_norm_mc(&charge, 300_000, 4).unwrap();
    assert!((est.mean - 1.0).abs() < 3.0 * est.std_err, "{est:?}");
}

#[test]
fn scan_csv_layout() {
    let s = instability_scan(0.05, 2, 0.5, &[1.0, 2.0, 4.0, 8.0], &cfg()).unwrap();
    let mut out = Vec::new();
    s.write_rows(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(SCAN_CSV_HEADER.split(',').count(), 8);
    for line in text.lines() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[7], "Diverging");
        let mantissa = cells[4].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slater_charge_is_antisymmetric(
        a in prop::array::uniform3(-6.0f64..6.0),
        b in prop::array::uniform3(-6.0f64..6.0),
        ell in 1usize..3,
    ) {
        let charge = slater_charge(&TrialParams::new(1.5, 0.5, 1.5, ell).unwrap(), 3).unwrap();
        let x = charge.eval(&[a, b]).unwrap();
        let y = charge.eval(&[b, a]).unwrap();
        prop_assert!((x + y).norm() <= 1e-15 * (1.0 + x.norm()));
    }

    #[test]
    fn four_fermion_charge_is_antisymmetric(
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
        c in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let charge = slater_charge(&TrialParams::new(1.0, 0.5, 1.0, 1).unwrap(), 4).unwrap();
        let x = charge.eval(&[a, b, c]).unwrap();
        let y = charge.eval(&[b, a, c]).unwrap();
        let z = charge.eval(&[c, b, a]).unwrap();
        // rounding in the elimination scales with the Hadamard bound, not with |det|
        let column = |k: &[f64; 3]| {
            (charge.q_orbital(k).powi(2) + charge.bumps.iter().map(|o| o.eval(k).norm_sqr()).sum::<f64>()).sqrt()
        };
        let scale = column(&a) * column(&b) * column(&c);
        prop_assert!((x + y).norm() <= 1e-14 * (1.0 + scale));
        prop_assert!((x + z).norm() <= 1e-14 * (1.0 + scale));
    }
}
