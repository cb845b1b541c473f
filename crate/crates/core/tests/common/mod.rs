#![allow(dead_code)]

use fermi_stability::numerics::{LogGrid, QuadratureConfig, RadialFunction};
use fermi_stability::partial_wave::PartialWaveCharge;
use fermi_stability::trials::q_gamma_radial;

pub fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// g(p) = p e^{-p^2}
pub fn p_gauss() -> RadialFunction {
    RadialFunction::from_weighted(LogGrid::new(-14.0, 3.0, 2049).unwrap(), (-14.0, 3.0), |x: f64| {
        (3.0 * x - (2.0 * x).exp()).exp()
    })
    .unwrap()
}

/// g(p) = p^2 e^{-p}
pub fn p2_exp() -> RadialFunction {
    RadialFunction::from_weighted(LogGrid::new(-10.0, 5.0, 2049).unwrap(), (-10.0, 5.0), |x: f64| {
        (4.0 * x - x.exp()).exp()
    })
    .unwrap()
}

/// The fixed four-charge suite used for cross-method checks.
pub fn charge_suite() -> Vec<(&'static str, RadialFunction)> {
    vec![
        ("p exp(-p^2)", p_gauss()),
        ("p^2 exp(-p)", p2_exp()),
        ("Q_0.3", q_gamma_radial(0.3).unwrap()),
        ("Q_0.5", q_gamma_radial(0.5).unwrap()),
    ]
}

/// Sum of Gaussian bumps in `x = ln p`, normalised in `L^2(p^2 dp)`.
pub fn bumps(terms: &[(f64, f64, f64)]) -> RadialFunction {
    let terms = terms.to_vec();
    let lo = terms.iter().map(|t| t.1 - 8.0 * t.2).fold(f64::INFINITY, f64::min);
    let hi = terms.iter().map(|t| t.1 + 8.0 * t.2).fold(f64::NEG_INFINITY, f64::max);
    let grid = LogGrid::new(lo, hi, 1025).unwrap();
    let raw = RadialFunction::from_weighted(grid, (lo, hi), move |x: f64| {
        terms.iter().map(|&(a, c, w)| a * (-(x - c).powi(2) / (2.0 * w * w)).exp()).sum()
    })
    .unwrap();
    let n = raw.norm_sq(&cfg()).unwrap();
    raw.scaled(1.0 / n.sqrt())
}

/// One random channel per `l` in `0..ls`, each a two-bump profile.
pub fn channels(params: &[(f64, f64, f64, f64)]) -> Vec<PartialWaveCharge> {
    params
        .iter()
        .enumerate()
        .map(|(l, &(c1, w1, c2, a2))| {
            PartialWaveCharge::new(l, 0, bumps(&[(1.0, c1, w1), (a2, c2, 0.7)])).unwrap()
        })
        .collect()
}

/// Deterministic list of random multi-channel charges: channels `l = 0..L`
/// with `L` in 1..=3, each a two-bump profile in `x = ln p`.
pub fn random_charge_lists(count: usize, seed: u64) -> Vec<Vec<PartialWaveCharge>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n_ch = rng.gen_range(1..=3);
            let params: Vec<_> = (0..n_ch)
                .map(|_| {
                    (
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(0.3..1.2),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            channels(&params)
        })
        .collect()
}
