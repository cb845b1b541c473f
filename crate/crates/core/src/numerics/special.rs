//! Legendre functions of the first and second kind.

use crate::error::{domain, Result};

/// `P_l(y)` by the three-term recurrence.
pub fn legendre_p(l: usize, y: f64) -> Result<f64> {
    if !(y.abs() <= 1.0) {
        return domain(format!("legendre_p needs |y| <= 1, got {y}"));
    }
    Ok(legendre_p_unchecked(l, y))
}

pub(crate) fn legendre_p_unchecked(l: usize, y: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = y;
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * y * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Legendre function of the second kind `Q_l(z)` for real `z > 1`,
/// normalised so that `Q_l(z) = (1/2) * int_{-1}^{1} P_l(t) / (z - t) dt`.
///
/// For `z >= 2` the hypergeometric series in `1/z^2` is summed directly.
/// Closer to the cut the minimal solution of the recurrence is obtained by
/// Miller's backward recurrence, normalised with `Q_0(z) = atanh(1/z)`.
pub fn legendre_q(l: usize, z: f64) -> Result<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return domain(format!("legendre_q needs finite z > 1, got {z}"));
    }
    if z >= 2.0 {
        Ok(q_series(l, z))
    } else {
        Ok(q_miller(l, z))
    }
}

fn q_series(l: usize, z: f64) -> f64 {
    // Q_l(z) = l! / (2l+1)!! * z^{-l-1} * 2F1((l+1)/2, (l+2)/2; l+3/2; 1/z^2)
    let lf = l as f64;
    let mut log_pref = -(lf + 1.0) * z.ln();
    for j in 1..=l {
        log_pref += (j as f64).ln() - (2.0 * j as f64 + 1.0).ln();
    }
    let w = 1.0 / (z * z);
    let (a, b, c) = (0.5 * (lf + 1.0), 0.5 * (lf + 2.0), lf + 1.5);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..500 {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * w;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    log_pref.exp() * sum
}

fn q_miller(l: usize, z: f64) -> f64 {
    let rho = z + (z * z - 1.0).sqrt();
    let extra = (19.6 / rho.ln()).ceil() as usize + 10;
    let top = l + extra.min(200_000);
    let mut q_next = 0.0; // q_{j+1}
    let mut q = 1e-300; // q_j, starting at j = top
    let mut q_l = if top == l { q } else { 0.0 };
    for j in (1..=top).rev() {
        let jf = j as f64;
        let q_prev = ((2.0 * jf + 1.0) * z * q - (jf + 1.0) * q_next) / jf;
        q_next = q;
        q = q_prev;
        if j - 1 == l {
            q_l = q;
        }
        if q.abs() > 1e250 {
            q *= 1e-250;
            q_next *= 1e-250;
            q_l *= 1e-250;
        }
    }
    let q0 = (1.0 / z).atanh();
    q_l * (q0 / q)
}
