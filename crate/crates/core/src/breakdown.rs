use serde::{Deserialize, Serialize};

/// Result of a form evaluation: `total = alpha_term + diagonal + off_diagonal`.
///
/// Deterministic evaluations carry `std_err = 0` and no sample metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormBreakdown {
    pub alpha_term: f64,
    pub diagonal: f64,
    pub off_diagonal: f64,
    pub total: f64,
    pub std_err: f64,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub diagonal_std_err: f64,
    #[serde(default)]
    pub off_diagonal_std_err: f64,
}

impl FormBreakdown {
    pub fn exact(alpha_term: f64, diagonal: f64, off_diagonal: f64) -> Self {
        Self {
            alpha_term,
            diagonal,
            off_diagonal,
            total: alpha_term + diagonal + off_diagonal,
            std_err: 0.0,
            n_samples: None,
            seed: None,
            diagonal_std_err: 0.0,
            off_diagonal_std_err: 0.0,
        }
    }

    /// Monte Carlo result; the two parts are estimated independently so their
    /// errors add in quadrature.
    pub fn sampled(
        alpha_term: f64,
        diagonal: (f64, f64),
        off_diagonal: (f64, f64),
        n_samples: u64,
        seed: u64,
    ) -> Self {
        Self {
            alpha_term,
            diagonal: diagonal.0,
            off_diagonal: off_diagonal.0,
            total: alpha_term + diagonal.0 + off_diagonal.0,
            std_err: diagonal.1.hypot(off_diagonal.1),
            n_samples: Some(n_samples),
            seed: Some(seed),
            diagonal_std_err: diagonal.1,
            off_diagonal_std_err: off_diagonal.1,
        }
    }

    pub fn zero() -> Self {
        Self::exact(0.0, 0.0, 0.0)
    }

    /// Every part multiplied by `c` (standard errors by `|c|`).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            alpha_term: c * self.alpha_term,
            diagonal: c * self.diagonal,
            off_diagonal: c * self.off_diagonal,
            total: c * self.total,
            std_err: c.abs() * self.std_err,
            diagonal_std_err: c.abs() * self.diagonal_std_err,
            off_diagonal_std_err: c.abs() * self.off_diagonal_std_err,
            ..*self
        }
    }
}
