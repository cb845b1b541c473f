//! Charge inputs for `form two-body`.

use std::path::Path;

use fermi_stability::numerics::{LogGrid, QuadratureConfig, RadialFunction};
use fermi_stability::partial_wave::PartialWaveCharge;
use fermi_stability::trials::q_gamma_radial;

use crate::error::CliError;

/// Built-in name or path of a two-column CSV file `p, g(p)`.
pub fn parse_charge(name: &str, l: usize, cfg: &QuadratureConfig) -> Result<PartialWaveCharge, CliError> {
    if let Some(g) = name.strip_prefix("q-gamma:") {
        let gamma: f64 = g
            .parse()
            .map_err(|_| CliError::Usage(format!("bad γ in charge `{name}`")))?;
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(CliError::Domain(format!("charge γ must lie in (0, 1), got {gamma}")));
        }
        return Ok(PartialWaveCharge::new(1, 0, q_gamma_radial(gamma)?)?);
    }
    if name == "gauss-l1" {
        return Ok(PartialWaveCharge::new(1, 0, gauss_l1(cfg)?)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("charge `{name}` is neither q-gamma:<γ>, gauss-l1 nor an existing file"),
        )));
    }
    Ok(PartialWaveCharge::new(l, 0, from_csv(path)?)?)
}

/// `g(p) ∝ p e^{-p^2/2}`, unit norm in `L^2(p^2 dp)`.
fn gauss_l1(cfg: &QuadratureConfig) -> Result<RadialFunction, CliError> {
    let raw = RadialFunction::from_weighted(LogGrid::new(-16.0, 4.0, 4097)?, (-16.0, 4.0), |x: f64| {
        (3.0 * x - 0.5 * (2.0 * x).exp()).exp()
    })?;
    let n = raw.norm_sq(cfg)?;
    Ok(raw.scaled(1.0 / n.sqrt()))
}

/// Reads `p, g(p)` rows (optional header, `#` comments) and resamples `p^2 g`
/// linearly in `ln p` onto a 4097-node log grid spanning the data.
fn from_csv(path: &Path) -> Result<RadialFunction, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        if rec.len() < 2 {
            return Err(CliError::Domain(format!("{}: row {} needs two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(p), Ok(g)) => rows.push((p, g)),
            _ if i == 0 => continue,
            _ => return Err(CliError::Domain(format!("{}: row {} is not numeric", path.display(), i + 1))),
        }
    }
    if rows.len() < 4 {
        return Err(CliError::Domain(format!("{}: need at least 4 samples", path.display())));
    }
    if rows.iter().any(|(p, g)| !(*p > 0.0 && p.is_finite() && g.is_finite())) {
        return Err(CliError::Domain(format!("{}: p must be positive and values finite", path.display())));
    }
    if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(CliError::Domain(format!("{}: p must be strictly increasing", path.display())));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.0 * r.0 * r.1).collect();
    let grid = LogGrid::new(xs[0], xs[xs.len() - 1], 4097)?;
    let values = grid
        .nodes()
        .map(|x| {
            let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
            let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            let h = hs[j - 1] + t * (hs[j] - hs[j - 1]);
            (-2.0 * x).exp() * h
        })
        .collect();
    Ok(RadialFunction::from_values(grid, values)?)
}
