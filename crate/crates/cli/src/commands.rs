//! Subcommand implementations. Each returns a rendered document.

use fermi_stability::nbody_forms::{cutoff_renorm_residual, phi_slater_mc, phi_two_body};
use fermi_stability::partial_wave::KernelTable;
use fermi_stability::stability::{critical_mass, gamma_param, lambda_param, stability_report};
use fermi_stability::trials::{instability_scan_grid, slater_charge, TrialParams, Verdict, SCAN_CSV_HEADER};
use fermi_stability::{FormBreakdown, QuadratureConfig, SystemParams};
use serde_json::{json, Map, Value};

use crate::args::{Command, FormCommand, Format, InstabilityCommand, RenormCommand};
use crate::charge::parse_charge;
use crate::error::CliError;

/// A result with its resolved configuration.
pub struct Document {
    pub command: String,
    pub config: Map<String, Value>,
    pub csv_body: String,
    pub json_body: Value,
    /// Trailing `#` lines of the CSV rendering.
    pub csv_footer: Vec<String>,
    pub default_format: Format,
}

impl Document {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = format!("# fermi-stability {}\n# command: {}\n", env!("CARGO_PKG_VERSION"), self.command);
                for (k, v) in &self.config {
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                out.push_str(&self.csv_body);
                for line in &self.csv_footer {
                    out.push_str(&format!("# {line}\n"));
                }
                out
            }
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("command".into(), Value::String(self.command.clone()));
                doc.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
                doc.insert("config".into(), Value::Object(self.config.clone()));
                match &self.json_body {
                    Value::Object(fields) => doc.extend(fields.clone()),
                    other => {
                        doc.insert("result".into(), other.clone());
                    }
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialise");
                s.push('\n');
                s
            }
        }
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Domain(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Domain(format!("--{name} must be finite, got {v}")))
    }
}

fn fermions(name: &str, n: usize) -> Result<usize, CliError> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(CliError::Domain(format!("--{name} must be at least 2, got {n}")))
    }
}

fn gamma_value(v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Domain(format!("γ must lie in (0, 1), got {v}")))
    }
}

pub fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("--{name}: expected a comma-separated list of numbers, got `{s}`")))?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("--{name} is empty")));
    }
    Ok(values)
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(name, s);
    }
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--{name}: expected start:stop:step, got `{s}`")));
    }
    let p = parts
        .iter()
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("--{name}: expected start:stop:step, got `{s}`")))?;
    let (start, stop, step) = (p[0], p[1], p[2]);
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(CliError::Domain(format!("--{name}: need step > 0 and stop >= start, got `{s}`")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::Domain(format!("--{name}: grid has too many points")));
    }
    // round away accumulated binary noise (0.15000000000000002 -> 0.15)
    Ok((0..=count)
        .map(|i| {
            let v = start + i as f64 * step;
            format!("{v:.12e}").parse().unwrap()
        })
        .collect())
}

fn parse_spectators(s: &str) -> Result<Vec<[f64; 3]>, CliError> {
    s.split(';')
        .map(|v| {
            let c = parse_list("spectators", v)?;
            if c.len() != 3 {
                return Err(CliError::Usage(format!("--spectators: `{v}` is not a 3-vector")));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Domain("--spectators: components must be finite".into()));
            }
            Ok([c[0], c[1], c[2]])
        })
        .collect()
}

fn breakdown_csv(b: &FormBreakdown) -> String {
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "alpha_term,diagonal,off_diagonal,total,std_err,n_samples,seed\n{},{},{},{},{},{},{}\n",
        num(b.alpha_term),
        num(b.diagonal),
        num(b.off_diagonal),
        num(b.total),
        num(b.std_err),
        opt(b.n_samples),
        opt(b.seed)
    )
}

fn config(pairs: &[(&str, Value)], cfg: &QuadratureConfig) -> Map<String, Value> {
    let mut m: Map<String, Value> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    m.insert("rel_tol".into(), json!(cfg.rel_tol));
    m.insert("abs_tol".into(), json!(cfg.abs_tol));
    m.insert("max_subdivisions".into(), json!(cfg.max_subdivisions));
    m
}

pub fn run(command: &Command, cfg: &QuadratureConfig) -> Result<Document, CliError> {
    match command {
        Command::CriticalMass { n, tol } => {
            let n = fermions("n", *n)?;
            let tol = positive("tol", *tol)?;
            let m_star = critical_mass(n, tol)?;
            Ok(Document {
                command: "critical-mass".into(),
                config: config(&[("n", json!(n)), ("tol", json!(tol))], cfg),
                csv_body: format!("N,m_star\n{n},{}\n", num(m_star)),
                json_body: json!({ "N": n, "m_star": m_star }),
                csv_footer: vec![],
                default_format: Format::Csv,
            })
        }
        Command::Lambda { m, n } => {
            let m = positive("m", *m)?;
            let n = fermions("n", *n)?;
            let lam = lambda_param(m, n)?;
            let gam = gamma_param(m, n)?;
            let report = stability_report(m, n, 1e-12)?;
            Ok(Document {
                command: "lambda".into(),
                config: config(&[("m", json!(m)), ("n", json!(n))], cfg),
                csv_body: format!(
                    "m,N,Lambda,Gamma,m_star_2,m_star_N,regime\n{},{n},{},{},{},{},{}\n",
                    num(m),
                    num(lam),
                    num(gam),
                    num(report.m_star_2),
                    num(report.m_star_n),
                    report.regime
                ),
                json_body: json!({
                    "m": m, "N": n, "Lambda": lam, "Gamma": gam,
                    "m_star_2": report.m_star_2, "m_star_N": report.m_star_n,
                    "regime": report.regime.to_string(),
                }),
                csv_footer: vec![],
                default_format: Format::Csv,
            })
        }
        Command::Kernel { l, m, n, k_max, steps } => {
            let m = positive("m", *m)?;
            let n = fermions("n", *n)?;
            let k_max = positive("k-max", *k_max)?;
            if *steps == 0 || *steps > 10_000_000 {
                return Err(CliError::Domain(format!("--steps must lie in 1..=10^7, got {steps}")));
            }
            let table = KernelTable::build(*l, m, n, k_max, *steps)?;
            let mut body = Vec::new();
            table.write_csv(&mut body)?;
            Ok(Document {
                command: "kernel".into(),
                config: config(
                    &[("l", json!(l)), ("m", json!(m)), ("n", json!(n)), ("k_max", json!(k_max)), ("steps", json!(steps))],
                    cfg,
                ),
                csv_body: String::from_utf8(body).expect("ascii csv"),
                json_body: serde_json::to_value(&table).expect("table serialises"),
                csv_footer: vec![],
                default_format: Format::Csv,
            })
        }
        Command::Form(FormCommand::TwoBody { m, alpha, lambda, charge, l }) => {
            let params = SystemParams::new(positive("m", *m)?, 2, finite("alpha", *alpha)?, positive("lambda", *lambda)?)?;
            let xi = parse_charge(charge, *l, cfg)?;
            let b = phi_two_body(&[xi], &params, cfg)?;
            Ok(Document {
                command: "form two-body".into(),
                config: config(
                    &[
                        ("m", json!(params.m)),
                        ("n_fermions", json!(2)),
                        ("alpha", json!(params.alpha)),
                        ("lambda", json!(params.lambda)),
                        ("charge", json!(charge)),
                        ("l", json!(l)),
                    ],
                    cfg,
                ),
                csv_body: breakdown_csv(&b),
                json_body: serde_json::to_value(b).expect("breakdown serialises"),
                csv_footer: vec![],
                default_format: Format::Json,
            })
        }
        Command::Form(FormCommand::SlaterMc { m, n_fermions, n, gamma, beta, alpha, lambda, samples, seed }) => {
            let nf = fermions("n-fermions", *n_fermions)?;
            let params = SystemParams::new(positive("m", *m)?, nf, finite("alpha", *alpha)?, positive("lambda", *lambda)?)?;
            if *samples == 0 {
                return Err(CliError::Domain("--samples must be positive".into()));
            }
            let n = positive("n", *n)?;
            if n < 1.0 {
                return Err(CliError::Domain(format!("--n must be at least 1, got {n}")));
            }
            let beta = positive("beta", *beta)?;
            let trial = TrialParams::new(n, gamma_value(*gamma)?, beta, 1)?;
            let charge = slater_charge(&trial, nf)?;
            let b = phi_slater_mc(&charge, &params, *samples, *seed)?;
            Ok(Document {
                command: "form slater-mc".into(),
                config: config(
                    &[
                        ("m", json!(params.m)),
                        ("n_fermions", json!(nf)),
                        ("n", json!(n)),
                        ("gamma", json!(gamma)),
                        ("beta", json!(beta)),
                        ("alpha", json!(params.alpha)),
                        ("lambda", json!(params.lambda)),
                        ("samples", json!(samples)),
                        ("seed", json!(seed)),
                    ],
                    cfg,
                ),
                csv_body: breakdown_csv(&b),
                json_body: serde_json::to_value(b).expect("breakdown serialises"),
                csv_footer: vec![],
                default_format: Format::Json,
            })
        }
        Command::Instability(InstabilityCommand::Scan { m, n_fermions, gamma_grid, n_list }) => {
            let m = positive("m", *m)?;
            let nf = fermions("n-fermions", *n_fermions)?;
            let gammas = parse_grid("gamma-grid", gamma_grid)?;
            for &g in &gammas {
                gamma_value(g)?;
            }
            let ns = parse_list("n-list", n_list)?;
            if ns.iter().any(|&v| !(v >= 1.0 && v.is_finite())) {
                return Err(CliError::Domain("--n-list values must be finite and at least 1".into()));
            }
            if ns.len() < 4 || ns.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Domain("--n-list needs at least 4 strictly increasing values".into()));
            }
            let scans = instability_scan_grid(m, nf, &gammas, &ns, cfg)?;
            let verdict = if scans.iter().any(|s| s.verdict == Verdict::Diverging) {
                Verdict::Diverging
            } else if scans.iter().all(|s| s.verdict == Verdict::Bounded) {
                Verdict::Bounded
            } else {
                Verdict::Inconclusive
            };
            let selected = scans
                .iter()
                .filter(|s| s.verdict == Verdict::Diverging)
                .map(|s| s.gamma)
                .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))));
            let mut body = Vec::new();
            body.extend_from_slice(SCAN_CSV_HEADER.as_bytes());
            body.push(b'\n');
            for s in &scans {
                s.write_rows(&mut body)?;
            }
            let mut footer = vec![format!("verdict: {verdict}")];
            if let Some(g) = selected {
                footer.push(format!("selected_gamma: {g}"));
            }
            Ok(Document {
                command: "instability scan".into(),
                config: config(
                    &[
                        ("m", json!(m)),
                        ("n_fermions", json!(nf)),
                        ("gamma_grid", json!(gammas)),
                        ("n_list", json!(ns)),
                    ],
                    cfg,
                ),
                csv_body: String::from_utf8(body).expect("ascii csv"),
                json_body: json!({
                    "scans": scans,
                    "verdict": verdict.to_string(),
                    "selected_gamma": selected,
                }),
                csv_footer: footer,
                default_format: Format::Csv,
            })
        }
        Command::Renorm(RenormCommand::Check { r_list, m, lambda, alpha, spectators }) => {
            let m = positive("m", *m)?;
            let lambda = positive("lambda", *lambda)?;
            let alpha = finite("alpha", *alpha)?;
            let rs = parse_list("r-list", r_list)?;
            for &r in &rs {
                positive("r-list", r)?;
            }
            let ks = match spectators {
                Some(s) => parse_spectators(s)?,
                None => vec![[0.0; 3]],
            };
            let rows = rs
                .iter()
                .map(|&r| cutoff_renorm_residual(&ks, r, lambda, m, alpha, cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let mut body = String::from("R,integral,residual,mu\n");
            for row in &rows {
                body.push_str(&format!("{},{},{},{}\n", num(row.r), num(row.integral), num(row.residual), num(row.mu)));
            }
            Ok(Document {
                command: "renorm check".into(),
                config: config(
                    &[
                        ("r_list", json!(rs)),
                        ("m", json!(m)),
                        ("lambda", json!(lambda)),
                        ("alpha", json!(alpha)),
                        ("spectators", json!(ks)),
                    ],
                    cfg,
                ),
                csv_body: body,
                json_body: json!({ "rows": rows }),
                csv_footer: vec![],
                default_format: Format::Csv,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        let g = parse_grid("g", "0.05:0.5:0.05").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[9], 0.5);
        assert_eq!(parse_grid("g", "0.1,0.3").unwrap(), vec![0.1, 0.3]);
        assert!(matches!(parse_grid("g", "0.1:0.2"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("g", "0.5:0.1:0.1"), Err(CliError::Domain(_))));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn spectator_syntax() {
        assert_eq!(parse_spectators("1,0,0;0,-2,0.5").unwrap(), vec![[1.0, 0.0, 0.0], [0.0, -2.0, 0.5]]);
        assert!(parse_spectators("1,0").is_err());
    }
}
