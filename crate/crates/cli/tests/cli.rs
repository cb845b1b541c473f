use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fermi-stability"));
    c.env_remove("FERMI_STABILITY_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV document (comment lines dropped).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn critical_mass_two() {
    let o = run(&["critical-mass", "--n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("N,m_star\n"));
    let m: f64 = rows(&text)[0][1].parse().unwrap();
    assert!((m - 0.0735).abs() < 5e-4, "{m}");
}

#[test]
fn lambda_stable_regime() {
    let o = run(&["lambda", "--m", "1", "--n", "2"]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    let lam: f64 = r[2].parse().unwrap();
    assert!((lam - 0.136877).abs() < 1e-6);
    assert_eq!(r[6], "StableProven");
}

#[test]
fn scan_example_diverges() {
    let o = run(&[
        "instability", "scan", "--m", "0.05", "--n-fermions", "2", "--gamma-grid", "0.05:0.5:0.05", "--n-list",
        "1,2,4,8,16,32,64",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# verdict: Diverging\n"), "{text}");
    assert!(text.contains("# selected_gamma: 0.5\n"));
    assert_eq!(rows(&text).len(), 70);
}

#[test]
fn scan_json() {
    let o = run(&[
        "instability", "scan", "--m", "1", "--n-fermions", "2", "--gamma-grid", "0.1,0.3", "--n-list", "1,2,4,8",
        "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "Bounded");
    assert!(v["selected_gamma"].is_null());
    assert_eq!(v["scans"].as_array().unwrap().len(), 2);
}

#[test]
fn repeat_runs_are_byte_identical() {
    let cases: [&[&str]; 3] = [
        &["kernel", "--l", "1", "--m", "0.5", "--n", "3", "--k-max", "4", "--steps", "8"],
        &["form", "slater-mc", "--m", "0.05", "--n", "2", "--gamma", "0.5", "--beta", "0.25", "--samples", "20000", "--seed", "7"],
        &["renorm", "check", "--r-list", "10,100", "--m", "1", "--spectators", "0.5,0,0;0,-1,0"],
    ];
    for args in cases {
        let a = run(args);
        let b = bin().args(args).env("FERMI_STABILITY_THREADS", "3").output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["lambda", "--m", "1"]).status.code(), Some(1));
    assert_eq!(run(&["renorm", "check", "--r-list", "ten", "--m", "1"]).status.code(), Some(1));
    assert_eq!(run(&["lambda", "--m", "-1", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["critical-mass", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["form", "two-body", "--m", "1", "--charge", "q-gamma:1.5"]).status.code(), Some(2));
    assert_eq!(run(&["form", "two-body", "--m", "1", "--charge", "/no/such/file.csv"]).status.code(), Some(2));
    let nonconv = run(&[
        "--rel-tol", "1e-15", "--abs-tol", "1e-300", "--max-subdivisions", "1", "renorm", "check", "--r-list", "1000",
        "--m", "1", "--spectators", "1,0,0",
    ]);
    assert_eq!(nonconv.status.code(), Some(3));
    let threads = bin().args(["critical-mass", "--n", "2"]).env("FERMI_STABILITY_THREADS", "0").output().unwrap();
    assert_eq!(threads.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn charge_from_file_matches_builtin() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# p, g(p)\np,g").unwrap();
    let norm = (8.0 / (3.0 * std::f64::consts::PI.sqrt())).sqrt();
    for i in 0..=4000 {
        let x = -16.0 + 20.0 * i as f64 / 4000.0;
        let p = x.exp();
        writeln!(file, "{p:e},{:e}", norm * p * (-p * p / 2.0).exp()).unwrap();
    }
    file.flush().unwrap();
    let path = file.path().to_str().unwrap();
    let json = |charge: &str| -> serde_json::Value {
        let o = run(&["form", "two-body", "--m", "1", "--charge", charge]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice(&o.stdout).unwrap()
    };
    let a = json(path)["total"].as_f64().unwrap();
    let b = json("gauss-l1")["total"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-4 * b.abs(), "{a} {b}");
}

#[test]
fn output_file_and_golden_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = run(&["renorm", "check", "--r-list", "100", "--m", "1", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let head: Vec<&str> = text.lines().take(11).collect();
    assert_eq!(
        head,
        [
            "# fermi-stability 0.1.0",
            "# command: renorm check",
            "# abs_tol: 1e-14",
            "# alpha: 0.0",
            "# lambda: 1.0",
            "# m: 1.0",
            "# max_subdivisions: 2000",
            "# r_list: [100.0]",
            "# rel_tol: 1e-10",
            "# spectators: [[0.0,0.0,0.0]]",
            "R,integral,residual,mu",
        ]
    );
    let row = &rows(&text)[0];
    assert_eq!(row[0], "1.0000000000000000e2");
    for cell in row {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }
    // zero spectators: residual = 4π√λ·arctan(√λ/R)
    let residual: f64 = row[2].parse().unwrap();
    let expected = 4.0 * std::f64::consts::PI * (1.0f64 / 100.0).atan();
    assert!((residual - expected).abs() < 1e-8, "{residual} {expected}");
}

#[test]
fn form_json_keys() {
    let o = run(&["form", "two-body", "--m", "1", "--alpha", "-0.5", "--charge", "q-gamma:0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["alpha_term", "diagonal", "off_diagonal", "total", "std_err", "n_samples", "seed", "config"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!((v["alpha_term"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(v["config"]["charge"], "q-gamma:0.5");
}
