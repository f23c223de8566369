use std::process::{Command, Output};

fn stsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stsense")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn threshold_is_beta_median_for_two_sensors() {
    let o = stsense(&["threshold", "--k", "2", "--n", "4", "--pfa", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let z: f64 = stdout(&o).trim().parse().unwrap();
    // median of Beta(3, 1.5): I_z(3, 1.5) = 1/2, checked by the closed form
    // I_z(3, 3/2) = 1 - (1-z)^{3/2} (1 + 3z/2 + 15z^2/8)
    let cdf = 1.0 - (1.0 - z).powf(1.5) * (1.0 + 1.5 * z + 15.0 / 8.0 * z * z);
    assert!((cdf - 0.5).abs() < 1e-11, "{z}: {cdf}");
    assert_eq!(stdout(&o).trim().trim_start_matches("0.").len(), 12);
}

#[test]
fn threshold_rejects_bad_pfa() {
    let o = stsense(&["threshold", "--k", "4", "--n", "20", "--pfa", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pfa must lie in (0,1)"));
}

#[test]
fn threshold_and_pfa_round_trip() {
    for p in ["1e-6", "0.01", "0.5"] {
        let z = stdout(&stsense(&["threshold", "--k", "4", "--n", "100", "--pfa", p]));
        let back = stsense(&["pfa", "--k", "4", "--n", "100", "--zeta", z.trim()]);
        assert_eq!(back.status.code(), Some(0));
        let got: f64 = stdout(&back).trim().parse().unwrap();
        let want: f64 = p.parse().unwrap();
        // ζ is printed with 12 digits, so the round trip is limited by that rounding
        assert!((got - want).abs() <= 1e-10 + 1e-9 * want, "{p}: {got}");
    }
}

#[test]
fn moments_output() {
    let out = stdout(&stsense(&["moments", "--k", "2", "--n", "4"]));
    assert!(out.contains("M1 = 0.666666666667"));
    assert!(out.contains("alpha = 3\n"));
    assert!(out.contains("beta = 1.5\n"));
    let out = stdout(&stsense(&["moments", "--k", "4", "--n", "400"]));
    let alpha: f64 = out.lines().find_map(|l| l.strip_prefix("alpha = ")).unwrap().parse().unwrap();
    assert!((alpha - 395.4).abs() < 0.05);
    let out = stdout(&stsense(&["moments", "--k", "2", "--n", "4", "--sigma-eigs", "1,1"]));
    assert!(out.contains("N1 = 0.666666666667"));
    assert!(out.contains("alpha1 = 3\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(stsense(&["roc", "--detectors", ""]).status.code(), Some(2));
    assert_eq!(stsense(&["roc", "--detectors", "XX"]).status.code(), Some(2));
    assert_eq!(stsense(&["nonsense"]).status.code(), Some(2));
    assert_eq!(stsense(&["threshold", "--k", "4"]).status.code(), Some(2));
    assert_eq!(stsense(&["moments", "--k", "4", "--n", "2"]).status.code(), Some(2));
    assert_eq!(stsense(&["validate", "--criteria", "42"]).status.code(), Some(2));
}

#[test]
fn roc_csv_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &str| {
        vec![
            "roc".to_string(),
            "--k=4".into(),
            "--n=50".into(),
            "--snr-db=-1".into(),
            "--snr-db".into(),
            "-3".into(),
            "--trials=3000".into(),
            "--seed=9".into(),
            "--detectors=ST,ER".into(),
            format!("--out={p}"),
        ]
    };
    for p in [&a, &b] {
        let argv = args(p.to_str().unwrap());
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(stsense(&argv).status.code(), Some(0));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("detector,source,pfa,pd"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let count = |d: &str, s: &str| rows.iter().filter(|r| r[0] == d && r[1] == s).count();
    assert_eq!(count("ER", "empirical"), 1000);
    assert_eq!(count("ST", "empirical"), 1000);
    assert_eq!(count("ER", "analytic"), 0);
    assert!(count("ST", "analytic") > 0);
    let keys: Vec<(String, String, f64)> =
        rows.iter().map(|r| (r[0].to_string(), r[1].to_string(), r[2].parse().unwrap())).collect();
    assert!(
        keys.windows(2)
            .all(|w| (&w[0].0, &w[0].1) < (&w[1].0, &w[1].1)
                || (w[0].0 == w[1].0 && w[0].1 == w[1].1 && w[0].2 <= w[1].2))
    );
    for r in &rows {
        let pd: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&pd));
        let digits = r[3].trim_start_matches('-').replace('.', "");
        let sig = digits.split('e').next().unwrap().trim_start_matches('0');
        assert!(sig.len() == 10 || pd == 0.0, "{}", r[3]);
    }
}

#[test]
fn config_round_trips_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let first = stdout(&stsense(&[
        "config",
        "--k",
        "6",
        "--n",
        "30",
        "--mu-db",
        "0.5",
        "--detectors",
        "JOHN,ST",
        "--seed",
        "77",
    ]));
    std::fs::write(&path, &first).unwrap();
    let second = stdout(&stsense(&["config", "--config", path.to_str().unwrap()]));
    assert_eq!(first, second);
    assert!(first.contains("\"K\": 6"));
}

#[test]
fn pd_table_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd.csv");
    let o = stsense(&[
        "pd",
        "--k=4",
        "--n=50",
        "--trials=500",
        "--detectors=ST,JOHN",
        "--snr-db=-3",
        "--snr-db=3",
        "--channel-draws=3",
        "--h0-trials=20000",
        "--pfa=0.05",
        &format!("--out={}", out.display()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr1_db,detector,pd,std_error,threshold");
    assert_eq!(lines.len(), 5);
    let pd = |i: usize| -> f64 { lines[i].split(',').nth(2).unwrap().parse().unwrap() };
    assert!(pd(3) > pd(1) && pd(4) > pd(2));
}

#[test]
fn json_output() {
    let o = stsense(&["roc", "--k=2", "--n=10", "--snr-db=0", "--trials=200", "--detectors=ST", "--format=json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let curves = v.as_array().unwrap();
    assert_eq!(curves.len(), 2);
    assert_eq!(curves[0]["detector"], "ST");
}

#[test]
fn validate_subset_passes() {
    let o = stsense(&["validate", "--criteria", "1,2,4,11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 4);
}
