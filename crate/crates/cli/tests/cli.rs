use std::path::PathBuf;
use std::process::{Command, Output};

fn lhbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhbp"))
        .args(args)
        .output()
        .expect("spawn lhbp")
}

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("models")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn bundled_models_validate() {
    for name in ["example2-0.3.json", "tridiagonal-u1.json", "explicit-small.json"] {
        let out = lhbp(&["validate", "--model", &model(name), "--K", "200"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validation_failure_exits_2() {
    let dir = std::env::temp_dir().join(format!("lhbp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("unnormalized.json");
    std::fs::write(
        &path,
        r#"{"family": "explicit", "tail_from": 1, "head": [
            {"type": 0, "law": {"kind": "table", "entries": [
                {"counts": {"1": 1}, "prob": 0.7}, {"counts": {}, "prob": 0.5}]}}]}"#,
    )
    .unwrap();
    let out = lhbp(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(lhbp(&["validate", "--model", "example2:1.5"]).status.code(), Some(2));
}

#[test]
fn blowup_exits_3() {
    let out = lhbp(&["bounds", "--model", "example2:0.8", "--i", "1", "--k", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_4() {
    assert_eq!(lhbp(&["extinction", "--k", "abc", "--model", "example2:0"]).status.code(), Some(4));
    assert_eq!(lhbp(&["nonsense"]).status.code(), Some(4));
    assert_eq!(lhbp(&["moments", "--model", "no-such-family:1"]).status.code(), Some(4));
    assert_eq!(lhbp(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_csv_round_trips() {
    let out = lhbp(&["sweep", "--family", "example2", "--grid", "0:0.25:1", "--k", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["parameter", "q0", "qtilde0", "regime", "q_converged", "qtilde_converged"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    for (r, g) in rows.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
        assert_eq!(r[0].parse::<f64>().unwrap(), g);
    }
    // the rejected gamma = 1 row is flagged rather than dropped
    assert!(rows[4][3].starts_with("invalid"));
    assert!(rows[4][1].parse::<f64>().unwrap().is_nan());

    // values re-parsed from text and printed again match the original bytes
    let direct = lhbp_core::sweep::level_pair(&lhbp_core::LhbpModel::example2(0.25).unwrap(), 200, lhbp_core::generating::DEFAULT_TOL).unwrap();
    let q0: f64 = rows[1][1].parse().unwrap();
    let qt0: f64 = rows[1][2].parse().unwrap();
    assert_eq!(q0.to_bits(), direct.0.to_bits());
    assert_eq!(qt0.to_bits(), direct.2.to_bits());
    assert_eq!(format!("{q0:.16e}"), &rows[1][1]);
}

#[test]
fn gammastar_json() {
    let out = lhbp(&["gammastar", "--K", "2000", "--tol", "5e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let (lo, hi, est) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap(), v["estimate"].as_f64().unwrap());
    assert!(lo <= est && est <= hi && hi - lo <= 5e-4);
    assert!((0.1615..=0.1635).contains(&est), "{est}");
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("lhbp-moments-{}.csv", std::process::id()));
    let out = lhbp(&["moments", "--model", "tridiagonal:0.1,0.2,0.8", "--K", "50", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 10);
}

#[test]
fn bounds_csv_brackets_oracle() {
    let out = lhbp(&["bounds", "--model", "example2:0", "--i", "1", "--k", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["i", "k", "lower", "oracle", "upper"]);
    let row = rdr.records().next().unwrap().unwrap();
    let v: Vec<f64> = (2..5).map(|j| row[j].parse().unwrap()).collect();
    assert!(v[0] <= v[1] && v[1] <= v[2], "{v:?}");
}

#[test]
fn moments_csv_reports_stop() {
    let out = lhbp(&["moments", "--model", "example2:0.8", "--K", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(&rows[0][5], "ok");
    assert!(rows.last().unwrap()[5].starts_with("blowup"));
}
