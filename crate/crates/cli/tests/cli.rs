use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-dof"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find(|l| l.starts_with(key))
        .map(|l| l[key.len()..].trim().to_string())
        .unwrap_or_else(|| panic!("no '{key}' line in:\n{text}"))
}

const CFG: [&str; 8] = ["--m1", "6", "--m2", "4", "--n1", "3", "--n2", "3"];

fn with<'a>(extra: &[&'a str], head: &'a str) -> Vec<&'a str> {
    let mut v = vec![head];
    v.extend(CFG);
    v.extend(extra);
    v
}

#[test]
fn compute_text() {
    let o = run(&with(&["--r", "8"], "compute"));
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(field(&s, "achievable"), "6");
    assert_eq!(field(&s, "baseline"), "4");
    assert_eq!(field(&s, "gain"), "2");
    assert_eq!(field(&s, "ris helps"), "yes");
    assert!(s.contains("Case1"));
}

#[test]
fn compute_json_saturated() {
    let o = run(&["compute", "--m1", "10", "--m2", "10", "--n1", "10", "--n2", "10", "--r", "200", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["achievable"], 20);
    assert_eq!(v["baseline"], 10);
    assert_eq!(v["per_case"].as_array().unwrap().len(), 3);
}

#[test]
fn compute_relabels_users() {
    let o = run(&["compute", "--m1", "2", "--m2", "5", "--n1", "3", "--n2", "6", "--r", "0", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["m1"], 5);
    assert_eq!(v["config"]["swapped"], true);
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        vec!["compute", "--m1", "0", "--m2", "4", "--n1", "3", "--n2", "3", "--r", "8"],
        vec!["compute", "--m1", "6", "--m2", "4", "--n1", "3", "--n2", "3", "--r", "-1"],
        vec!["compute", "--m1", "6", "--m2", "4", "--n1", "3", "--r", "8"],
        vec!["compute", "--m1", "six"],
        vec!["frobnicate"],
        vec!["gain", "--m", "0", "--n", "3", "--r", "0"],
        vec!["sweep", "--m", "1..3", "--n", "10"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"m1": 6, "m2": 4, "n1": 3, "n2": 3, "r": 0}"#).unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["compute", "--config", p]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "achievable"), "4");
    let o = run(&["compute", "--config", p, "--r", "8"]);
    assert_eq!(field(&stdout(&o), "achievable"), "6");

    fs::write(&path, r#"{"m1": 6, "unknown": 1}"#).unwrap();
    assert_eq!(run(&["compute", "--config", p]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let o = run(&with(&["--r", "8", "--seed", "7"], "verify"));
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert_eq!(s.lines().last(), Some("PASS"));
    let slope = s.lines().find(|l| l.contains(" slope ")).unwrap();
    let value: f64 = slope.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((value - 6.0).abs() <= 0.15);
}

#[test]
fn verify_without_ris_hits_baseline() {
    let o = run(&with(&["--r", "0", "--seed", "7", "--json"], "verify"));
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["predicted"], 4);
    assert!((v["slope"].as_f64().unwrap() - 4.0).abs() <= 0.15);
}

#[test]
fn verify_unreachable_tolerance_fails() {
    let o = run(&with(&["--r", "8", "--seed", "7", "--tol", "1e-30"], "verify"));
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("FAIL residual") || s.contains("FAIL zero block"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed checks"));
}

#[test]
fn verify_instance_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let o = run(&with(&["--r", "8", "--seed", "3", "--out", path.to_str().unwrap()], "verify"));
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["config", "r", "seed", "case", "plan", "psi", "residual", "ranks"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let psi = v["psi"].as_array().unwrap();
    assert_eq!(psi.len(), 8);
    assert_eq!(psi[0].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_m_symmetric_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let p = path.to_str().unwrap();
    let o = run(&["sweep", "--variable", "m", "--m", "1..20", "--n", "10", "--r", "0,40,80,200,400", "--out", p]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m1,m2,n1,n2,r,case,achievable,baseline,gain,ris_helps"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 100);
    for chunk in rows.chunks(5) {
        let m: usize = chunk[0][0].parse().unwrap();
        let vals: Vec<usize> = chunk.iter().map(|r| r[6].parse().unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]), "m={m}");
        assert_eq!(chunk[0][6], chunk[0][7]);
        for r in chunk {
            let rr: usize = r[4].parse().unwrap();
            if rr >= 2 * m * 10 {
                assert_eq!(r[6].parse::<usize>().unwrap(), 2 * m.min(10));
            }
        }
    }

    // byte-identical rerun
    let again = dir.path().join("again.csv");
    run(&["sweep", "--m", "1..20", "--n", "10", "--r", "0,40,80,200,400", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn sweep_r_matches_symmetric_gain() {
    let o = run(&["sweep", "--variable", "r", "--m", "10", "--n", "10", "--r", "0..250:5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let r: usize = f[4].parse().unwrap();
        let expected = (r / 20).min(10);
        assert_eq!(f[8].parse::<usize>().unwrap(), expected, "{line}");
    }
}

#[test]
fn sweep_r_with_explicit_antennas() {
    let o = run(&["sweep", "--variable", "r", "--m1", "2", "--m2", "5", "--n1", "3", "--n2", "6", "--r", "0,10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("2,5,3,6,0,"));
}

#[test]
fn sweep_unwritable_output_exit_1() {
    let o = run(&["sweep", "--m", "1..2", "--n", "10", "--r", "0", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gain_table_examples() {
    let o = run(&["gain", "--m", "10", "--n", "10", "--r", "0..60:20", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gains: Vec<u64> = v.as_array().unwrap().iter().map(|g| g["closed_form"].as_u64().unwrap()).collect();
    assert_eq!(gains, vec![0, 1, 2, 3]);

    let o = run(&["gain", "--m", "20", "--n", "10", "--r", "0..1000:100"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("MISMATCH"));

    let o = run(&["gain", "--m", "10", "--n", "10", "--r", "19", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["closed_form"], 0);
    assert_eq!(v[0]["from_table"], 0);
}
