use std::path::PathBuf;
use std::process::{Command, Output};

use cclb_core::MeasureReport;
use serde_json::Value;

fn cclb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cclb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cclb-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the schema keywords used by the shipped report schema.
fn conforms(v: &Value, s: &Value) -> Result<(), String> {
    if let Some(options) = s.get("oneOf").and_then(Value::as_array) {
        let hits = options.iter().filter(|o| conforms(v, o).is_ok()).count();
        return if hits == 1 { Ok(()) } else { Err(format!("{v} matches {hits} alternatives")) };
    }
    if let Some(allowed) = s.get("enum").and_then(Value::as_array) {
        if !allowed.contains(v) {
            return Err(format!("{v} not in {allowed:?}"));
        }
    }
    if let Some(t) = s.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            _ => true,
        };
        if !ok {
            return Err(format!("{v} is not {t}"));
        }
    }
    if let Some(req) = s.get("required").and_then(Value::as_array) {
        for k in req {
            if v.get(k.as_str().unwrap()).is_none() {
                return Err(format!("missing {k}"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (s.get("properties").and_then(Value::as_object), v.as_object()) {
        for (k, val) in obj {
            let sub = props.get(k).ok_or_else(|| format!("unexpected key {k}"))?;
            conforms(val, sub)?;
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for x in arr {
            conforms(x, items)?;
        }
    }
    Ok(())
}

fn measure_json(args: &[&str]) -> MeasureReport {
    let o = cclb(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let v: Value = serde_json::from_str(&text).unwrap();
    conforms(&v, &schema()).unwrap();
    MeasureReport::from_json(&text).unwrap()
}

#[test]
fn gen_files() {
    let p = scratch("eq2.txt");
    let o = cclb(&["gen", "eq", "--n", "2", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("4x4 eq(2)"));
    let body = std::fs::read_to_string(&p).unwrap();
    assert!(body.starts_with("4 4 bool\n1000\n0100\n0010\n0001\n"));

    let o = cclb(&["gen", "hd", "--n", "2", "--k", "1"]);
    assert!(stdout(&o).starts_with("4 4 bool\n0110\n1001\n1001\n0110\n"));
    assert_eq!(stdout(&cclb(&["gen", "hd:2:1"])), stdout(&o));

    let o = cclb(&["gen", "pgint", "--q", "2"]);
    assert!(stdout(&o).starts_with("29 7 bool\n"));
    assert_eq!(cclb(&["gen", "nope", "--n", "2"]).status.code(), Some(2));
    assert_eq!(cclb(&["gen", "eq"]).status.code(), Some(2));
}

#[test]
fn measure_examples() {
    let r = measure_json(&["measure", "eq:3", "--measures", "D,gamma2", "--format", "json"]);
    assert_eq!(r.value("D"), Some(4.0));
    assert!((r.value("gamma2").unwrap() - 1.0).abs() < 1e-4);

    let r = measure_json(&["measure", "hd:4", "--measures", "gamma2", "--format", "json"]);
    let g = r.value("gamma2").unwrap();
    assert!((1.5 - 1e-4..=2.0 + 1e-4).contains(&g), "{g}");

    let o = cclb(&["measure", "eq:1", "--measures", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown measure"));
}

#[test]
fn measure_from_file_and_csv() {
    let p = scratch("gt4.txt");
    assert!(cclb(&["gen", "gt", "--n", "4", "-o", p.to_str().unwrap()]).status.success());
    let o = cclb(&["measure", p.to_str().unwrap(), "--measures", "rank,one_way", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("matrix,measure,value,kind,lower,upper\n"));
    assert!(text.contains("gt(4),rank,3,exact"));
}

#[test]
fn full_measure_report_conforms() {
    let r = measure_json(&["measure", "eq:1", "--format", "json"]);
    assert!(r.measures.len() > 20);
}

#[test]
fn verify_examples() {
    assert_eq!(cclb(&["verify", "eq:2"]).status.code(), Some(0));
    let o = cclb(&["verify", "--random", "50", "--size", "4", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("seed 7"));
    assert!(text.contains("50 matrices, 0 with violations"));

    let bad = scratch("bad.txt");
    std::fs::write(&bad, "2 2 bool\n10\n0x\n").unwrap();
    let o = cclb(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    assert_eq!(cclb(&["verify"]).status.code(), Some(2));
    assert_eq!(cclb(&["verify", "eq:1", "--random", "2"]).status.code(), Some(2));
}

#[test]
fn verify_json_reports_conform() {
    let o = cclb(&["verify", "--random", "3", "--size", "3", "--sign", "--seed", "1", "--format", "json", "--jobs", "2"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["seed"], 1);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        conforms(r, &schema()).unwrap();
    }
    let serial = cclb(&["verify", "--random", "3", "--size", "3", "--sign", "--seed", "1", "--format", "json"]);
    assert_eq!(stdout(&serial), stdout(&o));
}

#[test]
fn cap_exit_code() {
    let o = cclb(&["measure", "pgint:3", "--measures", "D"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(cclb(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cclb(&["measure", "eq:1", "--eps", "0.7", "--measures", "D"]).status.code(), Some(2));
    assert_eq!(cclb(&["measure", "no-such-file"]).status.code(), Some(2));
}

#[test]
fn sweep_hamming() {
    let p = scratch("sweep.csv");
    let o = cclb(&["sweep", "--family", "hd1", "--n", "2..6", "--measure", "gamma2", "--csv", p.to_str().unwrap(), "--fit"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("gamma2: value ~"));
    let csv = std::fs::read_to_string(&p).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,n,measure,value,kind"));
    let vals: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 5);
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] - 1e-4);
    }
    assert_eq!(cclb(&["sweep", "--family", "eq", "--n", "3..1", "--measure", "D"]).status.code(), Some(2));
}

#[test]
fn simulate_hd1() {
    let args = ["simulate", "--protocol", "hd1", "--n", "16", "--d", "1", "--trials", "100000", "--seed", "1", "--format", "json"];
    let o = cclb(&args);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = doc["round_event"]["empirical_prob"].as_f64().unwrap();
    assert!((p - 0.5).abs() <= 0.02, "{p}");
    assert_eq!(doc["seed"], 1);
    assert_eq!(stdout(&cclb(&args)), stdout(&o));
}

#[test]
fn simulate_one_bit_equality() {
    let o = cclb(&["simulate", "--protocol", "eq1bit", "--n", "3", "--trials", "100000", "--format", "json"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let acc = doc["acceptance"].as_array().unwrap();
    assert_eq!(acc.len(), 8);
    for (i, row) in acc.iter().enumerate() {
        for (j, p) in row.as_array().unwrap().iter().enumerate() {
            let p = p.as_f64().unwrap();
            if i == j {
                assert_eq!(p, 1.0);
            } else {
                assert!((p - 0.5).abs() <= 0.01, "({i},{j}) = {p}");
            }
        }
    }
    assert_eq!(doc["gamma2_check"], true);
    assert_eq!(cclb(&["simulate", "--protocol", "nope", "--n", "2"]).status.code(), Some(2));
    assert_eq!(cclb(&["simulate", "--protocol", "eq1bit", "--n", "9"]).status.code(), Some(3));
}
