use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_endoscope");

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn run(cmd: &str, config: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .env("ENDOSCOPE_CACHE_DIR", dir.path().join("cache"))
        .output()
        .unwrap();
    (out, dir)
}

fn report(cmd: &str, config: &str, extra: &[&str]) -> (i32, Value) {
    let (out, _dir) = run(cmd, config, extra);
    let code = out.status.code().unwrap();
    assert_ne!(code, 1, "{}", String::from_utf8_lossy(&out.stderr));
    (code, serde_json::from_slice(&out.stdout).unwrap())
}

fn schema(name: &str) -> JSONSchema {
    let text = fs::read_to_string(crate_dir().join("schemas").join(format!("{name}.schema.json"))).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(s: &JSONSchema, v: &Value) {
    if let Err(errors) = s.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("schema violations: {msgs:?}");
    }
}

fn item<'a>(r: &'a Value, prefix: &str) -> &'a Value {
    r["items"].as_array().unwrap().iter().find(|i| i["label"].as_str().unwrap().starts_with(prefix)).unwrap()
}

/// λ ≡ 0 or -2 mod p^r, computed here without the library.
fn endotrivial_weight(p: u64, r: u32, lambda: u64) -> bool {
    let q = p.pow(r);
    lambda.is_multiple_of(q) || (lambda + 2).is_multiple_of(q)
}

#[test]
fn weyl_golden_tables() {
    let rows_schema = schema("weyl_scan_row");
    for (p, r, lmax) in [(3u64, 1u32, 10u64), (2, 1, 8), (2, 2, 8)] {
        let (code, rep) = report("weyl", &format!(r#"{{"primes":[{p}],"r":{r},"lambda_max":{lmax}}}"#), &[]);
        assert_eq!(code, 0);
        let rows = &item(&rep, "scan")["result"];
        let golden: Value = serde_json::from_str(
            &fs::read_to_string(crate_dir().join(format!("tests/golden/weyl_p{p}_r{r}_l{lmax}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(rows, &golden, "p={p} r={r}");
        let q = p.pow(r);
        for row in rows.as_array().unwrap() {
            assert_valid(&rows_schema, row);
            let lambda = row["lambda"].as_u64().unwrap();
            let dim = row["dim"].as_u64().unwrap();
            assert_eq!(dim, lambda + 1);
            assert_eq!(row["verdict"].as_bool().unwrap(), endotrivial_weight(p, r, lambda));
            let free = row["free_rank"].as_u64().unwrap();
            let res = row["residual_dim"].as_u64().unwrap();
            assert_eq!(dim * dim, free * q + res);
        }
    }
}

#[test]
fn reports_match_schemas() {
    let run_schema = schema("run_report");
    let job_schema = schema("job_config");
    let comp_schema = schema("component_report");
    let module_schema = schema("module");
    let jobs = [
        ("hypothesis", r#"{"types":["A1","A2"],"primes":[2]}"#),
        ("nullcone", r#"{"types":["A3"],"primes":[2],"e":[1,2]}"#),
        ("weyl", r#"{"primes":[5],"lambda_max":6}"#),
        ("census", r#"{"algebra":"E2","primes":[2],"dims":[1,3]}"#),
        ("jordan", r#"{"algebra":"E2","primes":[3],"degrees":[-1,2],"e":[1,2]}"#),
    ];
    for (cmd, cfg) in jobs {
        assert_valid(&job_schema, &serde_json::from_str(cfg).unwrap());
        let (code, rep) = report(cmd, cfg, &[]);
        assert_eq!(code, 0, "{cmd}");
        assert_valid(&run_schema, &rep);
        assert_eq!(rep["all_expectations_met"], Value::Bool(true));
        if cmd == "nullcone" {
            for c in item(&rep, "A3")["result"]["reports"].as_array().unwrap() {
                assert_valid(&comp_schema, c);
            }
        }
        if cmd == "census" {
            let classes = item(&rep, "E2/p2 d=3")["result"]["classes"].as_array().unwrap();
            assert_eq!(classes.len(), 2);
            for c in classes {
                assert_valid(&module_schema, &c["module"]);
            }
        }
    }
}

#[test]
fn deterministic_across_threads_and_runs() {
    let cfg = r#"{"algebra":"E2","primes":[2],"dims":[3],"mode":"random","budget":300,"seed":7}"#;
    let (_, a) = report("census", cfg, &["--threads", "1"]);
    let (_, b) = report("census", cfg, &["--threads", "4"]);
    let (_, c) = report("census", cfg, &[]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let cfg = r#"{"types":["B3"],"primes":[2],"e":[2]}"#;
    let (_, a) = report("nullcone", cfg, &["--threads", "1"]);
    let (_, b) = report("nullcone", cfg, &["--threads", "3"]);
    assert_eq!(a["fingerprint"], b["fingerprint"]);
    assert_eq!(a, b);
}

#[test]
fn out_dir_and_timing_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (o, _d) = run("weyl", r#"{"primes":[3],"lambda_max":4}"#, &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&fs::read_to_string(out.join("weyl.json")).unwrap()).unwrap();
    let timing: Value = serde_json::from_str(&fs::read_to_string(out.join("weyl.timing.json")).unwrap()).unwrap();
    assert_eq!(rep["fingerprint"], timing["fingerprint"]);
    assert!(timing["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_codes() {
    // B2 at p = 2 is one of the recorded disagreements with the published equation set
    let (code, rep) = report("nullcone", r#"{"types":["B2"],"primes":[2]}"#, &[]);
    assert_eq!(code, 2);
    assert_eq!(rep["all_expectations_met"], Value::Bool(false));

    let (out, _d) = run("nullcone", r#"{"types":["Q9"],"primes":[2]}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnknownType"));

    let (out, _d) = run("weyl", r#"{"primes":[3],"lambda_max":4,"unknown":1}"#, &[]);
    assert_eq!(out.status.code(), Some(1));

    let (out, _d) = run("census", r#"{"algebra":"E2","primes":[2],"dims":[3],"mode":"random"}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hypothesis_skip_and_sweep() {
    let (code, rep) = report("hypothesis", r#"{"types":["A1","A2"],"primes":[2]}"#, &[]);
    assert_eq!(code, 0);
    assert_eq!(item(&rep, "A1")["result"]["skipped"], Value::Bool(true));
    let lifts = item(&rep, "A2")["result"]["lifts"].as_array().unwrap();
    // nonzero F_2-combinations of u_1, u_2
    assert_eq!(lifts.len(), 3);
}
