use std::path::PathBuf;
use std::process::{Command, Output};

fn offcenter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offcenter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("offcenter-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn identity_check_passes() {
    let o = offcenter(&["verify-identity", "--lambda", "0.5,1,2", "--nmax", "10", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
    assert!(v["max_deviation"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn negative_lambda_is_a_usage_error() {
    let o = offcenter(&["verify-identity", "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("lambda") && msg.contains("> 0"), "{msg}");
}

#[test]
fn circle_map_report() {
    let o = offcenter(&["verify-identity", "--map", "circle", "--nmax", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["results"][0]["report"]["convergence"], serde_json::json!("conditional"));
}

#[test]
fn tolerance_failure_exits_one() {
    let o = offcenter(&["verify-identity", "--lambda", "1", "--nmax", "4", "--radius", "2", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn kernel_ladders() {
    let o = offcenter(&["verify-kernels", "--N", "0,1,2,3", "--lambda", "0.5,1,2", "--kmax", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4 * 3 * 9);
    for r in rows {
        assert!(r["residual_refined"].as_f64().unwrap() <= 1e-6);
    }
    let o = offcenter(&["verify-kernels", "--N", "0", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn free_particle_rows_match() {
    let o = offcenter(&["propagate", "--system", "free", "--xi", "0", "--xf", "1", "--t", "1", "--lambda", "0.5,1,2,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "schema_version");
    let col = header.iter().position(|h| *h == "abs_error").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let e: f64 = r.split(',').nth(col).unwrap().parse().unwrap();
        assert!(e <= 1e-10, "{r}");
    }
}

#[test]
fn harmonic_rows_match_mehler() {
    let out = scratch("harmonic.json");
    let o = offcenter(&[
        "propagate", "--system", "harmonic", "--omega", "1", "--t", "0.3,1.0,2.0", "--lambda", "1,2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r["abs_error"].as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn caustic_rows_are_flagged_not_fatal() {
    let o = offcenter(&[
        "propagate", "--system", "harmonic", "--xi", "0.5", "--xf", "-0.5", "--t", "1,3.141592653589793",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().contains(",true,"), "{text}");
}

#[test]
fn caustic_scan_table() {
    let o = offcenter(&[
        "propagate", "--system", "quartic", "--a4", "0.01", "--scan-caustics", "--t-max", "3.0", "--lambda", "1,1.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("schema_version,lambda,kind,t,abs_m_qp"));
    assert!(text.lines().any(|l| l.starts_with("1,1e0,sign-change,")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("1,1.5e0,minimum,")), "{text}");
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("identity.json");
    std::fs::write(&cfg, r#"{"lambda": [-3.0], "nmax": 4, "tol": 1e-6}"#).unwrap();
    let o = offcenter(&["verify-identity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = offcenter(&["verify-identity", "--config", cfg.to_str().unwrap(), "--lambda", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["n_max"], 4);
    assert_eq!(v["results"][0]["lambda"], 2.0);

    std::fs::write(&cfg, r#"{"lamda": [1.0]}"#).unwrap();
    let o = offcenter(&["verify-identity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_offcenter"))
            .args(["verify-identity", "--lambda", "0.5,2", "--nmax", "6", "--out", path.to_str().unwrap()])
            .env("OFFCENTER_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_offcenter"))
        .args(["squeezed-norm"])
        .env("OFFCENTER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn squeezed_and_circle_commands() {
    let o = offcenter(&["squeezed-norm", "--width", "0.5,1,2", "--w", "1+1i", "--lambda", "1,1+0.5i"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 6);
    let o = offcenter(&["squeezed-norm", "--lambda", "-0.5+1i"]);
    assert_eq!(o.status.code(), Some(2));

    let o = offcenter(&["circle-rep", "--nmax", "10", "--width", "2", "--radii", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["reconstruction"].as_array().unwrap().len(), 11);
    assert_eq!(v["norm_sequences"][0]["sequence"]["values"].as_array().unwrap().len(), 2);
    let o = offcenter(&["circle-rep", "--nmax", "3", "--n-angular", "6"]);
    assert_eq!(o.status.code(), Some(2));
}
