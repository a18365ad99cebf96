use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn relhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relhyp")).args(args).output().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn constants_report_is_one_json_document() {
    let o = relhyp(&["constants", &data("s3")]);
    assert_eq!(o.status.code(), Some(0));
    let v = report(&o);
    assert_eq!(v["command"], "constants");
    assert_eq!(v["outputs"]["m"], 4);
    assert_eq!(v["outputs"]["omega_size"], 1);
    assert_eq!(v["outputs"]["compute_k"]["k"]["exact"], "262144");
    assert_eq!(v["outputs"]["order_bound"]["bound"]["factorial"], true);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v["timing"] = Value::Null;
        v
    };
    for args in [
        vec!["analyze", data("s4cox").leak(), "-w", "A:a C:c B:b A:a C:c"],
        vec!["delta", data("d4").leak(), "--radius", "2"],
        vec!["fill", data("s3").leak(), "-w", "t t t t"],
    ] {
        let a = strip(report(&relhyp(&args)));
        let b = strip(report(&relhyp(&args)));
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(relhyp(&["order", &data("s3"), "-w", "t"]).status.code(), Some(0));
    let o = relhyp(&["order", &data("s3"), "-w", "H1:r"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&o)["error"]["kind"], "ParabolicInput");
    let o = relhyp(&["fill", &data("s3"), "-w", "t"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&o)["error"]["kind"], "NotNullHomotopic");
    assert_eq!(relhyp(&["delta", &data("s3")]).status.code(), Some(2));
    assert_eq!(relhyp(&["verify", &data("s3"), "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(relhyp(&["--help"]).status.code(), Some(0));
}

#[test]
fn fill_trace_goes_to_stderr_and_replays() {
    let o = relhyp(&["fill", &data("s3"), "-w", "t H1:r t H1:r"]);
    assert_eq!(o.status.code(), Some(0));
    let trace = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(trace.lines().any(|l| l.starts_with('R')), "{trace}");
    let path = std::env::temp_dir().join(format!("relhyp-cli-{}.script", std::process::id()));
    std::fs::write(&path, &trace).unwrap();
    let r = relhyp(&["replay", &data("s3"), "-w", "t H1:r t H1:r", "--script", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(report(&r)["outputs"]["replay"]["rel_area"], report(&o)["outputs"]["fill"]["rel_area"]);
}

#[test]
fn verify_suites_pass_on_s3() {
    for suite in ["words", "filling", "shrink", "bounds"] {
        let o = relhyp(&["verify", &data("s3"), "--suite", suite, "--max-len", "4"]);
        let v = report(&o);
        assert_eq!(o.status.code(), Some(0), "{suite}: {v}");
        assert!(v["verification"]["rows"].as_array().unwrap().iter().all(|r| r["status"] != "fail"));
    }
}

#[test]
fn ball_dot_output() {
    let o = relhyp(&["ball", &data("z2z3"), "--radius", "2", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("graph ball {") && dot.trim_end().ends_with('}'));
}
