use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tubecheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubecheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn obstruct_sin_square() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", r#"{"n":2,"mode":"tube","phi":["sin(y1^2)"]}"#);
    let out = tubecheck(&["obstruct", &f]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdict"], "OBSTRUCTED_UP_TO_BOUNDS");
    assert_eq!(r["entries"][0]["result"]["status"], "none_up_to");
    assert_eq!(r["witness"]["ks"][0], 1);
    assert!(r.get("timings_ms").is_none());
}

#[test]
fn obstruct_control_passes() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", r#"{"n":2,"mode":"tube","phi":["y1^2"]}"#);
    let r = json(&tubecheck(&["obstruct", &f]));
    assert_eq!(r["verdict"], "PASSES_NECESSARY_CONDITION");
    assert_eq!(r["entries"][0]["result"]["polynomial"], "2*T - 1");
}

#[test]
fn polar_commands() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "p.json",
        r#"{"n":2,"mode":"rigid-polar","phi":["exp(y1)-1"],"bounds":{"degree":4,"order":40}}"#,
    );
    let r = json(&tubecheck(&["polar", &f]));
    assert_eq!(r["verdict"], "OBSTRUCTED_UP_TO_BOUNDS");
    assert_eq!(r["entries"][0]["result"]["degree"], 4);
    assert_eq!(r["entries"][0]["result"]["order"], 40);

    let wrong = tubecheck(&["obstruct", &f]);
    assert_eq!(wrong.status.code(), Some(1));
    assert_eq!(json(&wrong)["verdict"], "INPUT_ERROR");
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    let out = tubecheck(&["obstruct", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "INPUT_ERROR");

    let missing = dir.path().join("missing.json");
    let out = tubecheck(&["nondegen", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let unknown = write(dir.path(), "u.json", r#"{"n":2,"mode":"tube","phi":["foo(y1)"]}"#);
    let out = tubecheck(&["obstruct", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].as_str().unwrap().contains("foo"));
}

#[test]
fn degenerate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", r#"{"n":2,"mode":"tube","phi":["y1^3"]}"#);
    let out = tubecheck(&["nondegen", &f, "--max-witness-order", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"], "NOT_FINITELY_NONDEGENERATE_UP_TO_ORDER");

    let out = tubecheck(&["nondegen", &f]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdict"], "FINITELY_NONDEGENERATE");
    assert_eq!(r["witness"]["betas"][0][0], 2);
}

#[test]
fn user_witness_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", r#"{"n":3,"mode":"tube","phi":["y1*y2"]}"#);
    let out = tubecheck(&[
        "obstruct",
        &f,
        "--witness",
        r#"{"betas":[[0,1],[1,0]],"ks":[1,1]}"#,
        "--assume-family",
        "--timings",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["witness"]["source"], "user");
    assert_eq!(r["assumptions"]["family_membership_asserted"], true);
    assert!(r["timings_ms"].is_object());
    assert_eq!(r["verdict"], "PASSES_NECESSARY_CONDITION");

    let out = tubecheck(&["obstruct", &f, "--witness", "[1,2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_reproducible_and_out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", r#"{"n":2,"mode":"tube","phi":["sinh(y1^2)"]}"#);
    let o = dir.path().join("r.json");
    let out = tubecheck(&["obstruct", &f, "--out", o.to_str().unwrap()]);
    assert!(out.stdout.is_empty());
    let first = std::fs::read(&o).unwrap();
    let second = tubecheck(&["obstruct", &f]).stdout;
    assert_eq!(first, second);
}

#[test]
fn guess_command() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", r#"{"var_count":1,"series":"exp(1/2*log1p(y1))"}"#);
    let out = tubecheck(&["guess", &f, "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["result"]["polynomial"], "T^2 - y1 - 1");
    assert_eq!(r["bounds"]["degree"], 2);

    let f = write(dir.path(), "e.json", r#"{"series":"exp(y1)","bounds":{"degree":3}}"#);
    let r = json(&tubecheck(&["guess", &f]));
    assert_eq!(r["result"]["result"]["status"], "none_up_to");

    let bad = write(
        dir.path(),
        "b.json",
        r#"{"series":"exp(y1)","bounds":{"degree":3,"order":2}}"#,
    );
    let out = tubecheck(&["guess", &bad]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = tubecheck(&["corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), 18);
    let square = dir.path().join("control_square.json");
    let r = json(&tubecheck(&["obstruct", square.to_str().unwrap()]));
    assert_eq!(r["verdict"], "PASSES_NECESSARY_CONDITION");
}
