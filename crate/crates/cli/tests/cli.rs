use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn ramify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(args)
        .env_remove("RAMIFY_BACKEND")
        .output()
        .expect("binary runs")
}

fn ramify_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(args)
        .env_remove("RAMIFY_BACKEND")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn record_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

const QUARTIC: &str = "(z-1)^3*(z+3)/z";

const THREE_MISSED: &str = r#"{"genus":1,"degree":3,"interior_beta":0,"missed":["1","2","3"],
  "ends":[{"index":1,"beta":2,"class":"missed:1"},{"index":1,"beta":2,"class":"missed:2"},
          {"index":1,"beta":2,"class":"missed:3"}]}"#;

const CATENOID: &str = r#"{"genus":0,"degree":1,"interior_beta":0,"missed":["1","2"],
  "ends":[{"index":1,"beta":0,"class":"missed:1"},{"index":1,"beta":0,"class":"missed:2"}]}"#;

#[test]
fn analyze_map_reports_passport_and_rh() {
    let o = ramify(&["analyze-map", "--map", QUARTIC, "--over", "0;16;inf"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["degree"], 4);
    assert_eq!(v["rh"]["holds"], true);
    assert_eq!(v["rh"]["sum_beta"], 6);
    for e in v["passport"]["entries"].as_array().unwrap() {
        assert_eq!(e["local_degrees"], serde_json::json!([3, 1]));
    }
}

#[test]
fn analyze_map_approx_backend() {
    let o = ramify(&[
        "--backend",
        "approx",
        "analyze-map",
        "--map",
        QUARTIC,
        "--over",
        "0;16;inf",
    ]);
    assert!(o.status.success());
    assert_eq!(json(&o)["backend"], "approx");
}

#[test]
fn text_format_is_indented_json() {
    let o = ramify(&[
        "--format",
        "text",
        "analyze-map",
        "--map",
        "z^2",
        "--over",
        "0;inf",
    ]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(s.lines().count() > 5);
    assert_eq!(json(&o)["rh"]["holds"], true);
}

#[test]
fn construct_picard_exact_and_degenerate() {
    let o = ramify(&["construct-picard", "--w", "16"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["verified"], true);
    assert_eq!(v["backend"], "exact");
    assert_eq!(v["converse"]["verdict"], "CONSISTENT");

    let o = ramify(&["construct-picard", "--w", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn construct_picard_falls_back_when_not_a_cube() {
    let o = ramify(&["construct-picard", "--w", "3"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["backend"], "approx");
}

#[test]
fn construct_picard_for_targets() {
    let o = ramify(&["construct-picard", "--targets", "0;1;inf"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["verified"], true);

    let o = ramify(&["construct-picard", "--targets", "0;1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn monodromy_of_the_quartic() {
    let o = ramify(&["monodromy", "--map", QUARTIC, "--punctures", "0;16;inf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["product_is_identity"], true);
    assert_eq!(v["transitive"], true);
    assert_eq!(v["regularity_probe"]["regular"], true);
    for p in v["punctures"].as_array().unwrap() {
        assert_eq!(p["cycle_type"], serde_json::json!([3, 1]));
    }
}

#[test]
fn monodromy_requires_all_branch_values() {
    let o = ramify(&["monodromy", "--map", QUARTIC, "--punctures", "0;inf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_lift_local() {
    let ok = ramify(&["check-lift", "--beta-f", "2", "--beta-F", "5"]);
    assert!(ok.status.success());
    assert_eq!(json(&ok)["lift"]["k"], 2);

    let bad = ramify(&["check-lift", "--beta-f", "2", "--beta-F", "3"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["liftable"], false);
}

#[test]
fn check_lift_against_passport() {
    let passport =
        r#"{"degree":4,"entries":[{"value":{"re":"0","im":"0"},"local_degrees":[3,1]}]}"#;
    let p = record_file(passport);
    let ends = record_file(r#"[{"value":{"re":"0","im":"0"},"beta":1}]"#);
    let args = |force: bool| {
        let mut a = vec![
            "check-lift",
            "--passport",
            p.path().to_str().unwrap(),
            "--ends",
            ends.path().to_str().unwrap(),
        ];
        if force {
            a.push("--force-ramified");
        }
        a.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let any: Vec<String> = args(false);
    let o = ramify(&any.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success());
    assert_eq!(json(&o)["verdict"], "FEASIBLE");

    let forced: Vec<String> = args(true);
    let o = ramify(&forced.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "INFEASIBLE");
}

#[test]
fn fgt_check_from_file_and_stdin() {
    let f = record_file(CATENOID);
    let o = ramify(&["fgt", "check", f.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(json(&o)["verdict"], true);

    let o = ramify_stdin(&["fgt", "check", "-"], THREE_MISSED);
    assert!(o.status.success());
    assert_eq!(
        json(&o)["consequences"]["rigidity"]["all_indices_one"],
        true
    );
}

#[test]
fn fgt_check_rejects_broken_records() {
    let bad_tc = CATENOID.replace(
        r#""index":1,"beta":0,"class":"missed:2""#,
        r#""index":2,"beta":0,"class":"missed:2""#,
    );
    let o = ramify_stdin(&["fgt", "check", "-"], &bad_tc);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["tc"]["verdict"], false);

    let o = ramify_stdin(&["fgt", "check", "-"], r#"{"genus":0}"#);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fgt_enumerate_streams_json_lines() {
    let o = ramify(&[
        "fgt",
        "enumerate",
        "--g-max",
        "2",
        "--n-max",
        "4",
        "--m-max",
        "6",
        "--b-max",
        "4",
        "--filter",
        "l=3",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty());
    for l in lines {
        let v: Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["missed"].as_array().unwrap().len(), 3);
    }

    let o = ramify(&[
        "fgt",
        "enumerate",
        "--g-max",
        "1",
        "--n-max",
        "1",
        "--m-max",
        "1",
        "--b-max",
        "1",
        "--filter",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fgt_classify_obstruct_bend_and_no_extension() {
    let cat = record_file(CATENOID);
    let cat_path = cat.path().to_str().unwrap();
    let o = ramify(&["fgt", "classify", cat_path]);
    assert!(o.status.success());
    assert_eq!(json(&o)["kind"], "covering_of_twice_punctured_sphere");

    let three = record_file(THREE_MISSED);
    let o = ramify(&["fgt", "obstruct", three.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(json(&o)["record_passes"], false);

    let o = ramify(&["fgt", "bend", cat_path, "--from", "missed:1", "--to", "7"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["missed"].as_array().unwrap().contains(&Value::from("7")));

    let o = ramify(&["fgt", "bend", cat_path, "--from", "missed:1", "--to", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = ramify(&["fgt", "no-extension", cat_path]);
    assert!(o.status.success());
    assert_eq!(json(&o)["record_passes"], false);

    let o = ramify(&["fgt", "obstruct", cat_path]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        ramify(&["analyze-map", "--map", "z+", "--over", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ramify(&["fgt", "check", "/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ramify(&["nonsense"]).status.code(), Some(2));
}
