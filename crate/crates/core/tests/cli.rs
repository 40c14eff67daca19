use std::process::Command;

use serde_json::Value;

fn qiso(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qiso")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn derive_one_five_is_the_doubling() {
    let (code, out, _) = qiso(&["derive", "--gens", "1;-1;5;-5"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "qiso-run-report/1");
    assert_eq!(v["runs"][0]["classification"], "doubling of C*(Z)");
    assert_eq!(v["runs"][0]["invariants"]["aut_order"], 2);
    assert_eq!(v["status"]["code"], 0);
}

#[test]
fn derive_report_is_deterministic() {
    let a = qiso(&["derive", "--gens", "1;-1;2;-2"]).1;
    let b = qiso(&["derive", "--gens", "2;-2;1;-1"]).1;
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v["specs"] = Value::Null;
        v
    };
    assert_eq!(a, qiso(&["derive", "--gens", "1;-1;2;-2"]).1);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn compare_plane_sets_from_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let sp = dir.path().join("s1.json");
    let spp = dir.path().join("s2.json");
    std::fs::write(&sp, r#"{"rank":2,"generators":[[1,0],[0,1],[-1,0],[0,-1]]}"#).unwrap();
    std::fs::write(&spp, r#"{"rank":2,"generators":[[1,0],[0,1],[-1,0],[0,-1],[2,0],[-2,0]]}"#).unwrap();
    let out = dir.path().join("report.json");
    let (code, stdout, _) = qiso(&[
        "compare",
        "--spec",
        sp.to_str().unwrap(),
        "--other-spec",
        spp.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["comparison"]["distinguished"], true);
    assert_eq!(v["comparison"]["left"]["aut_order"], 8);
    assert_eq!(v["comparison"]["right"]["aut_order"], 4);
    assert_eq!(v["runs"][1]["classification"], "tensor product of doublings of C*(Z)");
}

#[test]
fn compare_integer_sets_not_distinguished() {
    let (code, out, _) = qiso(&["compare", "--gens", "1", "--other-gens", "1;2;3", "--symmetrize", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("not distinguished at available invariants"));
    assert!(out.contains("warning: added missing inverse"));
}

#[test]
fn spectral_text_shows_swap_witness() {
    let (code, out, _) =
        qiso(&["spectral", "--gens", "1,0;0,1;2,0", "--symmetrize", "--spectral-radius", "2", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("M = [0,1;1,0]: fails, l((2,0)) = 1 but l((0,2)) = 2"), "{out}");
}

#[test]
fn verify_and_doubling_check_succeed() {
    let (code, out, _) = qiso(&["verify", "--gens", "2;-2;3;-3", "--spectral-radius", "4"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["spectral"][0]["verdicts"].as_array().unwrap().len() == 2);
    let (code, out, _) = qiso(&["doubling-check", "--rank", "2", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("passed"));
}

#[test]
fn exit_codes() {
    assert_eq!(qiso(&["derive", "--gens", "2;-2"]).0, 1);
    assert_eq!(qiso(&["derive", "--gens", "1"]).0, 1);
    assert_eq!(qiso(&["derive"]).0, 1);
    assert_eq!(qiso(&["frobnicate"]).0, 1);
    assert_eq!(qiso(&["derive", "--gens", "1;-1;2;-2", "--max-rounds", "1"]).0, 2);
    assert_eq!(qiso(&["derive", "--gens", "1;-1", "--disable-rule", "nonsense"]).0, 1);
    assert_eq!(qiso(&["--help"]).0, 0);
}
