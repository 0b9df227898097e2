use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kzcrystal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn full_report_passes_for_genus_one() {
    let out = run(&["report", "--p", "5", "--s", "1", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    let m = &doc["manifest"];
    assert_eq!(m["sigma"], json!(-1));
    assert_eq!(m["pass"], json!(true));
    let verdicts = m["verdicts"].as_array().unwrap();
    assert!(verdicts.len() > 10);
    for v in verdicts {
        assert!(v["modulus"].is_string());
        assert!(!v["degree"].is_null());
    }
    assert!(m.get("timings_ms").is_none());
}

#[test]
fn degenerate_regime_is_a_precondition_failure() {
    let out = run(&["qsol", "--p", "3", "--s", "1", "--g", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn composite_prime_is_rejected() {
    let out = run(&["verify-kz", "--p", "4", "--s", "1", "--g", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an odd prime"));
    let out = run(&["verify-kz", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["limit-check", "--p", "7", "--s", "1", "--g", "2", "--samples", "3", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timings_only_on_request() {
    let out = run(&["gm-check", "--p", "7", "--g", "1", "--timings"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["manifest"]["timings_ms"]["total"].is_number());
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# defaults\np = 7\ng = 1\ns = 2\nformat = json\n").unwrap();
    let out = run(&["qsol", "--config", path.to_str().unwrap(), "--p", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let params = &json_of(&out)["manifest"]["params"];
    assert_eq!(params["p"], json!(5));
    assert_eq!(params["s"], json!(2));
    std::fs::write(&path, "prime = 7\n").unwrap();
    let out = run(&["qsol", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_matrix_output() {
    let out = run(&["qsol", "--p", "5", "--s", "1", "--g", "1", "--at", "0,1,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4,0,1");
    let out = run(&["qsol", "--p", "5", "--s", "1", "--g", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hasse_witt_at_a_point() {
    let out = run(&["hasse-witt", "--p", "5", "--g", "1", "--at", "0,1,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3");
    // no ordinary curves with five branch points mod 5
    let out = run(&["hasse-witt", "--p", "5", "--g", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solution_file_round_trip() {
    let out = run(&["qsol", "--p", "7", "--s", "1", "--g", "1"]);
    let doc = json_of(&out);
    let vector = doc["report"]["vectors"][0].clone();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    std::fs::write(&path, serde_json::to_string(&json!({ "vector": vector })).unwrap()).unwrap();
    let out = run(&["verify-kz", "--p", "7", "--s", "1", "--g", "1", "--solution", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let eqs = json_of(&out)["report"]["equations"].as_array().unwrap().len();
    assert_eq!(eqs, 3);

    // a non-solution with zero entry sum
    let bad = json!({"vector": [
        {"vars": ["z_1", "z_2", "z_3"], "terms": [{"exp": [1, 0, 0], "c": "1"}], "mod": "7^1"},
        {"vars": ["z_1", "z_2", "z_3"], "terms": [{"exp": [1, 0, 0], "c": "-1"}], "mod": "7^1"},
        {"vars": ["z_1", "z_2", "z_3"], "terms": [], "mod": "7^1"},
    ]});
    std::fs::write(&path, bad.to_string()).unwrap();
    let out = run(&["verify-kz", "--p", "7", "--s", "1", "--g", "1", "--solution", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cartier_on_forms_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("form.json");
    let form = json!({"cutoff": 8, "form": [
        {"vars": ["t_1"], "terms": [{"exp": [2], "c": "1"}], "mod": "3^1"}
    ]});
    std::fs::write(&path, form.to_string()).unwrap();
    let out = run(&["cartier", "--p", "3", "--n", "1", "--iterate", "1", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_eq!(doc["report"]["form"][0]["terms"], json!([{"exp": [0], "c": "1"}]));
    assert_eq!(doc["report"]["certified_degree"], json!(2));

    let witness = json!({"cutoff": 12, "witness":
        {"vars": ["t_1"], "terms": [{"exp": [3], "c": "1"}], "mod": "3^2"}
    });
    std::fs::write(&path, witness.to_string()).unwrap();
    let out = run(&["cartier", "--p", "3", "--s", "1", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_of(&out)["report"]["vanishes"], json!(true));
}

#[test]
fn p_curvature_both_connections() {
    let out = run(&["p-curvature", "--p", "5", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["p-curvature", "--p", "5", "--g", "1", "--connection", "gm", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn local_solve_below_p_is_falsified() {
    let out = run(&["local-solve", "--p", "5", "--s", "1", "--g", "1", "--degree", "10", "--match"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["report"]["lattice"]["rank"], json!(1));
    let out = run(&["local-solve", "--p", "5", "--s", "1", "--g", "1", "--degree", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pairing_and_unit_root() {
    let out = run(&["pairing", "--p", "7", "--s", "1", "--g", "2", "--point", "0,1,2,3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["report"]["pairing"]["matrix"][0][1], json!("-1/2"));
    assert_eq!(doc["report"]["pairing"]["matrix"][1][0], json!("1/2"));
    let out = run(&["unit-root-check", "--p", "7", "--s", "1", "--g", "1", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["cartier-map", "--p", "5", "--s", "2", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0));
}
