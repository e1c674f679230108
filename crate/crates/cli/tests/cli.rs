use std::process::Command;

use serde_json::Value;

use plumbing_cli::{graph_to_json, parse_spec, run};
use plumbing_core::calculus::{parse_certificate, replay_records};
use plumbing_core::seifert::{brieskorn, lens_graph, seifert_graph, SeifertData};

const EX62: &str = "seifert(2; 3/1, 3/2, 3/2)";
const WEAK_CHAIN: &str = r#"{"format":"plumbing-v1","vertices":[{"id":"a","weight":-2},{"id":"b","weight":0},{"id":"c","weight":-3}],"edges":[["a","b"],["b","c"]]}"#;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["plumb"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn delta_of_the_six_vertex_example() {
    let v = ok(&["delta", EX62]);
    assert_eq!(v["delta"], "-5/6");
    assert_eq!(v["coefficient"], "1/2");
    let (_, out, _) = call(&["delta", EX62]);
    assert!(out.starts_with(r#"{"delta":"-5/6","#));
}

#[test]
fn dinv_of_e8() {
    let (code, out, _) = call(&["dinv", "brieskorn(2,3,5)"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r#"{"d":"2"}"#);
}

#[test]
fn check_weak_chain() {
    let (code, out, _) = call(&["check", WEAK_CHAIN]);
    assert_eq!(code, 0);
    assert!(out.starts_with(r#"{"negative_definite":false,"weakly_negative_definite":true"#));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["det"], "5");
    assert_eq!(v["order_h"], "5");
}

#[test]
fn invariants_and_spinc() {
    let v = ok(&["invariants", EX62]);
    assert_eq!(v["gamma"], "16/3");
    assert_eq!(v["s"], 6);
    let v = ok(&["spinc", EX62]);
    assert_eq!(v["classes"].as_array().unwrap().len(), 9);
    assert_eq!(v["classes"].as_array().unwrap().iter().filter(|c| c["canonical"] == true).count(), 1);
    let v = ok(&["invariants", WEAK_CHAIN]);
    assert_eq!(v["gamma"], Value::Null);
}

#[test]
fn zhat_series_output() {
    let v = ok(&["zhat", EX62]);
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
    assert_eq!(v["terms"][0]["exponent"], "-5/6");
    assert_eq!(v["terms"][0]["coefficient"], "1/2");
    let v = ok(&["zhat", "lens(2,1)", "--spinc", "all", "--level", "5"]);
    let res = v["results"].as_array().unwrap();
    assert_eq!(res.len(), 2);
    let v = ok(&["zhat", "lens(2,1)", "--spinc", "0"]);
    assert_eq!(v["terms"][0]["exponent"], "-1/4");
    assert_eq!(v["terms"][0]["coefficient"], "-2");
}

#[test]
fn explicit_spinc_vectors_use_input_order() {
    // canonical vector in input order: node first
    let v = ok(&["delta", EX62, "--spinc", "-1,1,0,1,0,1"]);
    assert_eq!(v["delta"], "-5/6");
    let (code, _, err) = call(&["delta", EX62, "--spinc", "1,1,1,0,0,-1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn delta_all_on_lens_space() {
    let v = ok(&["delta", "lens(5,2)", "--spinc", "all"]);
    let res = v["results"].as_array().unwrap();
    assert_eq!(res.len(), 5);
    let finite = res.iter().filter(|r| !r["delta"].is_null()).count();
    assert_eq!(finite, 4);
    let vanished = res.iter().find(|r| r["delta"].is_null()).unwrap();
    assert_eq!(vanished["no_surviving_shell_up_to_norm"], v["cap"]);
}

#[test]
fn splice_and_hshape() {
    let v = ok(&["splice", "brieskorn(2,3,5)"]);
    let mut w: Vec<String> = v["weights"].as_array().unwrap().iter().map(|x| x["weight"].as_str().unwrap().to_string()).collect();
    w.sort();
    assert_eq!(w, ["2", "3", "5"]);
    let h = r#"{"format":"plumbing-v1","vertices":[{"id":"n","weight":-2},{"id":"m","weight":-2},{"id":"a","weight":-2},{"id":"b","weight":-3},{"id":"c","weight":-2},{"id":"d","weight":-5},{"id":"x","weight":-3}],"edges":[["n","a"],["n","b"],["n","x"],["x","m"],["m","c"],["m","d"]]}"#;
    let v = ok(&["hshape-min", h]);
    assert_eq!(v["minimum"], v["exact_minimum"]);
    let (code, _, err) = call(&["hshape-min", EX62]);
    assert_eq!(code, 2);
    assert!(err.contains("\"error\""));
}

#[test]
fn normalize_writes_a_replayable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.txt");
    let v = ok(&["normalize", WEAK_CHAIN, "-o", path.to_str().unwrap()]);
    assert_eq!(v["moves"], 1);
    let out = parse_spec(&v["graph"].to_string()).unwrap();
    assert_eq!(out.weights(), &[-5]);
    let cert = std::fs::read_to_string(&path).unwrap();
    let records = parse_certificate(&cert).unwrap();
    let replayed = replay_records(&parse_spec(WEAK_CHAIN).unwrap(), &records).unwrap();
    assert_eq!(replayed.labeled_hash(), out.labeled_hash());
}

#[test]
fn conjecture_and_survey() {
    let v = ok(&["conjecture", "brieskorn(2,3,5)"]);
    assert_eq!(v["holds"], true);
    assert_eq!(v["min_delta"], "-3/2");
    assert_eq!(v["bound"], "-3/2");

    let v = ok(&["survey", "--family", "brieskorn-pp1", "--params", "p=2..5"]);
    let rows = v["rows"].as_array().unwrap();
    let d: Vec<&str> = rows.iter().map(|r| r["d_can"].as_str().unwrap()).collect();
    assert_eq!(d, ["2", "2", "6", "6"]);
    assert!(rows.iter().all(|r| r["residual"] == "0"));
    let v = ok(&["survey", "--family", "brieskorn-23r", "--params", "r=1..4"]);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["delta_can"] == "-3/2"));
}

#[test]
fn error_codes() {
    let (code, _, err) = call(&["delta", "lens(4,2)"]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(e["error"]["kind"], "validation");

    let (code, _, err) = call(&["check", "seifert(2; 3/1,\n 3-2)"]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(e["error"]["kind"], "parse");
    assert_eq!(e["error"]["line"], 2);
    assert_eq!(e["error"]["column"], 3);

    let cycle = r#"{"format":"plumbing-v1","vertices":[{"id":"a","weight":-2},{"id":"b","weight":-2}],"edges":[["a","b"],["b","a"]]}"#;
    assert_eq!(call(&["check", cycle]).0, 2);
    assert_eq!(call(&["delta", WEAK_CHAIN]).0, 2);
    assert_eq!(call(&["nonsense"]).0, 2);
    assert_eq!(call(&["delta", EX62, "--cap", "x"]).0, 2);
    assert_eq!(call(&["survey", "--family", "torus", "--params", "p=2"]).0, 2);
}

#[test]
fn generated_graphs_round_trip() {
    let mut graphs = vec![
        seifert_graph(&brieskorn(&[2, 3, 5]).unwrap()).unwrap(),
        seifert_graph(&SeifertData::new(3, vec![(2, 1), (5, 2), (7, 3), (4, 1)]).unwrap()).unwrap(),
    ];
    for p in 2..=9 {
        for r in 1..p {
            if let Ok(g) = lens_graph(p, r) {
                graphs.push(g);
            }
        }
    }
    for g in graphs {
        let h = parse_spec(&graph_to_json(&g)).unwrap();
        assert_eq!(h.canonical_hash(), g.canonical_hash());
        assert_eq!(h.labeled_hash(), g.labeled_hash());
    }
}

#[test]
fn output_is_identical_across_runs_and_worker_counts() {
    let bin = env!("CARGO_BIN_EXE_plumb");
    let cases: Vec<Vec<&str>> = vec![
        vec!["delta", "lens(7,3)", "--spinc", "all"],
        vec!["survey", "--family", "brieskorn-pq1", "--params", "p=2..3,q=3..5"],
        vec!["zhat", EX62, "--spinc", "all"],
        vec!["conjecture", EX62],
    ];
    for args in cases {
        let outputs: Vec<Vec<u8>> = ["1", "4", "1", "4"]
            .iter()
            .map(|t| {
                let o = Command::new(bin).args(&args).args(["--threads", t]).output().unwrap();
                assert!(o.status.success(), "{args:?}");
                o.stdout
            })
            .collect();
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn reads_files_and_reports_exit_codes_from_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, WEAK_CHAIN).unwrap();
    let bin = env!("CARGO_BIN_EXE_plumb");
    let o = Command::new(bin).args(["check", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(bin).args(["delta", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(e["error"]["message"].as_str().unwrap().contains("negative definite"));
}
