use std::fs;
use std::process::Command;

fn fmatch() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fmatch"))
}

#[test]
fn gen_eg_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("eg4.fg");
    let st = fmatch().args(["gen-eg", "4", "-o"]).arg(&g).status().unwrap();
    assert!(st.success());
    assert!(dir.path().join("eg4.m0").is_file());
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("eg4.json")).unwrap()).unwrap();
    assert_eq!(side["expected_s"], 17);
    assert_eq!(side["expected_trails"].as_array().unwrap().len(), 4);

    let stats = dir.path().join("stats.json");
    let out = fmatch().arg("solve").arg(&g).arg("--certify").arg("--stats").arg(&stats).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["stats"]["phase_count"], 1);
    assert_eq!(v["stats"]["phases"][0]["s"], 17);
    assert_eq!(v["certificate"]["exhausted"], true);

    let levels = dir.path().join("levels.json");
    assert!(fmatch().arg("trace").arg(&g).arg("--levels").arg(&levels).status().unwrap().success());
    let lv: serde_json::Value = serde_json::from_str(&fs::read_to_string(&levels).unwrap()).unwrap();
    assert_eq!(lv[0]["level_graph"]["layers"].as_array().unwrap().len(), 18);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tri.fg");
    fs::write(&g, "p fgraph 3 3\ne 0 1\ne 1 2\ne 2 0\n").unwrap();
    let ok = dir.path().join("ok.txt");
    let bad = dir.path().join("bad.txt");
    fs::write(&ok, "0\n").unwrap();
    fs::write(&bad, "0\n1\n").unwrap();
    assert!(fmatch().arg("verify").arg(&g).arg(&ok).status().unwrap().success());
    assert_eq!(fmatch().arg("verify").arg(&g).arg(&bad).status().unwrap().code(), Some(1));
    let out = fmatch().arg("oracle").arg(&g).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("brute 1 solver 1"));
    assert_eq!(fmatch().arg("oracle").arg(&g).args(["--method", "flow"]).status().unwrap().code(), Some(2));
}

#[test]
fn solve_writes_matching_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("p.fg");
    fs::write(&g, "p fgraph 4 3\nf 1 2\ne 0 1\ne 1 2\ne 2 3\n").unwrap();
    let m = dir.path().join("m.txt");
    let tr = dir.path().join("trace.json");
    let st = fmatch().arg("solve").arg(&g).arg("--matching").arg(&m).arg("--trace-search").arg(&tr).status().unwrap();
    assert!(st.success());
    assert!(fmatch().arg("verify").arg(&g).arg(&m).status().unwrap().success());
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tr).unwrap()).unwrap();
    assert!(t.as_array().unwrap().iter().any(|e| e["kind"] == "augment"));
}

#[test]
fn bench_csv() {
    let out = fmatch().args(["bench", "--family", "random-simple", "--n", "64..256", "--seed", "7"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,m,seed,f_total,phases,bound_4n23,bound_2sqrtf,max_s");
    assert_eq!(lines.count(), 3);
}

#[test]
fn parse_error_exit() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.fg");
    fs::write(&g, "p fgraph 2 1\ne 0 9\n").unwrap();
    let out = fmatch().arg("solve").arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
