use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clearpack::oracle::DEFAULT_CAP;
use clearpack::rational::qi;
use clearpack::{disjunction_oracle, Clearance, Instance, ObjectSpec, OracleResult, Region};
use serde_json::Value;
use tempfile::TempDir;

fn clearpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clearpack")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn toy() -> Instance {
    let objects = vec![
        ObjectSpec::new(1, qi(4), qi(3), Clearance::new(qi(0), qi(0), qi(1), qi(0))),
        ObjectSpec::new(2, qi(3), qi(3), Clearance::zero()),
        ObjectSpec::new(3, qi(5), qi(2), Clearance::new(qi(0), qi(1), qi(0), qi(0))),
    ];
    Instance::new(Region { w: qi(8), h: qi(20) }, objects).unwrap()
}

fn write_toy(dir: &TempDir) -> PathBuf {
    let path = p(dir, "toy.json");
    std::fs::write(&path, toy().to_json()).unwrap();
    path
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    let o = clearpack(&["generate", "-n", "10", "--seed", "7", "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("10 objects"));
    clearpack(&["generate", "-n", "10", "--seed", "7", "--out", s(&b)]);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let inst = Instance::from_json(std::str::from_utf8(&ta).unwrap()).unwrap();
    assert_eq!(inst.len(), 10);
    assert_eq!(inst.region().w, qi(100));
}

#[test]
fn generate_rejects_zero_objects() {
    let dir = TempDir::new().unwrap();
    let o = clearpack(&["generate", "-n", "0", "--out", s(&p(&dir, "x.json"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid argument"));
}

#[test]
fn solve_matches_oracle_and_renders() {
    let dir = TempDir::new().unwrap();
    let inst = write_toy(&dir);
    let OracleResult::Optimal(h) = disjunction_oracle(&toy(), DEFAULT_CAP).unwrap() else { panic!("toy is feasible") };
    let svg = p(&dir, "toy.svg");
    for kind in ["su", "ru", "sbl", "sbm"] {
        let o = clearpack(&["solve", "-i", s(&inst), "-f", kind, "--render", s(&svg)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = json(&o);
        assert_eq!(r["status"], "optimal");
        assert_eq!(r["height"], h.to_string(), "{kind}");
        assert_eq!(r["layout_valid"], true);
    }
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="object""#).count(), 3);
    assert_eq!(text.matches(r#"class="clearance""#).count(), 2);
}

#[test]
fn solve_options_reach_the_model() {
    let dir = TempDir::new().unwrap();
    let inst = write_toy(&dir);
    let (lp, log, out) = (p(&dir, "m.lp"), p(&dir, "log.jsonl"), p(&dir, "r.json"));
    let o = clearpack(&[
        "solve", "-i", s(&inst), "-f", "sbl", "--seq", "--branch", "--write-lp", s(&lp), "--log", s(&log), "-o", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("spb_1_2_3_0_lo"));
    assert!(text.contains("\\ priority"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["options"]["sequence_pair"], true);
    assert_eq!(r["options"]["branch_priorities"], true);
    let lines = std::fs::read_to_string(&log).unwrap();
    assert!(lines.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));
    assert!(lines.lines().count() >= 1);
}

#[test]
fn node_limit_is_reported_not_fatal() {
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "g.json");
    clearpack(&["generate", "-n", "6", "--seed", "3", "--out", s(&inst)]);
    let o = clearpack(&["solve", "-i", s(&inst), "-f", "su", "--node-limit", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!(r["status"] == "node_limit_reached" || r["status"] == "optimal");
    let h: clearpack::Rational = r["height"].as_str().unwrap().parse().unwrap();
    let g: clearpack::Rational = r["greedy_height"].as_str().unwrap().parse().unwrap();
    assert!(h <= g);
}

#[test]
fn theorem3_sbl_witness() {
    let o = clearpack(&["check-ideal", "--kind", "sbl", "--theorem3"]);
    assert_eq!(code(&o), 2);
    let r = json(&o);
    assert_eq!(r["verdict"], "fractional_vertex_found");
    let point: Vec<&str> = r["witness"]["point"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(point, ["9", "1", "9", "1", "1/2", "1/2"]);
    assert_eq!(r["witness"]["penalty"], "2");
}

#[test]
fn theorem3_unary_is_ideal() {
    for kind in ["su", "ru", "sbm"] {
        let o = clearpack(&["check-ideal", "--kind", kind, "--theorem3"]);
        assert_eq!(code(&o), 0, "{kind}");
        assert_eq!(json(&o)["verdict"], "ideal");
    }
}

#[test]
fn su_campaign_has_no_witness() {
    let o = clearpack(&["check-ideal", "--kind", "su", "--campaign", "500", "--eps", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["samples"], 500);
    assert_eq!(r["fractional"], 0);
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 0);
}

#[test]
fn iom_mode() {
    let o = clearpack(&["check-ideal", "--kind", "sbm", "--mode", "iom", "--theorem3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["value"], "0");
    let o = clearpack(&["check-ideal", "--kind", "sbl", "--mode", "iom", "--theorem3"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["value"], "2");
}

#[test]
fn check_ideal_on_instance_pair_and_params_file() {
    let dir = TempDir::new().unwrap();
    let inst = write_toy(&dir);
    // objects 1 and 3 do not fit side by side in the 8-wide strip
    let o = clearpack(&["check-ideal", "--kind", "ru", "-i", s(&inst), "--pair", "1,3"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("13x, 31x"), "{}", String::from_utf8_lossy(&o.stderr));
    let wide = p(&dir, "wide.json");
    let objects = toy().objects().to_vec();
    std::fs::write(&wide, Instance::new(Region { w: qi(30), h: qi(30) }, objects).unwrap().to_json()).unwrap();
    for kind in ["su", "ru", "sbm"] {
        let o = clearpack(&["check-ideal", "--kind", kind, "-i", s(&wide), "--pair", "1,3"]);
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["verdict"], "ideal");
    }
    let o = clearpack(&["check-ideal", "-i", s(&wide), "--pair", "1"]);
    assert_eq!(code(&o), 1);
    // a window-inconsistent draw where RU has a fractional vertex
    let params = p(&dir, "params.json");
    std::fs::write(
        &params,
        r#"{"lb": [["1/2", "3"], ["7/4", "9/2"]], "ub": [["19/4", "6"], ["9/4", "8"]],
            "pm": [[["0", "0"], ["3/4", "2"]], [["2", "1/2"], ["0", "0"]]]}"#,
    )
    .unwrap();
    let o = clearpack(&["check-ideal", "--kind", "ru", "--params", s(&params)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let o = clearpack(&["check-ideal", "--kind", "ru"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn reports_are_reproducible() {
    let a = clearpack(&["check-ideal", "--kind", "ru", "--campaign", "20", "--seed", "4", "--window-consistent", "false"]);
    let b = clearpack(&["check-ideal", "--kind", "ru", "--campaign", "20", "--seed", "4", "--window-consistent", "false"]);
    let (mut ja, mut jb) = (json(&a), json(&b));
    assert_eq!(code(&a), code(&b));
    ja["seconds"] = Value::Null;
    jb["seconds"] = Value::Null;
    assert_eq!(ja, jb);
    assert_eq!(ja["config"]["window_consistent"], false);
}

#[test]
fn verify_lemmas_per_formulation() {
    let o = clearpack(&["verify-lemmas", "--kind", "su", "--draws", "30"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["families"]["su-inactive-term"]["covers"], 4);
    assert_eq!(r["families"]["su-inactive-term"]["certified"], 120);
    for kind in ["ru", "sbm"] {
        let o = clearpack(&["verify-lemmas", "--kind", kind, "--draws", "30", "--with-optional"]);
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let r = json(&o);
        assert_eq!(r["ok"], true);
        assert!(r["families"].as_object().unwrap().values().any(|f| f["flagged"].as_u64().unwrap() > 0));
    }
    assert_eq!(code(&clearpack(&["verify-lemmas", "--kind", "sbl"])), 1);
}

#[test]
fn oracle_compare_small() {
    let o = clearpack(&["oracle-compare", "-n", "3", "--count", "2", "--seed", "11"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json(&o);
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!(rows.as_array().unwrap().iter().all(|r| r["agree"] == true));
}

#[test]
fn render_from_solve_result() {
    let dir = TempDir::new().unwrap();
    let inst = write_toy(&dir);
    let (res, svg) = (p(&dir, "r.json"), p(&dir, "r.svg"));
    clearpack(&["solve", "-i", s(&inst), "-f", "su", "-o", s(&res)]);
    let o = clearpack(&["render", "-i", s(&inst), "-s", s(&res), "-o", s(&svg), "--scale", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    // 8 units at 10 px plus padding
    assert!(text.contains(r#"width="100.000""#));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).filter(|e| e.file_name().to_string_lossy().contains(".tmp")).collect();
    assert!(leftovers.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "cfg.json");
    let out = p(&dir, "inst.json");
    std::fs::write(&cfg, format!(r#"{{"command": "generate", "seed": 7, "out": "{}"}}"#, s(&out))).unwrap();
    assert_eq!(code(&clearpack(&["generate", "--config", s(&cfg), "-n", "4"])), 0);
    let from_file = std::fs::read(&out).unwrap();
    assert_eq!(code(&clearpack(&["generate", "--config", s(&cfg), "-n", "4", "--seed", "8"])), 0);
    assert_ne!(std::fs::read(&out).unwrap(), from_file);
    // a config written for another command is refused
    assert_eq!(code(&clearpack(&["solve", "--config", s(&cfg)])), 1);
}
