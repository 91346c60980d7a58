use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_pathrisk");
const LINES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/asipath_v1_lines.risk");
const MEASURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/asipath_v1_measures.risk");

fn pathrisk(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PATHRISK_MODEL").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_model(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("m.risk");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn quantify_bundled_file() {
    let o = pathrisk(&["quantify", LINES, "--decisions", "review_boards"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["topProbability"].as_f64().unwrap() > 0.0);
    assert_eq!(v["placeholderParameters"], true);
}

#[test]
fn cutsets_on_not_gate_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(&dir, "model \"n\"\nevent a { p = 0.1 }\nevent b { p = 0.2 }\ngate na = NOT(a)\ngate t = AND(na, b)\ntop = t\n");
    let o = pathrisk(&["cutsets", &m]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NONCOHERENT_MODEL"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn mc_is_byte_identical() {
    let args = ["mc", MEASURES, "--samples", "1000", "--seed", "42"];
    let (a, b) = (pathrisk(&args), pathrisk(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let other = pathrisk(&["mc", MEASURES, "--samples", "1000", "--seed", "42", "--stream", "1"]);
    assert_ne!(a.stdout, other.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["samples"], 1000);
    assert_eq!(v["seed"]["seed"], 42);
}

#[test]
fn model_from_environment() {
    let o = Command::new(BIN).args(["quantify"]).env("PATHRISK_MODEL", LINES).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = pathrisk(&["quantify"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(&dir, "model \"bad\"\nevent a { p = }\ntop = a\n");
    let o = pathrisk(&["quantify", &m]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("m.risk:2:"), "{}", stderr(&o));
}

#[test]
fn validate_reports() {
    let o = pathrisk(&["validate", LINES]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["diagnostics"].as_array().unwrap().len(), 0);

    let dir = tempfile::tempdir().unwrap();
    let m = write_model(&dir, "model \"v\"\nevent a { p = 1.5 }\ntop = missing\n");
    let o = pathrisk(&["validate", &m]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let codes: Vec<&str> = v["diagnostics"].as_array().unwrap().iter().map(|d| d["code"].as_str().unwrap()).collect();
    assert!(codes.contains(&"INVALID_PROBABILITY"), "{codes:?}");
}

#[test]
fn missing_file_exit_1() {
    let o = pathrisk(&["quantify", "/no/such/model.risk"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/model.risk"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pathrisk(&[]).status.code(), Some(2));
    assert_eq!(pathrisk(&["quantify", LINES, "--samples", "x"]).status.code(), Some(2));
    assert_eq!(pathrisk(&["mc", LINES, "--samples", "1"]).status.code(), Some(2));
    let o = pathrisk(&["quantify", LINES, "--set", "not_deterred=7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("INVALID_PROBABILITY"));
}

#[test]
fn render_and_expand() {
    let o = pathrisk(&["render", LINES]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph \"asipath_v1_lines\" {"));
    assert_eq!(dot, stdout(&pathrisk(&["expand", LINES, "--format", "dot"])));
    let o = pathrisk(&["render", LINES, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dot"].as_str().unwrap(), dot);
}

#[test]
fn cutsets_with_fixed_weights() {
    let o = pathrisk(&["cutsets", MEASURES]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UNRESOLVED_ANDOR"));
    let o = pathrisk(&["cutsets", MEASURES, "--gate-weight", "human_attempts_fail=0", "--gate-weight", "seed_ai_measures_fail=1", "--max-order", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn whatif_report() {
    let o = pathrisk(&["whatif", LINES]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let deltas = v["deltas"].as_array().unwrap();
    assert_eq!(deltas.len(), 5);
    assert!(deltas.iter().all(|d| d["delta"].as_f64().unwrap() >= 0.0));
    assert_eq!(v["portfolios"]["entries"].as_array().unwrap().len(), 32);
    assert_eq!(v["placeholderParameters"], true);
}

#[test]
fn serve_answers_over_tcp() {
    let mut child = Command::new(BIN)
        .args(["serve", LINES, "--port", "0"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut banner = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut banner).unwrap();
    let addr = banner.trim().rsplit("http://").next().unwrap().to_string();

    let mut s = TcpStream::connect(&addr).unwrap();
    write!(s, "GET /api/model HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.to_ascii_lowercase().contains("content-type: application/json"));
    assert!(resp.contains("\"decisions\""));
}
