use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lolacheck"))
}

fn spec(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/specs").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p.display().to_string()
}

#[test]
fn corpus_checks() {
    for name in ["intruder", "waypoint", "watchdog", "rcc", "ffd", "geofence"] {
        let o = run(&["check", spec(&format!("corpus/{name}.lola")).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", text(&o.stderr));
    }
}

#[test]
fn timing_lists_every_phase() {
    let o = run(&["check", "--timing", spec("corpus/geofence.lola").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = text(&o.stdout);
    for phase in ["parse", "desugar", "value types", "pacing types", "semantic types", "well-formedness", "total"] {
        assert!(out.lines().any(|l| l.starts_with(phase) && l.ends_with(" ms")), "missing {phase}: {out}");
    }
}

#[test]
fn motivating_example_is_rejected_at_the_average_access() {
    let o = run(&["check", spec("rejected/drone_intruder.lola").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("avg_distance"), "{err}");
    assert!(err.contains("drone_intruder.lola:16:"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    assert_eq!(code(&run(&["check", "/nonexistent/spec.lola"])), 2);
}

#[test]
fn monitor_watchdog() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "t.csv", "time,ping,pong\n0,1,\n30,,1\n");
    let o = run(&[
        "monitor",
        spec("corpus/watchdog.lola").to_str().unwrap(),
        &trace,
        "--dump",
        "--end-time",
        "60",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert_eq!(text(&o.stdout), "time,stream,params,value\n30,pong_of_node,[1],true\n60,is_alive,[1],true\n");
}

#[test]
fn monitor_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.lola", "input x: Int64\ntrigger x > 2 \"big\"");
    let trace = write(dir.path(), "t.csv", "time,x\n0,1\n1.5,5\n");
    let out = dir.path().join("r.json");
    let o = run(&["monitor", &s, &trace, "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v, serde_json::json!([{"time": "1.5", "stream": "trigger_0", "params": [], "value": "big"}]));
}

#[test]
fn empty_trace_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "t.csv", "time,ping,pong\n");
    let o = run(&["monitor", spec("corpus/watchdog.lola").to_str().unwrap(), &trace]);
    assert_eq!(code(&o), 0);
    assert_eq!(text(&o.stdout), "time,stream,params,value\n");
}

#[test]
fn bypassed_checks_surface_runtime_faults() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec("rejected/event_reads_periodic.lola");
    let trace = write(dir.path(), "t.csv", "time,a\n0.5,1\n");
    assert_eq!(code(&run(&["monitor", s.to_str().unwrap(), &trace])), 1);
    let o = run(&["monitor", s.to_str().unwrap(), &trace, "--bypass-checks"]);
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("synchronous access failed"), "{}", text(&o.stderr));
}

#[test]
fn bad_trace_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "t.csv", "time,ping,pong\n3,1,\n2,1,\n");
    let o = run(&["monitor", spec("corpus/watchdog.lola").to_str().unwrap(), &trace]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_kinds() {
    for (kind, n) in [("sync", "100"), ("conjunct", "3"), ("param", "1")] {
        let o = run(&["bench", kind, n, "--reps", "3"]);
        assert_eq!(code(&o), 0, "{kind}: {}", text(&o.stderr));
        let out = text(&o.stdout);
        assert!(out.starts_with(&format!("{kind} n={n}: accepted, median ")), "{out}");
    }
}

#[test]
fn bench_emits_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.lola");
    assert_eq!(code(&run(&["bench", "sync", "3", "--reps", "1", "--emit", p.to_str().unwrap()])), 0);
    let emitted = fs::read_to_string(&p).unwrap();
    assert!(emitted.contains("output s3 := bench"));
    assert_eq!(code(&run(&["check", p.to_str().unwrap()])), 0);
}

#[test]
fn graph_of_waypoint() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = run(&["graph", spec("corpus/waypoint.lola").to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let g = fs::read_to_string(dot).unwrap();
    assert!(g.starts_with("digraph"));
    assert_eq!(g.matches("ellipse").count(), 3, "{g}");
    assert!(g.contains("Close/"), "{g}");
}

#[test]
fn graph_of_inputs_only() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.lola", "input a: Int64\ninput b: Bool");
    let dot = dir.path().join("g.dot");
    assert_eq!(code(&run(&["graph", &s, "--dot", dot.to_str().unwrap()])), 0);
    let g = fs::read_to_string(dot).unwrap();
    assert_eq!(g.matches("box").count(), 2);
    assert!(!g.contains("->"));
}

#[test]
fn graph_of_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.lola", "output := (");
    assert_eq!(code(&run(&["graph", &s, "--dot", dir.path().join("g.dot").to_str().unwrap()])), 1);
}
