use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anatomy::callgraph::{build_graph, CallGraph};
use anatomy::emit::parse_json;
use anatomy::profile::parse_str;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> PathBuf {
    root().join("data").join(name)
}

fn fixture(name: &str) -> PathBuf {
    root().join("crates/core/tests/fixtures").join(name)
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_anatomy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn godot() -> PathBuf {
    data("godot-scenario.cg")
}

fn urho() -> PathBuf {
    data("urho3d-scenario.cg")
}

#[test]
fn inspect_twelve_line_fixture() {
    let out = run([Path::new("inspect"), &fixture("twelve_line.cg")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("functions: 2, calls: 1, total Ir: 420\n"));
    assert!(stdout(&out).contains("events: Ir\n"));
}

#[test]
fn inspect_empty_profile() {
    let out = run([Path::new("inspect"), &fixture("empty.cg")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("functions: 0"));
}

#[test]
fn inspect_missing_file_names_the_path() {
    let out = run(["inspect", "/no/such/profile.cg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/no/such/profile.cg"));
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cg");
    std::fs::write(&path, "events: Ir\nfn=a\nthis is wrong\n").unwrap();
    let out = run([Path::new("inspect"), &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn garbage_input_never_panics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.cg");
    std::fs::write(&path, [0xff_u8, 0x00, 0x12, b'\n', b'f', b'n', b'=']).unwrap();
    for cmd in ["inspect", "graph", "top"] {
        let out = run([Path::new(cmd), &path]);
        assert_eq!(out.status.code(), Some(2), "{cmd}: {}", stderr(&out));
        assert!(!stderr(&out).contains("panicked"));
    }
}

#[test]
fn graph_class_level_colours_main_and_window() {
    let out = run([
        Path::new("graph"),
        &godot(),
        Path::new("--threshold"),
        Path::new("0"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph callgraph {"));
    let line = |label: &str| {
        dot.lines()
            .find(|l| l.contains(&format!("[label=\"{label}\\n")))
            .unwrap_or_else(|| panic!("no node {label}"))
            .to_string()
    };
    assert!(line("Main").contains("fillcolor=\"orange\""));
    assert!(line("X11Window").contains("fillcolor=\"gray\""));
    assert!(line("ClassDB").contains("fillcolor=\"red\""));
}

#[test]
fn graph_function_level_keeps_every_function() {
    let out = run([
        Path::new("graph"),
        &fixture("twelve_line.cg"),
        Path::new("--level"),
        Path::new("function"),
        Path::new("--threshold"),
        Path::new("0"),
    ]);
    let dot = stdout(&out);
    let nodes = dot
        .lines()
        .filter(|l| l.contains("[label=\"") && !l.contains("->"))
        .count();
    assert_eq!(nodes, 2);
}

#[test]
fn graph_json_round_trips_to_direct_build() {
    let out = run([
        Path::new("graph"),
        &godot(),
        Path::new("--level"),
        Path::new("function"),
        Path::new("--format"),
        Path::new("json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: CallGraph = parse_json(&stdout(&out)).unwrap();
    let direct = build_graph(&parse_str(&std::fs::read_to_string(godot()).unwrap()).unwrap());
    assert_eq!(parsed, direct);
}

#[test]
fn invalid_ruleset_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rules.toml");
    std::fs::write(
        &path,
        "[[rule]]\ncategory = \"x\"\npatterns = [\"(\"]\nis_regex = true\n",
    )
    .unwrap();
    let out = run([Path::new("graph"), &godot(), Path::new("--ruleset"), &path]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_of_range_threshold_exits_3() {
    let out = run([
        Path::new("graph"),
        &godot(),
        Path::new("--threshold"),
        Path::new("1.5"),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn top_lists_costliest_first() {
    let out = run([
        Path::new("top"),
        &fixture("twelve_line.cg"),
        Path::new("-n"),
        Path::new("1"),
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().ends_with("helper [main.c]"));
}

#[test]
fn match_godot_against_reference_architecture() {
    let report = json(&run([
        Path::new("match"),
        &godot(),
        Path::new("--reference"),
        &data("reference-layers.toml"),
        Path::new("--format"),
        Path::new("json"),
    ]));
    assert_eq!(report["kind"], "match-report");
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 12);
    assert!(results.iter().all(|r| r["tier"] != "unmatched"));
    let find = |name: &str| results.iter().find(|r| r["component"] == name).unwrap();
    assert_eq!(find("PhysicsServer")["tier"], "fuzzy");
    assert_eq!(find("PhysicsServer")["matched_label"], "Physics2DServer");
    assert_eq!(find("DisplayServer")["tier"], "method-evidence");
    assert_eq!(find("DisplayServer")["matched_label"], "OS");
}

#[test]
fn match_with_empty_reference_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.toml");
    std::fs::write(&path, "name = \"nothing\"\n").unwrap();
    let report = json(&run([
        Path::new("match"),
        &godot(),
        Path::new("--reference"),
        &path,
        Path::new("--format"),
        Path::new("json"),
    ]));
    assert_eq!(report["results"], Value::Array(vec![]));
}

#[test]
fn match_display_server_alone() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.toml");
    std::fs::write(
        &path,
        "name = \"one\"\n[[component]]\nname = \"DisplayServer\"\nlayer = 2\nknown_methods = [\"get_singleton\", \"has_feature\"]\n",
    )
    .unwrap();
    let out = run([
        Path::new("match"),
        &godot(),
        Path::new("--reference"),
        &path,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(line.starts_with("DisplayServer"));
    assert!(line.contains("method-evidence"));
    assert!(line.contains(" OS "));
}

#[test]
fn malformed_reference_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.toml");
    std::fs::write(&path, "name = [\n").unwrap();
    let out = run([
        Path::new("match"),
        &godot(),
        Path::new("--reference"),
        &path,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_reports_inversion_and_shared_registration() {
    let report = json(&run([
        Path::new("compare"),
        &godot(),
        &urho(),
        Path::new("--format"),
        Path::new("json"),
    ]));
    assert_eq!(report["kind"], "comparison-report");
    assert_eq!(
        report["order_inversions"],
        serde_json::json!([["window-system", "graphics"]])
    );
    let common = report["categories"]["common"].as_array().unwrap();
    assert!(common.contains(&Value::from("class-registration")));
}

#[test]
fn compare_with_itself_has_empty_diff() {
    let report = json(&run([
        Path::new("compare"),
        &godot(),
        &godot(),
        Path::new("--format"),
        Path::new("json"),
    ]));
    assert_eq!(report["order_inversions"], serde_json::json!([]));
    assert_eq!(report["only_left"], serde_json::json!([]));
    assert_eq!(report["only_right"], serde_json::json!([]));
}

#[test]
fn output_is_deterministic() {
    let args = [Path::new("compare"), &godot(), &urho()];
    assert_eq!(run(args).stdout, run(args).stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("anatomy.toml");
    std::fs::write(&cfg, "format = \"json\"\nreference = \"ref.toml\"\n").unwrap();
    std::fs::write(dir.path().join("ref.toml"), "name = \"via config\"\n").unwrap();
    let report = json(&run([
        Path::new("--config"),
        &cfg,
        Path::new("match"),
        &godot(),
    ]));
    assert_eq!(report["reference"], "via config");
    let out = run([
        Path::new("--config"),
        &cfg,
        Path::new("match"),
        &godot(),
        Path::new("--format"),
        Path::new("text"),
    ]);
    assert!(stdout(&out).starts_with("reference: via config\n"));

    std::fs::write(&cfg, "fuzzy_threshold = 2.0\n").unwrap();
    let out = run([
        Path::new("--config"),
        &cfg,
        Path::new("compare"),
        &godot(),
        &urho(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let out = run([Path::new("--config"), &cfg, Path::new("inspect"), &godot()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn includes_on_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let graph = json(&run([
        Path::new("includes"),
        dir.path(),
        Path::new("--format"),
        Path::new("json"),
    ]));
    assert_eq!(graph["nodes"], serde_json::json!([]));
    assert_eq!(graph["edges"], serde_json::json!([]));
}

#[test]
fn includes_tree_lists_cycle_and_directory_edges() {
    let tree = fixture("include_tree");
    let out = run([
        Path::new("includes"),
        &tree,
        Path::new("-I"),
        Path::new("."),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("render/camera.h -> render/renderer.h -> render/viewport.h"));
    let grouped = run([
        Path::new("includes"),
        &tree,
        Path::new("-I"),
        Path::new("."),
        Path::new("--depth"),
        Path::new("1"),
    ]);
    let text = stdout(&grouped);
    assert!(text.contains("render -> core (1)"), "{text}");
    assert!(text.contains(". -> render (1)"), "{text}");
}

#[test]
fn includes_missing_root_exits_2() {
    let out = run(["includes", "/no/such/tree"]);
    assert_eq!(out.status.code(), Some(2));
}
