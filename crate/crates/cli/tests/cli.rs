use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tropcyl_cli::config::from_json;
use tropcyl_cli::{Config, CylinderSpec};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn tropcyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcyl"))
        .args(args)
        .env_remove("TROPCYL_COLOR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = tropcyl(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8")
}

fn code(args: &[&str]) -> i32 {
    tropcyl(args).status.code().expect("exit code")
}

/// Compares against a frozen golden file; `TROPCYL_BLESS=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var("TROPCYL_BLESS").is_ok_and(|v| v == "1") {
        std::fs::write(&path, actual).expect("write golden");
    }
    let expected = std::fs::read_to_string(&path).expect("golden file exists");
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

#[test]
fn walls_steps_match_the_initial_and_first_rows() {
    let zero = stdout(&["walls", "--steps", "0"]);
    assert_eq!(zero, "(1,0) 0 1\n(0,1) 0 1\n(-1,-1) 0 1\n");
    let one = stdout(&["walls", "--steps", "1"]);
    let steps: Vec<&str> = one.lines().map(|l| l.split(' ').nth(1).unwrap()).collect();
    assert_eq!(steps, ["0", "0", "0", "1", "1", "1"]);
}

#[test]
fn is_wall_queries() {
    let cfg = data("support.json");
    assert_eq!(
        stdout(&["--config", p(&cfg), "walls", "--is-wall", "2,1"]),
        "true\n"
    );
    assert_eq!(
        stdout(&["walls", "--steps", "2", "--is-wall", "1,-2"]),
        "false\n"
    );
    assert_eq!(
        stdout(&["walls", "--steps", "2", "--is-wall", "-2,2"]),
        "true\n"
    );
    assert_eq!(code(&["walls", "--is-wall", "0,0"]), 2);
}

#[test]
fn count_reports_contributing_classes() {
    let one = stdout(&[
        "count",
        "--spec",
        p(&data("single_leaf_cylinder.json")),
        "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&one).unwrap();
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    assert!(classes.iter().all(|c| c["count"] == 1));

    let two = stdout(&["count", "--spec", p(&data("two_leaves.json")), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&two).unwrap();
    assert_eq!(doc["classes"].as_array().unwrap().len(), 4);
}

#[test]
fn count_with_class_reports_splittings() {
    let out = stdout(&["count", "--spec", p(&data("with_class.json")), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["query"]["count"], 1);
    assert_eq!(doc["query"]["splittings"].as_array().unwrap().len(), 1);
    let text = stdout(&["count", "--spec", p(&data("with_class.json"))]);
    assert!(
        text.contains("class (extended) dD=[1,1,0] dE=[[0,0],[0,0],[1,0]] count 1"),
        "{text}"
    );
}

#[test]
fn json_output_round_trips_through_the_parsers() {
    let spec_path = data("with_class.json");
    let original: CylinderSpec =
        serde_json::from_str(&std::fs::read_to_string(&spec_path).unwrap()).unwrap();
    let out = stdout(&["count", "--spec", p(&spec_path), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let echoed: CylinderSpec = serde_json::from_value(doc["spec"].clone()).unwrap();
    assert_eq!(echoed, original);

    let config = Config::default();
    let text = serde_json::to_string(&config).unwrap();
    assert_eq!(from_json::<Config>(&text, "config").unwrap(), config);

    let walls = stdout(&["walls", "--steps", "2", "--json"]);
    let listed: Vec<serde_json::Value> = serde_json::from_str(&walls).unwrap();
    assert_eq!(
        listed.len(),
        stdout(&["walls", "--steps", "2"]).lines().count()
    );
}

#[test]
fn verify_passes_on_specs_and_random_cases() {
    let out = stdout(&["verify", "--spec", p(&data("two_leaves.json"))]);
    assert!(out.contains("induction steps 2: PASS"), "{out}");
    let random = stdout(&["verify", "--seed", "42", "--cases", "100"]);
    assert!(random.ends_with("PASS (100 cases)\n"));
    let skewed = stdout(&[
        "verify",
        "--seed",
        "7",
        "--cases",
        "20",
        "--table",
        p(&data("skewed_table.json")),
    ]);
    assert!(skewed.ends_with("PASS (20 cases)\n"));
    let one_spec = stdout(&[
        "verify",
        "--spec",
        p(&data("single_leaf_cylinder.json")),
        "--table",
        p(&data("skewed_table.json")),
    ]);
    assert!(one_spec.contains("PASS"));
}

#[test]
fn verify_is_deterministic_in_the_seed() {
    let a = stdout(&["verify", "--seed", "3", "--cases", "10", "--json"]);
    let b = stdout(&["verify", "--seed", "3", "--cases", "10", "--json"]);
    assert_eq!(a, b);
    let c = stdout(&["verify", "--seed", "4", "--cases", "10", "--json"]);
    assert_ne!(a, c);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["count", "--spec", p(&data("repeated.json"))]), 3);
    assert_eq!(code(&["count", "--spec", p(&data("out_of_scope.json"))]), 4);
    assert_eq!(code(&["count", "--spec", p(&data("missing.json"))]), 2);
    assert_eq!(code(&["--config", p(&data("bad_model.json")), "walls"]), 2);
    assert_eq!(code(&["walls", "--rule", "nearest"]), 2);
    assert_eq!(
        code(&[
            "render",
            "--target",
            "spiral",
            "--spec",
            p(&data("single_leaf_cylinder.json"))
        ]),
        6
    );
    assert_eq!(
        code(&[
            "render",
            "--target",
            "L_9",
            "--spec",
            p(&data("single_leaf_cylinder.json"))
        ]),
        6
    );
    assert_eq!(code(&["walls", "--steps", "1"]), 0);
}

#[test]
fn diagnostics_go_to_stderr() {
    let out = tropcyl(&["count", "--spec", p(&data("repeated.json"))]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a primitive cylinder"));
    let bad = tropcyl(&["--config", p(&data("bad_model.json")), "walls"]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("model"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let spec = data("single_leaf_cylinder.json");
    for args in [
        vec!["walls"],
        vec!["count", "--spec", p(&spec), "--json"],
        vec!["render", "--steps", "2"],
        vec!["render", "--spec", p(&spec)],
        vec!["render", "--spec", p(&spec), "--target", "N_1"],
    ] {
        let a = tropcyl(&args);
        let b = tropcyl(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn golden_walls_diagram() {
    let svg = stdout(&["render", "--steps", "2"]);
    golden("walls_cubic_steps2.svg", &svg);
    assert_eq!(svg.matches("class=\"wall initial\"").count(), 3);
    assert_eq!(svg.matches("<line ").count(), 12);
}

#[test]
fn golden_cylinder_diagram() {
    let svg = stdout(&[
        "render",
        "--steps",
        "2",
        "--spec",
        p(&data("single_leaf_cylinder.json")),
    ]);
    golden("single_leaf_cylinder.svg", &svg);
    assert_eq!(svg.matches("<path class=\"spine\"").count(), 1);
    assert_eq!(svg.matches("<path class=\"twig\"").count(), 1);
}

#[test]
fn svg_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("walls.svg");
    let listing = stdout(&["walls", "--steps", "2", "--svg", p(&file)]);
    assert_eq!(listing.lines().count(), 12);
    let written = std::fs::read_to_string(&file).unwrap();
    assert_eq!(written, stdout(&["render", "--steps", "2"]));
}

#[test]
fn toric_model_renders_boundary_only() {
    let svg = stdout(&["--config", p(&data("toric.json")), "render"]);
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert!(!svg.contains("<line"));
    assert!(!svg.contains("<path"));
}

#[test]
fn family_targets_render() {
    let spec = data("two_leaves.json");
    for target in ["L_1", "L_2", "L_3", "M_1", "M_2", "N_1", "N_2"] {
        let svg = stdout(&["render", "--spec", p(&spec), "--target", target]);
        assert!(svg.starts_with("<svg"));
    }
    assert_eq!(code(&["render", "--spec", p(&spec), "--target", "M_3"]), 6);
}
