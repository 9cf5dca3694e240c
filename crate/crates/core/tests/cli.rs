use std::fs;
use std::path::Path;

use lenslab::cli::{run, EXIT_BAD_INPUT, EXIT_DISTINGUISHABLE, EXIT_EXPECTED_EQUAL};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lenslab(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("lenslab").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn sphere_json(r: f64, dim: usize) -> String {
    let c = if dim == 2 { "[0,0]" } else { "[0,0,0]" };
    format!(r#"{{"name":"sphere","dimension":{dim},"ball_radius":10,"obstacles":[{{"kind":"sphere","center":{c},"params":{{"radius":{r}}}}}]}}"#)
}

const EMPTY: &str = r#"{"name":"empty","dimension":2,"ball_radius":10,"obstacles":[]}"#;

#[test]
fn trace_of_a_diameter_in_the_empty_scene() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "empty.json", EMPTY);
    let o = lenslab(&["trace", "--scene", &scene, "--entry", "10,0,-1,0"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let header: Value = serde_json::from_str(o.stdout.lines().next().unwrap()).unwrap();
    assert_eq!(header["status"], "exited");
    assert_eq!(header["total_time"].as_f64().unwrap(), 20.0);
    assert_eq!(header["command"], "trace");
    assert_eq!(header["invocation"], format!("trace --scene {scene} --entry 10,0,-1,0"));
    // intrinsic entry coordinates give the same orbit
    let o2 = lenslab(&["trace", "--scene", &scene, "--entry", "0,0"]);
    let h2: Value = serde_json::from_str(o2.stdout.lines().next().unwrap()).unwrap();
    assert_eq!(h2["total_time"], header["total_time"]);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "empty.json", EMPTY);
    let broken = write(dir.path(), "broken.json", "{\"name\":");
    assert_eq!(lenslab(&["trace", "--scene", &scene, "--entry", "1,2,3"]).code, EXIT_BAD_INPUT);
    assert_eq!(lenslab(&["trace", "--scene", &scene, "--entry", "20,0,-1,0"]).code, EXIT_BAD_INPUT);
    assert_eq!(lenslab(&["trace", "--scene", &broken, "--entry", "0,0"]).code, EXIT_BAD_INPUT);
    assert_eq!(lenslab(&["lens", "--scene", &scene, "--spec", "grid:3"]).code, EXIT_BAD_INPUT);
    assert_eq!(lenslab(&["lens", "--scene", "/nonexistent/scene.json", "--spec", "mc:3"]).code, EXIT_BAD_INPUT);
    assert_eq!(lenslab(&["frobnicate"]).code, EXIT_BAD_INPUT);
    let o = lenslab(&["trapped", "--scene", &scene, "--spec", "grid:4x4,grid:2x2,grid:8x8"]);
    assert_eq!(o.code, EXIT_BAD_INPUT);
    assert!(o.stderr.starts_with("error:"));
}

#[test]
fn validate_rejects_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", &sphere_json(1.0, 3));
    let o = lenslab(&["validate", "--scene", &good]);
    assert_eq!(o.code, 0);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["report"]["passed"], true);
    let overlap = r#"{"name":"overlap","dimension":2,"ball_radius":10,"obstacles":[
        {"kind":"sphere","center":[0,0],"params":{"radius":1}},
        {"kind":"sphere","center":[1.5,0],"params":{"radius":1}}]}"#;
    let bad = write(dir.path(), "overlap.json", overlap);
    let o = lenslab(&["validate", "--scene", &bad]);
    assert_eq!(o.code, EXIT_BAD_INPUT);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["report"]["passed"], false);
}

#[test]
fn lens_tables_compare() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "k.json", &sphere_json(1.0, 2));
    let l = write(dir.path(), "l.json", &sphere_json(1.01, 2));
    let (tk, tl) = (dir.path().join("k.jsonl"), dir.path().join("l.jsonl"));
    let (tk, tl) = (tk.to_str().unwrap(), tl.to_str().unwrap());
    assert_eq!(lenslab(&["lens", "--scene", &k, "--spec", "grid:16x41", "--out", tk]).code, 0);
    assert_eq!(lenslab(&["lens", "--scene", &l, "--spec", "grid:16x41", "--out", tl]).code, 0);

    let same = lenslab(&["compare", tk, tk]);
    assert_eq!(same.code, 0);
    let doc: Value = serde_json::from_str(&same.stdout).unwrap();
    assert_eq!(doc["report"]["verdict"], "indistinguishable");
    assert_eq!(doc["report"]["max_abs_dt"].as_f64().unwrap(), 0.0);

    let diff = lenslab(&["compare", tk, tl]);
    assert_eq!(diff.code, EXIT_DISTINGUISHABLE);
    let doc: Value = serde_json::from_str(&diff.stdout).unwrap();
    assert!(doc["report"]["max_abs_dt"].as_f64().unwrap() >= 0.019);
    assert_eq!(lenslab(&["compare", tk, tl, "--expect-equal"]).code, EXIT_EXPECTED_EQUAL);
    assert_eq!(lenslab(&["compare", tk, tl, "--tol", "1"]).code, 0);
    // scenes can be compared directly, which adds the boundary distance
    let o = lenslab(&["compare", "--scene", &k, "--scene-b", &l, "--spec", "grid:16x41"]);
    assert_eq!(o.code, EXIT_DISTINGUISHABLE);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((doc["boundary_distance"].as_f64().unwrap() - 0.01).abs() < 1e-3);
}

#[test]
fn livshits_scenes_are_indistinguishable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lenslab(&["livshits", "--out", out]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let foci: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("livshits-foci.json")).unwrap()).unwrap();
    assert_eq!(foci["deformation"].as_f64().unwrap(), 0.5);
    let base = dir.path().join("livshits.json");
    let deformed = dir.path().join("livshits-deformed.json");
    let (base, deformed) = (base.to_str().unwrap(), deformed.to_str().unwrap());
    assert_eq!(lenslab(&["validate", "--scene", base]).code, 0);
    assert_eq!(lenslab(&["validate", "--scene", deformed]).code, 0);
    let o = lenslab(&["compare", "--scene", base, "--scene-b", deformed, "--spec", "grid:32x32", "--expect-equal"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((doc["boundary_distance"].as_f64().unwrap() - 0.5).abs() < 0.1);
    assert_ne!(doc["header"]["scene_hash"], doc["header"]["scene_hash_b"]);
}

#[test]
fn csv_and_svg_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "s.json", &sphere_json(2.0, 2));
    let csv = dir.path().join("t.csv");
    assert_eq!(lenslab(&["lens", "--scene", &scene, "--spec", "grid:4x5", "--out", csv.to_str().unwrap()]).code, 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["spec"], "grid:4x5");
    assert_eq!(lines.next().unwrap(), "index,phi,psi,status,t,reflections,theta_0,theta_1,sojourn");
    assert_eq!(lines.count(), 20);

    let svg = dir.path().join("r.svg");
    let o = lenslab(&["trace", "--scene", &scene, "--entry", "0.3,0.1", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.contains("obstacle-0") && text.contains("ray-0-0"));
    let o = lenslab(&["render", "--scene", &scene]);
    assert!(o.stdout.contains("<path id=\"obstacle-0\""));
}

#[test]
fn variation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "s.json", &sphere_json(1.0, 3));
    let o = lenslab(&["regularity", "--scene", &scene, "--entry", "0.2,0.3,0.05,0.1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["regularity"]["regular"], true);
    let o = lenslab(&["conjugate", "--scene", &scene, "--entry", "-9,0.3,0,1,0,0"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["events"], 1);
    assert_eq!(doc["any_conjugate"], false);
    let o = lenslab(&["sls", "--scene", &scene, "--omega", "1,0,0", "--theta", "-1,0,0"]);
    assert_eq!(o.code, 0);
    let bins: Vec<Value> = o.stdout.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(bins.len(), 1);
    assert!((bins[0]["sojourn"].as_f64().unwrap() + 2.0).abs() < 1e-4);
}
