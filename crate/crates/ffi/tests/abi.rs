use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use lenslab_ffi::*;

const SPHERE: &str = r#"{"name":"sphere","dimension":3,"ball_radius":10,"obstacles":[{"kind":"sphere","center":[0,0,0],"params":{"radius":1}}]}"#;
const WIDER: &str = r#"{"name":"sphere","dimension":3,"ball_radius":10,"obstacles":[{"kind":"sphere","center":[0,0,0],"params":{"radius":1.01}}]}"#;

fn scene(json: &str) -> *mut LlScene {
    let text = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ll_scene_from_json(text.as_ptr(), &mut s) }, LlStatus::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ll_last_error()) }.to_str().unwrap().to_owned()
}

fn table(s: *const LlScene, spec: &str) -> *mut LlLensTable {
    let spec = CString::new(spec).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ll_lens_table_build(s, spec.as_ptr(), 0, 0, 0.0, &mut t) }, LlStatus::Ok);
    t
}

#[test]
fn scene_handles() {
    let s = scene(SPHERE);
    unsafe {
        assert_eq!(ll_scene_dimension(s), 3);
        assert_eq!(ll_scene_ball_radius(s), 10.0);
        let mut h = 0u64;
        assert_eq!(ll_scene_hash(s, &mut h), LlStatus::Ok);
        let again = scene(SPHERE);
        let mut h2 = 1u64;
        ll_scene_hash(again, &mut h2);
        assert_eq!(h, h2);
        let (mut passed, mut report) = (false, ptr::null_mut());
        assert_eq!(ll_scene_validate(s, &mut passed, &mut report), LlStatus::Ok);
        assert!(passed);
        assert!(CStr::from_ptr(report).to_str().unwrap().contains("\"passed\":true"));
        ll_string_free(report);
        ll_scene_free(again);
        ll_scene_free(s);
        assert_eq!(ll_scene_dimension(ptr::null()), 0);
        assert!(ll_scene_ball_radius(ptr::null()).is_nan());
    }
    assert_eq!(unsafe { CStr::from_ptr(ll_version()) }.to_str().unwrap(), lenslab::VERSION);
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("{\"name\":1}").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ll_scene_from_json(bad.as_ptr(), &mut s) }, LlStatus::BadInput);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { ll_scene_from_json(ptr::null(), &mut s) }, LlStatus::NullPointer);
    assert_eq!(unsafe { ll_scene_hash(ptr::null(), ptr::null_mut()) }, LlStatus::NullPointer);

    let s = scene(SPHERE);
    let (q, v) = ([20.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
    let (mut t, mut o) = (0.0, LlOrbit::Failed);
    assert_eq!(unsafe { ll_travelling_time(s, q.as_ptr(), v.as_ptr(), 0, 0.0, &mut t, &mut o) }, LlStatus::BadInput);
    let spec = CString::new("grid:x").unwrap();
    let mut tab = ptr::null_mut();
    assert_eq!(unsafe { ll_lens_table_build(s, spec.as_ptr(), 0, 0, 0.0, &mut tab) }, LlStatus::BadInput);
    assert!(last_error().contains("grid"), "{}", last_error());
    unsafe { ll_scene_free(s) };
}

#[test]
fn diametric_ray_backscatters() {
    let s = scene(SPHERE);
    let (q, v) = ([0.0, 10.0, 0.0], [0.0, -1.0, 0.0]);
    let (mut t, mut o) = (0.0, LlOrbit::Failed);
    unsafe {
        assert_eq!(ll_travelling_time(s, q.as_ptr(), v.as_ptr(), 0, 0.0, &mut t, &mut o), LlStatus::Ok);
        assert_eq!(o, LlOrbit::Scattered);
        assert!((t - 18.0).abs() < 1e-9);
        let mut text = ptr::null_mut();
        assert_eq!(ll_trace_jsonl(s, q.as_ptr(), v.as_ptr(), 0, 0.0, &mut text), LlStatus::Ok);
        let lines = CStr::from_ptr(text).to_str().unwrap().lines().count();
        assert_eq!(lines, 2);
        ll_string_free(text);
        ll_scene_free(s);
    }
}

#[test]
fn lens_tables_through_the_abi() {
    let (k, l) = (scene(SPHERE), scene(WIDER));
    let (tk, tl) = (table(k, "grid:20x21"), table(l, "grid:20x21"));
    unsafe {
        assert_eq!(ll_lens_table_len(tk), 420);
        let mut row = LlSample { status: LlOrbit::Failed, t: 0.0, reflections: 9, sojourn: 0.0 };
        assert_eq!(ll_lens_table_sample(tk, 0, &mut row), LlStatus::Ok);
        assert!(matches!(row.status, LlOrbit::Free | LlOrbit::Scattered));
        assert_eq!(ll_lens_table_sample(tk, 420, &mut row), LlStatus::BadInput);

        let mut c = LlComparison::default();
        assert_eq!(ll_compare_lens(tk, tk, 0.0, &mut c), LlStatus::Ok);
        assert!(c.indistinguishable);
        assert_eq!(c.max_abs_dt, 0.0);
        assert_eq!(c.tolerance, 1e-6 * 10.0);
        assert_eq!(ll_compare_lens(tk, tl, 0.0, &mut c), LlStatus::Ok);
        assert!(!c.indistinguishable);
        assert!(c.max_abs_dt >= 0.019);

        // a JSONL round trip gives an identical table
        let mut text = ptr::null_mut();
        assert_eq!(ll_lens_table_to_jsonl(tk, &mut text), LlStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ll_lens_table_from_jsonl(text, &mut back), LlStatus::Ok);
        ll_string_free(text);
        assert_eq!(ll_compare_lens(tk, back, 0.0, &mut c), LlStatus::Ok);
        assert_eq!((c.max_abs_dt, c.status_mismatches), (0.0, 0));

        let other = table(k, "grid:20x20");
        assert_eq!(ll_compare_lens(tk, other, 0.0, &mut c), LlStatus::BadInput);
        for t in [tk, tl, back, other] {
            ll_lens_table_free(t);
        }
        ll_scene_free(k);
        ll_scene_free(l);
    }
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/lenslab.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from the header");
    }
}

#[test]
fn header_is_valid_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile_path("lenslab_header_check.c");
    std::fs::write(&out, "#include \"lenslab.h\"\nint main(void) { return ll_version() == 0; }\n").unwrap();
    let status = match Command::new("cc").arg("-std=c99").arg("-fsyntax-only").arg("-I").arg(dir.join("include")).arg(&out).status() {
        Ok(s) => s,
        // no C compiler on this machine
        Err(_) => return,
    };
    assert!(status.success());
}

fn tempfile_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("{}-{name}", std::process::id()))
}
