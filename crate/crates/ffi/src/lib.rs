//! C ABI for lenslab.
//!
//! Scenes and lens tables are opaque handles created by `ll_*_from_*` or
//! `ll_lens_table_build` and released with the matching `_free` function.
//! Fallible calls return an [`LlStatus`]; on failure [`ll_last_error`]
//! describes the problem. Strings handed out by the library are released
//! with [`ll_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lenslab::flow::{trace, FlowError, PhasePoint, Status, TraceLimits};
use lenslab::geometry::{inspect_scene, Scene, ValidationOptions};
use lenslab::lens::{build_lens_table, compare_lens, LensTable, SampleMode, SampleSpec, SampleStatus, Verdict, TIME_TOLERANCE};
use lenslab::Vec3;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BadInput = 3,
    NumericFailure = 4,
    Panic = 5,
}

/// Outcome of a single orbit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlOrbit {
    Free = 0,
    Scattered = 1,
    Trapped = 2,
    GlidingRejected = 3,
    TangentFlagged = 4,
    Failed = 5,
}

impl From<SampleStatus> for LlOrbit {
    fn from(s: SampleStatus) -> Self {
        match s {
            SampleStatus::Free => LlOrbit::Free,
            SampleStatus::Scattered => LlOrbit::Scattered,
            SampleStatus::Trapped => LlOrbit::Trapped,
            SampleStatus::GlidingRejected => LlOrbit::GlidingRejected,
            SampleStatus::TangentFlagged => LlOrbit::TangentFlagged,
            SampleStatus::Failed => LlOrbit::Failed,
        }
    }
}

/// Opaque scene handle.
pub struct LlScene(Scene);

/// Opaque lens table handle.
pub struct LlLensTable(LensTable);

/// One row of a lens table. `t` and `sojourn` are NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LlSample {
    pub status: LlOrbit,
    pub t: f64,
    pub reflections: u64,
    pub sojourn: f64,
}

/// Summary of a lens comparison.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LlComparison {
    pub indistinguishable: bool,
    pub samples: u64,
    pub matched: u64,
    pub status_mismatches: u64,
    pub exceed_count: u64,
    pub max_abs_dt: f64,
    pub mean_abs_dt: f64,
    pub tolerance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior NULs removed"));
}

type Fallible = Result<(), (LlStatus, String)>;

/// Runs `f`, recording its error message and converting panics.
fn guard(f: impl FnOnce() -> Fallible) -> LlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LlStatus::Panic
        }
    }
}

fn bad(msg: impl ToString) -> (LlStatus, String) {
    (LlStatus::BadInput, msg.to_string())
}

fn flow_error(e: FlowError) -> (LlStatus, String) {
    match e {
        FlowError::InvalidEntry(_) | FlowError::NotScattered => bad(e),
        _ => (LlStatus::NumericFailure, e.to_string()),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, (LlStatus, String)> {
    if p.is_null() {
        return Err((LlStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LlStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, (LlStatus, String)> {
    p.as_ref().ok_or((LlStatus::NullPointer, "null handle".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, (LlStatus, String)> {
    p.as_mut().ok_or((LlStatus::NullPointer, "null output pointer".into()))
}

unsafe fn vector_arg(p: *const f64, dim: usize) -> Result<Vec3, (LlStatus, String)> {
    if p.is_null() {
        return Err((LlStatus::NullPointer, "null vector".into()));
    }
    let s = std::slice::from_raw_parts(p, dim);
    Ok(Vec3::new(s[0], s[1], if dim == 3 { s[2] } else { 0.0 }))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn limits(scene: &Scene, max_reflections: u64, max_time: f64) -> TraceLimits {
    let d = TraceLimits::for_radius(scene.ball_radius());
    TraceLimits {
        max_reflections: if max_reflections == 0 { d.max_reflections } else { max_reflections as usize },
        max_time: if max_time > 0.0 { max_time } else { d.max_time },
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ll_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn ll_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be NULL or a string returned by this library that was not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ll_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scene file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_from_json(json: *const c_char, out: *mut *mut LlScene) -> LlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let scene = Scene::from_json(str_arg(json)?).map_err(bad)?;
        *out = Box::into_raw(Box::new(LlScene(scene)));
        Ok(())
    })
}

/// # Safety
/// `scene` must be NULL or a handle from [`ll_scene_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_free(scene: *mut LlScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Dimension of the scene (2 or 3), 0 for NULL.
///
/// # Safety
/// `scene` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_dimension(scene: *const LlScene) -> u32 {
    scene.as_ref().map_or(0, |s| s.0.dim() as u32)
}

/// Radius of the reference ball, NaN for NULL.
///
/// # Safety
/// `scene` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_ball_radius(scene: *const LlScene) -> f64 {
    scene.as_ref().map_or(f64::NAN, |s| s.0.ball_radius())
}

/// 64-bit hash of the canonical scene description.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_hash(scene: *const LlScene, out: *mut u64) -> LlStatus {
    guard(|| {
        *out_arg(out)? = ref_arg(scene)?.0.hash();
        Ok(())
    })
}

/// Runs the scene checks. `passed` receives the verdict; the full report is
/// written as JSON to `report` unless it is NULL.
///
/// # Safety
/// `scene` must be a live handle, `passed` a valid pointer and `report`
/// NULL or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_scene_validate(scene: *const LlScene, passed: *mut bool, report: *mut *mut c_char) -> LlStatus {
    guard(|| {
        let r = inspect_scene(&ref_arg(scene)?.0, &ValidationOptions::default());
        *out_arg(passed)? = r.passed;
        if let Some(out) = report.as_mut() {
            *out = owned_string(lenslab::io::to_json_string(&r).map_err(bad)?);
        }
        Ok(())
    })
}

/// Travelling time of the ray entering at `q` (on the reference sphere)
/// with direction `v`; both arrays hold `dimension` values. A zero
/// `max_reflections` or non-positive `max_time` selects the default.
/// `time` is NaN unless the orbit left the ball.
///
/// # Safety
/// `scene` must be a live handle, `q` and `v` must point to `dimension`
/// doubles and the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ll_travelling_time(
    scene: *const LlScene,
    q: *const f64,
    v: *const f64,
    max_reflections: u64,
    max_time: f64,
    time: *mut f64,
    orbit: *mut LlOrbit,
) -> LlStatus {
    guard(|| {
        let scene = &ref_arg(scene)?.0;
        let (time, orbit) = (out_arg(time)?, out_arg(orbit)?);
        let entry = PhasePoint::new(vector_arg(q, scene.dim())?, vector_arg(v, scene.dim())?);
        let lim = limits(scene, max_reflections, max_time);
        let traj = trace(scene, &entry, &lim).map_err(flow_error)?;
        *time = f64::NAN;
        *orbit = match traj.status {
            Status::Exited { total_time, .. } => {
                *time = total_time;
                if traj.has_tangent() {
                    LlOrbit::TangentFlagged
                } else if traj.events.is_empty() {
                    LlOrbit::Free
                } else {
                    LlOrbit::Scattered
                }
            }
            Status::Trapped(_) => LlOrbit::Trapped,
            Status::GlidingRejected => LlOrbit::GlidingRejected,
        };
        Ok(())
    })
}

/// Traces an entry and returns the trajectory as JSONL.
///
/// # Safety
/// As for [`ll_travelling_time`]; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_trace_jsonl(
    scene: *const LlScene,
    q: *const f64,
    v: *const f64,
    max_reflections: u64,
    max_time: f64,
    out: *mut *mut c_char,
) -> LlStatus {
    guard(|| {
        let scene = &ref_arg(scene)?.0;
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let entry = PhasePoint::new(vector_arg(q, scene.dim())?, vector_arg(v, scene.dim())?);
        let traj = trace(scene, &entry, &limits(scene, max_reflections, max_time)).map_err(flow_error)?;
        let mut header = serde_json::Map::new();
        header.insert("version".into(), lenslab::VERSION.into());
        header.insert("scene_hash".into(), scene.hash_hex().into());
        *out = owned_string(traj.to_jsonl(scene.dim(), header));
        Ok(())
    })
}

/// Builds a lens table for `spec` (`grid:PxD` or `mc:N`).
///
/// # Safety
/// `scene` must be a live handle, `spec` a NUL-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_build(
    scene: *const LlScene,
    spec: *const c_char,
    seed: u64,
    max_reflections: u64,
    max_time: f64,
    out: *mut *mut LlLensTable,
) -> LlStatus {
    guard(|| {
        let scene = &ref_arg(scene)?.0;
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let mode: SampleMode = str_arg(spec)?.parse().map_err(bad)?;
        let lim = limits(scene, max_reflections, max_time);
        let spec = SampleSpec { mode, seed, max_reflections: lim.max_reflections, max_time: lim.max_time };
        *out = Box::into_raw(Box::new(LlLensTable(build_lens_table(scene, &spec))));
        Ok(())
    })
}

/// Reads a lens table written by [`ll_lens_table_to_jsonl`] or the CLI.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_from_jsonl(text: *const c_char, out: *mut *mut LlLensTable) -> LlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let table = LensTable::from_jsonl(str_arg(text)?).map_err(bad)?;
        *out = Box::into_raw(Box::new(LlLensTable(table)));
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_to_jsonl(table: *const LlLensTable, out: *mut *mut c_char) -> LlStatus {
    guard(|| {
        let table = &ref_arg(table)?.0;
        *out_arg(out)? = owned_string(table.to_jsonl(&serde_json::Map::new()));
        Ok(())
    })
}

/// Number of samples, 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_len(table: *const LlLensTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.samples.len())
}

/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_sample(table: *const LlLensTable, index: usize, out: *mut LlSample) -> LlStatus {
    guard(|| {
        let table = &ref_arg(table)?.0;
        let out = out_arg(out)?;
        let s = table.samples.get(index).ok_or_else(|| bad(format!("index {index} out of range ({})", table.samples.len())))?;
        *out = LlSample {
            status: s.status.into(),
            t: s.t.unwrap_or(f64::NAN),
            reflections: s.reflections as u64,
            sojourn: s.sojourn.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ll_lens_table_free(table: *mut LlLensTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Compares two tables built with the same spec. A non-positive
/// `tolerance` selects 1e−6 times the ball radius.
///
/// # Safety
/// `k` and `l` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_compare_lens(k: *const LlLensTable, l: *const LlLensTable, tolerance: f64, out: *mut LlComparison) -> LlStatus {
    guard(|| {
        let (k, l) = (&ref_arg(k)?.0, &ref_arg(l)?.0);
        let out = out_arg(out)?;
        let tol = if tolerance > 0.0 { tolerance } else { TIME_TOLERANCE * k.ball_radius };
        let r = compare_lens(k, l, tol).map_err(bad)?;
        *out = LlComparison {
            indistinguishable: r.verdict == Verdict::Indistinguishable,
            samples: r.samples as u64,
            matched: r.matched as u64,
            status_mismatches: r.status_mismatches as u64,
            exceed_count: r.exceed_count as u64,
            max_abs_dt: r.max_abs_dt,
            mean_abs_dt: r.mean_abs_dt,
            tolerance: r.tolerance,
        };
        Ok(())
    })
}
