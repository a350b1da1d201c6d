use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use toro_ffi::*;

const TWO_CYCLE: &str = r#"{"workspace":{"xmin":-5,"ymin":-5,"xmax":10,"ymax":10},
"rest_start":[2.5,-4],"rest_goal":[2.5,-4],"buffers":[[2.5,5]],
"objects":[{"id":1,"radius":1,"start":[0,0],"goal":[3.5,0]},
{"id":2,"radius":1,"start":[5,0],"goal":[1.5,0]}]}"#;

fn load(json: &str) -> (ToroStatus, *mut ToroInstance) {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { toro_instance_from_json(c.as_ptr(), &mut out) };
    (st, out)
}

fn last_error() -> Option<String> {
    let p = toro_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn solve(inst: *const ToroInstance, method: ToroMethod) -> (ToroStatus, *mut ToroReport) {
    let mut out = ptr::null_mut();
    let st = unsafe { toro_solve(inst, method, ToroFvsMethod::Default, 0.0, 7, &mut out) };
    (st, out)
}

#[test]
fn two_cycle_round_trip() {
    let (st, inst) = load(TWO_CYCLE);
    assert_eq!(st, ToroStatus::Ok);
    assert!(last_error().is_none());
    unsafe {
        assert_eq!(toro_instance_object_count(inst), 2);
        assert!(toro_instance_has_overlap(inst));
    }
    let (st, rep) = solve(inst, ToroMethod::Auto);
    assert_eq!(st, ToroStatus::Ok);
    unsafe {
        assert_eq!(toro_report_action_count(rep), 3);
        assert!(toro_report_optimal(rep));
        let mut a = std::mem::zeroed::<ToroAction>();
        let mut sum = 0.0;
        for i in 0..3 {
            assert_eq!(toro_report_action(rep, i, &mut a), ToroStatus::Ok);
            sum += a.d_e + a.d_l;
        }
        assert_eq!(toro_report_action(rep, 0, &mut a), ToroStatus::Ok);
        assert_eq!((a.from_kind, a.to_kind), (ToroLocationKind::Start, ToroLocationKind::Buffer));
        assert_eq!(toro_report_action(rep, 3, &mut a), ToroStatus::OutOfRange);
        assert!(last_error().unwrap().contains("action 3"));

        let json = toro_report_to_json(rep);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        toro_string_free(json);
        let d = toro_report_distance(rep);
        assert!((v["distance_term"].as_f64().unwrap() - d).abs() < 1e-12);
        // the final leg back to the rest pose is the only travel not on an action
        assert!(sum <= d + 1e-9);

        let buf = toro_report_buffered_json(rep);
        assert_eq!(CStr::from_ptr(buf).to_str().unwrap(), "[0]");
        toro_string_free(buf);

        toro_report_free(rep);
        toro_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    assert_eq!(load("{").0, ToroStatus::ParseError);
    assert!(last_error().is_some());

    let bad = TWO_CYCLE.replace("\"radius\":1,\"start\":[5,0]", "\"radius\":0,\"start\":[5,0]");
    let (st, p) = load(&bad);
    assert_eq!(st, ToroStatus::InvalidInstance);
    assert!(p.is_null());
    assert!(last_error().unwrap().contains("non-positive-radius"));

    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(toro_instance_from_json(ptr::null(), &mut out), ToroStatus::NullArgument);
        assert_eq!(toro_instance_from_json(c"{}".as_ptr(), ptr::null_mut()), ToroStatus::NullArgument);
        let bytes = [0xffu8, 0];
        assert_eq!(toro_instance_from_json(bytes.as_ptr().cast(), &mut out), ToroStatus::InvalidUtf8);
    }

    let (_, inst) = load(TWO_CYCLE);
    let (st, rep) = solve(inst, ToroMethod::TspExact);
    assert_eq!(st, ToroStatus::Unsupported);
    assert!(rep.is_null());
    let (st, rep) = solve(ptr::null(), ToroMethod::Auto);
    assert_eq!(st, ToroStatus::NullArgument);
    assert!(rep.is_null());

    unsafe {
        assert_eq!(toro_report_action_count(ptr::null()), 0);
        assert!(toro_report_distance(ptr::null()).is_nan());
        assert!(toro_report_to_json(ptr::null()).is_null());
        toro_report_free(ptr::null_mut());
        toro_instance_free(inst);
        toro_instance_free(ptr::null_mut());
        toro_string_free(ptr::null_mut());
    }
}

#[test]
fn every_method_on_overlap_free_instance() {
    let json = TWO_CYCLE.replace("\"goal\":[3.5,0]", "\"goal\":[0,7]").replace("\"goal\":[1.5,0]", "\"goal\":[5,7]");
    let (st, inst) = load(&json);
    assert_eq!(st, ToroStatus::Ok, "{:?}", last_error());
    let mut dists = vec![];
    for m in [
        ToroMethod::Auto,
        ToroMethod::TspExact,
        ToroMethod::TspHeuristic,
        ToroMethod::FvsSingle,
        ToroMethod::FvsComplete,
        ToroMethod::Greedy,
        ToroMethod::Random,
    ] {
        let (st, rep) = solve(inst, m);
        assert_eq!(st, ToroStatus::Ok, "{m:?}: {:?}", last_error());
        unsafe {
            assert_eq!(toro_report_action_count(rep), 2);
            dists.push(toro_report_distance(rep));
            toro_report_free(rep);
        }
    }
    let best = dists[1];
    assert!(dists.iter().all(|&d| d >= best - 1e-9), "{dists:?}");
    unsafe { toro_instance_free(inst) };
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(toro_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/toro.h")).unwrap();
    for sym in [
        "toro_instance_from_json",
        "toro_instance_free",
        "toro_solve",
        "toro_report_action",
        "toro_report_to_json",
        "toro_string_free",
        "toro_last_error",
        "typedef struct ToroInstance ToroInstance",
        "TORO_STATUS_BUDGET_EXHAUSTED = 6",
    ] {
        assert!(h.contains(sym), "header lacks {sym}");
    }
}

/// Compiles the C smoke program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libtoro_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let bin: PathBuf = Path::new(env!("CARGO_TARGET_TMPDIR")).join("toro_smoke");
    let status = Command::new(cc)
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = stdout.split_whitespace().collect();
    assert_eq!(&fields[..2], ["3", "1"]);
    assert_eq!(fields[3], env!("CARGO_PKG_VERSION"));
}
