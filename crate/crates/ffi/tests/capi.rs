use std::ffi::{CStr, CString};
use std::ptr;

use crowdstep_ffi::*;

fn last_error() -> String {
    let p = cs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_world(json: &str) -> (CsStatus, *mut CsWorld) {
    let text = CString::new(json).unwrap();
    let mut w = ptr::null_mut();
    let status = unsafe { cs_world_new(text.as_ptr(), &mut w) };
    (status, w)
}

#[test]
fn corridor_round_trip() {
    let (status, w) = new_world(r#"{"scenario":{"kind":"corridor","target_density":0.5},"seed":7}"#);
    assert_eq!(status, CsStatus::Ok);
    assert!(cs_last_error_message().is_null());
    unsafe {
        let mut n = 0usize;
        assert_eq!(cs_world_agent_count(w, &mut n), CsStatus::Ok);
        assert_eq!(n, 50);
        assert_eq!(cs_world_step(w, 5), CsStatus::Ok);
        let mut tick = 0u64;
        assert_eq!(cs_world_tick(w, &mut tick), CsStatus::Ok);
        assert_eq!(tick, 5);

        let mut ids = vec![0u32; n];
        let mut xy = vec![0.0f64; 2 * n];
        let mut written = 0usize;
        assert_eq!(cs_world_positions(w, ids.as_mut_ptr(), xy.as_mut_ptr(), n, &mut written), CsStatus::Ok);
        assert_eq!(written, 50);
        assert!(ids.windows(2).all(|p| p[0] < p[1]));
        assert!(xy.chunks(2).all(|p| (0.0..20.0).contains(&p[0]) && p[1] > 0.0 && p[1] < 5.0));

        let mut gap = f64::NAN;
        assert_eq!(cs_world_min_gap(w, &mut gap), CsStatus::Ok);
        assert!(gap > -1e-9);
        cs_world_free(w);
    }
}

#[test]
fn same_seed_same_positions() {
    let json = r#"{"scenario":{"kind":"room","door_width":1.0,"agent_count":40},"seed":3}"#;
    let snapshot = || unsafe {
        let (_, w) = new_world(json);
        cs_world_step(w, 20);
        let mut xy = vec![0.0; 80];
        let mut ids = vec![0u32; 40];
        let mut written = 0;
        cs_world_positions(w, ids.as_mut_ptr(), xy.as_mut_ptr(), 40, &mut written);
        cs_world_free(w);
        (written, ids, xy)
    };
    assert_eq!(snapshot(), snapshot());
}

#[test]
fn small_buffer_reports_needed_size() {
    let (_, w) = new_world(r#"{"scenario":{"kind":"corridor","agent_count":12}}"#);
    unsafe {
        let mut ids = vec![0u32; 4];
        let mut xy = vec![0.0; 8];
        let mut written = 0;
        let s = cs_world_positions(w, ids.as_mut_ptr(), xy.as_mut_ptr(), 4, &mut written);
        assert_eq!(s, CsStatus::BufferTooSmall);
        assert_eq!(written, 12);
        assert!(ids.iter().all(|&i| i == 0));
        assert!(last_error().contains("capacity 4"));
        cs_world_free(w);
    }
}

#[test]
fn bad_config_is_rejected_with_message() {
    let (s, w) = new_world(r#"{"model":{"phi_tau":1.6}}"#);
    assert_eq!(s, CsStatus::InvalidConfig);
    assert!(w.is_null());
    assert!(last_error().contains("phi_tau"));

    let (s, _) = new_world("{\"gait\": {\"mu_stepp\": 1}}");
    assert_eq!(s, CsStatus::InvalidConfig);
    assert!(last_error().contains("gait.mu_stepp"));
}

#[test]
fn null_arguments() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(cs_world_new(ptr::null(), &mut w), CsStatus::NullPointer);
        let text = CString::new("{}").unwrap();
        assert_eq!(cs_world_new(text.as_ptr(), ptr::null_mut()), CsStatus::NullPointer);
        assert_eq!(cs_world_step(ptr::null_mut(), 1), CsStatus::NullPointer);
        let mut n = 0;
        assert_eq!(cs_world_agent_count(ptr::null_mut(), &mut n), CsStatus::NullPointer);
        cs_world_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8() {
    let bytes = CString::new(vec![b'{', 0xff, b'}']).unwrap();
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { cs_world_new(bytes.as_ptr(), &mut w) }, CsStatus::InvalidUtf8);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/crowdstep.h")).unwrap();
    for name in [
        "cs_world_new",
        "cs_world_free",
        "cs_world_step",
        "cs_world_tick",
        "cs_world_agent_count",
        "cs_world_positions",
        "cs_world_min_gap",
        "cs_last_error_message",
        "cs_version",
        "typedef struct CsWorld CsWorld",
        "CS_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    use std::process::Command;

    let dir = env!("CARGO_MANIFEST_DIR");
    let smoke = format!("{dir}/tests/c/smoke.c");
    let include = format!("{dir}/include");
    for (compiler, args) in [("cc", vec!["-std=c11"]), ("c++", vec!["-x", "c++", "-std=c++17"])] {
        if Command::new(compiler).arg("--version").output().is_err() {
            eprintln!("skipping {compiler}: not installed");
            continue;
        }
        let status = Command::new(compiler)
            .args(&args)
            .args(["-Wall", "-Werror", "-fsyntax-only", "-I", &include, &smoke])
            .status()
            .unwrap();
        assert!(status.success(), "{compiler} rejected the header");
    }
}
