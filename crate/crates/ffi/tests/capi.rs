//! Exercises the C ABI from Rust through the raw extern functions.

use npgap_ffi::*;
use std::ffi::{c_char, CString};

const CONFIG: &str = r#"
[shape1]
kind = "circle"
radius = 1.0

[shape2]
kind = "circle"
radius = 1.0

[gap]
values = [0.1, 0.05]

[background]
re_coeffs = [1.0]

[problem]
kind = "conducting"

[numerics]
n_override = 128
probe_count = 11
"#;

fn last_error() -> String {
    let mut buf = vec![0i8; 512];
    let n = unsafe { npgap_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(buf.len() - 1)).map(|&b| b as u8).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { std::ffi::CStr::from_ptr(npgap_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn parse_run_fetch_roundtrip() {
    let text = CString::new(CONFIG).unwrap();
    let mut cfg: *mut NpgapConfig = std::ptr::null_mut();
    let st = unsafe { npgap_config_parse(text.as_ptr(), &mut cfg) };
    assert_eq!(st, NpgapStatus::Ok, "{}", last_error());
    assert!(!cfg.is_null());

    let mut sweep: *mut NpgapSweep = std::ptr::null_mut();
    let st = unsafe { npgap_sweep_run(cfg, &mut sweep) };
    assert_eq!(st, NpgapStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { npgap_sweep_row_count(sweep) }, 2);
    assert_eq!(unsafe { npgap_sweep_failure_count(sweep) }, 0);

    let col = CString::new("multiplicity").unwrap();
    let mut v = 0.0f64;
    let st = unsafe { npgap_sweep_value(sweep, 0, col.as_ptr(), &mut v) };
    assert_eq!(st, NpgapStatus::Ok);
    assert_eq!(v, 2.0);

    let col = CString::new("eps").unwrap();
    unsafe { npgap_sweep_value(sweep, 1, col.as_ptr(), &mut v) };
    assert!((v - 0.05).abs() < 1e-15);

    let csv = unsafe { npgap_sweep_csv(sweep) };
    assert!(!csv.is_null());
    let text = unsafe { std::ffi::CStr::from_ptr(csv) }.to_str().unwrap().to_string();
    assert!(text.starts_with("eps,n_used,"));
    assert_eq!(text.trim_end().lines().count(), 3);
    unsafe { npgap_string_free(csv) };

    // Error paths: bad column and bad row.
    let bad = CString::new("not_a_column").unwrap();
    let st = unsafe { npgap_sweep_value(sweep, 0, bad.as_ptr(), &mut v) };
    assert_eq!(st, NpgapStatus::InvalidArgument);
    assert!(last_error().contains("unknown column"));
    let col = CString::new("eps").unwrap();
    let st = unsafe { npgap_sweep_value(sweep, 99, col.as_ptr(), &mut v) };
    assert_eq!(st, NpgapStatus::InvalidArgument);

    unsafe {
        npgap_sweep_free(sweep);
        npgap_config_free(cfg);
    }
}

#[test]
fn config_error_reported() {
    let text = CString::new(format!("{CONFIG}\nunknown_root = 1\n")).unwrap();
    let mut cfg: *mut NpgapConfig = std::ptr::null_mut();
    let st = unsafe { npgap_config_parse(text.as_ptr(), &mut cfg) };
    assert_eq!(st, NpgapStatus::ConfigError);
    assert!(!last_error().is_empty());
    assert!(cfg.is_null());
}

#[test]
fn null_arguments_rejected() {
    let mut cfg: *mut NpgapConfig = std::ptr::null_mut();
    assert_eq!(
        unsafe { npgap_config_parse(std::ptr::null(), &mut cfg) },
        NpgapStatus::InvalidArgument
    );
    assert_eq!(unsafe { npgap_sweep_row_count(std::ptr::null()) }, 0);
}

#[test]
fn generated_header_exists_and_is_opaque() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/npgap.h"))
        .expect("cbindgen header should be generated at build time");
    assert!(header.contains("typedef struct NpgapConfig NpgapConfig;"));
    assert!(header.contains("typedef struct NpgapSweep NpgapSweep;"));
    assert!(header.contains("npgap_sweep_run"));
    assert!(header.contains("NPGAP_H"));
}
