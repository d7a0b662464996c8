use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hangover_ffi::*;

fn last_message() -> String {
    let mut needed = 0usize;
    unsafe { hangover_last_error_message(ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    let s = unsafe { hangover_last_error_message(buf.as_mut_ptr().cast(), buf.len(), &mut needed) };
    assert_eq!(s, HangoverStatus::Ok);
    CStr::from_bytes_with_nul(&buf).unwrap().to_str().unwrap().to_string()
}

fn last_kind() -> String {
    unsafe { CStr::from_ptr(hangover_last_error_kind()) }.to_str().unwrap().to_string()
}

#[test]
fn market_calls_and_error_codes() {
    let mut p = 0.0;
    assert_eq!(unsafe { hangover_implied_probability(-110, &mut p) }, HangoverStatus::Ok);
    assert!((p - 110.0 / 210.0).abs() < 1e-15);

    assert_eq!(unsafe { hangover_implied_probability(50, &mut p) }, HangoverStatus::InvalidArgument);
    assert_eq!(last_kind(), "invalid_odds");
    assert!(last_message().contains("50"));

    let (mut h, mut a) = (0.0, 0.0);
    assert_eq!(unsafe { hangover_devig_pair(0.55, 0.5, &mut h, &mut a) }, HangoverStatus::Ok);
    assert!((h + a - 1.0).abs() < 1e-12);

    let mut ev = 0i64;
    assert_eq!(unsafe { hangover_expected_value_cents(0.5, 100, 10_000, &mut ev) }, HangoverStatus::Ok);
    assert_eq!(ev, 0);
}

#[test]
fn null_out_pointer_is_reported() {
    assert_eq!(unsafe { hangover_implied_probability(-110, ptr::null_mut()) }, HangoverStatus::NullPointer);
    assert_eq!(last_kind(), "null_pointer");
}

#[test]
fn success_clears_the_last_error() {
    let mut p = 0.0;
    unsafe { hangover_implied_probability(0, &mut p) };
    assert!(!last_kind().is_empty());
    unsafe { hangover_implied_probability(-110, &mut p) };
    assert_eq!(last_kind(), "");
}

#[test]
fn distance_between_los_angeles_and_new_york() {
    let mut km = 0.0;
    let s = unsafe { hangover_great_circle_km(34.0522, -118.2437, 40.7128, -74.0060, &mut km) };
    assert_eq!(s, HangoverStatus::Ok);
    assert!((km - 3936.0).abs() / 3936.0 < 0.01);
    let s = unsafe { hangover_great_circle_km(95.0, 0.0, 0.0, 0.0, &mut km) };
    assert_eq!(s, HangoverStatus::InvalidArgument);
}

#[test]
fn short_buffer_reports_needed_size() {
    let mut p = 0.0;
    unsafe { hangover_implied_probability(0, &mut p) };
    let mut buf = [0i8; 4];
    let mut needed = 0usize;
    let s = unsafe { hangover_last_error_message(buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(s, HangoverStatus::BufferTooSmall);
    assert!(needed > 4);
    assert_eq!(buf, [0; 4]);
}

#[test]
fn synth_fit_and_backtest_through_handles() {
    let nba = CString::new("nba").unwrap();
    let mut ds: *mut HangoverDataset = ptr::null_mut();
    assert_eq!(unsafe { hangover_synth_dataset(nba.as_ptr(), 3, -0.5, ptr::null(), &mut ds) }, HangoverStatus::Ok);
    assert!(unsafe { hangover_dataset_row_count(ds) } > 9000);

    let mut model: *mut HangoverModel = ptr::null_mut();
    assert_eq!(unsafe { hangover_model_fit(ds, ptr::null(), &mut model) }, HangoverStatus::Ok);
    assert!(unsafe { hangover_model_n_obs(model) } > 9000);
    let term = CString::new("party_discrete").unwrap();
    let (mut b, mut se) = (0.0, 0.0);
    let s = unsafe { hangover_model_term(model, term.as_ptr(), &mut b, &mut se, ptr::null_mut()) };
    assert_eq!(s, HangoverStatus::Ok);
    assert!(b < 0.0 && se > 0.0);

    let mut needed = 0usize;
    unsafe { hangover_model_table(model, ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    let s = unsafe { hangover_model_table(model, buf.as_mut_ptr().cast(), buf.len(), &mut needed) };
    assert_eq!(s, HangoverStatus::Ok);
    let text = CStr::from_bytes_with_nul(&buf).unwrap().to_str().unwrap();
    assert!(text.contains("party_discrete") && text.contains("Observations"));

    let bogus = CString::new("nonexistent").unwrap();
    let s = unsafe { hangover_model_term(model, bogus.as_ptr(), &mut b, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(s, HangoverStatus::InvalidArgument);

    let mut summary = HangoverBacktestSummary::default();
    let s = unsafe { hangover_backtest(ds, ptr::null(), HangoverPolicy::Model, &mut summary) };
    assert_eq!(s, HangoverStatus::Ok);
    assert_eq!(summary.seasons, 3);
    assert_eq!(summary.bets, 0, "NBA walk-forward classifies, it does not bet");

    unsafe {
        hangover_model_free(model);
        hangover_dataset_free(ds);
        hangover_model_free(ptr::null_mut());
        hangover_dataset_free(ptr::null_mut());
    }
}

#[test]
fn market_policy_places_no_bets_and_bad_spec_is_config_error() {
    let mlb = CString::new("MLB").unwrap();
    let mut ds: *mut HangoverDataset = ptr::null_mut();
    assert_eq!(unsafe { hangover_synth_dataset(mlb.as_ptr(), 5, -0.5, ptr::null(), &mut ds) }, HangoverStatus::Ok);
    let mut summary = HangoverBacktestSummary::default();
    let s = unsafe { hangover_backtest(ds, ptr::null(), HangoverPolicy::MarketImplied, &mut summary) };
    assert_eq!(s, HangoverStatus::Ok);
    assert_eq!(summary.bets, 0);
    assert_eq!(summary.final_profit_cents, 0);

    let spec = CString::new("outcome = \"win\"\nfeatures = [\"no_such_feature\"]\n").unwrap();
    let mut model: *mut HangoverModel = ptr::null_mut();
    assert_eq!(unsafe { hangover_model_fit(ds, spec.as_ptr(), &mut model) }, HangoverStatus::Config);
    assert!(model.is_null());
    unsafe { hangover_dataset_free(ds) };
}

#[test]
fn dataset_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let nba = CString::new("nba").unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut a: *mut HangoverDataset = ptr::null_mut();
    assert_eq!(unsafe { hangover_synth_dataset(nba.as_ptr(), 9, 0.0, path.as_ptr(), &mut a) }, HangoverStatus::Ok);
    let mut b: *mut HangoverDataset = ptr::null_mut();
    assert_eq!(unsafe { hangover_dataset_load(nba.as_ptr(), path.as_ptr(), &mut b) }, HangoverStatus::Ok);
    assert_eq!(unsafe { hangover_dataset_row_count(a) }, unsafe { hangover_dataset_row_count(b) });
    unsafe {
        hangover_dataset_free(a);
        hangover_dataset_free(b);
    }

    let missing = CString::new(dir.path().join("absent").to_str().unwrap()).unwrap();
    let mut c: *mut HangoverDataset = ptr::null_mut();
    assert_eq!(unsafe { hangover_dataset_load(nba.as_ptr(), missing.as_ptr(), &mut c) }, HangoverStatus::Io);
    let bad = CString::new("nhl").unwrap();
    assert_eq!(
        unsafe { hangover_dataset_load(bad.as_ptr(), path.as_ptr(), &mut c) },
        HangoverStatus::InvalidArgument
    );
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(hangover_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header is valid C and a C caller can link against the library.
#[test]
fn header_compiles_and_links_from_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = root.join("include");
    assert!(header_dir.join("hangover.h").is_file());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include "hangover.h"
#include <stdio.h>
int main(void) {
    double p = 0.0;
    if (hangover_implied_probability(-110, &p) != HANGOVER_STATUS_OK) return 1;
    if (hangover_implied_probability(10, &p) != HANGOVER_STATUS_INVALID_ARGUMENT) return 2;
    char buf[256];
    size_t needed = 0;
    if (hangover_last_error_message(buf, sizeof buf, &needed) != HANGOVER_STATUS_OK) return 3;
    printf("%.6f %s\n", p, hangover_last_error_kind());
    return 0;
}
"#,
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&header_dir)
        .arg(&src)
        .status()
        .expect("a C compiler is required for the ABI test");
    assert!(syntax.success());

    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libhangover_ffi.a");
    assert!(lib.is_file(), "static library not built at {}", lib.display());
    let bin = tmp.path().join("main");
    let build = Command::new(&cc)
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(build.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8(run.stdout).unwrap(), "0.523810 invalid_odds\n");
}
