use std::ffi::{c_char, CStr};
use std::ptr;

use loopjordan_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        lj_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn module_roundtrip_and_hamiltonian_spectrum_trace() {
    let mut h = ptr::null_mut();
    let st = unsafe { lj_module_new_custom(4, c"glued-quotient:2".as_ptr(), LjConvention::Plain, 1.0, 1.0, &mut h) };
    assert_eq!(st, LjStatus::Ok, "{}", last_error());
    let d = unsafe { lj_module_dim(h) };
    assert_eq!(d, 7);
    let mut re = vec![0.0; d * d];
    let mut im = vec![0.0; d * d];
    let st = unsafe { lj_module_operator(h, LjOperator::Hamiltonian, 0, re.as_mut_ptr(), im.as_mut_ptr(), re.len()) };
    assert_eq!(st, LjStatus::Ok);
    // eigenvalues {0,1,3,3,4,4,5} sum to 20
    let trace: f64 = (0..d).map(|i| re[i * d + i]).sum();
    assert!((trace - 20.0).abs() < 1e-12, "trace {trace}");
    assert!(im.iter().all(|x| x.abs() < 1e-12));

    let st = unsafe { lj_module_operator(h, LjOperator::Hamiltonian, 0, re.as_mut_ptr(), im.as_mut_ptr(), 3) };
    assert_eq!(st, LjStatus::BufferTooSmall);
    unsafe { lj_module_free(h) };
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let st = unsafe { lj_module_new(5, c"standard:0".as_ptr(), LjConvention::Plain, -1.0, &mut h) };
    assert_eq!(st, LjStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { lj_module_new(4, c"nonsense".as_ptr(), LjConvention::Plain, -1.0, &mut h) };
    assert_eq!(st, LjStatus::InvalidArgument);

    let st = unsafe { lj_module_new(4, ptr::null(), LjConvention::Plain, -1.0, &mut h) };
    assert_eq!(st, LjStatus::NullPointer);

    let st = unsafe { lj_e_infinity(0.5, ptr::null_mut()) };
    assert_eq!(st, LjStatus::NullPointer);

    assert_eq!(unsafe { lj_module_dim(ptr::null()) }, 0);
    unsafe { lj_module_free(ptr::null_mut()) };
}

#[test]
fn j_of_parallel_and_orthogonal_vectors() {
    let (ure, uim) = ([1.0, 0.0], [0.0, 0.0]);
    let (vre, vim) = ([0.0, 2.0], [0.0, 0.0]);
    let mut j = -1.0;
    let st = unsafe { lj_j_measure(ure.as_ptr(), uim.as_ptr(), vre.as_ptr(), vim.as_ptr(), 2, &mut j) };
    assert_eq!(st, LjStatus::Ok);
    assert!(j.abs() < 1e-15);
    let st = unsafe { lj_j_measure(ure.as_ptr(), uim.as_ptr(), ure.as_ptr(), uim.as_ptr(), 2, &mut j) };
    assert_eq!(st, LjStatus::Ok);
    assert!((j - 1.0).abs() < 1e-15);
}

#[test]
fn scalar_entry_points() {
    let mut e = 0.0;
    assert_eq!(unsafe { lj_e_infinity(std::f64::consts::FRAC_PI_2, &mut e) }, LjStatus::Ok);
    // free fermion point: 2/pi
    assert!((e - 2.0 / std::f64::consts::PI).abs() < 1e-12, "{e}");
    assert!((lj_kac_weight(1.0, 1.0, 2.0)).abs() < 1e-15);
    let v = unsafe { CStr::from_ptr(lj_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn btt_limit_small_chain() {
    let mut out = LjBttLimit::default();
    let st = unsafe { lj_btt_limit(4, &mut out) };
    assert_eq!(st, LjStatus::Ok, "{}", last_error());
    assert!((out.b1 - -1.96028051706).abs() < 1e-8, "{out:?}");
    assert!(out.spread < 1e-4);
}

#[test]
fn header_declares_entry_points() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/loopjordan.h")).unwrap();
    for sym in ["lj_module_new", "lj_module_free", "lj_module_operator", "lj_j_measure", "lj_btt_limit", "lj_last_error_message", "typedef struct LjModule LjModule"] {
        assert!(header.contains(sym), "{sym} missing");
    }
}
