//! C ABI over `loopjordan`.
//!
//! Every fallible call returns an [`LjStatus`]; results go through out-pointers.
//! Handles are opaque and must be released with their `_free` function.
//! The message of the last failure on the calling thread is available from
//! [`lj_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loopjordan::algebra::LatticeParams;
use loopjordan::basis::{build_basis, Convention, ModuleSpec};
use loopjordan::characters::kac_weight;
use loopjordan::jordan::{j_measure, measure_b_tt_limit};
use loopjordan::koosaleur::{e_infinity, Chirality, LatticeOperators};
use loopjordan::Error;
use num_complex::Complex64;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LjStatus {
    Ok = 0,
    InvalidArgument = 1,
    DegenerateNormalization = 2,
    DegenerateMeasurement = 3,
    NumericalFailure = 4,
    Unresolved = 5,
    LimitFailure = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LjConvention {
    Plain = 0,
    Negated = 1,
}

/// Lattice operators that can be read out of a module handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LjOperator {
    /// Unscaled Hamiltonian, minus the sum of the generators.
    Hamiltonian = 0,
    /// Symmetric mode `H_n`.
    Hn = 1,
    /// Left mode `L_n`.
    Ln = 2,
    /// Right mode `Lbar_n`.
    LbarN = 3,
    /// Translation by one site.
    Translation = 4,
}

/// Opaque module handle: basis, parameters and cached generators.
pub struct LjModule {
    ops: LatticeOperators,
}

/// Result of the b(T, t) limit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LjBttLimit {
    pub b1: f64,
    pub b2: f64,
    pub spread: f64,
    pub max_imag: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> LjStatus {
    match e {
        Error::InvalidArgument(_) => LjStatus::InvalidArgument,
        Error::DegenerateNormalization(_) => LjStatus::DegenerateNormalization,
        Error::DegenerateMeasurement(_) => LjStatus::DegenerateMeasurement,
        Error::NumericalFailure(_) => LjStatus::NumericalFailure,
        Error::Unresolved { .. } => LjStatus::Unresolved,
        Error::LimitFailure(_) => LjStatus::LimitFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (LjStatus, String)>) -> LjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LjStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            LjStatus::Panic
        }
    }
}

fn lift(e: Error) -> (LjStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LjStatus, String) {
    (LjStatus::NullPointer, format!("{what} is null"))
}

fn convention(c: LjConvention) -> Convention {
    match c {
        LjConvention::Plain => Convention::Plain,
        LjConvention::Negated => Convention::Negated,
    }
}

unsafe fn module_from(
    n: usize,
    module: *const c_char,
    params: impl FnOnce(Convention) -> loopjordan::Result<LatticeParams>,
    conv: LjConvention,
    out: *mut *mut LjModule,
) -> Result<(), (LjStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = ptr::null_mut();
    if module.is_null() {
        return Err(null("module"));
    }
    let text = CStr::from_ptr(module)
        .to_str()
        .map_err(|_| (LjStatus::InvalidArgument, "module is not UTF-8".to_string()))?;
    let conv = convention(conv);
    let spec = ModuleSpec::new(ModuleSpec::parse_kind(text).map_err(lift)?, conv);
    let basis = build_basis(spec, n).map_err(lift)?;
    let ops = LatticeOperators::new(basis, params(conv).map_err(lift)?).map_err(lift)?;
    *out = Box::into_raw(Box::new(LjModule { ops }));
    Ok(())
}

/// Builds a module at central charge `c`.
///
/// `module` uses the same syntax as the command line, e.g. `"standard:1"` or `"glued-quotient:2"`.
///
/// # Safety
/// `module` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lj_module_new(
    n: usize,
    module: *const c_char,
    conv: LjConvention,
    c: f64,
    out: *mut *mut LjModule,
) -> LjStatus {
    guard(|| module_from(n, module, |cv| LatticeParams::from_c(n, c, cv), conv, out))
}

/// Builds a module with a free loop weight `m` and bulk energy `e_inf`.
///
/// # Safety
/// As [`lj_module_new`].
#[no_mangle]
pub unsafe extern "C" fn lj_module_new_custom(
    n: usize,
    module: *const c_char,
    conv: LjConvention,
    m: f64,
    e_inf: f64,
    out: *mut *mut LjModule,
) -> LjStatus {
    guard(|| module_from(n, module, |cv| LatticeParams::custom(n, m, e_inf, cv), conv, out))
}

/// Releases a module handle. Null is ignored.
///
/// # Safety
/// `module` must come from `lj_module_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lj_module_free(module: *mut LjModule) {
    if !module.is_null() {
        drop(Box::from_raw(module));
    }
}

/// Dimension of the module, or 0 for a null handle.
///
/// # Safety
/// `module` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lj_module_dim(module: *const LjModule) -> usize {
    module.as_ref().map_or(0, |m| m.ops.dim())
}

/// Writes an operator as a dense row-major matrix into `re` and `im`, each of length `len >= dim*dim`.
///
/// `mode` is the Fourier index for `Hn`, `Ln` and `LbarN`, and the power for `Translation`.
///
/// # Safety
/// `module` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lj_module_operator(
    module: *const LjModule,
    which: LjOperator,
    mode: i64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> LjStatus {
    guard(|| {
        let m = module.as_ref().ok_or_else(|| null("module"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let d = m.ops.dim();
        if len < d * d {
            return Err((LjStatus::BufferTooSmall, format!("need {} entries, got {len}", d * d)));
        }
        let op = match which {
            LjOperator::Hamiltonian => m.ops.hamiltonian_unscaled(),
            LjOperator::Hn => m.ops.h_n(mode).map_err(lift)?,
            LjOperator::Ln => m.ops.koo_saleur(mode, Chirality::Left).map_err(lift)?,
            LjOperator::LbarN => m.ops.koo_saleur(mode, Chirality::Right).map_err(lift)?,
            LjOperator::Translation => m.ops.tau(mode).map_err(lift)?,
        };
        let dense = op.to_dense();
        let re = std::slice::from_raw_parts_mut(re, d * d);
        let im = std::slice::from_raw_parts_mut(im, d * d);
        for r in 0..d {
            for c in 0..d {
                let z = dense[(r, c)];
                re[r * d + c] = z.re;
                im[r * d + c] = z.im;
            }
        }
        Ok(())
    })
}

unsafe fn complex_vec(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, (LjStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null("vector"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = std::slice::from_raw_parts(im, len);
    Ok(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect())
}

/// Jordan-ness J of two vectors of length `len`, given as split real and imaginary parts.
///
/// # Safety
/// All four arrays must hold `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lj_j_measure(
    u_re: *const f64,
    u_im: *const f64,
    v_re: *const f64,
    v_im: *const f64,
    len: usize,
    out: *mut f64,
) -> LjStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let u = complex_vec(u_re, u_im, len)?;
        let v = complex_vec(v_re, v_im, len)?;
        *out = j_measure(&u, &v).map_err(lift)?;
        Ok(())
    })
}

/// b(T, t) at `n` sites, extrapolated to c = 0.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lj_btt_limit(n: usize, out: *mut LjBttLimit) -> LjStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let lim = measure_b_tt_limit(n).map_err(lift)?;
        *out = LjBttLimit { b1: lim.b1, b2: lim.b2, spread: lim.spread, max_imag: lim.max_imag };
        Ok(())
    })
}

/// Bulk energy per site of the unscaled Hamiltonian at anisotropy `gamma`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lj_e_infinity(gamma: f64, out: *mut f64) -> LjStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = e_infinity(gamma).map_err(lift)?;
        Ok(())
    })
}

/// Kac weight h_{r,s} at parameter x.
#[no_mangle]
pub extern "C" fn lj_kac_weight(r: f64, s: f64, x: f64) -> f64 {
    kac_weight(r, s, x)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lj_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
