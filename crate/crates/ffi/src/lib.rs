//! C ABI over the `surfham` engine.
//!
//! Layouts and solved cells are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`SurfhamStatus`]; on failure the message is available from
//! [`surfham_last_error`] on the same thread. Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use surfham::calibration::{prepare_cell, CalibrationOptions};
use surfham::device::{default_cell, load_layout, DeviceLayout};
use surfham::effective::{pauli_coefficients, solve_cell, EffectiveQubitH, PauliCoefficients, SolveOptions};
use surfham::gatesim::{process_fidelity, FidelityMeasure, GateSettings, NoiseLevel, NoiseModel, PulseShape, StrayTerms};
use surfham::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfhamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    UnknownElement = 6,
    Solve = 7,
    Calibration = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// A device layout.
pub struct SurfhamLayout {
    inner: DeviceLayout,
}

/// The effective Hamiltonian of one solved cell with its Pauli coefficients.
pub struct SurfhamCell {
    eff: EffectiveQubitH,
    pauli: PauliCoefficients,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SurfhamStatus {
    match e {
        Error::Io { .. } => SurfhamStatus::Io,
        Error::Parse(_) | Error::Csv(_) | Error::Json(_) => SurfhamStatus::Parse,
        Error::Validation(_) => SurfhamStatus::Validation,
        Error::UnknownCell(_) | Error::UnknownElement(_) => SurfhamStatus::UnknownElement,
        Error::Calibration(_) => SurfhamStatus::Calibration,
        Error::Precondition(_) | Error::Noise(_) => SurfhamStatus::InvalidArgument,
        _ => SurfhamStatus::Solve,
    }
}

struct Fail(SurfhamStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording its error and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SurfhamStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SurfhamStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SurfhamStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SurfhamStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SurfhamStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SurfhamStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SurfhamStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn surfham_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn surfham_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a layout from a TOML (or `.json`) file.
///
/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_load(path: *const c_char, out: *mut *mut SurfhamLayout) -> SurfhamStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = load_layout(path)?;
        write_out(out, Box::into_raw(Box::new(SurfhamLayout { inner })))
    })
}

/// Parses a layout from TOML text.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_from_toml(text: *const c_char, out: *mut *mut SurfhamLayout) -> SurfhamStatus {
    guard(|| {
        let inner = DeviceLayout::from_toml_str(str_arg(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(SurfhamLayout { inner })))
    })
}

/// The built-in single reference cell.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_default_cell(out: *mut *mut SurfhamLayout) -> SurfhamStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(SurfhamLayout { inner: default_cell() }))))
}

/// Releases a layout. Null is ignored.
///
/// # Safety
/// `layout` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_free(layout: *mut SurfhamLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_qubit_count(layout: *const SurfhamLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.inner.qubits.len())
}

/// Number of unit cells, or 0 for a null handle.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_cell_count(layout: *const SurfhamLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.inner.cells.len())
}

/// Biases one cell: `j_mhz == 0` puts every coupler at hard-OFF, otherwise
/// the gate coupler is set to `|J13| = j_mhz` with the others OFF. With
/// `resonant != 0` the gate partner is tuned onto the central qubit. The
/// result is a new single-cell layout.
///
/// # Safety
/// `layout` must be a live handle, `cell` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surfham_layout_calibrate(
    layout: *const SurfhamLayout,
    cell: *const c_char,
    j_mhz: f64,
    resonant: i32,
    out: *mut *mut SurfhamLayout,
) -> SurfhamStatus {
    guard(|| {
        let l = ref_arg(layout, "layout")?;
        let cell = str_arg(cell, "cell")?;
        if !j_mhz.is_finite() {
            return Err(Fail(SurfhamStatus::InvalidArgument, "j_mhz must be finite".into()));
        }
        let sub = l.inner.cell_subcircuit(cell)?;
        let target = (j_mhz != 0.0).then_some(j_mhz);
        let inner = prepare_cell(&sub, cell, target, resonant != 0, &CalibrationOptions::default())?;
        write_out(out, Box::into_raw(Box::new(SurfhamLayout { inner })))
    })
}

/// Solves one cell. `excitation_cap == 0` keeps the default truncation.
///
/// # Safety
/// `layout` must be a live handle, `cell` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surfham_cell_solve(
    layout: *const SurfhamLayout,
    cell: *const c_char,
    excitation_cap: usize,
    out: *mut *mut SurfhamCell,
) -> SurfhamStatus {
    guard(|| {
        let l = ref_arg(layout, "layout")?;
        let cell = str_arg(cell, "cell")?;
        let mut opts = SolveOptions::default();
        if excitation_cap > 0 {
            opts.policy.total_excitation_cap = Some(excitation_cap);
        }
        let eff = solve_cell(&l.inner, cell, &opts)?;
        let pauli = pauli_coefficients(&eff)?;
        write_out(out, Box::into_raw(Box::new(SurfhamCell { eff, pauli })))
    })
}

/// Releases a solved cell. Null is ignored.
///
/// # Safety
/// `cell` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn surfham_cell_free(cell: *mut SurfhamCell) {
    if !cell.is_null() {
        drop(Box::from_raw(cell));
    }
}

/// Number of qubits in a solved cell, or 0 for a null handle.
///
/// # Safety
/// `cell` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn surfham_cell_qubit_count(cell: *const SurfhamCell) -> usize {
    cell.as_ref().map_or(0, |c| c.eff.n_qubits())
}

/// Dressed 0→1 frequency of qubit `index` (cell order, central first), MHz.
///
/// # Safety
/// `cell` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surfham_cell_frequency(cell: *const SurfhamCell, index: usize, out: *mut f64) -> SurfhamStatus {
    guard(|| {
        let c = ref_arg(cell, "cell")?;
        let f = c
            .eff
            .transition(index, 0)
            .ok_or_else(|| Fail(SurfhamStatus::InvalidArgument, format!("no qubit at index {index}")))?;
        write_out(out, f)
    })
}

/// Normalized Pauli coefficient of a string such as `"ZIZII"`, MHz.
///
/// # Safety
/// `cell` must be a live handle, `pauli` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surfham_cell_coefficient(cell: *const SurfhamCell, pauli: *const c_char, out: *mut f64) -> SurfhamStatus {
    guard(|| {
        let c = ref_arg(cell, "cell")?;
        let s = str_arg(pauli, "pauli")?;
        let v = c.pauli.by_str(s).map_err(|e| Fail(SurfhamStatus::InvalidArgument, e.to_string()))?;
        write_out(out, v)
    })
}

/// Error of an iSWAP at `|J| = j_mhz` with a static Z1Z3 stray `zz_mhz`.
/// `t1_ns <= 0` means no decoherence (T2 = T1 otherwise). `process != 0`
/// returns the process infidelity instead of the average gate infidelity.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn surfham_gate_error(j_mhz: f64, zz_mhz: f64, t1_ns: f64, process: i32, out: *mut f64) -> SurfhamStatus {
    guard(|| {
        let pulse = PulseShape::calibrated(j_mhz)?;
        let noise = if t1_ns > 0.0 {
            NoiseModel::with_t1(NoiseLevel::WithZz, [t1_ns; 2])
        } else {
            NoiseModel::coherent(NoiseLevel::WithZz)
        };
        let settings = GateSettings {
            measure: if process != 0 { FidelityMeasure::Process } else { FidelityMeasure::Average },
            ..Default::default()
        };
        let e = process_fidelity(&pulse, &StrayTerms::zz_only(zz_mhz), &noise, &settings)?;
        write_out(out, e)
    })
}
