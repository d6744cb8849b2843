//! C ABI for `pbounds`.
//!
//! Shapes and solvers are opaque heap handles created by `pb_*_new` and
//! released by the matching `pb_*_free`. Every fallible call returns a
//! [`PbStatus`]; on failure the message is available from
//! [`pb_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pbounds::analytic::{upper_bounds_2d, upper_bounds_3d};
use pbounds::constants::ConstantKind;
use pbounds::eigen::{BasisSpec, RayleighRitz};
use pbounds::error::Error;
use pbounds::geometry::{Tetrahedron3D, Triangle2D};
use pbounds::majorant::{self, FieldsSpec, MajorantOptions, MeshSpec};
use pbounds::report::json_document;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateShape = 3,
    Numerical = 4,
    Inadmissible = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbConstantKind {
    CpT = 0,
    CpGamma = 1,
    CtrGamma = 2,
}

impl From<PbConstantKind> for ConstantKind {
    fn from(k: PbConstantKind) -> Self {
        match k {
            PbConstantKind::CpT => ConstantKind::CpT,
            PbConstantKind::CpGamma => ConstantKind::CpGamma,
            PbConstantKind::CtrGamma => ConstantKind::CtrGamma,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbBasis {
    Monomial = 0,
    Cosine = 1,
}

/// Dimensionless analytic upper bounds on a triangle.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PbUpperBounds2D {
    pub cp_gamma: f64,
    pub ctr_gamma: f64,
    pub cp_t: f64,
}

/// Dimensionless analytic upper bounds on a tetrahedron.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PbUpperBounds3D {
    pub cp_gamma: f64,
    pub ctr_gamma: f64,
}

/// Guaranteed lower bound of one constant.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PbLowerBound {
    /// Dimensionless lower bound of the constant.
    pub constant: f64,
    /// Largest eigenvalue of the pencil, the squared dimensional bound.
    pub lambda: f64,
    pub residual: f64,
}

pub struct PbTriangle(Triangle2D);
pub struct PbTetrahedron(Tetrahedron3D);
pub struct PbSolver(RayleighRitz);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PbStatus {
    match e {
        Error::InvalidInput(_) | Error::NotDistinguishedFacet | Error::Json(_) => PbStatus::InvalidInput,
        Error::DegenerateShape(_) => PbStatus::DegenerateShape,
        Error::Inadmissible(_) | Error::NonConformingFlux => PbStatus::Inadmissible,
        Error::Io(_) | Error::Csv(_) => PbStatus::Io,
        _ => PbStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), PbStatus>) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            PbStatus::Panic
        }
    }
}

fn fail(e: Error) -> PbStatus {
    let mut msg = e.to_string();
    if let Error::Inadmissible(v) = &e {
        for x in v {
            msg.push_str("; ");
            msg.push_str(&x.to_string());
        }
    }
    set_error(msg);
    status_of(&e)
}

fn null() -> PbStatus {
    set_error("null pointer argument".into());
    PbStatus::NullPointer
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Creates the triangle `(0,0), (h,0), (h rho cos a, h rho sin a)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_triangle_new(h: f64, rho: f64, alpha: f64, out: *mut *mut PbTriangle) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = Triangle2D::new(h, rho, alpha).map_err(fail)?;
        put(out, PbTriangle(t));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`pb_triangle_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_triangle_free(t: *mut PbTriangle) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Creates the tetrahedron with `D = h2 (sin t cos a, sin t sin a, cos t)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_tetrahedron_new(
    h1: f64,
    h2: f64,
    h3: f64,
    alpha: f64,
    theta: f64,
    out: *mut *mut PbTetrahedron,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = Tetrahedron3D::new(h1, h2, h3, alpha, theta).map_err(fail)?;
        put(out, PbTetrahedron(t));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`pb_tetrahedron_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_tetrahedron_free(t: *mut PbTetrahedron) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live triangle handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_triangle_upper_bounds(t: *const PbTriangle, out: *mut PbUpperBounds2D) -> PbStatus {
    guard(|| {
        if t.is_null() || out.is_null() {
            return Err(null());
        }
        let u = upper_bounds_2d(&(*t).0).map_err(fail)?;
        *out = PbUpperBounds2D { cp_gamma: u.cp_gamma, ctr_gamma: u.ctr_gamma, cp_t: u.cp_classical };
        Ok(())
    })
}

/// # Safety
/// `t` must be a live tetrahedron handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_tetrahedron_upper_bounds(t: *const PbTetrahedron, out: *mut PbUpperBounds3D) -> PbStatus {
    guard(|| {
        if t.is_null() || out.is_null() {
            return Err(null());
        }
        let u = upper_bounds_3d(&(*t).0).map_err(fail)?;
        *out = PbUpperBounds3D { cp_gamma: u.cp_gamma, ctr_gamma: u.ctr_gamma };
        Ok(())
    })
}

/// Assembles the Rayleigh-Ritz system on a triangle with polynomial degree `n`.
///
/// # Safety
/// `t` must be a live triangle handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_solver_new_triangle(
    t: *const PbTriangle,
    n: u32,
    basis: PbBasis,
    out: *mut *mut PbSolver,
) -> PbStatus {
    guard(|| {
        if t.is_null() || out.is_null() {
            return Err(null());
        }
        let spec = match basis {
            PbBasis::Monomial => BasisSpec::monomial(2, n),
            PbBasis::Cosine => BasisSpec::cosine(n),
        };
        let s = RayleighRitz::new((*t).0, spec).map_err(fail)?;
        put(out, PbSolver(s));
        Ok(())
    })
}

/// Assembles the Rayleigh-Ritz system on a tetrahedron with degree `n`.
///
/// # Safety
/// `t` must be a live tetrahedron handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_solver_new_tetrahedron(t: *const PbTetrahedron, n: u32, out: *mut *mut PbSolver) -> PbStatus {
    guard(|| {
        if t.is_null() || out.is_null() {
            return Err(null());
        }
        let s = RayleighRitz::new((*t).0, BasisSpec::monomial(3, n)).map_err(fail)?;
        put(out, PbSolver(s));
        Ok(())
    })
}

/// # Safety
/// `s` must be a live solver handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_solver_lower_bound(s: *const PbSolver, kind: PbConstantKind, out: *mut PbLowerBound) -> PbStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return Err(null());
        }
        let r = (*s).0.lower_bound(kind.into()).map_err(fail)?;
        *out = PbLowerBound { constant: r.constant_lower_bound, lambda: r.lambda_extremal, residual: r.residual };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from a `pb_solver_new_*` call not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_solver_free(s: *mut PbSolver) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, PbStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        PbStatus::InvalidInput
    })
}

/// Evaluates the error majorant for a mesh and fields given as JSON text
/// and writes the JSON report to `*out`, to be released with
/// [`pb_string_free`]. Inadmissible fields give [`PbStatus::Inadmissible`]
/// with the violated conditions in the error message.
///
/// # Safety
/// `mesh_json` and `fields_json` must be NUL-terminated strings and `out`
/// valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pb_majorant_json(
    mesh_json: *const c_char,
    fields_json: *const c_char,
    out: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let mesh: MeshSpec = serde_json::from_str(read_str(mesh_json)?).map_err(|e| fail(e.into()))?;
        let fields: FieldsSpec = serde_json::from_str(read_str(fields_json)?).map_err(|e| fail(e.into()))?;
        let rep = majorant::report(&mesh, &fields, MajorantOptions::default()).map_err(fail)?;
        let text = json_document("majorant", &rep).map_err(fail)?;
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The returned
/// string is owned by the caller and released with [`pb_string_free`].
#[no_mangle]
pub extern "C" fn pb_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
