use std::ffi::{CStr, CString};
use std::ptr;

use pbounds_ffi::*;

fn last_error() -> String {
    let p = pb_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { pb_string_free(p) };
    s
}

#[test]
fn triangle_bounds_bracket_the_leg_constant() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(pb_triangle_new(1.0, 1.0, std::f64::consts::FRAC_PI_2, &mut t), PbStatus::Ok);
        let mut up = PbUpperBounds2D::default();
        assert_eq!(pb_triangle_upper_bounds(t, &mut up), PbStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(pb_solver_new_triangle(t, 4, PbBasis::Monomial, &mut s), PbStatus::Ok);
        let mut low = PbLowerBound::default();
        assert_eq!(pb_solver_lower_bound(s, PbConstantKind::CpGamma, &mut low), PbStatus::Ok);
        // Both sides approach 1/zeta_0 = 0.49291 on the unit leg triangle.
        assert!(low.constant <= up.cp_gamma, "{low:?} {up:?}");
        assert!(low.constant > 0.49 && (up.cp_gamma - 0.49291).abs() < 1e-5, "{low:?} {up:?}");
        assert!(low.lambda > 0.0 && low.residual < 1e-8);
        pb_solver_free(s);
        pb_triangle_free(t);
    }
}

#[test]
fn tetrahedron_bounds_are_ordered() {
    unsafe {
        let half = std::f64::consts::FRAC_PI_2;
        let mut t = ptr::null_mut();
        assert_eq!(pb_tetrahedron_new(1.0, 1.0, 1.0, half, half, &mut t), PbStatus::Ok);
        let mut up = PbUpperBounds3D::default();
        assert_eq!(pb_tetrahedron_upper_bounds(t, &mut up), PbStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(pb_solver_new_tetrahedron(t, 2, &mut s), PbStatus::Ok);
        let mut low = PbLowerBound::default();
        assert_eq!(pb_solver_lower_bound(s, PbConstantKind::CtrGamma, &mut low), PbStatus::Ok);
        assert!(low.constant <= up.ctr_gamma);
        pb_solver_free(s);
        pb_tetrahedron_free(t);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(pb_triangle_new(1.0, 1.0, 0.0, &mut t), PbStatus::DegenerateShape);
        assert!(t.is_null());
        assert!(last_error().contains("alpha"));
        assert_eq!(pb_triangle_new(1.0, 1.0, 1.0, ptr::null_mut()), PbStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut s = ptr::null_mut();
        assert_eq!(pb_solver_new_triangle(ptr::null(), 3, PbBasis::Monomial, &mut s), PbStatus::NullPointer);
        // Freeing null handles is a no-op.
        pb_triangle_free(ptr::null_mut());
        pb_solver_free(ptr::null_mut());
        pb_string_free(ptr::null_mut());
    }
}

const MESH: &str = r#"{
  "vertices": [[0,0],[1,0],[1,1],[0,1]],
  "subdomains": [[0,1,2],[0,2,3]],
  "edges": [
    {"v": [0,1], "tag": "dirichlet", "left": 0},
    {"v": [1,2], "tag": "dirichlet", "left": 0},
    {"v": [2,3], "tag": "dirichlet", "left": 1},
    {"v": [3,0], "tag": "dirichlet", "left": 1},
    {"v": [0,2], "tag": "interior", "left": 0, "right": 1}
  ],
  "data": {"A": [[[1,0],[0,1]],[[1,0],[0,1]]], "rho": 0, "f": [[[0,0,0]],[[0,0,0]]], "lambda1": 1, "uD": [[1,0,1],[0,1,1]]}
}"#;

#[test]
fn majorant_round_trip_and_rejection() {
    // u = x + y is harmonic with flux (1, 1).
    let exact = r#"{"v": [[[1,0,1],[0,1,1]],[[1,0,1],[0,1,1]]],
                    "q": [[[[0,0,1]],[[0,0,1]]],[[[0,0,1]],[[0,0,1]]]]}"#;
    let mesh = CString::new(MESH).unwrap();
    let fields = CString::new(exact).unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        let st = pb_majorant_json(mesh.as_ptr(), fields.as_ptr(), &mut out);
        assert_eq!(st, PbStatus::Ok, "{}", last_error());
        let doc: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        pb_string_free(out);
        assert_eq!(doc["command"], "majorant");
        assert!(doc["data"]["total"].as_f64().unwrap() < 1e-12);

        let bad = CString::new(exact.replace("[[[0,0,1]],[[0,0,1]]],[[[0,0,1]]", "[[[0,0,2]],[[0,0,1]]],[[[0,0,1]]")).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(pb_majorant_json(mesh.as_ptr(), bad.as_ptr(), &mut out), PbStatus::Inadmissible);
        assert!(out.is_null());
        assert!(last_error().contains("flux jump"));
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pbounds.h")).unwrap();
    for name in ["pb_triangle_new", "pb_solver_lower_bound", "pb_majorant_json", "pb_last_error_message", "PB_STATUS_INADMISSIBLE"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let v = unsafe { CStr::from_ptr(pb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
