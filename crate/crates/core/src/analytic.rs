//! Guaranteed upper bounds from affine maps of reference simplices.
//!
//! Every bound has the form `sqrt(mu) * C_ref` (times an area factor for
//! trace constants), where `mu` is the largest eigenvalue of `B B^T`
//! scaled by the squared length of Gamma's leading edge. The closed-form
//! expressions for `mu` are kept as `printed_*` evaluators; the value used
//! is always checked against a symmetric eigenvalue computation.

use serde::Serialize;

use crate::constants::{exact_classical_cp, reference_gamma_constants_2d, reference_table_3d, ConstantKind, ReferenceConstantTable};
use crate::error::{Error, Result};
use crate::geometry::{affine_map_2d, affine_map_3d, RefAngle, ReferenceTag, Tetrahedron3D, Triangle2D};
use crate::linalg::symmetric_lambda_max;

/// Agreement required before a closed-form `mu` is trusted.
const PRINTED_TOLERANCE: f64 = 1e-12;

/// Which computation produced a `mu` value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuPath {
    /// Closed form, confirmed by the eigenvalue oracle.
    Printed,
    /// Closed form unavailable or wrong; symmetric eigenvalue used.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mu {
    pub value: f64,
    pub path: MuPath,
}

impl Mu {
    fn choose(printed: Option<f64>, oracle: f64) -> Mu {
        match printed {
            Some(p) if p.is_finite() && (p - oracle).abs() <= PRINTED_TOLERANCE * oracle.abs().max(1.0) => {
                Mu { value: p, path: MuPath::Printed }
            }
            _ => Mu { value: oracle, path: MuPath::Oracle },
        }
    }
}

/// Closed form for the right-angle map; always real.
pub fn printed_mu_leg(rho: f64, alpha: f64) -> f64 {
    let r2 = rho * rho;
    0.5 * (1.0 + r2 + (1.0 + r2 * r2 + 2.0 * r2 * (2.0 * alpha).cos()).sqrt())
}

/// Closed form for the hypotenuse map, `None` where its radicand is
/// negative.
pub fn printed_mu_hyp(rho: f64, alpha: f64) -> Option<f64> {
    let r2 = rho * rho;
    let c = alpha.cos();
    let rad = (2.0 * r2 + 1.0) * (2.0 * r2 + 1.0 - 4.0 * rho * c + 4.0 * r2 * (2.0 * alpha).cos());
    (rad >= 0.0).then(|| 2.0 * r2 - 2.0 * rho * c + 1.0 + rad.sqrt())
}

/// Closed form for the equilateral map, `None` where its radicand is
/// negative.
pub fn printed_mu_pi3(rho: f64, alpha: f64) -> Option<f64> {
    let s = 1.0 + rho * rho - rho * alpha.cos();
    let rad = s * s / 9.0 - rho * rho * alpha.sin().powi(2) / 3.0;
    // Rounding can push an exact zero slightly negative.
    let rad = if rad < 0.0 && rad > -1e-15 * s * s { 0.0 } else { rad };
    (rad >= 0.0).then(|| 2.0 / 3.0 * s + 2.0 * rad.sqrt())
}

fn mu_2d_oracle(rho: f64, alpha: f64, angle: RefAngle) -> Result<f64> {
    let t = Triangle2D::new(1.0, rho, alpha)?;
    let b = affine_map_2d(&t, ReferenceTag::triangle(angle)?)?;
    Ok(symmetric_lambda_max(&b.gram(), 2))
}

/// `lambda_max(B B^T) / h^2` for the map from the right isosceles triangle.
pub fn mu_leg(rho: f64, alpha: f64) -> Result<Mu> {
    Ok(Mu::choose(Some(printed_mu_leg(rho, alpha)), mu_2d_oracle(rho, alpha, RefAngle::PiOver2)?))
}

/// `lambda_max(B B^T) / h^2` for the map from the triangle with Gamma on
/// the hypotenuse.
pub fn mu_hyp(rho: f64, alpha: f64) -> Result<Mu> {
    Ok(Mu::choose(printed_mu_hyp(rho, alpha), mu_2d_oracle(rho, alpha, RefAngle::PiOver4)?))
}

/// `lambda_max(B B^T) / h^2` for the map from the equilateral triangle.
pub fn mu_pi3(rho: f64, alpha: f64) -> Result<Mu> {
    Ok(Mu::choose(printed_mu_pi3(rho, alpha), mu_2d_oracle(rho, alpha, RefAngle::PiOver3)?))
}

/// Closed-form cubic resolvent for the largest eigenvalue of the 3D map,
/// evaluated exactly as published. `None` where it is not real.
pub fn printed_mu_3d(t: &Tetrahedron3D, alpha_hat: RefAngle) -> Option<f64> {
    let b = affine_map_3d(t, ReferenceTag::tetrahedron(alpha_hat)).ok()?.matrix;
    let s = t.h2();
    let (b11, b12, b22, b32, b33) = (b[0][0] / s, b[0][1] / s, b[1][1] / s, b[2][1] / s, b[2][2] / s);
    let sq = |x: f64| x * x;
    let e1 = sq(b11) + sq(b12) + sq(b22) + sq(b32) + sq(b33);
    let e2 = sq(b11) * sq(b22) + sq(b11) * sq(b32) + sq(b11) * sq(b33) + sq(b12) * sq(b33) + sq(b22) * sq(b33);
    let e3 = e2 / 3.0 - sq(e1 / 3.0);
    let e4 = (e1 / 3.0).powi(3) - e1 * e2 / 3.0 + 0.5 * sq(b11) * sq(b22) * sq(b33);
    let disc = e3.powi(3) + e4 * e4;
    if disc < 0.0 {
        return None;
    }
    let e5 = e4 + disc.sqrt();
    if e5 == 0.0 {
        return None;
    }
    let c = e5.cbrt();
    Some(c - e3 / c + e1 / 3.0)
}

/// `lambda_max(B B^T) / h2^2` for the map from the reference tetrahedron
/// with angle `alpha_hat`.
pub fn mu_3d(t: &Tetrahedron3D, alpha_hat: RefAngle) -> Result<Mu> {
    let b = affine_map_3d(t, ReferenceTag::tetrahedron(alpha_hat))?;
    let oracle = symmetric_lambda_max(&b.gram(), 3) / (t.h2() * t.h2());
    Ok(Mu::choose(printed_mu_3d(t, alpha_hat), oracle))
}

/// One candidate bound from one reference map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub reference: ReferenceTag,
    pub mu: Mu,
    pub value: f64,
}

fn best(cands: &[Candidate]) -> Candidate {
    *cands
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one candidate")
}

/// Dimensionless upper bounds for a triangle (divide out `h` or `sqrt h`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound2D {
    pub cp_gamma: f64,
    pub ctr_gamma: f64,
    pub cp_classical: f64,
    pub cp_gamma_ref: ReferenceTag,
    pub ctr_gamma_ref: ReferenceTag,
    pub cp_classical_ref: ReferenceTag,
    pub candidates: Vec<(ConstantKind, Candidate)>,
}

impl UpperBound2D {
    pub fn get(&self, kind: ConstantKind) -> f64 {
        match kind {
            ConstantKind::CpT => self.cp_classical,
            ConstantKind::CpGamma => self.cp_gamma,
            ConstantKind::CtrGamma => self.ctr_gamma,
        }
    }
}

pub fn upper_bounds_2d(t: &Triangle2D) -> Result<UpperBound2D> {
    let (rho, alpha) = (t.rho(), t.alpha());
    let area_factor = rho * alpha.sin();
    let leg = ReferenceTag::triangle(RefAngle::PiOver2)?;
    let hyp = ReferenceTag::triangle(RefAngle::PiOver4)?;
    let equi = ReferenceTag::triangle(RefAngle::PiOver3)?;
    let (mu_l, mu_h, mu_e) = (mu_leg(rho, alpha)?, mu_hyp(rho, alpha)?, mu_pi3(rho, alpha)?);
    let (leg_cp, leg_tr) = reference_gamma_constants_2d(RefAngle::PiOver2).expect("leg reference");
    let (hyp_cp, hyp_tr) = reference_gamma_constants_2d(RefAngle::PiOver4).expect("hypotenuse reference");

    let cand = |reference, mu: Mu, value| Candidate { reference, mu, value };
    let cp = [
        cand(leg, mu_l, mu_l.value.sqrt() * leg_cp.value),
        cand(hyp, mu_h, mu_h.value.sqrt() * hyp_cp.value),
    ];
    // Gamma has length 1 on the leg reference, area 1/2 on both.
    let tr = [
        cand(leg, mu_l, (mu_l.value / area_factor).sqrt() * leg_tr.value),
        cand(hyp, mu_h, (mu_h.value / (2.0 * area_factor)).sqrt() * hyp_tr.value),
    ];
    let classical = [
        cand(hyp, mu_h, mu_h.value.sqrt() * exact_classical_cp(hyp)?),
        cand(equi, mu_e, mu_e.value.sqrt() * exact_classical_cp(equi)?),
        cand(leg, mu_l, mu_l.value.sqrt() * exact_classical_cp(leg)?),
    ];
    let (c1, c2, c3) = (best(&cp), best(&tr), best(&classical));
    let mut candidates = Vec::new();
    candidates.extend(cp.iter().map(|c| (ConstantKind::CpGamma, *c)));
    candidates.extend(tr.iter().map(|c| (ConstantKind::CtrGamma, *c)));
    candidates.extend(classical.iter().map(|c| (ConstantKind::CpT, *c)));
    Ok(UpperBound2D {
        cp_gamma: c1.value,
        ctr_gamma: c2.value,
        cp_classical: c3.value,
        cp_gamma_ref: c1.reference,
        ctr_gamma_ref: c2.reference,
        cp_classical_ref: c3.reference,
        candidates,
    })
}

/// Upper estimates for a tetrahedron, dimensionless in `h2`.
///
/// The reference constants are themselves numerical, so these are
/// estimates rather than certified bounds; `approximate_reference` says so.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound3D {
    pub cp_gamma: f64,
    pub ctr_gamma: f64,
    pub cp_gamma_ref: ReferenceTag,
    pub ctr_gamma_ref: ReferenceTag,
    pub approximate_reference: bool,
    pub candidates: Vec<(ConstantKind, Candidate)>,
}

impl UpperBound3D {
    pub fn get(&self, kind: ConstantKind) -> Option<f64> {
        match kind {
            ConstantKind::CpT => None,
            ConstantKind::CpGamma => Some(self.cp_gamma),
            ConstantKind::CtrGamma => Some(self.ctr_gamma),
        }
    }
}

pub fn upper_bounds_3d(t: &Tetrahedron3D) -> Result<UpperBound3D> {
    upper_bounds_3d_with(t, &reference_table_3d())
}

/// Same as [`upper_bounds_3d`] with a caller-supplied reference table,
/// e.g. one recomputed by the eigensolver.
pub fn upper_bounds_3d_with(t: &Tetrahedron3D, table: &ReferenceConstantTable) -> Result<UpperBound3D> {
    let face_ratio = t.alpha().sin() * t.theta().sin();
    let mut cp = Vec::new();
    let mut tr = Vec::new();
    for tag in ReferenceTag::TETRAHEDRA {
        let lookup = |kind| {
            table
                .get(tag, kind)
                .ok_or_else(|| Error::InvalidInput(format!("reference table lacks {} {kind:?}", tag.angle.label())))
        };
        let (c_p, c_tr) = (lookup(ConstantKind::CpGamma)?, lookup(ConstantKind::CtrGamma)?);
        let mu = mu_3d(t, tag.angle)?;
        let sin_hat = tag.angle.radians().sin();
        cp.push(Candidate { reference: tag, mu, value: mu.value.sqrt() * c_p });
        // |Gamma| / |Gamma_hat| = h1 h3 and |det B| = h1 h2 h3 sin a sin t / sin a_hat.
        tr.push(Candidate { reference: tag, mu, value: (mu.value * sin_hat / face_ratio).sqrt() * c_tr });
    }
    let (c1, c2) = (best(&cp), best(&tr));
    let mut candidates: Vec<_> = cp.iter().map(|c| (ConstantKind::CpGamma, *c)).collect();
    candidates.extend(tr.iter().map(|c| (ConstantKind::CtrGamma, *c)));
    Ok(UpperBound3D {
        cp_gamma: c1.value,
        ctr_gamma: c2.value,
        cp_gamma_ref: c1.reference,
        ctr_gamma_ref: c2.reference,
        approximate_reference: true,
        candidates,
    })
}

/// Trace estimate with the area ratio applied linearly instead of under
/// the square root, i.e. `min sqrt(mu) * sin(a_hat) / (rho sin a sin t) * C_ref`.
///
/// This is the variant behind the published tetrahedron trace table. It
/// agrees with [`upper_bounds_3d`] when the ratio is 1 and exceeds it when
/// the ratio of the winning reference is above 1, as on the whole published
/// grid. With a ratio below 1 it is not a guaranteed bound, so it is kept
/// only for comparison with that table.
pub fn trace_upper_3d_linear_factor(t: &Tetrahedron3D) -> Result<f64> {
    let table = reference_table_3d();
    let denom = t.rho() * t.alpha().sin() * t.theta().sin();
    let mut best = f64::INFINITY;
    for tag in ReferenceTag::TETRAHEDRA {
        let c_tr = table.get(tag, ConstantKind::CtrGamma).expect("full table");
        let mu = mu_3d(t, tag.angle)?;
        best = best.min(mu.value.sqrt() * tag.angle.radians().sin() / denom * c_tr);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn identity_maps_give_unit_mu() {
        assert!(close(mu_leg(1.0, FRAC_PI_2).unwrap().value, 1.0, 1e-14));
        assert!(close(mu_hyp(0.5f64.sqrt(), FRAC_PI_4).unwrap().value, 1.0, 1e-14));
        assert!(close(mu_pi3(1.0, FRAC_PI_3).unwrap().value, 1.0, 1e-14));
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!(close(mu_3d(&t, RefAngle::PiOver2).unwrap().value, 1.0, 1e-14));
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, FRAC_PI_3, FRAC_PI_2).unwrap();
        assert!(close(mu_3d(&t, RefAngle::PiOver3).unwrap().value, 1.0, 1e-14));
    }

    #[test]
    fn leg_and_equilateral_closed_forms_hold() {
        assert!(close(printed_mu_leg(1.0, FRAC_PI_3), 1.5, 1e-15));
        let m = mu_pi3(1.0, FRAC_PI_2).unwrap();
        assert!(close(m.value, 2.0, 1e-13));
        assert_eq!(m.path, MuPath::Printed);
        assert_eq!(mu_leg(0.7, 2.0).unwrap().path, MuPath::Printed);
    }

    #[test]
    fn hypotenuse_closed_form_is_rejected_where_wrong() {
        assert!(printed_mu_hyp(1.0, FRAC_PI_2).is_none());
        let m = mu_hyp(1.0, FRAC_PI_2).unwrap();
        assert_eq!(m.path, MuPath::Oracle);
        assert!(close(m.value, 3.0 + 5f64.sqrt(), 1e-14));
    }

    #[test]
    fn resolvent_falls_back_to_oracle() {
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, 0.9, 1.2).unwrap();
        for a in [RefAngle::PiOver4, RefAngle::PiOver3, RefAngle::PiOver2, RefAngle::TwoPiOver3] {
            let m = mu_3d(&t, a).unwrap();
            assert_eq!(m.path, MuPath::Oracle);
            assert!(m.value > 0.0);
        }
    }

    #[test]
    fn reference_triangles_reproduce_their_constants() {
        let ub = upper_bounds_2d(&Triangle2D::new(1.0, 1.0, FRAC_PI_2).unwrap()).unwrap();
        assert!(close(ub.cp_gamma, 0.49291, 5e-6));
        assert!(close(ub.ctr_gamma, 0.65602, 5e-6));
        assert!(close(ub.cp_classical, 1.0 / PI, 1e-14));
        assert_eq!(ub.cp_classical_ref.angle, RefAngle::PiOver2);
        let ub = upper_bounds_2d(&Triangle2D::new(1.0, 0.5f64.sqrt(), FRAC_PI_4).unwrap()).unwrap();
        assert!(close(ub.cp_gamma, 0.24646, 5e-6));
        assert!(close(ub.ctr_gamma, 0.5f64.sqrt(), 1e-14));
    }

    #[test]
    fn bounds_do_not_depend_on_h() {
        let a = upper_bounds_2d(&Triangle2D::new(1.0, 1.3, 1.1).unwrap()).unwrap();
        let b = upper_bounds_2d(&Triangle2D::new(3.0, 1.3, 1.1).unwrap()).unwrap();
        assert_eq!(a.cp_gamma, b.cp_gamma);
    }

    #[test]
    fn tetrahedron_upper_bounds() {
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, FRAC_PI_2, FRAC_PI_2).unwrap();
        let ub = upper_bounds_3d(&t).unwrap();
        assert!(close(ub.cp_gamma, 0.37560, 5e-6));
        assert!(close(ub.ctr_gamma, 0.75200, 5e-6));
        assert!(ub.approximate_reference);
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, FRAC_PI_6, FRAC_PI_6).unwrap();
        assert!(close(upper_bounds_3d(&t).unwrap().cp_gamma, 0.49035, 1e-5));
        let t = Tetrahedron3D::new(1.0, 1.0, 1.0, FRAC_PI_6, FRAC_PI_2).unwrap();
        assert!(close(trace_upper_3d_linear_factor(&t).unwrap(), 1.22920, 1e-5));
        assert!(upper_bounds_3d(&t).unwrap().ctr_gamma < 1.22920);
    }
}
