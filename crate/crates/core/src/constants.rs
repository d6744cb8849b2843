//! Exact and tabulated constants of the reference simplices and classical
//! literature bounds of the Poincare constant of a triangle.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{RefAngle, ReferenceTag, Triangle2D};

/// First positive zero of the Bessel function J0.
pub const BESSEL_J0_1: f64 = 2.404825557695773;
/// First positive zero of the Bessel function J1.
pub const BESSEL_J1_1: f64 = 3.831705970207512;

/// Which constant a value refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ConstantKind {
    /// Classical Poincare constant (zero mean over the simplex).
    #[serde(rename = "CP_T")]
    CpT,
    /// Poincare-type constant for functions with zero mean on Gamma.
    #[serde(rename = "CP_Gamma")]
    CpGamma,
    /// Trace constant for functions with zero mean on Gamma.
    #[serde(rename = "CTr_Gamma")]
    CtrGamma,
}

impl ConstantKind {
    /// True when the constant scales with `sqrt(h)` rather than `h`.
    pub fn is_trace(self) -> bool {
        self == ConstantKind::CtrGamma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    RootEquation,
    NumericTable,
}

/// A reference value together with where it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactConstant {
    pub value: f64,
    pub kind: ConstantKind,
    pub provenance: Provenance,
}

/// Refines a sign change of `f` on `[a, b]` by bisection to width `1e-15`,
/// then polishes with two Newton steps using the derivative `df`.
fn bracketed_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    debug_assert!(fa * f(b) < 0.0);
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut z = 0.5 * (a + b);
    for _ in 0..2 {
        let d = df(z);
        if d != 0.0 {
            let next = z - f(z) / d;
            if next > a - 1e-12 && next < b + 1e-12 {
                z = next;
            }
        }
    }
    z
}

/// Root of `z cot z + 1 = 0` in `(0, pi)`, approximately 2.0287578.
pub fn root_zcot() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        // Multiplying by sin z > 0 removes the pole: z cos z + sin z.
        bracketed_root(
            |z| z * z.cos() + z.sin(),
            |z| 2.0 * z.cos() - z * z.sin(),
            FRAC_PI_2,
            PI - 1e-9,
        )
    })
}

/// Root of `tan z + tanh z = 0` in `(0, pi)`, approximately 2.3650204.
pub fn root_tantanh() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        // cos z (tan z + tanh z) = sin z + cos z tanh z, finite on the bracket.
        bracketed_root(
            |z| z.sin() + z.cos() * z.tanh(),
            |z| z.cos() - z.sin() * z.tanh() + z.cos() / (z.cosh() * z.cosh()),
            FRAC_PI_2 + 1e-9,
            PI - 1e-9,
        )
    })
}

/// `(C^P_Gamma, C^Tr_Gamma)` of the right isosceles triangle with legs `h`
/// when Gamma is a leg.
pub fn exact_leg_constants(h: f64) -> (f64, f64) {
    let z = root_zcot();
    let zh = root_tantanh();
    (h / z, (h / (zh * zh.tanh())).sqrt())
}

/// `(C^P_Gamma, C^Tr_Gamma)` of the right isosceles triangle with
/// hypotenuse `h` when Gamma is the hypotenuse.
pub fn exact_hyp_constants(h: f64) -> (f64, f64) {
    (h / (2.0 * root_zcot()), (h / 2.0).sqrt())
}

/// Classical Poincare constant of a unit reference triangle.
pub fn exact_classical_cp(reference: ReferenceTag) -> Result<f64> {
    if reference.dimension != 2 {
        return Err(Error::InvalidInput(
            "no closed-form Poincare constant for reference tetrahedra".into(),
        ));
    }
    Ok(match reference.angle {
        RefAngle::PiOver4 => 1.0 / (2f64.sqrt() * PI),
        RefAngle::PiOver3 => 3.0 / (4.0 * PI),
        RefAngle::PiOver2 => 1.0 / PI,
        RefAngle::TwoPiOver3 => unreachable!("not a triangle tag"),
    })
}

/// Reference constants of the 2D maps used for Gamma-constants.
///
/// The `pi/2` reference has Gamma on a leg, the `pi/4` reference on the
/// hypotenuse (of unit length).
pub fn reference_gamma_constants_2d(angle: RefAngle) -> Option<(ExactConstant, ExactConstant)> {
    let (cp, ctr, prov_tr) = match angle {
        RefAngle::PiOver2 => {
            let (cp, ctr) = exact_leg_constants(1.0);
            (cp, ctr, Provenance::RootEquation)
        }
        RefAngle::PiOver4 => {
            let (cp, ctr) = exact_hyp_constants(1.0);
            (cp, ctr, Provenance::ClosedForm)
        }
        _ => return None,
    };
    Some((
        ExactConstant { value: cp, kind: ConstantKind::CpGamma, provenance: Provenance::RootEquation },
        ExactConstant { value: ctr, kind: ConstantKind::CtrGamma, provenance: prov_tr },
    ))
}

/// Published `(C^P_Gamma, C^Tr_Gamma)` of the four reference tetrahedra,
/// computed with a 215-dimensional polynomial space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceConstantTable {
    pub entries: Vec<(ReferenceTag, ExactConstant, ExactConstant)>,
}

impl ReferenceConstantTable {
    pub fn get(&self, tag: ReferenceTag, kind: ConstantKind) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == tag).and_then(|e| match kind {
            ConstantKind::CpGamma => Some(e.1.value),
            ConstantKind::CtrGamma => Some(e.2.value),
            ConstantKind::CpT => None,
        })
    }
}

pub fn reference_table_3d() -> ReferenceConstantTable {
    let rows = [
        (RefAngle::PiOver4, 0.341147, 0.831335),
        (RefAngle::PiOver3, 0.342589, 0.762905),
        (RefAngle::PiOver2, 0.375603, 0.751999),
        (RefAngle::TwoPiOver3, 0.4286652, 0.864630),
    ];
    let entries = rows
        .iter()
        .map(|&(a, cp, ctr)| {
            (
                ReferenceTag::tetrahedron(a),
                ExactConstant { value: cp, kind: ConstantKind::CpGamma, provenance: Provenance::NumericTable },
                ExactConstant { value: ctr, kind: ConstantKind::CtrGamma, provenance: Provenance::NumericTable },
            )
        })
        .collect();
    ReferenceConstantTable { entries }
}

/// Classical bounds of the Poincare constant `C^P_T` of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiteratureBounds {
    /// `diam / pi`, valid for convex domains.
    pub pw_upper: f64,
    /// Isosceles refinement (apex angle branches); `diam / j_{1,1}` otherwise.
    pub ls_upper: f64,
    /// `diam / (2 j_{0,1})`.
    pub cheng_lower: f64,
    /// `perimeter / (4 pi)`.
    pub perimeter_lower: f64,
    pub best_lower: f64,
}

/// Literature bounds for `t` (dimensional, in the units of `t`).
pub fn literature_bounds(t: &Triangle2D) -> LiteratureBounds {
    let m = t.metrics();
    let diam = m.diameter;
    let pw_upper = diam / PI;
    let ls_upper = match isosceles_apex_angle(t) {
        Some(apex) => diam * ls_isosceles_factor(apex),
        None => diam / BESSEL_J1_1,
    };
    let cheng_lower = diam / (2.0 * BESSEL_J0_1);
    let perimeter_lower = m.perimeter_or_surface / (4.0 * PI);
    LiteratureBounds {
        pw_upper,
        ls_upper,
        cheng_lower,
        perimeter_lower,
        best_lower: cheng_lower.max(perimeter_lower),
    }
}

/// Apex angle of `t` if two of its edges have equal length.
///
/// For `rho = 1` the apex is A and the apex angle is `alpha`; other
/// isosceles configurations are detected from the edge lengths.
pub fn isosceles_apex_angle(t: &Triangle2D) -> Option<f64> {
    if t.rho() == 1.0 {
        return Some(t.alpha());
    }
    let v = t.vertices();
    let d = |i: usize, j: usize| ((v[i][0] - v[j][0]).powi(2) + (v[i][1] - v[j][1]).powi(2)).sqrt();
    // Apex at vertex k with adjacent edges to i and j.
    for (k, i, j) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
        let (a, b) = (d(k, i), d(k, j));
        if (a - b).abs() <= 1e-12 * a.max(b) {
            let c = d(i, j);
            let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
            return Some(cos.acos());
        }
    }
    None
}

/// `C^P_T / diam` bound for an isosceles triangle with apex angle `apex`.
fn ls_isosceles_factor(apex: f64) -> f64 {
    let base = 1.0 / BESSEL_J1_1;
    let sector = 1.0 / (BESSEL_J0_1 * (2.0 * (PI - apex) * (0.5 * apex).tan()).sqrt());
    if apex <= FRAC_PI_3 {
        base
    } else if apex <= FRAC_PI_2 {
        base.min(sector)
    } else {
        sector
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // printed values are compared on purpose
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn roots_satisfy_their_equations() {
        let z = root_zcot();
        assert!((z / z.tan() + 1.0).abs() < 1e-14);
        assert!(z > FRAC_PI_2 && z < PI);
        let zh = root_tantanh();
        assert!((zh.tan() + zh.tanh()).abs() < 1e-12);
        assert!(zh > FRAC_PI_2 && zh < PI);
    }

    #[test]
    fn published_reference_values() {
        let (cp, ctr) = exact_leg_constants(1.0);
        assert!((cp - 0.49291).abs() < 5e-6);
        assert!((ctr - 0.65602).abs() < 5e-6);
        let (cp, ctr) = exact_hyp_constants(1.0);
        assert!((cp - 0.24646).abs() < 5e-6);
        assert!((ctr - 0.70711).abs() < 5e-6);
        assert_eq!(exact_leg_constants(1.0).0, 1.0 / root_zcot());
    }

    #[test]
    fn scaling_of_exact_constants() {
        let (cp1, tr1) = exact_leg_constants(1.0);
        let (cp4, tr4) = exact_leg_constants(4.0);
        assert!((cp4 - 4.0 * cp1).abs() < 1e-15);
        assert!((tr4 - 2.0 * tr1).abs() < 1e-15);
        let (cp2, tr2) = exact_hyp_constants(2.0);
        assert!((cp2 - cp1).abs() < 1e-15);
        assert!((tr2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_constants() {
        let c = |a| exact_classical_cp(ReferenceTag::triangle(a).unwrap()).unwrap();
        assert!((c(RefAngle::PiOver3) - 0.2387324).abs() < 1e-7);
        assert!((c(RefAngle::PiOver2) - 0.3183099).abs() < 1e-7);
        assert!((c(RefAngle::PiOver4) - 0.2250791).abs() < 1e-7);
        assert!(exact_classical_cp(ReferenceTag::tetrahedron(RefAngle::PiOver2)).is_err());
    }

    #[test]
    fn literature_bounds_of_right_isosceles() {
        let t = Triangle2D::new(1.0, 1.0, FRAC_PI_2).unwrap();
        let b = literature_bounds(&t);
        assert!((b.cheng_lower - 2f64.sqrt() / (2.0 * BESSEL_J0_1)).abs() < 1e-15);
        assert!((b.cheng_lower - 0.29404).abs() < 5e-6);
        assert!((b.perimeter_lower - 0.27169).abs() < 1e-5);
        assert_eq!(b.best_lower, b.cheng_lower);
        // sqrt2 * min(1/j11, 1/(j01 sqrt(2 (pi/2) tan(pi/4)))) = sqrt2 / (j01 sqrt(pi))
        let expect = 2f64.sqrt() / (BESSEL_J0_1 * PI.sqrt());
        assert!((b.ls_upper - expect).abs() < 1e-15);
        assert!(b.best_lower < 1.0 / PI && 1.0 / PI < b.ls_upper);
    }

    #[test]
    fn literature_bounds_of_equilateral() {
        let t = Triangle2D::new(1.0, 1.0, FRAC_PI_3).unwrap();
        let b = literature_bounds(&t);
        assert!((b.ls_upper - 1.0 / BESSEL_J1_1).abs() < 1e-14);
        assert!(3.0 / (4.0 * PI) <= b.ls_upper);
    }

    #[test]
    fn isosceles_detection_beyond_unit_rho() {
        let t = Triangle2D::new(1.0, 0.5f64.sqrt(), FRAC_PI_4).unwrap();
        let apex = isosceles_apex_angle(&t).unwrap();
        assert!((apex - FRAC_PI_2).abs() < 1e-12);
        let t = Triangle2D::new(1.0, 0.8, 1.0).unwrap();
        assert!(isosceles_apex_angle(&t).is_none());
    }

    fn bessel_series(order: u32, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(order as i32) / (1..=order).product::<u32>().max(1) as f64;
        let mut sum = term;
        for k in 1..60 {
            term *= -(0.25 * x * x) / (k as f64 * (k + order) as f64);
            sum += term;
        }
        sum
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) < 0.0) == (f(a) < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn bessel_roots_rederived_from_series() {
        let j0 = bisect(|x| bessel_series(0, x), 2.0, 3.0);
        let j1 = bisect(|x| bessel_series(1, x), 3.5, 4.0);
        assert!((j0 - BESSEL_J0_1).abs() < 1e-14);
        assert!((j1 - BESSEL_J1_1).abs() < 1e-14);
    }

    #[test]
    fn table_3d_lookup() {
        let t = reference_table_3d();
        let tag = |a| ReferenceTag::tetrahedron(a);
        assert_eq!(t.get(tag(RefAngle::PiOver2), ConstantKind::CpGamma), Some(0.375603));
        assert_eq!(t.get(tag(RefAngle::TwoPiOver3), ConstantKind::CtrGamma), Some(0.864630));
        assert_eq!(t.get(tag(RefAngle::PiOver2), ConstantKind::CpT), None);
    }
}
