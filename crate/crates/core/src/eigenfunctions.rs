//! Closed-form eigenfunctions, distances between eigenfunctions, lattice
//! sampling for export, and detection of eigenfunction swaps in sweeps.

use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

use crate::constants::{root_tantanh, root_zcot, ConstantKind};
use crate::eigen::{BasisSpec, EigenResult, RayleighRitz};
use crate::error::{Error, Result};
use crate::geometry::{Shape, Triangle2D};
use crate::quadrature::{integrate_triangle_many, quadrature_integrate, segment_integrate_adaptive, triangle_rule};

/// `cos(z0 x / h) + cos(z0 (y - h) / h)`, the minimizer for `C^P_Gamma`
/// on the right isosceles triangle with legs `h` and Gamma on a leg.
pub fn exact_up_leg(x: f64, y: f64, h: f64) -> f64 {
    let z = root_zcot();
    (z * x / h).cos() + (z * (y - h) / h).cos()
}

/// Trace minimizer on the same triangle, with the arguments scaled by `h`.
pub fn exact_utr_leg(x: f64, y: f64, h: f64) -> f64 {
    let a = root_tantanh() / h;
    (a * x).cos() * (a * (y - h)).cosh() + (a * x).cosh() * (a * (y - h)).cos()
}

/// The two Neumann eigenfunctions of the unit equilateral triangle
/// `(0,0), (1,0), (1/2, sqrt 3 / 2)` belonging to the double eigenvalue
/// `(4 pi / 3)^2`, symmetric and antisymmetric about `x = 1/2`.
///
/// The product term carries a factor 2; without it the normal derivative
/// does not vanish on the slanted edges.
pub fn mccartin_pair(x: f64, y: f64) -> (f64, f64) {
    let s = 2.0 * x - 1.0;
    let c = 2.0 * (2.0 * PI / 3f64.sqrt() * y).cos();
    let u1 = (2.0 * PI / 3.0 * s).cos() - c * (PI / 3.0 * s).cos();
    let u2 = (2.0 * PI / 3.0 * s).sin() + c * (PI / 3.0 * s).sin();
    (u1, u2)
}

/// Known eigenfunctions with their gradients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExactFunction {
    PoincareLeg { h: f64 },
    TraceLeg { h: f64 },
    McCartinFirst,
    McCartinSecond,
}

impl ExactFunction {
    pub fn kind(&self) -> ConstantKind {
        match self {
            ExactFunction::PoincareLeg { .. } => ConstantKind::CpGamma,
            ExactFunction::TraceLeg { .. } => ConstantKind::CtrGamma,
            _ => ConstantKind::CpT,
        }
    }

    /// The triangle the function lives on.
    pub fn triangle(&self) -> Triangle2D {
        match self {
            ExactFunction::PoincareLeg { h } | ExactFunction::TraceLeg { h } => {
                Triangle2D::new(*h, 1.0, PI / 2.0).expect("valid leg triangle")
            }
            _ => Triangle2D::new(1.0, 1.0, PI / 3.0).expect("valid equilateral triangle"),
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            ExactFunction::PoincareLeg { h } => exact_up_leg(p[0], p[1], *h),
            ExactFunction::TraceLeg { h } => exact_utr_leg(p[0], p[1], *h),
            ExactFunction::McCartinFirst => mccartin_pair(p[0], p[1]).0,
            ExactFunction::McCartinSecond => mccartin_pair(p[0], p[1]).1,
        }
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        match self {
            ExactFunction::PoincareLeg { h } => {
                let a = root_zcot() / h;
                [-a * (a * x).sin(), -a * (a * (y - h)).sin()]
            }
            ExactFunction::TraceLeg { h } => {
                let a = root_tantanh() / h;
                let (u, v) = (a * x, a * (y - h));
                [
                    a * (-u.sin() * v.cosh() + u.sinh() * v.cos()),
                    a * (u.cos() * v.sinh() - u.cosh() * v.sin()),
                ]
            }
            ExactFunction::McCartinFirst | ExactFunction::McCartinSecond => {
                let s = 2.0 * x - 1.0;
                let w = 2.0 * PI / 3f64.sqrt();
                let (cy, sy) = (2.0 * (w * y).cos(), 2.0 * (w * y).sin());
                let (s2, c2) = (2.0 * PI / 3.0 * s).sin_cos();
                let (s1, c1) = (PI / 3.0 * s).sin_cos();
                if *self == ExactFunction::McCartinFirst {
                    [-4.0 * PI / 3.0 * s2 + 2.0 * PI / 3.0 * cy * s1, w * sy * c1]
                } else {
                    [4.0 * PI / 3.0 * c2 + 2.0 * PI / 3.0 * cy * c1, -w * sy * s1]
                }
            }
        }
    }

    /// Exact squared Rayleigh quotient (the eigenvalue).
    pub fn eigenvalue(&self) -> f64 {
        match self {
            ExactFunction::PoincareLeg { h } => (root_zcot() / h).powi(2),
            ExactFunction::TraceLeg { h } => {
                let z = root_tantanh();
                z * z.tanh() / h
            }
            _ => (4.0 * PI / 3.0).powi(2),
        }
    }
}

fn gamma_mean(f: &dyn Fn([f64; 2]) -> f64, t: &Triangle2D) -> Result<f64> {
    Ok(segment_integrate_adaptive(f, [0.0, 0.0], [t.h(), 0.0])? / t.h())
}

/// Squared Rayleigh quotient of `f` evaluated by quadrature.
pub fn rayleigh_quotient(f: &ExactFunction) -> Result<f64> {
    let t = f.triangle();
    let verts = t.vertices();
    let degree = 16;
    let num = quadrature_integrate(
        |p| {
            let g = f.gradient(p);
            g[0] * g[0] + g[1] * g[1]
        },
        &verts,
        degree,
    )?;
    let value = |p: [f64; 2]| f.value(p);
    let den = match f.kind() {
        ConstantKind::CpT => {
            let mean = quadrature_integrate(value, &verts, degree)? / t.area();
            quadrature_integrate(|p| (f.value(p) - mean).powi(2), &verts, degree)?
        }
        ConstantKind::CpGamma => {
            let mean = gamma_mean(&value, &t)?;
            quadrature_integrate(|p| (f.value(p) - mean).powi(2), &verts, degree)?
        }
        ConstantKind::CtrGamma => {
            let mean = gamma_mean(&value, &t)?;
            segment_integrate_adaptive(|p| (f.value(p) - mean).powi(2), [0.0, 0.0], [t.h(), 0.0])?
        }
    };
    Ok(num / den)
}

/// `min_s || s u / ||u|| - v / ||v|| ||` over the triangle, `s = +-1`.
///
/// Evaluated as `sqrt(2 - 2 |(u, v)| / (||u|| ||v||))`; integrating the
/// squared difference directly stalls the refinement test once the
/// distance is near rounding level.
pub fn compare_functions<F, G>(u: F, v: G, verts: &[[f64; 2]; 3], degree: u32) -> Result<f64>
where
    F: Fn([f64; 2]) -> f64,
    G: Fn([f64; 2]) -> f64,
{
    let m = integrate_triangle_many(
        |p, out| {
            let (a, b) = (u(p), v(p));
            out[0] = a * a;
            out[1] = b * b;
            out[2] = a * b;
        },
        verts,
        degree,
        3,
    )?;
    if !(m[0] > 0.0 && m[1] > 0.0) {
        return Err(Error::InvalidInput("cannot compare a function of zero norm".into()));
    }
    let cos = (m[2].abs() / (m[0].sqrt() * m[1].sqrt())).min(1.0);
    Ok((2.0 - 2.0 * cos).sqrt())
}

/// Distance between a computed extremal function and a closed-form one on
/// the triangle of the computed result, both with their means removed.
pub fn compare(computed: &EigenResult, exact: &ExactFunction) -> Result<f64> {
    let Shape::Triangle(t) = computed.shape else {
        return Err(Error::InvalidInput("eigenfunction comparison is two-dimensional".into()));
    };
    let verts = t.vertices();
    let value = |p: [f64; 2]| exact.value(p);
    let mean = match computed.kind {
        ConstantKind::CpT => quadrature_integrate(value, &verts, 16)? / t.area(),
        _ => gamma_mean(&value, &t)?,
    };
    let degree = 2 * computed.basis.n + 2;
    compare_functions(|p| computed.evaluate(&p), |p| exact.value(p) - mean, &verts, degree)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplePoint {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Largest absolute value scaled to +1.
    MaxOne,
    L2Unit,
}

/// Function values on a barycentric lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledField {
    pub points: Vec<SamplePoint>,
    pub normalization: Normalization,
}

impl SampledField {
    /// CSV with columns `l1,l2,l3,x,y,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples a function on the lattice `{(i, j, k) / r : i + j + k = r}`
/// and scales it so that the entry of largest magnitude equals +1.
pub fn sample_function<F: Fn([f64; 2]) -> f64>(f: F, t: &Triangle2D, resolution: usize) -> Result<SampledField> {
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let v = t.vertices();
    let r = resolution as f64;
    let mut points = Vec::with_capacity((resolution + 1) * (resolution + 2) / 2);
    for i in 0..=resolution {
        for j in 0..=resolution - i {
            let k = resolution - i - j;
            let (l1, l2, l3) = (i as f64 / r, j as f64 / r, k as f64 / r);
            let x = l1 * v[0][0] + l2 * v[1][0] + l3 * v[2][0];
            let y = l1 * v[0][1] + l2 * v[1][1] + l3 * v[2][1];
            points.push(SamplePoint { l1, l2, l3, x, y, value: f([x, y]) });
        }
    }
    let peak = points.iter().map(|p| p.value).fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.value), b.max(p.value)));
    if !(peak.abs() > 0.0) || hi - lo <= 1e-14 * peak.abs() {
        return Err(Error::InvalidInput("field is constant".into()));
    }
    for p in &mut points {
        p.value /= peak;
    }
    Ok(SampledField { points, normalization: Normalization::MaxOne })
}

/// [`sample_function`] applied to a computed extremal function.
pub fn sample_barycentric(result: &EigenResult, resolution: usize) -> Result<SampledField> {
    let Shape::Triangle(t) = result.shape else {
        return Err(Error::InvalidInput("sampling is two-dimensional".into()));
    };
    sample_function(|p| result.evaluate(&p), &t, resolution)
}

/// Overlap threshold below which consecutive minimizers count as swapped.
pub const SWAP_THRESHOLD: f64 = 0.5;

/// Overlaps of the first `C_T` eigenfunction between consecutive angles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingReport {
    pub rho: f64,
    pub alphas: Vec<f64>,
    /// `overlaps[i]` compares `alphas[i]` with `alphas[i + 1]`.
    pub overlaps: Vec<f64>,
    /// Indices `i` with `overlaps[i] < SWAP_THRESHOLD`.
    pub drops: Vec<usize>,
}

/// Follows the minimizer of the Poincare quotient along `alphas` and
/// reports where it changes character.
///
/// Functions on different triangles are compared through barycentric
/// coordinates: both are evaluated at the images of one quadrature rule on
/// the unit triangle and the normalized weighted inner product is taken.
pub fn crossing_sweep(h: f64, rho: f64, alphas: &[f64], basis: BasisSpec) -> Result<CrossingReport> {
    use rayon::prelude::*;
    let rule = triangle_rule(4 * basis.n + 2);
    let samples: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&alpha| -> Result<Vec<f64>> {
            let t = Triangle2D::new(h, rho, alpha)?;
            let pair = RayleighRitz::new(t, basis)?.eigenpairs(ConstantKind::CpT, 1)?.remove(0);
            let v = t.vertices();
            Ok(rule
                .points
                .iter()
                .map(|l| {
                    let p = [
                        l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                        l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
                    ];
                    crate::eigen::evaluate_expansion(&basis, &pair.coefficients, &p) - pair.offset
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&rule.weights).map(|((x, y), w)| w * x * y).sum::<f64>();
    let overlaps: Vec<f64> = samples
        .windows(2)
        .map(|w| dot(&w[0], &w[1]).abs() / (dot(&w[0], &w[0]) * dot(&w[1], &w[1])).sqrt())
        .collect();
    let drops = overlaps.iter().enumerate().filter(|(_, o)| **o < SWAP_THRESHOLD).map(|(i, _)| i).collect();
    Ok(CrossingReport { rho, alphas: alphas.to_vec(), overlaps, drops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::segment_integrate;

    #[test]
    fn closed_forms_at_known_points() {
        assert!((exact_up_leg(0.0, 1.0, 1.0) - 2.0).abs() < 1e-15);
        assert!(mccartin_pair(0.5, 0.3).1.abs() < 1e-15);
    }

    #[test]
    fn exact_functions_have_zero_gamma_mean() {
        let m = segment_integrate(|p| exact_up_leg(p[0], p[1], 1.0), [0.0, 0.0], [1.0, 0.0], 20);
        assert!(m.abs() < 1e-10);
        let m = segment_integrate(|p| exact_utr_leg(p[0], p[1], 1.0), [0.0, 0.0], [1.0, 0.0], 20);
        assert!(m.abs() < 1e-10);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let fs = [
            ExactFunction::PoincareLeg { h: 1.3 },
            ExactFunction::TraceLeg { h: 0.7 },
            ExactFunction::McCartinFirst,
            ExactFunction::McCartinSecond,
        ];
        let e = 1e-6;
        for f in fs {
            let p = [0.31, 0.22];
            let g = f.gradient(p);
            let dx = (f.value([p[0] + e, p[1]]) - f.value([p[0] - e, p[1]])) / (2.0 * e);
            let dy = (f.value([p[0], p[1] + e]) - f.value([p[0], p[1] - e])) / (2.0 * e);
            assert!((g[0] - dx).abs() < 1e-7 && (g[1] - dy).abs() < 1e-7, "{f:?}");
        }
    }

    #[test]
    fn quotients_reproduce_eigenvalues() {
        for f in [
            ExactFunction::PoincareLeg { h: 1.0 },
            ExactFunction::TraceLeg { h: 1.0 },
            ExactFunction::McCartinFirst,
            ExactFunction::McCartinSecond,
        ] {
            let q = rayleigh_quotient(&f).unwrap();
            assert!((q - f.eigenvalue()).abs() < 1e-8 * f.eigenvalue(), "{f:?}: {q}");
        }
    }

    #[test]
    fn leg_functions_are_symmetric_about_the_hypotenuse_normal() {
        let h = 1.7;
        for i in 0..10 {
            let x = 0.09 * i as f64 * h;
            let y = 0.05 * (10 - i) as f64 * h * 0.9;
            assert!((exact_up_leg(x, y, h) - exact_up_leg(h - y, h - x, h)).abs() < 1e-13);
            assert!((exact_utr_leg(x, y, h) - exact_utr_leg(h - y, h - x, h)).abs() < 1e-12);
        }
    }

    #[test]
    fn mccartin_pair_is_orthogonal_with_zero_mean() {
        let verts = ExactFunction::McCartinFirst.triangle().vertices();
        let (a, b) = (ExactFunction::McCartinFirst, ExactFunction::McCartinSecond);
        let mean1 = quadrature_integrate(|p| a.value(p), &verts, 16).unwrap();
        let mean2 = quadrature_integrate(|p| b.value(p), &verts, 16).unwrap();
        let m = quadrature_integrate(|p| a.value(p) * b.value(p), &verts, 16).unwrap();
        let k = quadrature_integrate(
            |p| {
                let (g, q) = (a.gradient(p), b.gradient(p));
                g[0] * q[0] + g[1] * q[1]
            },
            &verts,
            16,
        )
        .unwrap();
        for v in [mean1, mean2, m, k] {
            assert!(v.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn lattice_sampling() {
        let t = Triangle2D::new(1.0, 1.0, PI / 2.0).unwrap();
        let s = sample_function(|p| p[0] - 2.0 * p[1], &t, 2).unwrap();
        assert_eq!(s.points.len(), 6);
        assert!(s.points.iter().all(|p| (p.l1 + p.l2 + p.l3 - 1.0).abs() < 1e-15));
        assert!(s.points.iter().any(|p| p.value == 1.0));
        assert!(sample_function(|_| 3.0, &t, 4).is_err());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("l1,l2,l3,x,y,value\n"));
    }

    #[test]
    fn computed_leg_minimizers_match_closed_forms() {
        let t = Triangle2D::new(1.0, 1.0, PI / 2.0).unwrap();
        let rr = RayleighRitz::new(t, BasisSpec::monomial(2, 6)).unwrap();
        let cp = rr.lower_bound(ConstantKind::CpGamma).unwrap();
        let tr = rr.lower_bound(ConstantKind::CtrGamma).unwrap();
        let up = ExactFunction::PoincareLeg { h: 1.0 };
        let utr = ExactFunction::TraceLeg { h: 1.0 };
        let d = [compare(&cp, &up).unwrap(), compare(&tr, &utr).unwrap(), compare(&cp, &utr).unwrap()];
        assert!(d[0] < 1e-3 && d[1] < 1e-3 && d[2] > 0.1, "{d:?}");
    }

    #[test]
    fn swap_detected_only_for_the_isosceles_family() {
        let eps = PI / 36.0;
        let alphas: Vec<f64> = (0..8).map(|i| PI / 3.0 - eps + 2.0 * eps * (i as f64 + 0.5) / 8.0).collect();
        let basis = BasisSpec::monomial(2, 4);
        let r = crossing_sweep(1.0, 1.0, &alphas, basis).unwrap();
        assert_eq!(r.drops, vec![3], "{:?}", r.overlaps);
        for rho in [0.5f64.sqrt(), 1.5] {
            let r = crossing_sweep(1.0, rho, &alphas, basis).unwrap();
            assert!(r.drops.is_empty(), "{rho}: {:?}", r.overlaps);
        }
    }
}
