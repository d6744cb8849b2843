//! Gauss quadrature on segments and triangles for non-polynomial
//! integrands, with uniform refinement until successive levels agree.

use crate::error::{Error, Result};

/// Relative agreement between successive refinement levels.
pub const REFINEMENT_TOLERANCE: f64 = 1e-12;
/// Deepest refinement level (4^k sub-triangles) before giving up.
pub const MAX_REFINEMENTS: u32 = 8;

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like starting guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Quadrature rule on the unit triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(l1, l2, l3)` with `x = l2`, `y = l3`.
    pub points: Vec<[f64; 3]>,
    /// Sum to 1/2, the area of the unit triangle.
    pub weights: Vec<f64>,
    pub degree: u32,
}

/// Collapsed-coordinate Gauss rule exact for polynomials of total degree
/// `degree` on the unit triangle.
pub fn triangle_rule(degree: u32) -> QuadratureRule {
    let nu = (degree as usize + 2).div_ceil(2);
    let nv = (degree as usize + 1).div_ceil(2).max(1);
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (u, a) in xu.iter().zip(&wu) {
        for (v, b) in xv.iter().zip(&wv) {
            let x = *u;
            let y = (1.0 - u) * v;
            points.push([1.0 - x - y, x, y]);
            weights.push(a * b * (1.0 - u));
        }
    }
    QuadratureRule { points, weights, degree }
}

/// Applies `rule` to a vector-valued integrand over the triangle `verts`,
/// accumulating both `int f` and `int |f|` per component.
fn apply_rule<F>(rule: &QuadratureRule, verts: &[[f64; 2]; 3], f: &F, sum: &mut [f64], abs: &mut [f64], buf: &mut [f64])
where
    F: Fn([f64; 2], &mut [f64]),
{
    let jac = ((verts[1][0] - verts[0][0]) * (verts[2][1] - verts[0][1])
        - (verts[2][0] - verts[0][0]) * (verts[1][1] - verts[0][1]))
        .abs();
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let p = [
            l[0] * verts[0][0] + l[1] * verts[1][0] + l[2] * verts[2][0],
            l[0] * verts[0][1] + l[1] * verts[1][1] + l[2] * verts[2][1],
        ];
        buf.iter_mut().for_each(|b| *b = 0.0);
        f(p, buf);
        let ww = w * jac;
        for ((s, a), b) in sum.iter_mut().zip(abs.iter_mut()).zip(buf.iter()) {
            *s += ww * b;
            *a += ww * b.abs();
        }
    }
}

/// The `4^level` congruent sub-triangles of `verts`.
pub fn subdivide(verts: &[[f64; 2]; 3], level: u32) -> Vec<[[f64; 2]; 3]> {
    let n = 1usize << level;
    let at = |i: usize, j: usize| {
        let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
        [
            verts[0][0] + a * (verts[1][0] - verts[0][0]) + b * (verts[2][0] - verts[0][0]),
            verts[0][1] + a * (verts[1][1] - verts[0][1]) + b * (verts[2][1] - verts[0][1]),
        ]
    };
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n - j {
            out.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
            if i + j + 1 < n {
                out.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
    }
    out
}

/// Integrates a vector-valued `f` (writing `len` components) over the
/// triangle `verts`, refining uniformly until every component agrees
/// between two successive levels to `1e-12` relative to `int |f_k|`.
pub fn integrate_triangle_many<F>(f: F, verts: &[[f64; 2]; 3], degree: u32, len: usize) -> Result<Vec<f64>>
where
    F: Fn([f64; 2], &mut [f64]),
{
    let rule = triangle_rule(degree);
    let mut buf = vec![0.0; len];
    let mut previous: Option<Vec<f64>> = None;
    for level in 0..=MAX_REFINEMENTS {
        let mut sum = vec![0.0; len];
        let mut abs = vec![0.0; len];
        for tri in subdivide(verts, level) {
            apply_rule(&rule, &tri, &f, &mut sum, &mut abs, &mut buf);
        }
        if let Some(prev) = &previous {
            let converged = sum
                .iter()
                .zip(prev)
                .zip(&abs)
                .all(|((s, p), a)| (s - p).abs() <= REFINEMENT_TOLERANCE * s.abs().max(*a));
            if converged {
                return Ok(sum);
            }
        }
        previous = Some(sum);
    }
    Err(Error::QuadratureNonConvergence { refinements: MAX_REFINEMENTS })
}

/// Scalar version of [`integrate_triangle_many`].
pub fn quadrature_integrate<F>(f: F, verts: &[[f64; 2]; 3], degree: u32) -> Result<f64>
where
    F: Fn([f64; 2]) -> f64,
{
    Ok(integrate_triangle_many(|p, out| out[0] = f(p), verts, degree, 1)?[0])
}

/// Line integral of `f` over the segment `a b` with an `n`-point Gauss
/// rule (exact for degree `2n - 1`).
pub fn segment_integrate<F>(f: F, a: [f64; 2], b: [f64; 2], n: usize) -> f64
where
    F: Fn([f64; 2]) -> f64,
{
    let (x, w) = gauss_legendre(n);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    x.iter()
        .zip(&w)
        .map(|(t, wt)| wt * f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))
        .sum::<f64>()
        * len
}

/// Segment integral refined by doubling the number of nodes until two
/// successive values agree to `1e-12` relative.
pub fn segment_integrate_adaptive<F>(f: F, a: [f64; 2], b: [f64; 2]) -> Result<f64>
where
    F: Fn([f64; 2]) -> f64,
{
    let mut n = 8;
    let mut prev = segment_integrate(&f, a, b, n);
    for _ in 0..MAX_REFINEMENTS {
        n *= 2;
        let next = segment_integrate(&f, a, b, n);
        let scale = segment_integrate(|p| f(p).abs(), a, b, n);
        if (next - prev).abs() <= REFINEMENT_TOLERANCE * next.abs().max(scale) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence { refinements: MAX_REFINEMENTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::monomial_integral_unit_simplex;
    use crate::rational::to_f64;
    use std::f64::consts::PI;

    const UNIT: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn gauss_legendre_is_exact() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..2 * n as i32 {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rule_reproduces_monomials() {
        for deg in 1..=14u32 {
            let rule = triangle_rule(deg);
            assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for a in 0..=deg {
                for b in 0..=deg - a {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32))
                        .sum();
                    let exact = to_f64(&monomial_integral_unit_simplex(&[a, b]));
                    assert!((q - exact).abs() < 1e-15, "deg={deg} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn refined_integration() {
        assert!((quadrature_integrate(|_| 1.0, &UNIT, 1).unwrap() - 0.5).abs() < 1e-15);
        let xy = quadrature_integrate(|p| p[0] * p[1], &UNIT, 2).unwrap();
        assert!((xy - 1.0 / 24.0).abs() < 1e-14);
        // int_0^1 (1 - x) cos^2(pi x) dx = 1/4 exactly.
        let c = quadrature_integrate(|p| (PI * p[0]).cos().powi(2), &UNIT, 6).unwrap();
        assert!((c - 0.25).abs() < 1e-12);
    }

    #[test]
    fn subdivision_preserves_area() {
        for level in 0..4 {
            let tris = subdivide(&UNIT, level);
            assert_eq!(tris.len(), 1 << (2 * level));
            let area: f64 = tris
                .iter()
                .map(|t| 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])))
                .sum();
            assert!((area - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn segment_rules() {
        let v = segment_integrate(|p| p[0] * p[0], [0.0, 0.0], [2.0, 0.0], 3);
        assert!((v - 8.0 / 3.0).abs() < 1e-14);
        let v = segment_integrate_adaptive(|p| (3.0 * p[0]).sin(), [0.0, 0.0], [PI, 0.0]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-13);
    }
}
