//! Exact rational integration of polynomials over simplices and over the
//! distinguished boundary part Gamma.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Exponent multi-index; unused trailing entries are zero.
pub type Exponent = [u32; 3];

/// Sparse polynomial in up to three variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Exponent, BigRational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Polynomial::monomial(dim, [0; 3], c)
    }

    pub fn monomial(dim: usize, exp: Exponent, coeff: BigRational) -> Self {
        let mut p = Polynomial::zero(dim);
        p.add_term(exp, coeff);
        p
    }

    /// The coordinate function `x_k`.
    pub fn variable(dim: usize, k: usize) -> Self {
        let mut e = [0; 3];
        e[k] = 1;
        Polynomial::monomial(dim, e, BigRational::one())
    }

    /// Builds from `(exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Exponent, BigRational)>) -> Self {
        let mut p = Polynomial::zero(dim);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, exp: Exponent, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        debug_assert!(exp[self.dim..].iter().all(|&e| e == 0));
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial { dim: self.dim, terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Polynomial::constant(self.dim, BigRational::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to `x_k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Polynomial::zero(self.dim);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut ne = *e;
                ne[k] -= 1;
                out.add_term(ne, c * BigRational::from_integer(BigInt::from(e[k])));
            }
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = crate::rational::to_f64(c);
                for k in 0..self.dim {
                    v *= x[k].powi(e[k] as i32);
                }
                v
            })
            .sum()
    }

    pub fn evaluate_exact(&self, x: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for k in 0..self.dim {
                v *= num_traits::pow(x[k].clone(), e[k] as usize);
            }
            s += v;
        }
        s
    }

    /// Substitutes `x_k = subs[k]` (polynomials in a possibly different
    /// number of variables `target_dim`).
    pub fn compose(&self, subs: &[Polynomial], target_dim: usize) -> Polynomial {
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let max = self.terms.keys().map(|e| e[k]).max().unwrap_or(0);
            let mut row = vec![Polynomial::constant(target_dim, BigRational::one())];
            for p in 1..=max as usize {
                let next = &row[p - 1] * &subs[k];
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Polynomial::zero(target_dim);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target_dim, c.clone());
            for k in 0..self.dim {
                if e[k] > 0 {
                    t = &t * &powers[k][e[k] as usize];
                }
            }
            out = &out + &t;
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, b: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.dim = out.dim.max(b.dim);
        for (e, c) in &b.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, b: &Polynomial) -> Polynomial {
        self + &(-b)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { dim: self.dim, terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, b: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.dim.max(b.dim));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &b.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

fn factorials() -> &'static Vec<BigInt> {
    static CACHE: OnceLock<Vec<BigInt>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut v = vec![BigInt::one()];
        for k in 1..=64u32 {
            let next = &v[k as usize - 1] * BigInt::from(k);
            v.push(next);
        }
        v
    })
}

fn factorial(n: u32) -> BigInt {
    factorials().get(n as usize).cloned().unwrap_or_else(|| crate::rational::factorial(n))
}

/// `prod(e_k!) / (|e| + d)!`, the integral of `x^e` over the unit simplex
/// `{x_k >= 0, sum x_k <= 1}` in dimension `d`.
pub fn monomial_integral_unit_simplex(exps: &[u32]) -> BigRational {
    let d = exps.len() as u32;
    let num = exps.iter().fold(BigInt::one(), |acc, &e| acc * factorial(e));
    let total: u32 = exps.iter().sum();
    BigRational::new(num, factorial(total + d))
}

/// Simplex with rational vertices, in dimension 1, 2 or 3.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSimplex {
    dim: usize,
    vertices: Vec<Vec<BigRational>>,
}

impl RationalSimplex {
    pub fn new(vertices: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = vertices.len().saturating_sub(1);
        if !(1..=3).contains(&dim) || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("simplex needs d+1 vertices with d coordinates".into()));
        }
        let s = RationalSimplex { dim, vertices };
        if s.jacobian_determinant().is_zero() {
            return Err(Error::DegenerateShape("simplex has zero measure".into()));
        }
        Ok(s)
    }

    pub fn from_f64(vertices: &[&[f64]]) -> Result<Self> {
        let v = vertices
            .iter()
            .map(|p| p.iter().map(|&x| crate::rational::exact(x)).collect())
            .collect();
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    /// Edge vector `v_k - v_0` (k >= 1).
    fn edge(&self, k: usize) -> Vec<BigRational> {
        (0..self.dim).map(|i| &self.vertices[k][i] - &self.vertices[0][i]).collect()
    }

    /// Determinant of the map from the unit simplex.
    pub fn jacobian_determinant(&self) -> BigRational {
        let e: Vec<Vec<BigRational>> = (1..=self.dim).map(|k| self.edge(k)).collect();
        match self.dim {
            1 => e[0][0].clone(),
            2 => &e[0][0] * &e[1][1] - &e[1][0] * &e[0][1],
            _ => {
                &e[0][0] * (&e[1][1] * &e[2][2] - &e[2][1] * &e[1][2])
                    - &e[1][0] * (&e[0][1] * &e[2][2] - &e[2][1] * &e[0][2])
                    + &e[2][0] * (&e[0][1] * &e[1][2] - &e[1][1] * &e[0][2])
            }
        }
    }

    /// `|T|`.
    pub fn measure(&self) -> BigRational {
        self.jacobian_determinant().abs() / BigRational::from_integer(factorial(self.dim as u32))
    }

    /// Coordinates `x_i` as affine polynomials in the unit-simplex variables.
    pub fn pullback_coordinates(&self) -> Vec<Polynomial> {
        let edges: Vec<Vec<BigRational>> = (1..=self.dim).map(|k| self.edge(k)).collect();
        (0..self.dim)
            .map(|i| {
                let mut p = Polynomial::constant(self.dim, self.vertices[0][i].clone());
                for (k, e) in edges.iter().enumerate() {
                    let mut ex = [0; 3];
                    ex[k] = 1;
                    p.add_term(ex, e[i].clone());
                }
                p
            })
            .collect()
    }
}

/// `int_S p(x) dx` exactly.
pub fn integrate_polynomial_over_simplex(p: &Polynomial, simplex: &RationalSimplex) -> BigRational {
    let pulled = p.compose(&simplex.pullback_coordinates(), simplex.dim);
    integrate_over_unit_simplex(&pulled, simplex.dim) * simplex.jacobian_determinant().abs()
}

/// `int` over the unit simplex of dimension `dim`.
pub fn integrate_over_unit_simplex(p: &Polynomial, dim: usize) -> BigRational {
    p.terms()
        .map(|(e, c)| c * monomial_integral_unit_simplex(&e[..dim]))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `int_0^1 p(a + t (b - a)) dt` for a segment in the plane; multiply by
/// the segment length to obtain the line integral.
pub fn integrate_along_segment(p: &Polynomial, a: &[BigRational; 2], b: &[BigRational; 2]) -> BigRational {
    let line = |i: usize| {
        let mut q = Polynomial::constant(1, a[i].clone());
        q.add_term([1, 0, 0], &b[i] - &a[i]);
        q
    };
    let pulled = p.compose(&[line(0), line(1)], 1);
    integrate_over_unit_simplex(&pulled, 1)
}

/// Integral over the distinguished boundary part Gamma of `simplex`.
///
/// Gamma is the edge `v0 v1` in 2D and the face `v0 v1 v2` in 3D; it must
/// lie in the coordinate plane `x_2 = 0` (the y-axis coordinate), so that
/// its measure is rational.
pub fn integrate_polynomial_over_facet(p: &Polynomial, simplex: &RationalSimplex) -> Result<BigRational> {
    let d = simplex.dim;
    if d < 2 {
        return Err(Error::NotDistinguishedFacet);
    }
    let v = &simplex.vertices;
    if (0..d).any(|k| !v[k][1].is_zero()) {
        return Err(Error::NotDistinguishedFacet);
    }
    match d {
        2 => {
            let len = (&v[1][0] - &v[0][0]).abs();
            let a = [v[0][0].clone(), v[0][1].clone()];
            let b = [v[1][0].clone(), v[1][1].clone()];
            Ok(integrate_along_segment(p, &a, &b) * len)
        }
        _ => {
            // Parametrize by (s, t) -> v0 + s (v1 - v0) + t (v2 - v0).
            let coord = |i: usize| {
                let mut q = Polynomial::constant(2, v[0][i].clone());
                q.add_term([1, 0, 0], &v[1][i] - &v[0][i]);
                q.add_term([0, 1, 0], &v[2][i] - &v[0][i]);
                q
            };
            let jac = ((&v[1][0] - &v[0][0]) * (&v[2][2] - &v[0][2])
                - (&v[1][2] - &v[0][2]) * (&v[2][0] - &v[0][0]))
                .abs();
            let pulled = p.compose(&[coord(0), coord(1), coord(2)], 2);
            Ok(integrate_over_unit_simplex(&pulled, 2) * jac)
        }
    }
}

/// Decodes a flat index over `{0..=max}^d` (last coordinate fastest).
fn multi_index(mut idx: usize, d: usize, side: usize) -> [u32; 3] {
    let mut e = [0u32; 3];
    for k in (0..d).rev() {
        e[k] = (idx % side) as u32;
        idx /= side;
    }
    e
}

fn flat_index(e: &[u32], side: usize) -> usize {
    e.iter().fold(0, |acc, &x| acc * side + x as usize)
}

/// Moments `int_S x^m` for every `m` with all entries `<= max`, where `S`
/// has the given `d + 1` vertices and `det = d! |S|`.
fn simplex_moments(vertices: &[Vec<BigRational>], det: &BigRational, max: usize) -> Vec<BigRational> {
    let d = vertices.len() - 1;
    let side = max + 1;
    let count = side.pow(d as u32);
    let indices: Vec<[u32; 3]> = (0..count).map(|i| multi_index(i, d, side)).collect();
    // vertex_power(v, k) = prod_j v_j^{k_j}, None when it vanishes.
    let powers: Vec<Vec<Vec<BigRational>>> = vertices
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| {
                    let mut row = vec![BigRational::one()];
                    for p in 1..=max {
                        let next = &row[p - 1] * c;
                        row.push(next);
                    }
                    row
                })
                .collect()
        })
        .collect();
    let vertex_power = |i: usize, k: &[u32; 3]| -> Option<BigRational> {
        // Multinomial |k|! / k! from expanding (sum_j lambda_i v_ij)^...
        let total: u32 = k[..d].iter().sum();
        let denom = k[..d].iter().fold(BigInt::one(), |a, &e| a * factorial(e));
        let mut out = BigRational::new(factorial(total), denom);
        for j in 0..d {
            let p = &powers[i][j][k[j] as usize];
            if p.is_zero() {
                return None;
            }
            out *= p;
        }
        Some(out)
    };
    // Complete homogeneous sums, folding in one vertex at a time.
    let mut acc: Vec<BigRational> = indices
        .iter()
        .map(|m| vertex_power(d, m).unwrap_or_else(BigRational::zero))
        .collect();
    for i in (0..d).rev() {
        if vertices[i].iter().all(|c| c.is_zero()) {
            continue;
        }
        let pw: Vec<Option<BigRational>> = indices.iter().map(|k| vertex_power(i, k)).collect();
        let mut next = vec![BigRational::zero(); count];
        for (mi, m) in indices.iter().enumerate() {
            let mut s = BigRational::zero();
            for (ki, k) in indices.iter().enumerate() {
                if (0..d).any(|j| k[j] > m[j]) {
                    continue;
                }
                let Some(p) = &pw[ki] else { continue };
                let mut rest = [0u32; 3];
                for j in 0..d {
                    rest[j] = m[j] - k[j];
                }
                let r = &acc[flat_index(&rest[..d], side)];
                if !r.is_zero() {
                    s += p * r;
                }
            }
            next[mi] = s;
        }
        acc = next;
    }
    indices
        .iter()
        .zip(acc)
        .map(|(m, s)| {
            let total: u32 = m[..d].iter().sum();
            let num = m[..d].iter().fold(BigInt::one(), |a, &e| a * factorial(e));
            s * det * BigRational::new(num, factorial(total + d as u32))
        })
        .collect()
}

/// All moments `int_T x^a y^b z^c` with every exponent up to `max`, plus
/// the moments over Gamma, for a simplex in standard position.
pub struct MomentTable {
    dim: usize,
    max: usize,
    volume: Vec<BigRational>,
    gamma: Vec<BigRational>,
}

impl MomentTable {
    /// Builds all moments at once from the vertex-composition formula
    /// `int_S x^m = |det| m! / (|m| + d)! * sum_{k_0 + .. + k_d = m} prod_i (|k_i|! / k_i!) v_i^{k_i}`.
    pub fn new(simplex: &RationalSimplex, max: usize) -> Result<Self> {
        let dim = simplex.dim;
        if dim < 2 {
            return Err(Error::InvalidInput("moment tables need dimension 2 or 3".into()));
        }
        let v = &simplex.vertices;
        if (0..dim).any(|k| !v[k][1].is_zero()) {
            return Err(Error::NotDistinguishedFacet);
        }
        let volume = simplex_moments(v, &simplex.jacobian_determinant().abs(), max);
        // Gamma drops the y coordinate: an edge on the x axis in 2D, a
        // triangle in the x-z plane in 3D.
        let facet: Vec<Vec<BigRational>> = v[..dim]
            .iter()
            .map(|p| p.iter().enumerate().filter(|(i, _)| *i != 1).map(|(_, c)| c.clone()).collect())
            .collect();
        let facet_det = if dim == 2 {
            &facet[1][0] - &facet[0][0]
        } else {
            (&facet[1][0] - &facet[0][0]) * (&facet[2][1] - &facet[0][1])
                - (&facet[1][1] - &facet[0][1]) * (&facet[2][0] - &facet[0][0])
        };
        let gamma = simplex_moments(&facet, &facet_det.abs(), max);
        Ok(MomentTable { dim, max, volume, gamma })
    }

    pub fn max_exponent(&self) -> usize {
        self.max
    }

    /// `int_T x^e`.
    pub fn volume(&self, e: Exponent) -> &BigRational {
        let s = self.max + 1;
        let idx = if self.dim == 2 {
            e[0] as usize * s + e[1] as usize
        } else {
            (e[0] as usize * s + e[1] as usize) * s + e[2] as usize
        };
        &self.volume[idx]
    }

    /// `int_Gamma x^e` (zero whenever the y-exponent is positive).
    pub fn gamma(&self, e: Exponent) -> BigRational {
        if e[1] > 0 {
            return BigRational::zero();
        }
        let s = self.max + 1;
        let idx = if self.dim == 2 { e[0] as usize } else { e[0] as usize * s + e[2] as usize };
        self.gamma[idx].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn unit_triangle() -> RationalSimplex {
        RationalSimplex::from_f64(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap()
    }

    #[test]
    fn unit_simplex_moments() {
        assert_eq!(monomial_integral_unit_simplex(&[0, 0]), q(1, 2));
        assert_eq!(monomial_integral_unit_simplex(&[1, 1]), q(1, 24));
        assert_eq!(monomial_integral_unit_simplex(&[0, 0, 0]), q(1, 6));
        assert_eq!(monomial_integral_unit_simplex(&[3]), q(1, 4));
    }

    #[test]
    fn integrates_over_triangles() {
        let t = unit_triangle();
        let one = Polynomial::constant(2, q(1, 1));
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        assert_eq!(integrate_polynomial_over_simplex(&one, &t), q(1, 2));
        assert_eq!(integrate_polynomial_over_simplex(&x, &t), q(1, 6));
        assert_eq!(integrate_polynomial_over_simplex(&y, &t), q(1, 6));
        // x^2 over the triangle (0,0),(2,0),(0,2): 16 * (2/24) = 4/3.
        let big = RationalSimplex::from_f64(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert_eq!(integrate_polynomial_over_simplex(&x.pow(2), &big), q(4, 3));
    }

    #[test]
    fn orientation_does_not_change_integrals() {
        let t = RationalSimplex::from_f64(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let x = Polynomial::variable(2, 0);
        assert_eq!(integrate_polynomial_over_simplex(&x, &t), q(1, 6));
    }

    #[test]
    fn facet_integrals() {
        let t = unit_triangle();
        let x = Polynomial::variable(2, 0);
        assert_eq!(integrate_polynomial_over_facet(&Polynomial::constant(2, q(1, 1)), &t).unwrap(), q(1, 1));
        assert_eq!(integrate_polynomial_over_facet(&x, &t).unwrap(), q(1, 2));
        let tet = RationalSimplex::from_f64(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(integrate_polynomial_over_facet(&Polynomial::constant(3, q(1, 1)), &tet).unwrap(), q(1, 2));
        let off = RationalSimplex::from_f64(&[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(integrate_polynomial_over_facet(&x, &off), Err(Error::NotDistinguishedFacet)));
    }

    #[test]
    fn moment_table_matches_direct_integration() {
        let t = RationalSimplex::new(vec![
            vec![q(0, 1), q(0, 1)],
            vec![q(3, 2), q(0, 1)],
            vec![q(-1, 3), q(5, 4)],
        ])
        .unwrap();
        let table = MomentTable::new(&t, 4).unwrap();
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                let m = Polynomial::monomial(2, [a, b, 0], q(1, 1));
                assert_eq!(*table.volume([a, b, 0]), integrate_polynomial_over_simplex(&m, &t));
                assert_eq!(table.gamma([a, b, 0]), integrate_polynomial_over_facet(&m, &t).unwrap());
            }
        }
    }

    #[test]
    fn moment_table_in_3d() {
        let t = RationalSimplex::new(vec![
            vec![q(0, 1), q(0, 1), q(0, 1)],
            vec![q(3, 2), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(4, 5)],
            vec![q(-1, 3), q(5, 4), q(2, 7)],
        ])
        .unwrap();
        let table = MomentTable::new(&t, 3).unwrap();
        for a in 0..=3u32 {
            for b in 0..=3u32 {
                for c in 0..=3u32 {
                    let m = Polynomial::monomial(3, [a, b, c], q(1, 1));
                    assert_eq!(*table.volume([a, b, c]), integrate_polynomial_over_simplex(&m, &t));
                    assert_eq!(table.gamma([a, b, c]), integrate_polynomial_over_facet(&m, &t).unwrap());
                }
            }
        }
    }

    #[test]
    fn polynomial_algebra() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let p = &(&x + &y) * &(&x - &y);
        let expect = &x.pow(2) - &y.pow(2);
        assert_eq!(p, expect);
        assert_eq!(p.derivative(0), x.scale(&q(2, 1)));
        assert_eq!(p.evaluate(&[3.0, 1.0]), 8.0);
        assert_eq!(p.degree(), 2);
        assert!((&p - &p).is_zero());
    }
}
