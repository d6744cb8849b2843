//! Rayleigh-Ritz lower bounds of the Poincare and trace constants.
//!
//! For a basis `phi_r` without constants, the squared constant restricted
//! to the span is the largest eigenvalue of the pencil `(M~, K)`, where
//! `K` is the stiffness matrix and `M~` the mass matrix of `w - <w>`.
//! Since the span is a subspace of H^1 this is a guaranteed lower bound.

use num_rational::BigRational;
use num_traits::{Num, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::ConstantKind;
use crate::error::{Error, Result};
use crate::geometry::{Shape, Tetrahedron3D, Triangle2D};
use crate::integration::{Exponent, MomentTable, RationalSimplex};
use crate::linalg::{
    backward_substitution_transposed, cholesky, cholesky_condition_estimate, congruence_reduce, jacobi_eigen,
    DenseMatrix,
};
use crate::precision::{DoubleDouble, Float224, Real};
use crate::quadrature::{gauss_legendre, integrate_triangle_many};

/// Relative residual `||M~ c - lambda K c|| / ((||M~|| + lambda ||K||) ||c||)`
/// accepted for a returned eigenpair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Relative gap below which two eigenvalues are treated as one.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// `x^i y^j (z^k)`, assembled exactly.
    Monomial,
    /// `cos(pi i x) cos(pi j y)`, assembled by quadrature (2D only).
    Cosine,
}

/// Tensor-product basis with every index in `0..=n`, the constant removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub n: u32,
    pub dimension: usize,
}

impl BasisSpec {
    pub fn monomial(dimension: usize, n: u32) -> Self {
        BasisSpec { family: BasisFamily::Monomial, n, dimension }
    }

    pub fn cosine(n: u32) -> Self {
        BasisSpec { family: BasisFamily::Cosine, n, dimension: 2 }
    }

    /// `(n + 1)^d - 1`.
    pub fn size(&self) -> usize {
        (self.n as usize + 1).pow(self.dimension as u32) - 1
    }

    /// Index tuples ordered by total degree, then with `x` exponents first.
    pub fn exponents(&self) -> Vec<Exponent> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.size());
        for i in 0..=n {
            for j in 0..=n {
                if self.dimension == 2 {
                    out.push([i, j, 0]);
                } else {
                    for k in 0..=n {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out.retain(|e| e.iter().any(|&x| x > 0));
        out.sort_by_key(|e| (e[0] + e[1] + e[2], std::cmp::Reverse(e[0]), std::cmp::Reverse(e[1])));
        out
    }

    /// Value of basis function `e` at `p`.
    pub fn evaluate(&self, e: &Exponent, p: &[f64]) -> f64 {
        match self.family {
            BasisFamily::Monomial => (0..self.dimension).map(|k| p[k].powi(e[k] as i32)).product(),
            BasisFamily::Cosine => (PI * e[0] as f64 * p[0]).cos() * (PI * e[1] as f64 * p[1]).cos(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("basis degree must be at least 1".into()));
        }
        if self.family == BasisFamily::Cosine && self.dimension != 2 {
            return Err(Error::InvalidInput("the cosine basis is two-dimensional".into()));
        }
        Ok(())
    }
}

/// Scalars the forms can be assembled in.
pub trait Scalar: Clone + Send + Sync + Num {
    fn to_real<R: Real>(&self) -> R;
}

impl Scalar for BigRational {
    fn to_real<R: Real>(&self) -> R {
        R::from_rational(self)
    }
}

impl Scalar for f64 {
    fn to_real<R: Real>(&self) -> R {
        R::from_f64(*self)
    }
}

/// Gram matrices and mean vectors of a basis on a simplex.
#[derive(Clone, Debug)]
pub struct AssembledForms<T> {
    /// `int grad phi_r . grad phi_s`.
    pub stiffness: DenseMatrix<T>,
    /// `int phi_r phi_s`.
    pub mass: DenseMatrix<T>,
    /// `int_Gamma phi_r phi_s`.
    pub trace_mass: DenseMatrix<T>,
    /// `int phi_r`.
    pub mean: Vec<T>,
    /// `int_Gamma phi_r`.
    pub trace_mean: Vec<T>,
    pub volume: T,
    pub gamma_measure: T,
}

impl<T: Scalar> AssembledForms<T> {
    /// Quadratic form of the squared norm of `w` minus its mean, matching
    /// the denominator of the Rayleigh quotient of `kind`.
    pub fn deflated_mass(&self, kind: ConstantKind) -> DenseMatrix<T> {
        let (m, g) = (&self.mean, &self.trace_mean);
        let (vol, gam) = (&self.volume, &self.gamma_measure);
        let n = m.len();
        match kind {
            ConstantKind::CpT => DenseMatrix::from_fn(n, |r, s| {
                self.mass.get(r, s).clone() - m[r].clone() * m[s].clone() / vol.clone()
            }),
            ConstantKind::CpGamma => DenseMatrix::from_fn(n, |r, s| {
                self.mass.get(r, s).clone() - (g[r].clone() * m[s].clone() + m[r].clone() * g[s].clone()) / gam.clone()
                    + vol.clone() * g[r].clone() * g[s].clone() / (gam.clone() * gam.clone())
            }),
            ConstantKind::CtrGamma => DenseMatrix::from_fn(n, |r, s| {
                self.trace_mass.get(r, s).clone() - g[r].clone() * g[s].clone() / gam.clone()
            }),
        }
    }

    /// The mean subtracted for `kind`, as coefficients acting on `c`.
    fn mean_functional(&self, kind: ConstantKind) -> Vec<f64> {
        let (v, d) = match kind {
            ConstantKind::CpT => (&self.mean, &self.volume),
            _ => (&self.trace_mean, &self.gamma_measure),
        };
        let d: f64 = d.to_real();
        v.iter().map(|x| x.to_real::<f64>() / d).collect()
    }
}

fn rational_simplex(shape: &Shape) -> Result<RationalSimplex> {
    let verts = match shape {
        Shape::Triangle(t) => t.rational_vertices().iter().map(|p| p.to_vec()).collect(),
        Shape::Tetrahedron(t) => t.rational_vertices().iter().map(|p| p.to_vec()).collect(),
    };
    RationalSimplex::new(verts)
}

/// Exact assembly of the monomial basis.
pub fn assemble_monomial(shape: &Shape, basis: &BasisSpec) -> Result<AssembledForms<BigRational>> {
    basis.validate()?;
    if basis.family != BasisFamily::Monomial || basis.dimension != shape.dimension() {
        return Err(Error::InvalidInput("basis does not match the shape".into()));
    }
    let simplex = rational_simplex(shape)?;
    let table = MomentTable::new(&simplex, 2 * basis.n as usize)?;
    let exps = basis.exponents();
    let d = basis.dimension;
    let add = |a: &Exponent, b: &Exponent| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let stiffness = DenseMatrix::from_fn(exps.len(), |r, s| {
        let (a, b) = (&exps[r], &exps[s]);
        let mut sum = BigRational::zero();
        for k in 0..d {
            if a[k] > 0 && b[k] > 0 {
                let mut e = add(a, b);
                e[k] -= 2;
                sum += table.volume(e) * BigRational::from_integer((a[k] * b[k]).into());
            }
        }
        sum
    });
    let mass = DenseMatrix::from_fn(exps.len(), |r, s| table.volume(add(&exps[r], &exps[s])).clone());
    let trace_mass = DenseMatrix::from_fn(exps.len(), |r, s| table.gamma(add(&exps[r], &exps[s])));
    Ok(AssembledForms {
        stiffness,
        mass,
        trace_mass,
        mean: exps.iter().map(|e| table.volume(*e).clone()).collect(),
        trace_mean: exps.iter().map(|e| table.gamma(*e)).collect(),
        volume: table.volume([0, 0, 0]).clone(),
        gamma_measure: table.gamma([0, 0, 0]),
    })
}

/// Quadrature assembly of the cosine basis on a triangle.
pub fn assemble_cosine(t: &Triangle2D, basis: &BasisSpec) -> Result<AssembledForms<f64>> {
    basis.validate()?;
    if basis.family != BasisFamily::Cosine {
        return Err(Error::InvalidInput("expected the cosine basis".into()));
    }
    let exps = basis.exponents();
    let m = exps.len();
    let upper = m * (m + 1) / 2;
    let verts = t.vertices();
    // Layout: stiffness upper triangle, mass upper triangle, means.
    let values = integrate_triangle_many(
        |p, out| {
            let mut phi = Vec::with_capacity(m);
            let mut gx = Vec::with_capacity(m);
            let mut gy = Vec::with_capacity(m);
            for e in &exps {
                let (wx, wy) = (PI * e[0] as f64, PI * e[1] as f64);
                let (sx, cx) = (wx * p[0]).sin_cos();
                let (sy, cy) = (wy * p[1]).sin_cos();
                phi.push(cx * cy);
                gx.push(-wx * sx * cy);
                gy.push(-wy * cx * sy);
            }
            let mut idx = 0;
            for r in 0..m {
                for s in r..m {
                    out[idx] = gx[r] * gx[s] + gy[r] * gy[s];
                    out[upper + idx] = phi[r] * phi[s];
                    idx += 1;
                }
                out[2 * upper + r] = phi[r];
            }
        },
        &verts,
        (4 * basis.n).max(8),
        2 * upper + m,
    )?;
    let unpack = |offset: usize| {
        let mut mat = DenseMatrix::from_fn(m, |_, _| 0.0);
        let mut idx = 0;
        for r in 0..m {
            for s in r..m {
                mat.set(r, s, values[offset + idx]);
                mat.set(s, r, values[offset + idx]);
                idx += 1;
            }
        }
        mat
    };
    // Gamma is [0, h] on the x axis where every cos(pi j y) equals 1.
    let h = t.h();
    let nodes = 16 * (basis.n as usize + 2);
    let (x, w) = gauss_legendre(nodes);
    let phi_gamma: Vec<Vec<f64>> =
        x.iter().map(|s| exps.iter().map(|e| (PI * e[0] as f64 * s * h).cos()).collect()).collect();
    let trace_mass = DenseMatrix::from_fn(m, |r, s| {
        h * phi_gamma.iter().zip(&w).map(|(p, wt)| wt * p[r] * p[s]).sum::<f64>()
    });
    let trace_mean = (0..m).map(|r| h * phi_gamma.iter().zip(&w).map(|(p, wt)| wt * p[r]).sum::<f64>()).collect();
    Ok(AssembledForms {
        stiffness: unpack(0),
        mass: unpack(upper),
        trace_mass,
        mean: values[2 * upper..].to_vec(),
        trace_mean,
        volume: t.area(),
        gamma_measure: h,
    })
}

/// Extremal eigenpairs of `(M~, K)`.
#[derive(Clone, Debug)]
pub struct PencilSolution {
    /// Largest eigenvalues, descending (ties ordered deterministically).
    pub values: Vec<f64>,
    /// `K`-normalized eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub condition_estimate: f64,
    /// Significant digits of the arithmetic that produced the result.
    pub digits: u32,
}

fn condition_limit(digits: u32) -> f64 {
    // Leave at least about 6 trustworthy digits.
    10f64.powi(digits as i32 - 6)
}

fn solve_in<R: Real, S: Scalar>(k: &DenseMatrix<S>, m: &DenseMatrix<S>, count: usize) -> Result<PencilSolution> {
    let kr: DenseMatrix<R> = k.map(|x| x.to_real());
    let mr: DenseMatrix<R> = m.map(|x| x.to_real());
    let mut l = kr.clone();
    cholesky(&mut l)?;
    let cond = cholesky_condition_estimate(&l);
    if cond > condition_limit(R::digits()) {
        return Err(Error::IllConditioned { estimate: cond, digits: R::digits() });
    }
    let c = congruence_reduce(&l, &mr);
    let eig = jacobi_eigen(&c)?;
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[b].partial_cmp(&eig.values[a]).expect("finite eigenvalues"));
    let count = count.min(order.len());
    // Extend the selection through any tie straddling the cut.
    let mut take = count;
    while take < order.len() && take > 0 {
        let (a, b) = (eig.values[order[take - 1]].to_f64(), eig.values[order[take]].to_f64());
        if (a - b).abs() <= TIE_TOLERANCE * a.abs() {
            take += 1;
        } else {
            break;
        }
    }
    let norm_m = mr.frobenius_norm();
    let norm_k = kr.frobenius_norm();
    let mut pairs = Vec::with_capacity(take);
    for &i in &order[..take] {
        let lambda = eig.values[i].clone();
        let coeffs = backward_substitution_transposed(&l, &eig.vectors[i]);
        let mc = mr.mul_vec(&coeffs);
        let kc = kr.mul_vec(&coeffs);
        let res = mc
            .iter()
            .zip(&kc)
            .fold(R::zero(), |s, (a, b)| {
                let d = a.clone() - lambda.clone() * b.clone();
                s + d.clone() * d
            })
            .sqrt();
        let cnorm = coeffs.iter().fold(R::zero(), |s, x| s + x.clone() * x.clone()).sqrt();
        let denom = (norm_m.clone() + lambda.abs() * norm_k.clone()) * cnorm;
        let rel = (res / denom).to_f64();
        let mut v: Vec<f64> = coeffs.iter().map(|x| x.to_f64()).collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        pairs.push((lambda.to_f64(), v, rel));
    }
    // Deterministic order inside clusters of equal eigenvalues.
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= TIE_TOLERANCE * a.0.abs().max(b.0.abs()) {
            a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)
        } else {
            b.0.total_cmp(&a.0)
        }
    });
    pairs.truncate(count);
    let worst = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    if !(worst < RESIDUAL_TOLERANCE) {
        return Err(Error::ResidualTooLarge { residual: worst, tolerance: RESIDUAL_TOLERANCE });
    }
    Ok(PencilSolution {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.iter().map(|p| p.1.clone()).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        condition_estimate: cond,
        digits: R::digits(),
    })
}

/// The `count` largest eigenpairs of `(m, k)` with `k` positive definite.
///
/// Runs in double-double arithmetic and repeats once in 224-bit binary
/// floats when `k` is too ill-conditioned for it.
pub fn solve_pencil<S: Scalar>(k: &DenseMatrix<S>, m: &DenseMatrix<S>, count: usize) -> Result<PencilSolution> {
    match solve_in::<DoubleDouble, S>(k, m, count) {
        Err(Error::IllConditioned { .. }) => solve_in::<Float224, S>(k, m, count),
        other => other,
    }
}

/// Forms in either exact or floating-point arithmetic.
#[derive(Clone, Debug)]
pub enum Forms {
    Exact(AssembledForms<BigRational>),
    Float(AssembledForms<f64>),
}

/// Assembled problem for one shape and basis, reused across kinds.
#[derive(Clone, Debug)]
pub struct RayleighRitz {
    pub shape: Shape,
    pub basis: BasisSpec,
    pub forms: Forms,
}

/// An eigenfunction of the discrete problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenpair {
    /// Eigenvalue of `K c = lambda M~ c`, i.e. the squared Rayleigh quotient.
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    /// Mean of the function over Gamma (or over the simplex for `CpT`).
    pub offset: f64,
    pub residual: f64,
}

/// Lower bound of one constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenResult {
    pub kind: ConstantKind,
    pub basis: BasisSpec,
    pub shape: Shape,
    /// Largest eigenvalue of `(M~, K)`: the squared dimensional constant.
    pub lambda_extremal: f64,
    /// `sqrt(lambda_extremal)` divided by `h` (or `sqrt h` for traces).
    pub constant_lower_bound: f64,
    pub coefficients: Vec<f64>,
    pub offset: f64,
    pub residual: f64,
    pub condition_estimate: f64,
    pub precision_digits: u32,
}

impl EigenResult {
    /// Value of the extremal function (mean subtracted) at `p`.
    pub fn evaluate(&self, p: &[f64]) -> f64 {
        evaluate_expansion(&self.basis, &self.coefficients, p) - self.offset
    }
}

/// `sum_r c_r phi_r(p)`.
pub fn evaluate_expansion(basis: &BasisSpec, coefficients: &[f64], p: &[f64]) -> f64 {
    basis.exponents().iter().zip(coefficients).map(|(e, c)| c * basis.evaluate(e, p)).sum()
}

fn dimensionless(kind: ConstantKind, lambda: f64, scale: f64) -> f64 {
    if kind.is_trace() {
        (lambda / scale).sqrt()
    } else {
        lambda.sqrt() / scale
    }
}

impl RayleighRitz {
    pub fn new(shape: impl Into<Shape>, basis: BasisSpec) -> Result<Self> {
        let shape = shape.into();
        basis.validate()?;
        if basis.dimension != shape.dimension() {
            return Err(Error::InvalidInput("basis dimension does not match the shape".into()));
        }
        let forms = match (basis.family, &shape) {
            (BasisFamily::Monomial, _) => Forms::Exact(assemble_monomial(&shape, &basis)?),
            (BasisFamily::Cosine, Shape::Triangle(t)) => Forms::Float(assemble_cosine(t, &basis)?),
            (BasisFamily::Cosine, Shape::Tetrahedron(_)) => {
                return Err(Error::InvalidInput("the cosine basis is two-dimensional".into()))
            }
        };
        Ok(RayleighRitz { shape, basis, forms })
    }

    fn solve(&self, kind: ConstantKind, count: usize) -> Result<(PencilSolution, Vec<f64>)> {
        match &self.forms {
            Forms::Exact(f) => Ok((solve_pencil(&f.stiffness, &f.deflated_mass(kind), count)?, f.mean_functional(kind))),
            Forms::Float(f) => Ok((solve_pencil(&f.stiffness, &f.deflated_mass(kind), count)?, f.mean_functional(kind))),
        }
    }

    pub fn lower_bound(&self, kind: ConstantKind) -> Result<EigenResult> {
        let (sol, mean) = self.solve(kind, 1)?;
        let coefficients = sol.vectors[0].clone();
        let offset = coefficients.iter().zip(&mean).map(|(c, m)| c * m).sum();
        Ok(EigenResult {
            kind,
            basis: self.basis,
            shape: self.shape,
            lambda_extremal: sol.values[0],
            constant_lower_bound: dimensionless(kind, sol.values[0], self.shape.scale()),
            coefficients,
            offset,
            residual: sol.residuals[0],
            condition_estimate: sol.condition_estimate,
            precision_digits: sol.digits,
        })
    }

    /// The `count` smallest eigenvalues of `K c = lambda M~ c`, ascending.
    pub fn eigenpairs(&self, kind: ConstantKind, count: usize) -> Result<Vec<Eigenpair>> {
        if count == 0 || count > self.basis.size() {
            return Err(Error::InvalidInput(format!("eigenpair count must lie in 1..={}", self.basis.size())));
        }
        let (sol, mean) = self.solve(kind, count)?;
        Ok(sol
            .values
            .iter()
            .zip(sol.vectors)
            .zip(sol.residuals)
            .map(|((v, c), residual)| Eigenpair {
                lambda: 1.0 / v,
                offset: c.iter().zip(&mean).map(|(a, m)| a * m).sum(),
                coefficients: c,
                residual,
            })
            .collect())
    }
}

pub fn lower_bound(shape: impl Into<Shape>, basis: BasisSpec, kind: ConstantKind) -> Result<EigenResult> {
    RayleighRitz::new(shape, basis)?.lower_bound(kind)
}

/// Lower bound on a tetrahedron with the monomial basis of degree `n` per
/// variable (`(n + 1)^3 - 1` functions).
pub fn lower_bound_3d(t: &Tetrahedron3D, n: u32, kind: ConstantKind) -> Result<EigenResult> {
    lower_bound(*t, BasisSpec::monomial(3, n), kind)
}

pub fn eigenpairs(shape: impl Into<Shape>, basis: BasisSpec, kind: ConstantKind, count: usize) -> Result<Vec<Eigenpair>> {
    RayleighRitz::new(shape, basis)?.eigenpairs(kind, count)
}

/// Results of one sweep point.
#[derive(Debug)]
pub struct SweepPoint {
    pub alpha: f64,
    pub results: Vec<(ConstantKind, Result<EigenResult>)>,
}

/// Lower bounds over a grid of angles at fixed `rho` and `h`, computed in
/// parallel and returned in grid order. Failures are kept per point.
pub fn lower_bound_sweep(h: f64, rho: f64, alphas: &[f64], basis: BasisSpec, kinds: &[ConstantKind]) -> Vec<SweepPoint> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let solver = Triangle2D::new(h, rho, alpha).and_then(|t| RayleighRitz::new(t, basis));
            let results = match solver {
                Ok(s) => kinds.iter().map(|&k| (k, s.lower_bound(k))).collect(),
                Err(e) => {
                    let msg = e.to_string();
                    kinds.iter().map(|&k| (k, Err(Error::InvalidInput(msg.clone())))).collect()
                }
            };
            SweepPoint { alpha, results }
        })
        .collect()
}
