//! Computable a posteriori error majorant for the reaction-diffusion problem
//! `-div(A grad u) + rho^2 u = f` on a mesh of triangular subdomains, with
//! mixed Dirichlet and Neumann conditions.
//!
//! The flux `q` only has to be balanced in the mean on each subdomain and
//! edge. Subdomain residuals are weighted by `diam / pi` and edge residuals
//! by the trace constants of the subdomain with respect to that edge.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::analytic::upper_bounds_2d;
use crate::error::{Error, Result};
use crate::geometry::Triangle2D;
use crate::integration::{integrate_along_segment, integrate_polynomial_over_simplex, Polynomial, RationalSimplex};
use crate::quadrature::gauss_legendre;
use crate::rational::{rationalize, to_f64};

/// Admissibility tolerance, relative to the measure of the subdomain or edge.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-10;

/// Polynomial in `(x, y)` as `[a, b, coeff]` triples meaning `coeff x^a y^b`.
pub type PolySpec = Vec<(u32, u32, f64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    Interior,
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub v: [usize; 2],
    pub tag: EdgeTag,
    pub left: usize,
    #[serde(default)]
    pub right: Option<usize>,
    /// Neumann data as `[k, coeff]` pairs, a polynomial in the arclength
    /// measured from `v[0]`.
    #[serde(rename = "F", default)]
    pub flux: Option<Vec<(u32, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// One symmetric matrix per subdomain.
    #[serde(rename = "A")]
    pub a: Vec<[[f64; 2]; 2]>,
    pub rho: f64,
    pub f: Vec<PolySpec>,
    pub lambda1: f64,
    #[serde(rename = "uD", default)]
    pub u_d: Option<PolySpec>,
}

/// Mesh file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub vertices: Vec<[f64; 2]>,
    pub subdomains: Vec<[usize; 3]>,
    pub edges: Vec<EdgeSpec>,
    pub data: DataSpec,
}

/// Fields file contents: `v` and `q` per subdomain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSpec {
    pub v: Vec<PolySpec>,
    pub q: Vec<[PolySpec; 2]>,
    #[serde(default)]
    pub u_exact: Option<PolySpec>,
}

fn poly(spec: &PolySpec) -> Result<Polynomial> {
    let mut p = Polynomial::zero(2);
    for &(a, b, c) in spec {
        if !c.is_finite() {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        p.add_term([a, b, 0], rationalize(c, 0.0));
    }
    Ok(p)
}

fn rat(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidInput("non-finite number".into()));
    }
    Ok(rationalize(x, 0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeKind {
    /// `lo < hi`; the normal points from `lo` into `hi`.
    Interior { lo: usize, hi: usize },
    Dirichlet { owner: usize },
    /// Coefficients of the data in powers of arclength.
    Neumann { owner: usize, data: Vec<BigRational> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    pub kind: EdgeKind,
}

/// Triangular subdomains with tagged edges.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedDomain {
    pub vertices: Vec<[BigRational; 2]>,
    pub subdomains: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Edge indices of each subdomain.
    pub subdomain_edges: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemData {
    pub a: Vec<[[BigRational; 2]; 2]>,
    pub rho: BigRational,
    pub f: Vec<Polynomial>,
    pub lambda1: f64,
    pub u_d: Option<Polynomial>,
}

/// Piecewise polynomial scalar, one piece per subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField(pub Vec<Polynomial>);

/// Piecewise polynomial vector field, one piece per subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxField(pub Vec<[Polynomial; 2]>);

impl DecomposedDomain {
    fn point(&self, i: usize) -> [f64; 2] {
        [to_f64(&self.vertices[i][0]), to_f64(&self.vertices[i][1])]
    }

    fn simplex(&self, i: usize) -> Result<RationalSimplex> {
        RationalSimplex::new(self.subdomains[i].iter().map(|&k| self.vertices[k].to_vec()).collect())
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].v;
        let (p, q) = (self.point(a), self.point(b));
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    pub fn diameter(&self, i: usize) -> f64 {
        let t = self.subdomains[i];
        let p: Vec<_> = t.iter().map(|&k| self.point(k)).collect();
        (0..3).map(|k| (p[k][0] - p[(k + 1) % 3][0]).hypot(p[k][1] - p[(k + 1) % 3][1])).fold(0.0, f64::max)
    }

    pub fn area(&self, i: usize) -> Result<f64> {
        Ok(to_f64(&self.simplex(i)?.measure()))
    }

    /// Normal of edge `e` scaled by its length, outward from subdomain `i`.
    fn scaled_normal(&self, e: usize, i: usize) -> [BigRational; 2] {
        let [a, b] = self.edges[e].v;
        let (pa, pb) = (&self.vertices[a], &self.vertices[b]);
        let mut n = [&pb[1] - &pa[1], &pa[0] - &pb[0]];
        let c = self.subdomains[i].iter().copied().find(|&k| k != a && k != b).expect("third vertex");
        let pc = &self.vertices[c];
        let inward = &n[0] * (&pc[0] - &pa[0]) + &n[1] * (&pc[1] - &pa[1]);
        if inward.is_positive() {
            n = [-&n[0], -&n[1]];
        }
        n
    }

    fn segment(&self, e: usize) -> ([BigRational; 2], [BigRational; 2]) {
        let [a, b] = self.edges[e].v;
        (self.vertices[a].clone(), self.vertices[b].clone())
    }

    /// Upper bound of the trace constant of subdomain `i` with respect to
    /// edge `e`, in physical units. Both orientations of the edge are tried.
    pub fn trace_constant(&self, i: usize, e: usize) -> Result<f64> {
        let [a, b] = self.edges[e].v;
        let c = self.subdomains[i].iter().copied().find(|&k| k != a && k != b).expect("third vertex");
        let (pa, pb, pc) = (self.point(a), self.point(b), self.point(c));
        let oriented = |p: [f64; 2], q: [f64; 2]| -> Result<f64> {
            let (u, w) = ([q[0] - p[0], q[1] - p[1]], [pc[0] - p[0], pc[1] - p[1]]);
            let h = u[0].hypot(u[1]);
            let rho = w[0].hypot(w[1]) / h;
            let alpha = (u[0] * w[1] - u[1] * w[0]).abs().atan2(u[0] * w[0] + u[1] * w[1]);
            let t = Triangle2D::new(h, rho, alpha)?;
            Ok(upper_bounds_2d(&t)?.ctr_gamma * h.sqrt())
        };
        Ok(oriented(pa, pb)?.min(oriented(pb, pa)?))
    }
}

/// Validates the mesh file and converts it to exact form.
pub fn build_problem(mesh: &MeshSpec) -> Result<(DecomposedDomain, ProblemData)> {
    let nv = mesh.vertices.len();
    let ns = mesh.subdomains.len();
    if ns == 0 {
        return Err(Error::InvalidInput("mesh has no subdomains".into()));
    }
    let vertices = mesh
        .vertices
        .iter()
        .map(|p| Ok([rat(p[0])?, rat(p[1])?]))
        .collect::<Result<Vec<_>>>()?;
    for (i, t) in mesh.subdomains.iter().enumerate() {
        if t.iter().any(|&k| k >= nv) {
            return Err(Error::InvalidInput(format!("subdomain {i} references a missing vertex")));
        }
    }
    let mut subdomain_edges = vec![Vec::new(); ns];
    let mut edges = Vec::with_capacity(mesh.edges.len());
    let has_edge = |t: &[usize; 3], v: [usize; 2]| t.contains(&v[0]) && t.contains(&v[1]) && v[0] != v[1];
    for (k, e) in mesh.edges.iter().enumerate() {
        if e.left >= ns || !has_edge(&mesh.subdomains[e.left], e.v) {
            return Err(Error::InvalidInput(format!("edge {k} is not an edge of its left subdomain")));
        }
        let kind = match (e.tag, e.right) {
            (EdgeTag::Interior, Some(r)) => {
                if r >= ns || r == e.left || !has_edge(&mesh.subdomains[r], e.v) {
                    return Err(Error::InvalidInput(format!("edge {k} is not an edge of its right subdomain")));
                }
                subdomain_edges[r].push(k);
                EdgeKind::Interior { lo: e.left.min(r), hi: e.left.max(r) }
            }
            (EdgeTag::Interior, None) => {
                return Err(Error::InvalidInput(format!("interior edge {k} needs two subdomains")))
            }
            (_, Some(_)) => return Err(Error::InvalidInput(format!("boundary edge {k} has a right subdomain"))),
            (EdgeTag::Dirichlet, None) => EdgeKind::Dirichlet { owner: e.left },
            (EdgeTag::Neumann, None) => {
                let data = e.flux.as_ref().ok_or_else(|| Error::InvalidInput(format!("Neumann edge {k} needs F")))?;
                let mut coeffs: Vec<BigRational> = Vec::new();
                for &(p, c) in data {
                    let p = p as usize;
                    if coeffs.len() <= p {
                        coeffs.resize(p + 1, BigRational::zero());
                    }
                    coeffs[p] += rat(c)?;
                }
                EdgeKind::Neumann { owner: e.left, data: coeffs }
            }
        };
        subdomain_edges[e.left].push(k);
        edges.push(Edge { v: e.v, kind });
    }
    for (i, t) in mesh.subdomains.iter().enumerate() {
        for j in 0..3 {
            let pair = [t[j], t[(j + 1) % 3]];
            let count = subdomain_edges[i]
                .iter()
                .filter(|&&k| {
                    let v = mesh.edges[k].v;
                    (v[0] == pair[0] && v[1] == pair[1]) || (v[0] == pair[1] && v[1] == pair[0])
                })
                .count();
            if count != 1 {
                return Err(Error::InvalidInput(format!(
                    "edge {}-{} of subdomain {i} is listed {count} times",
                    pair[0], pair[1]
                )));
            }
        }
    }
    let domain = DecomposedDomain { vertices, subdomains: mesh.subdomains.clone(), edges, subdomain_edges };
    for i in 0..ns {
        domain.simplex(i).map_err(|_| Error::DegenerateShape(format!("subdomain {i} has zero area")))?;
    }

    let d = &mesh.data;
    if d.a.len() != ns || d.f.len() != ns {
        return Err(Error::InvalidInput("A and f need one entry per subdomain".into()));
    }
    if !(d.lambda1.is_finite() && d.lambda1 > 0.0) {
        return Err(Error::InvalidInput("lambda1 must be positive".into()));
    }
    if !(d.rho.is_finite() && d.rho >= 0.0) {
        return Err(Error::InvalidInput("rho must be non-negative".into()));
    }
    for (i, m) in d.a.iter().enumerate() {
        if m[0][1] != m[1][0] {
            return Err(Error::InvalidInput(format!("A on subdomain {i} is not symmetric")));
        }
        let (tr, det) = (m[0][0] + m[1][1], m[0][0] * m[1][1] - m[0][1] * m[1][0]);
        let smallest = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
        if smallest < d.lambda1 * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "A on subdomain {i} has eigenvalue {smallest} below lambda1 = {}",
                d.lambda1
            )));
        }
    }
    let a = d
        .a
        .iter()
        .map(|m| Ok([[rat(m[0][0])?, rat(m[0][1])?], [rat(m[1][0])?, rat(m[1][1])?]]))
        .collect::<Result<Vec<_>>>()?;
    let data = ProblemData {
        a,
        rho: rat(d.rho)?,
        f: d.f.iter().map(poly).collect::<Result<_>>()?,
        lambda1: d.lambda1,
        u_d: d.u_d.as_ref().map(poly).transpose()?,
    };
    Ok((domain, data))
}

/// Converts the fields file, checking the piece counts.
pub fn build_fields(fields: &FieldsSpec, domain: &DecomposedDomain) -> Result<(ScalarField, FluxField, Option<Polynomial>)> {
    let ns = domain.subdomains.len();
    if fields.v.len() != ns || fields.q.len() != ns {
        return Err(Error::InvalidInput(format!("v and q need {ns} pieces each")));
    }
    let v = ScalarField(fields.v.iter().map(poly).collect::<Result<_>>()?);
    let q = FluxField(fields.q.iter().map(|[a, b]| Ok([poly(a)?, poly(b)?])).collect::<Result<_>>()?);
    let u = fields.u_exact.as_ref().map(poly).transpose()?;
    Ok((v, q, u))
}

/// A condition of the admissible flux space that fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// `int (div q + f - rho^2 v)` over the subdomain.
    SubdomainBalance { subdomain: usize, integral: f64 },
    /// `int (q_lo - q_hi) . n` over an interior edge.
    InteriorFluxMean { edge: usize, integral: f64 },
    /// `int (q . n - F)` over a Neumann edge.
    NeumannMean { edge: usize, integral: f64 },
    /// `v` jumps across an interior edge.
    DiscontinuousApproximation { edge: usize, max_jump: f64 },
    /// `v` differs from the Dirichlet data.
    DirichletTrace { edge: usize, max_deviation: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SubdomainBalance { subdomain, integral } => {
                write!(f, "subdomain {subdomain}: mean of div q + f - rho^2 v is nonzero (integral {integral:e})")
            }
            Violation::InteriorFluxMean { edge, integral } => {
                write!(f, "edge {edge}: mean normal flux jump is nonzero (integral {integral:e})")
            }
            Violation::NeumannMean { edge, integral } => {
                write!(f, "edge {edge}: mean of q.n - F is nonzero (integral {integral:e})")
            }
            Violation::DiscontinuousApproximation { edge, max_jump } => {
                write!(f, "edge {edge}: v is discontinuous (jump {max_jump:e})")
            }
            Violation::DirichletTrace { edge, max_deviation } => {
                write!(f, "edge {edge}: v misses the Dirichlet data by {max_deviation:e}")
            }
        }
    }
}

fn divergence(q: &[Polynomial; 2]) -> Polynomial {
    &q[0].derivative(0) + &q[1].derivative(1)
}

fn gradient(v: &Polynomial) -> [Polynomial; 2] {
    [v.derivative(0), v.derivative(1)]
}

fn dot(a: &[Polynomial; 2], n: &[BigRational; 2]) -> Polynomial {
    &a[0].scale(&n[0]) + &a[1].scale(&n[1])
}

fn equilibrium_residual(i: usize, v: &ScalarField, q: &FluxField, data: &ProblemData) -> Polynomial {
    let rho2 = &data.rho * &data.rho;
    &(&divergence(&q.0[i]) + &data.f[i]) - &v.0[i].scale(&rho2)
}

/// Gauss points along an edge, exact for degree `2 n - 1`.
fn edge_points(domain: &DecomposedDomain, e: usize, n: usize) -> Vec<(f64, [f64; 2], f64)> {
    let [a, b] = domain.edges[e].v;
    let (pa, pb) = (domain.point(a), domain.point(b));
    let (t, w) = gauss_legendre(n);
    t.into_iter()
        .zip(w)
        .map(|(t, w)| (t, [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])], w))
        .collect()
}

fn eval_1d(coeffs: &[BigRational], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + to_f64(c))
}

fn degree_1d(coeffs: &[BigRational]) -> u32 {
    coeffs.len().saturating_sub(1) as u32
}

/// Checks the mean-value conditions on `q` and the conformity of `v`.
/// Returns every violated condition; an empty list means admissible.
pub fn check_admissibility(
    v: &ScalarField,
    q: &FluxField,
    data: &ProblemData,
    domain: &DecomposedDomain,
) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for i in 0..domain.subdomains.len() {
        let r = equilibrium_residual(i, v, q, data);
        let integral = to_f64(&integrate_polynomial_over_simplex(&r, &domain.simplex(i)?));
        if integral.abs() > ADMISSIBILITY_TOLERANCE * domain.area(i)? {
            out.push(Violation::SubdomainBalance { subdomain: i, integral });
        }
    }
    for (k, edge) in domain.edges.iter().enumerate() {
        let len = domain.edge_length(k);
        let (a, b) = domain.segment(k);
        match &edge.kind {
            EdgeKind::Interior { lo, hi } => {
                let n = domain.scaled_normal(k, *lo);
                let jump = [&q.0[*lo][0] - &q.0[*hi][0], &q.0[*lo][1] - &q.0[*hi][1]];
                let integral = to_f64(&integrate_along_segment(&dot(&jump, &n), &a, &b));
                if integral.abs() > ADMISSIBILITY_TOLERANCE * len {
                    out.push(Violation::InteriorFluxMean { edge: k, integral });
                }
                let diff = &v.0[*lo] - &v.0[*hi];
                let pts = edge_points(domain, k, diff.degree() as usize + 2);
                let max_jump = pts.iter().map(|(_, p, _)| diff.evaluate(p).abs()).fold(0.0, f64::max);
                if max_jump > ADMISSIBILITY_TOLERANCE {
                    out.push(Violation::DiscontinuousApproximation { edge: k, max_jump });
                }
            }
            EdgeKind::Neumann { owner, data: flux } => {
                let n = domain.scaled_normal(k, *owner);
                let normal_flux = to_f64(&integrate_along_segment(&dot(&q.0[*owner], &n), &a, &b));
                let data_integral: f64 =
                    flux.iter().enumerate().map(|(p, c)| to_f64(c) * len.powi(p as i32 + 1) / (p as f64 + 1.0)).sum();
                let integral = normal_flux - data_integral;
                if integral.abs() > ADMISSIBILITY_TOLERANCE * len {
                    out.push(Violation::NeumannMean { edge: k, integral });
                }
            }
            EdgeKind::Dirichlet { owner } => {
                if let Some(ud) = &data.u_d {
                    let diff = &v.0[*owner] - ud;
                    let pts = edge_points(domain, k, diff.degree() as usize + 2);
                    let max_deviation = pts.iter().map(|(_, p, _)| diff.evaluate(p).abs()).fold(0.0, f64::max);
                    if max_deviation > ADMISSIBILITY_TOLERANCE {
                        out.push(Violation::DirichletTrace { edge: k, max_deviation });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Norm of a residual on one edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeNorm {
    pub edge: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualNorms {
    /// `||A grad v - q||` in the `A^{-1}` weighted norm.
    pub d_norm: f64,
    /// `||div q + f - rho^2 v||` per subdomain.
    pub r_norms: Vec<f64>,
    /// `||(q_lo - q_hi) . n||` per interior edge.
    pub r_ij: Vec<EdgeNorm>,
    /// `||q . n - F||` per Neumann edge.
    pub rho_k: Vec<EdgeNorm>,
}

fn inverse(a: &[[BigRational; 2]; 2]) -> [[BigRational; 2]; 2] {
    let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    [
        [&a[1][1] / &det, -&a[0][1] / &det],
        [-&a[1][0] / &det, &a[0][0] / &det],
    ]
}

fn d_squared(i: usize, v: &ScalarField, q: &FluxField, data: &ProblemData, domain: &DecomposedDomain) -> Result<BigRational> {
    let a = &data.a[i];
    let g = gradient(&v.0[i]);
    let w = [
        &(&g[0].scale(&a[0][0]) + &g[1].scale(&a[0][1])) - &q.0[i][0],
        &(&g[0].scale(&a[1][0]) + &g[1].scale(&a[1][1])) - &q.0[i][1],
    ];
    let b = inverse(a);
    let form = &(&(&w[0] * &w[0]).scale(&b[0][0]) + &(&w[0] * &w[1]).scale(&(&b[0][1] + &b[1][0])))
        + &(&w[1] * &w[1]).scale(&b[1][1]);
    Ok(integrate_polynomial_over_simplex(&form, &domain.simplex(i)?))
}

/// All residual norms. Subdomain norms are integrated exactly; edge norms
/// use Gauss rules exact for the polynomial degree.
pub fn residual_norms(v: &ScalarField, q: &FluxField, data: &ProblemData, domain: &DecomposedDomain) -> Result<ResidualNorms> {
    let ns = domain.subdomains.len();
    let per_subdomain: Vec<(f64, f64)> = (0..ns)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let r = equilibrium_residual(i, v, q, data);
            let r2 = integrate_polynomial_over_simplex(&(&r * &r), &domain.simplex(i)?);
            Ok((to_f64(&d_squared(i, v, q, data, domain)?), to_f64(&r2)))
        })
        .collect::<Result<_>>()?;
    let d_norm = per_subdomain.iter().map(|p| p.0).sum::<f64>().max(0.0).sqrt();
    let r_norms = per_subdomain.iter().map(|p| p.1.max(0.0).sqrt()).collect();

    let mut r_ij = Vec::new();
    let mut rho_k = Vec::new();
    for (k, edge) in domain.edges.iter().enumerate() {
        let len = domain.edge_length(k);
        let (a, b) = domain.segment(k);
        match &edge.kind {
            EdgeKind::Interior { lo, hi } => {
                // n = nu / |e| and ds = |e| dt.
                let n = domain.scaled_normal(k, *lo);
                let jump = [&q.0[*lo][0] - &q.0[*hi][0], &q.0[*lo][1] - &q.0[*hi][1]];
                let j = dot(&jump, &n);
                let sq = to_f64(&integrate_along_segment(&(&j * &j), &a, &b)) / len;
                r_ij.push(EdgeNorm { edge: k, value: sq.max(0.0).sqrt() });
            }
            EdgeKind::Neumann { owner, data: flux } => {
                let n = domain.scaled_normal(k, *owner);
                let qn = dot(&q.0[*owner], &n);
                let deg = qn.degree().max(degree_1d(flux)) as usize;
                let sq: f64 = edge_points(domain, k, deg + 1)
                    .iter()
                    .map(|(t, p, w)| w * (qn.evaluate(p) / len - eval_1d(flux, t * len)).powi(2))
                    .sum::<f64>()
                    * len;
                rho_k.push(EdgeNorm { edge: k, value: sq.sqrt() });
            }
            EdgeKind::Dirichlet { .. } => {}
        }
    }
    Ok(ResidualNorms { d_norm, r_norms, r_ij, rho_k })
}

/// How the edge residuals of one subdomain are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `eta_i = sum_e a_e` over the edges of the subdomain, with
    /// `a_e = r_ij / 2` on interior edges and `rho_k` on Neumann edges.
    #[default]
    Sum,
    /// `eta_i^2 = sum_e a_e^2`. Smaller by up to `sqrt 3`; the estimate is
    /// then not guaranteed when several edges of one subdomain carry
    /// residuals.
    RootSumOfSquares,
}

/// Weight of `Re_1 + Re_2` in the final estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaFactor {
    /// `1 / lambda1`.
    #[default]
    Inverse,
    /// `1 / sqrt(lambda1)`, which is what the energy norm requires when
    /// `lambda1 > 1`.
    InverseSqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MajorantOptions {
    pub eta: EtaRule,
    pub lambda: LambdaFactor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantReport {
    pub d_norm: f64,
    pub r_norms: Vec<f64>,
    pub r_ij: Vec<EdgeNorm>,
    pub rho_k: Vec<EdgeNorm>,
    /// `diam / pi` per subdomain.
    pub poincare_constants: Vec<f64>,
    /// Largest edge trace constant per subdomain.
    pub trace_constants: Vec<f64>,
    pub eta: Vec<f64>,
    pub re1: f64,
    pub re2: f64,
    pub total: f64,
    pub options: MajorantOptions,
    pub violations: Vec<Violation>,
    pub true_error: Option<f64>,
    /// `total / true_error`; absent when the true error is unknown or zero.
    pub efficiency_index: Option<f64>,
}

/// The majorant of the energy error of `v`. Fails with the list of
/// violations when `q` is not admissible.
pub fn majorant(
    v: &ScalarField,
    q: &FluxField,
    data: &ProblemData,
    domain: &DecomposedDomain,
    options: MajorantOptions,
) -> Result<MajorantReport> {
    if !(data.lambda1 > 0.0) {
        return Err(Error::InvalidInput("lambda1 must be positive".into()));
    }
    let violations = check_admissibility(v, q, data, domain)?;
    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    let norms = residual_norms(v, q, data, domain)?;
    let ns = domain.subdomains.len();
    let poincare_constants: Vec<f64> = (0..ns).map(|i| domain.diameter(i) / PI).collect();
    let trace_constants = (0..ns)
        .into_par_iter()
        .map(|i| {
            domain.subdomain_edges[i]
                .iter()
                .map(|&e| domain.trace_constant(i, e))
                .try_fold(0.0f64, |m, c| Ok(m.max(c?)))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut contributions = vec![Vec::new(); ns];
    for r in &norms.r_ij {
        if let EdgeKind::Interior { lo, hi } = domain.edges[r.edge].kind {
            contributions[lo].push(0.5 * r.value);
            contributions[hi].push(0.5 * r.value);
        }
    }
    for r in &norms.rho_k {
        if let EdgeKind::Neumann { owner, .. } = domain.edges[r.edge].kind {
            contributions[owner].push(r.value);
        }
    }
    let eta: Vec<f64> = contributions
        .iter()
        .map(|c| match options.eta {
            EtaRule::Sum => c.iter().sum(),
            EtaRule::RootSumOfSquares => c.iter().map(|x| x * x).sum::<f64>().sqrt(),
        })
        .collect();

    let re1 = poincare_constants.iter().zip(&norms.r_norms).map(|(c, r)| (c * r).powi(2)).sum::<f64>().sqrt();
    let re2 = trace_constants.iter().zip(&eta).map(|(c, e)| (c * e).powi(2)).sum::<f64>().sqrt();
    let weight = match options.lambda {
        LambdaFactor::Inverse => 1.0 / data.lambda1,
        LambdaFactor::InverseSqrt => 1.0 / data.lambda1.sqrt(),
    };
    Ok(MajorantReport {
        d_norm: norms.d_norm,
        total: norms.d_norm + weight * (re1 + re2),
        r_norms: norms.r_norms,
        r_ij: norms.r_ij,
        rho_k: norms.rho_k,
        poincare_constants,
        trace_constants,
        eta,
        re1,
        re2,
        options,
        violations,
        true_error: None,
        efficiency_index: None,
    })
}

/// `||D|| + c1 ||R|| + c2 ||q . n - F||` for fluxes with continuous normal
/// components, with user-supplied global constants.
pub fn global_majorant(
    v: &ScalarField,
    q: &FluxField,
    data: &ProblemData,
    domain: &DecomposedDomain,
    c1: f64,
    c2: f64,
) -> Result<f64> {
    let norms = residual_norms(v, q, data, domain)?;
    if norms.r_ij.iter().any(|r| r.value > ADMISSIBILITY_TOLERANCE) {
        return Err(Error::NonConformingFlux);
    }
    let r = norms.r_norms.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n = norms.rho_k.iter().map(|x| x.value * x.value).sum::<f64>().sqrt();
    Ok(norms.d_norm + c1 * r + c2 * n)
}

/// `(||grad e||_A^2 + ||rho e||^2)^{1/2}` for `e = u - v`, integrated exactly.
pub fn true_error(v: &ScalarField, u: &Polynomial, data: &ProblemData, domain: &DecomposedDomain) -> Result<f64> {
    let rho2 = &data.rho * &data.rho;
    let mut total = BigRational::zero();
    for i in 0..domain.subdomains.len() {
        let e = u - &v.0[i];
        let g = gradient(&e);
        let a = &data.a[i];
        let form = &(&(&(&g[0] * &g[0]).scale(&a[0][0]) + &(&g[0] * &g[1]).scale(&(&a[0][1] + &a[1][0])))
            + &(&g[1] * &g[1]).scale(&a[1][1]))
            + &(&e * &e).scale(&rho2);
        total += integrate_polynomial_over_simplex(&form, &domain.simplex(i)?);
    }
    Ok(total.to_f64().unwrap_or(f64::NAN).max(0.0).sqrt())
}

/// Runs the majorant on parsed input files and attaches the true error and
/// efficiency index when an exact solution is supplied.
pub fn report(mesh: &MeshSpec, fields: &FieldsSpec, options: MajorantOptions) -> Result<MajorantReport> {
    let (domain, data) = build_problem(mesh)?;
    let (v, q, u) = build_fields(fields, &domain)?;
    let mut rep = majorant(&v, &q, &data, &domain, options)?;
    if let Some(u) = u {
        let err = true_error(&v, &u, &data, &domain)?;
        rep.true_error = Some(err);
        rep.efficiency_index = (err > 0.0).then(|| rep.total / err);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unit square split along the diagonal, Dirichlet on the bottom and
    /// left, Neumann elsewhere.
    fn two_triangles(f0: PolySpec, f1: PolySpec, flux: [Vec<(u32, f64)>; 2]) -> MeshSpec {
        let [fr, ft] = flux;
        MeshSpec {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            subdomains: vec![[0, 1, 2], [0, 2, 3]],
            edges: vec![
                EdgeSpec { v: [0, 1], tag: EdgeTag::Dirichlet, left: 0, right: None, flux: None },
                EdgeSpec { v: [1, 2], tag: EdgeTag::Neumann, left: 0, right: None, flux: Some(fr) },
                EdgeSpec { v: [0, 2], tag: EdgeTag::Interior, left: 0, right: Some(1), flux: None },
                EdgeSpec { v: [2, 3], tag: EdgeTag::Neumann, left: 1, right: None, flux: Some(ft) },
                EdgeSpec { v: [3, 0], tag: EdgeTag::Dirichlet, left: 1, right: None, flux: None },
            ],
            data: DataSpec { a: vec![[[1.0, 0.0], [0.0, 1.0]]; 2], rho: 0.0, f: vec![f0, f1], lambda1: 1.0, u_d: None },
        }
    }

    #[test]
    fn exact_pair_gives_zero() {
        // u = x y: -lap u = 0, du/dn = y on x = 1, x on y = 1.
        let mesh = two_triangles(vec![], vec![], [vec![(1, 1.0)], vec![(0, 1.0), (1, -1.0)]]);
        let u = vec![(1, 1, 1.0)];
        let q = [vec![(0, 1, 1.0)], vec![(1, 0, 1.0)]];
        let fields = FieldsSpec { v: vec![u.clone(); 2], q: vec![q.clone(), q], u_exact: Some(u) };
        let rep = report(&mesh, &fields, MajorantOptions::default()).unwrap();
        assert!(rep.total < 1e-12, "{rep:?}");
        assert_eq!(rep.true_error, Some(0.0));
        assert_eq!(rep.efficiency_index, None);
    }

    #[test]
    fn interior_jump_is_reported_with_its_integral() {
        let mesh = two_triangles(vec![], vec![], [vec![(1, 1.0)], vec![(0, 1.0), (1, -1.0)]]);
        let u = vec![(1, 1, 1.0)];
        // Adding c n on one side, n = (1, -1) / sqrt 2 for the diagonal.
        let c = 0.25;
        let s = c / 2f64.sqrt();
        let q0 = [vec![(0, 1, 1.0), (0, 0, s)], vec![(1, 0, 1.0), (0, 0, -s)]];
        let q1 = [vec![(0, 1, 1.0)], vec![(1, 0, 1.0)]];
        let fields = FieldsSpec { v: vec![u.clone(); 2], q: vec![q0, q1], u_exact: None };
        let (domain, data) = build_problem(&mesh).unwrap();
        let (v, q, _) = build_fields(&fields, &domain).unwrap();
        // The constant perturbation also shifts the Neumann mean on x = 1.
        let viol = check_admissibility(&v, &q, &data, &domain).unwrap();
        let interior: Vec<_> = viol.iter().filter(|x| matches!(x, Violation::InteriorFluxMean { .. })).collect();
        assert_eq!(interior.len(), 1);
        match *interior[0] {
            Violation::InteriorFluxMean { edge, integral } => {
                assert_eq!(edge, 2);
                assert!((integral.abs() - c * 2f64.sqrt()).abs() < 1e-12);
            }
            ref other => panic!("{other:?}"),
        }
        assert!(matches!(majorant(&v, &q, &data, &domain, MajorantOptions::default()), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn unbalanced_subdomain_is_flagged() {
        let mesh = two_triangles(vec![], vec![(0, 0, 1.0)], [vec![(1, 1.0)], vec![(0, 1.0), (1, -1.0)]]);
        let u = vec![(1, 1, 1.0)];
        let q = [vec![(0, 1, 1.0)], vec![(1, 0, 1.0)]];
        let fields = FieldsSpec { v: vec![u.clone(); 2], q: vec![q.clone(), q], u_exact: None };
        match report(&mesh, &fields, MajorantOptions::default()) {
            Err(Error::Inadmissible(v)) => {
                assert!(v.iter().any(|x| matches!(x, Violation::SubdomainBalance { subdomain: 1, .. })))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn true_error_of_linear_function() {
        let mesh = two_triangles(vec![], vec![], [vec![], vec![]]);
        let (domain, mut data) = build_problem(&mesh).unwrap();
        let v = ScalarField(vec![Polynomial::zero(2); 2]);
        let u = Polynomial::variable(2, 0);
        assert!((true_error(&v, &u, &data, &domain).unwrap() - 1.0).abs() < 1e-15);
        data.rho = BigRational::from_integer(1.into());
        let expect = (1.0f64 + 1.0 / 3.0).sqrt();
        assert!((true_error(&v, &u, &data, &domain).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn trace_constant_of_unit_leg_triangle() {
        let mesh = two_triangles(vec![], vec![], [vec![], vec![]]);
        let (domain, _) = build_problem(&mesh).unwrap();
        // Edge 0-1 of subdomain 0 is a leg of a right isosceles triangle.
        let c = domain.trace_constant(0, 0).unwrap();
        let exact = 1.0 / (crate::constants::root_tantanh() * crate::constants::root_tantanh().tanh()).sqrt();
        assert!((c - exact).abs() < 1e-9, "{c} vs {exact}");
    }

    #[test]
    fn malformed_meshes_are_rejected() {
        let mut mesh = two_triangles(vec![], vec![], [vec![], vec![]]);
        mesh.edges.pop();
        assert!(matches!(build_problem(&mesh), Err(Error::InvalidInput(_))));
        let mut mesh = two_triangles(vec![], vec![], [vec![], vec![]]);
        mesh.data.a[0] = [[0.5, 0.0], [0.0, 1.0]];
        assert!(matches!(build_problem(&mesh), Err(Error::InvalidInput(_))));
    }
}
