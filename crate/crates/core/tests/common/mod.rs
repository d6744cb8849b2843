//! Manufactured reaction-diffusion problem on the unit square cut into four
//! triangles around the centre: `u = x(1-x)y(1-y)`, `A = I`, `rho = 0`,
//! homogeneous Dirichlet data on the whole boundary.

#![allow(dead_code)]

use pbounds::majorant::{DataSpec, EdgeSpec, EdgeTag, FieldsSpec, MeshSpec, PolySpec};

pub const VERTICES: [[f64; 2]; 5] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
pub const SUBDOMAINS: [[usize; 3]; 4] = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];

pub fn square_mesh() -> MeshSpec {
    let boundary = |a, b, owner| EdgeSpec { v: [a, b], tag: EdgeTag::Dirichlet, left: owner, right: None, flux: None };
    let interior = |a, b, l, r| EdgeSpec { v: [a, b], tag: EdgeTag::Interior, left: l, right: Some(r), flux: None };
    MeshSpec {
        vertices: VERTICES.to_vec(),
        subdomains: SUBDOMAINS.to_vec(),
        edges: vec![
            boundary(0, 1, 0),
            boundary(1, 2, 1),
            boundary(2, 3, 2),
            boundary(3, 0, 3),
            interior(0, 4, 3, 0),
            interior(1, 4, 0, 1),
            interior(2, 4, 1, 2),
            interior(3, 4, 2, 3),
        ],
        data: DataSpec {
            a: vec![[[1.0, 0.0], [0.0, 1.0]]; 4],
            rho: 0.0,
            // -lap u = 2x(1-x) + 2y(1-y)
            f: vec![vec![(1, 0, 2.0), (2, 0, -2.0), (0, 1, 2.0), (0, 2, -2.0)]; 4],
            lambda1: 1.0,
            u_d: Some(vec![]),
        },
    }
}

pub fn exact_u() -> PolySpec {
    vec![(1, 1, 1.0), (2, 1, -1.0), (1, 2, -1.0), (2, 2, 1.0)]
}

pub fn exact_flux() -> [PolySpec; 2] {
    // (1-2x)(y-y^2), (x-x^2)(1-2y)
    [
        vec![(0, 1, 1.0), (0, 2, -1.0), (1, 1, -2.0), (1, 2, 2.0)],
        vec![(1, 0, 1.0), (2, 0, -1.0), (1, 1, -2.0), (2, 1, 2.0)],
    ]
}

pub fn exact_fields() -> FieldsSpec {
    FieldsSpec { v: vec![exact_u(); 4], q: vec![exact_flux(); 4], u_exact: Some(exact_u()) }
}

/// `b (c0 + c1 x + c2 y)` with the boundary bubble `b = x(1-x)y(1-y)`; the
/// same polynomial on every subdomain keeps `v` conforming.
pub fn perturbed_u(c: [f64; 3]) -> PolySpec {
    let mut p = exact_u();
    for (sa, sb, s) in exact_u() {
        p.push((sa, sb, s * c[0]));
        p.push((sa + 1, sb, s * c[1]));
        p.push((sa, sb + 1, s * c[2]));
    }
    p
}

/// Linear field `p` on subdomain `i` minus the lowest-order Raviart-Thomas
/// field with the same edge fluxes, so every edge mean of the normal
/// component vanishes. `p = (a0 + a1 x + a2 y, b0 + b1 x + b2 y)`.
pub fn zero_flux_perturbation(i: usize, a: [f64; 3], b: [f64; 3]) -> [PolySpec; 2] {
    let v = SUBDOMAINS[i].map(|k| VERTICES[k]);
    let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    let eval = |c: [f64; 3], p: [f64; 2]| c[0] + c[1] * p[0] + c[2] * p[1];
    let mut px = vec![(0, 0, a[0]), (1, 0, a[1]), (0, 1, a[2])];
    let mut py = vec![(0, 0, b[0]), (1, 0, b[1]), (0, 1, b[2])];
    for e in 0..3 {
        let (s, t, opposite) = (v[e], v[(e + 1) % 3], v[(e + 2) % 3]);
        let mid = [(s[0] + t[0]) / 2.0, (s[1] + t[1]) / 2.0];
        // Outward normal scaled by the edge length, vertices counter-clockwise.
        let n = [t[1] - s[1], s[0] - t[0]];
        let flux = eval(a, mid) * n[0] + eval(b, mid) * n[1];
        // RT0 function carrying `flux` through this edge only: flux/(2|T|) (x - P).
        let k = flux / (2.0 * area);
        px.extend([(1, 0, -k), (0, 0, k * opposite[0])]);
        py.extend([(0, 1, -k), (0, 0, k * opposite[1])]);
    }
    [px, py]
}

/// Exact flux plus one zero-flux perturbation per subdomain, scaled by `amp`.
pub fn perturbed_flux(coeffs: &[[f64; 6]; 4], amp: f64) -> Vec<[PolySpec; 2]> {
    (0..4)
        .map(|i| {
            let c = coeffs[i].map(|x| x * amp);
            let [dx, dy] = zero_flux_perturbation(i, [c[0], c[1], c[2]], [c[3], c[4], c[5]]);
            let [mut qx, mut qy] = exact_flux();
            qx.extend(dx);
            qy.extend(dy);
            [qx, qy]
        })
        .collect()
}
