//! Parametric triangles and tetrahedra, reference simplices and the affine
//! maps between them.
//!
//! A triangle is described by the length `h` of its edge AB, the ratio
//! `rho = |AC| / |AB|` and the angle `alpha` at A:
//! `A = (0,0)`, `B = (h,0)`, `C = (h rho cos alpha, h rho sin alpha)`.
//! The distinguished boundary part Gamma is the edge AB on the x-axis.
//!
//! A tetrahedron uses `A = 0`, `B = (h1,0,0)`, `C = (0,0,h3)` and
//! `D = h2 (sin theta cos alpha, sin theta sin alpha, cos theta)`.
//! Gamma is the face ABC in the plane `y = 0`.

use num_rational::BigRational;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::rational::rationalize;

/// Angle label of a reference simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RefAngle {
    #[serde(rename = "pi/4")]
    PiOver4,
    #[serde(rename = "pi/3")]
    PiOver3,
    #[serde(rename = "pi/2")]
    PiOver2,
    #[serde(rename = "2pi/3")]
    TwoPiOver3,
}

impl RefAngle {
    pub fn radians(self) -> f64 {
        match self {
            RefAngle::PiOver4 => FRAC_PI_4,
            RefAngle::PiOver3 => FRAC_PI_3,
            RefAngle::PiOver2 => FRAC_PI_2,
            RefAngle::TwoPiOver3 => 2.0 * FRAC_PI_3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RefAngle::PiOver4 => "pi/4",
            RefAngle::PiOver3 => "pi/3",
            RefAngle::PiOver2 => "pi/2",
            RefAngle::TwoPiOver3 => "2pi/3",
        }
    }
}

/// Selects one reference simplex.
///
/// Triangles: `pi/2` is (0,0),(1,0),(0,1); `pi/4` is (0,0),(1,0),(1/2,1/2);
/// `pi/3` is the unit equilateral triangle. In each case Gamma is the unit
/// edge on the x-axis.
///
/// Tetrahedra: (0,0,0),(1,0,0),(0,0,1),(cos a, sin a, 0) for the four
/// angles `a`; Gamma is the face in the plane `y = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ReferenceTag {
    pub dimension: u8,
    pub angle: RefAngle,
}

impl ReferenceTag {
    pub const TRIANGLES: [ReferenceTag; 3] = [
        ReferenceTag { dimension: 2, angle: RefAngle::PiOver4 },
        ReferenceTag { dimension: 2, angle: RefAngle::PiOver3 },
        ReferenceTag { dimension: 2, angle: RefAngle::PiOver2 },
    ];

    pub const TETRAHEDRA: [ReferenceTag; 4] = [
        ReferenceTag { dimension: 3, angle: RefAngle::PiOver4 },
        ReferenceTag { dimension: 3, angle: RefAngle::PiOver3 },
        ReferenceTag { dimension: 3, angle: RefAngle::PiOver2 },
        ReferenceTag { dimension: 3, angle: RefAngle::TwoPiOver3 },
    ];

    pub fn triangle(angle: RefAngle) -> Result<Self> {
        if angle == RefAngle::TwoPiOver3 {
            return Err(Error::InvalidInput("no reference triangle with angle 2pi/3".into()));
        }
        Ok(ReferenceTag { dimension: 2, angle })
    }

    pub fn tetrahedron(angle: RefAngle) -> Self {
        ReferenceTag { dimension: 3, angle }
    }

    /// Vertices of the reference simplex, padded to three coordinates.
    pub fn vertices(self) -> Vec<[f64; 3]> {
        let a = self.angle.radians();
        match self.dimension {
            2 => {
                let c = match self.angle {
                    RefAngle::PiOver2 => [0.0, 1.0, 0.0],
                    RefAngle::PiOver4 => [0.5, 0.5, 0.0],
                    _ => [0.5, 3f64.sqrt() / 2.0, 0.0],
                };
                vec![[0.0; 3], [1.0, 0.0, 0.0], c]
            }
            _ => vec![
                [0.0; 3],
                [1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0],
                [a.cos(), a.sin(), 0.0],
            ],
        }
    }
}

/// Triangle `(h, rho, alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Triangle2D {
    h: f64,
    rho: f64,
    alpha: f64,
}

impl Triangle2D {
    pub fn new(h: f64, rho: f64, alpha: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::DegenerateShape(format!("h must be positive, got {h}")));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::DegenerateShape(format!("rho must be positive, got {rho}")));
        }
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::DegenerateShape(format!("alpha must lie in (0, pi), got {alpha}")));
        }
        let t = Triangle2D { h, rho, alpha };
        if !(t.area() > 0.0) {
            return Err(Error::DegenerateShape("zero area".into()));
        }
        Ok(t)
    }

    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn area(&self) -> f64 {
        0.5 * self.h * self.h * self.rho * self.alpha.sin()
    }

    /// `[A, B, C]`.
    pub fn vertices(&self) -> [[f64; 2]; 3] {
        let hr = self.h * self.rho;
        [
            [0.0, 0.0],
            [self.h, 0.0],
            [hr * self.alpha.cos(), hr * self.alpha.sin()],
        ]
    }

    /// Vertices snapped to rationals (see [`crate::rational`]).
    pub fn rational_vertices(&self) -> [[BigRational; 2]; 3] {
        let v = self.vertices();
        let scale = v.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        v.map(|p| p.map(|x| rationalize(x, scale)))
    }

    pub fn metrics(&self) -> Metrics {
        let v = self.vertices();
        Metrics::from_points(&v.map(|p| [p[0], p[1], 0.0]), 2)
    }
}

/// Tetrahedron `(h1, h2, h3, alpha, theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tetrahedron3D {
    h1: f64,
    h2: f64,
    h3: f64,
    alpha: f64,
    theta: f64,
}

impl Tetrahedron3D {
    pub fn new(h1: f64, h2: f64, h3: f64, alpha: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("h1", h1), ("h2", h2), ("h3", h3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::DegenerateShape(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha", alpha), ("theta", theta)] {
            if !(v > 0.0 && v < PI) {
                return Err(Error::DegenerateShape(format!("{name} must lie in (0, pi), got {v}")));
            }
        }
        let t = Tetrahedron3D { h1, h2, h3, alpha, theta };
        if !(t.volume() > 0.0) {
            return Err(Error::DegenerateShape("zero volume".into()));
        }
        Ok(t)
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }
    pub fn h2(&self) -> f64 {
        self.h2
    }
    pub fn h3(&self) -> f64 {
        self.h3
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `h2 / h1`.
    pub fn rho(&self) -> f64 {
        self.h2 / self.h1
    }

    pub fn volume(&self) -> f64 {
        self.h1 * self.h2 * self.h3 * self.alpha.sin() * self.theta.sin() / 6.0
    }

    /// `[A, B, C, D]`.
    pub fn vertices(&self) -> [[f64; 3]; 4] {
        let (sa, ca) = self.alpha.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        [
            [0.0, 0.0, 0.0],
            [self.h1, 0.0, 0.0],
            [0.0, 0.0, self.h3],
            [self.h2 * st * ca, self.h2 * st * sa, self.h2 * ct],
        ]
    }

    pub fn rational_vertices(&self) -> [[BigRational; 3]; 4] {
        let v = self.vertices();
        let scale = v.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        v.map(|p| p.map(|x| rationalize(x, scale)))
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from_points(&self.vertices(), 3)
    }
}

/// Either kind of parametric simplex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Shape {
    Triangle(Triangle2D),
    Tetrahedron(Tetrahedron3D),
}

impl Shape {
    pub fn dimension(&self) -> usize {
        match self {
            Shape::Triangle(_) => 2,
            Shape::Tetrahedron(_) => 3,
        }
    }

    /// Length scale of the dimensionless constants: `h` or `h2`.
    pub fn scale(&self) -> f64 {
        match self {
            Shape::Triangle(t) => t.h(),
            Shape::Tetrahedron(t) => t.h2(),
        }
    }

    /// Vertices padded to three coordinates.
    pub fn vertices(&self) -> Vec<[f64; 3]> {
        match self {
            Shape::Triangle(t) => t.vertices().iter().map(|p| [p[0], p[1], 0.0]).collect(),
            Shape::Tetrahedron(t) => t.vertices().to_vec(),
        }
    }

    pub fn metrics(&self) -> Metrics {
        match self {
            Shape::Triangle(t) => t.metrics(),
            Shape::Tetrahedron(t) => t.metrics(),
        }
    }
}

impl From<Triangle2D> for Shape {
    fn from(t: Triangle2D) -> Self {
        Shape::Triangle(t)
    }
}

impl From<Tetrahedron3D> for Shape {
    fn from(t: Tetrahedron3D) -> Self {
        Shape::Tetrahedron(t)
    }
}

/// Metric quantities of a simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub diameter: f64,
    /// Perimeter of a triangle, surface area of a tetrahedron.
    pub perimeter_or_surface: f64,
    /// Area of a triangle, volume of a tetrahedron.
    pub area_or_volume: f64,
    pub edge_lengths: Vec<f64>,
}

impl Metrics {
    fn from_points(p: &[[f64; 3]], dim: usize) -> Self {
        let mut edge_lengths = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                edge_lengths.push(norm(sub(p[j], p[i])));
            }
        }
        let diameter = edge_lengths.iter().cloned().fold(0.0, f64::max);
        let (perimeter_or_surface, area_or_volume) = if dim == 2 {
            let area = 0.5 * cross(sub(p[1], p[0]), sub(p[2], p[0]))[2].abs();
            (edge_lengths.iter().sum(), area)
        } else {
            let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
            let surface = faces
                .iter()
                .map(|f| 0.5 * norm(cross(sub(p[f[1]], p[f[0]]), sub(p[f[2]], p[f[0]]))))
                .sum();
            let vol = dot(cross(sub(p[1], p[0]), sub(p[2], p[0])), sub(p[3], p[0])).abs() / 6.0;
            (surface, vol)
        };
        Metrics { diameter, perimeter_or_surface, area_or_volume, edge_lengths }
    }
}

/// Linear map `x = B x_hat` from a reference simplex onto a target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineMap {
    pub dimension: usize,
    /// Row-major; only the leading `dimension x dimension` block is used.
    pub matrix: [[f64; 3]; 3],
    pub determinant: f64,
}

impl AffineMap {
    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for (i, yi) in y.iter_mut().enumerate().take(self.dimension) {
            *yi = (0..self.dimension).map(|j| self.matrix[i][j] * x[j]).sum();
        }
        y
    }

    /// `B B^T` (leading block).
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let d = self.dimension;
        let mut g = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                g[i][j] = (0..d).map(|k| self.matrix[i][k] * self.matrix[j][k]).sum();
            }
        }
        g
    }
}

/// Map from the reference triangle `reference` onto `target` sending
/// A_hat, B_hat, C_hat to A, B, C.
pub fn affine_map_2d(target: &Triangle2D, reference: ReferenceTag) -> Result<AffineMap> {
    if reference.dimension != 2 {
        return Err(Error::InvalidInput("affine_map_2d needs a triangle reference".into()));
    }
    let (h, rho, a) = (target.h, target.rho, target.alpha);
    let (s, c) = a.sin_cos();
    let sqrt3 = 3f64.sqrt();
    let (b12, b22, det) = match reference.angle {
        RefAngle::PiOver2 => (h * rho * c, h * rho * s, rho * h * h * s),
        RefAngle::PiOver4 => (2.0 * rho * h * c - h, 2.0 * rho * h * s, 2.0 * rho * h * h * s),
        RefAngle::PiOver3 => (
            h / sqrt3 * (2.0 * rho * c - 1.0),
            2.0 * h / sqrt3 * rho * s,
            2.0 * h * h / sqrt3 * rho * s,
        ),
        RefAngle::TwoPiOver3 => unreachable!("rejected by ReferenceTag::triangle"),
    };
    Ok(AffineMap {
        dimension: 2,
        matrix: [[h, b12, 0.0], [0.0, b22, 0.0], [0.0; 3]],
        determinant: det,
    })
}

/// Map from the reference tetrahedron `reference` onto `target` sending
/// A_hat, B_hat, C_hat, D_hat to A, B, C, D.
pub fn affine_map_3d(target: &Tetrahedron3D, reference: ReferenceTag) -> Result<AffineMap> {
    if reference.dimension != 3 {
        return Err(Error::InvalidInput("affine_map_3d needs a tetrahedron reference".into()));
    }
    let t = target;
    let ah = reference.angle.radians();
    let (sah, cah) = ah.sin_cos();
    let (sa, ca) = t.alpha.sin_cos();
    let (st, ct) = t.theta.sin_cos();
    let nu = ca * st - t.h1 / t.h2 * cah;
    let matrix = [
        [t.h1, t.h2 * nu / sah, 0.0],
        [0.0, t.h2 * sa * st / sah, 0.0],
        [0.0, t.h2 * ct / sah, t.h3],
    ];
    Ok(AffineMap {
        dimension: 3,
        matrix,
        determinant: t.h1 * t.h2 * t.h3 * sa * st / sah,
    })
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
