//! Two-sided bounds for Poincare and trace constants on triangles and
//! tetrahedra, and an a posteriori error majorant built on them.

pub mod analytic;
pub mod cli;
pub mod constants;
pub mod eigen;
pub mod eigenfunctions;
pub mod error;
pub mod geometry;
pub mod integration;
pub mod linalg;
pub mod majorant;
pub mod precision;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod tables;

pub use error::{Error, Result};
