//! Lowest-order mixed virtual elements for the two-dimensional linear
//! elasticity eigenvalue problem in pseudostress-displacement form.
//!
//! Geometry, quadrature, local element matrices and assembly are generic over
//! the scalar type; the eigensolver and the study harness work in `f64`.
//! The aliases below fix the scalar for the common case.

pub mod assembly;
pub mod dense;
pub mod eigensolve;
pub mod error;
pub mod parallel;
pub mod polymesh;
pub mod polyquad;
pub mod scalar;
pub mod sparse;
pub mod study;
pub mod vemlocal;
pub mod vtk;

pub use error::{Error, Result};

pub type Point = polymesh::Point2<f64>;
pub type Mesh = polymesh::PolygonMesh<f64>;
pub type Tensor = vemlocal::Tensor2<f64>;
pub type CellGeometry = vemlocal::CellGeometry<f64>;
pub type Projector = vemlocal::LocalProjector<f64>;
pub type ElementMatrices = vemlocal::LocalMatrices<f64>;
pub type System = assembly::GlobalSystem<f64>;
pub type SparseMatrix = sparse::CscMatrix<f64>;
