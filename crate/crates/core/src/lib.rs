//! Stabilized Lagrange-Galerkin finite elements for the Oseen-type Peterlin
//! viscoelastic model on the unit square.
//!
//! Velocity, pressure and conformation tensor are all approximated by
//! continuous P1 elements. Equal-order velocity/pressure is made stable by a
//! Brezzi-Pitkäranta pressure term, the material derivative is discretized
//! along first-order characteristics, and each time step solves the fully
//! coupled nonlinear system with Newton's method.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64` for everyday use.

pub mod characteristics;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod scheme;
pub mod study;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TriMesh = mesh::TriMesh<f64>;
pub type SparseMatrix = linalg::SparseMatrix<f64>;
pub type CooBuilder = linalg::CooBuilder<f64>;
pub type FeFunction = fem::FeFunction<f64>;
pub type QuadratureRule = quadrature::QuadratureRule<f64>;
pub type SchemeParams = scheme::SchemeParams<f64>;
pub type StateTriple = scheme::StateTriple<f64>;
pub type ExactSolution = manufactured::ExactSolution;
pub type RelativeErrors = manufactured::RelativeErrors<f64>;

pub type TriMeshF32 = mesh::TriMesh<f32>;
pub type FeFunctionF32 = fem::FeFunction<f32>;
pub type SparseMatrixF32 = linalg::SparseMatrix<f32>;
