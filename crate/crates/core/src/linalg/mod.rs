//! Sparse matrices and the linear solves used inside every Newton step.

mod gmres;
mod ldlt;
mod lu;
mod sparse;

pub use gmres::{gmres, GmresOutcome};
pub use ldlt::SparseLdlt;
pub use lu::{solve, LinearSolver, SolverStats, SparseLu, RESIDUAL_FACTOR};
pub use sparse::{CooBuilder, SparseMatrix};

use crate::Real;

pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
