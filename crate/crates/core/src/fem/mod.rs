//! Continuous P1 spaces: nodal functions, bilinear-form assembly and norms.

mod assembly;
mod norms;

use std::sync::Arc;

pub use assembly::{
    assemble_ac, assemble_au, assemble_b, assemble_mass, assemble_sh, element_au, element_b, element_mass,
    element_stiffness,
};
pub use norms::{norms, pressure_h_seminorm, Norms};

use crate::error::{Error, Result};
use crate::mesh::{Bary, TriMesh};
use crate::tensor::{Mat2, Point, Sym2, Vec2};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Scalar,
    Vector2,
    /// Symmetric 2x2 tensor, stored per node as `(T11, T12, T22)`.
    SymTensor2,
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector2 => 2,
            FieldKind::SymTensor2 => 3,
        }
    }
}

/// Point value of a finite-element function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeValue<T> {
    Scalar(T),
    Vector(Vec2<T>),
    Tensor(Sym2<T>),
}

/// P1 function with coefficients interleaved per node: `coeffs[v * m + k]`.
#[derive(Clone, Debug)]
pub struct FeFunction<T> {
    kind: FieldKind,
    coeffs: Vec<T>,
    mesh: Arc<TriMesh<T>>,
}

impl<T: Real> FeFunction<T> {
    pub fn zeros(mesh: Arc<TriMesh<T>>, kind: FieldKind) -> Self {
        let n = mesh.n_vertices() * kind.components();
        Self {
            kind,
            coeffs: vec![T::zero(); n],
            mesh,
        }
    }

    pub fn from_coeffs(mesh: Arc<TriMesh<T>>, kind: FieldKind, coeffs: Vec<T>) -> Result<Self> {
        let expected = mesh.n_vertices() * kind.components();
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{kind:?} function needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { kind, coeffs, mesh })
    }

    /// Nodal interpolant of a scalar field.
    pub fn interpolate_scalar(mesh: Arc<TriMesh<T>>, mut f: impl FnMut(Point<T>) -> T) -> Self {
        let coeffs = mesh.vertices.iter().map(|&x| f(x)).collect();
        Self {
            kind: FieldKind::Scalar,
            coeffs,
            mesh,
        }
    }

    pub fn interpolate_vector(mesh: Arc<TriMesh<T>>, mut f: impl FnMut(Point<T>) -> Vec2<T>) -> Self {
        let coeffs = mesh.vertices.iter().flat_map(|&x| f(x)).collect();
        Self {
            kind: FieldKind::Vector2,
            coeffs,
            mesh,
        }
    }

    pub fn interpolate_tensor(mesh: Arc<TriMesh<T>>, mut f: impl FnMut(Point<T>) -> Sym2<T>) -> Self {
        let coeffs = mesh.vertices.iter().flat_map(|&x| f(x).components()).collect();
        Self {
            kind: FieldKind::SymTensor2,
            coeffs,
            mesh,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Nodal coefficients of vertex `v`.
    pub fn node(&self, v: usize) -> &[T] {
        let m = self.components();
        &self.coeffs[v * m..(v + 1) * m]
    }

    /// Component `k` at `bary` inside triangle `tri`.
    pub fn eval_component(&self, tri: usize, bary: &Bary<T>, k: usize) -> T {
        let m = self.components();
        let verts = self.mesh.triangles[tri];
        (0..3).map(|i| bary[i] * self.coeffs[verts[i] * m + k]).sum()
    }

    pub fn eval(&self, tri: usize, bary: &Bary<T>) -> FeValue<T> {
        match self.kind {
            FieldKind::Scalar => FeValue::Scalar(self.eval_scalar(tri, bary)),
            FieldKind::Vector2 => FeValue::Vector(self.eval_vector(tri, bary)),
            FieldKind::SymTensor2 => FeValue::Tensor(self.eval_tensor(tri, bary)),
        }
    }

    pub fn eval_scalar(&self, tri: usize, bary: &Bary<T>) -> T {
        debug_assert_eq!(self.kind, FieldKind::Scalar);
        self.eval_component(tri, bary, 0)
    }

    pub fn eval_vector(&self, tri: usize, bary: &Bary<T>) -> Vec2<T> {
        debug_assert_eq!(self.kind, FieldKind::Vector2);
        [self.eval_component(tri, bary, 0), self.eval_component(tri, bary, 1)]
    }

    pub fn eval_tensor(&self, tri: usize, bary: &Bary<T>) -> Sym2<T> {
        debug_assert_eq!(self.kind, FieldKind::SymTensor2);
        Sym2::new(
            self.eval_component(tri, bary, 0),
            self.eval_component(tri, bary, 1),
            self.eval_component(tri, bary, 2),
        )
    }

    /// Locates `p` in the mesh and evaluates there.
    pub fn eval_at(&self, p: Point<T>, hint: Option<usize>) -> Result<FeValue<T>> {
        let (tri, bary) = self.mesh.locate(p, hint)?;
        Ok(self.eval(tri, &bary))
    }

    /// Constant gradient of each component on triangle `tri`.
    pub fn grad(&self, tri: usize) -> Vec<Vec2<T>> {
        (0..self.components()).map(|k| self.grad_component(tri, k)).collect()
    }

    pub fn grad_component(&self, tri: usize, k: usize) -> Vec2<T> {
        let m = self.components();
        let verts = self.mesh.triangles[tri];
        let g = self.mesh.basis_gradients(tri);
        let mut out = [T::zero(); 2];
        for i in 0..3 {
            let c = self.coeffs[verts[i] * m + k];
            out[0] += c * g[i][0];
            out[1] += c * g[i][1];
        }
        out
    }

    /// `(∇u)_ij = ∂u_i/∂x_j` of a vector field on triangle `tri`.
    pub fn grad_vector(&self, tri: usize) -> Mat2<T> {
        debug_assert_eq!(self.kind, FieldKind::Vector2);
        let g0 = self.grad_component(tri, 0);
        let g1 = self.grad_component(tri, 1);
        Mat2::new(g0[0], g0[1], g1[0], g1[1])
    }

    /// Symmetrized gradient `D(u)` of a vector field on triangle `tri`.
    pub fn sym_grad(&self, tri: usize) -> Sym2<T> {
        self.grad_vector(tri).sym()
    }

    pub fn div(&self, tri: usize) -> T {
        self.grad_vector(tri).trace()
    }

    /// Coefficient-wise `self - other`; both must live on the same mesh and space.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DimensionMismatch("functions from different spaces".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect();
        Ok(Self {
            kind: self.kind,
            coeffs,
            mesh: self.mesh.clone(),
        })
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            kind: self.kind,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            mesh: self.mesh.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn mesh(n: usize) -> Arc<TriMesh<f64>> {
        Arc::new(TriMesh::structured(n).unwrap())
    }

    #[test]
    fn constants_evaluate_to_one() {
        let m = mesh(3);
        let f = FeFunction::interpolate_scalar(m, |_| 1.0);
        assert!((f.eval_scalar(5, &[0.2, 0.3, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linears_are_reproduced() {
        let m = mesh(4);
        let f = FeFunction::interpolate_scalar(m.clone(), |x| x[0]);
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            let (k, b) = m.locate(p, None).unwrap();
            assert!((f.eval_scalar(k, &b) - p[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn nodal_values_recovered_at_vertices() {
        let m = mesh(2);
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let coeffs: Vec<f64> = (0..3 * m.n_vertices()).map(|_| rng.random()).collect();
        let f = FeFunction::from_coeffs(m.clone(), FieldKind::SymTensor2, coeffs).unwrap();
        let tri = m.triangles[3];
        let c = f.eval_tensor(3, &[0.0, 1.0, 0.0]);
        assert_eq!(c.components(), [f.node(tri[1])[0], f.node(tri[1])[1], f.node(tri[1])[2]]);
    }

    #[test]
    fn rotation_has_skew_gradient() {
        let m = mesh(3);
        let u = FeFunction::interpolate_vector(m.clone(), |x| [x[1], -x[0]]);
        for k in 0..m.n_triangles() {
            let g = u.grad_vector(k);
            assert!((g.m[0][1] - 1.0).abs() < 1e-13 && (g.m[1][0] + 1.0).abs() < 1e-13);
            assert!(g.m[0][0].abs() < 1e-13 && g.m[1][1].abs() < 1e-13);
            assert!(u.sym_grad(k).norm_frobenius() < 1e-13);
        }
    }

    #[test]
    fn stretching_has_unit_divergence() {
        let m = mesh(3);
        let u = FeFunction::interpolate_vector(m.clone(), |x| [x[0], 0.0]);
        assert!((0..m.n_triangles()).all(|k| (u.div(k) - 1.0).abs() < 1e-13));
    }

    #[test]
    fn random_linear_gradient() {
        let m = mesh(5);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let (a, b, c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let f = FeFunction::interpolate_scalar(m.clone(), |x| a + b * x[0] + c * x[1]);
        for k in 0..m.n_triangles() {
            let g = f.grad_component(k, 0);
            assert!((g[0] - b).abs() < 1e-13 && (g[1] - c).abs() < 1e-13);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(FeFunction::from_coeffs(mesh(1), FieldKind::Vector2, vec![0.0; 4]).is_err());
    }
}
