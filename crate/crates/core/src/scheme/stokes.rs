use std::sync::Arc;

use super::BorderedStokes;
use crate::error::{Error, Result};
use crate::fem::{element_au, element_b, element_stiffness, FeFunction, FieldKind};
use crate::linalg::{norm2, CooBuilder, RESIDUAL_FACTOR};
use crate::mesh::{Bary, TriMesh};
use crate::quadrature::QuadratureRule;
use crate::tensor::{Mat2, Point};
use crate::Real;

/// Velocity gradient and pressure of the field being projected, evaluated at a
/// point `x` known to lie at `bary` in triangle `tri`.
pub trait StokesData<T: Real> {
    fn velocity_grad(&self, tri: usize, bary: &Bary<T>, x: Point<T>) -> Mat2<T>;
    fn pressure(&self, tri: usize, bary: &Bary<T>, x: Point<T>) -> T;
}

/// Finite-element velocity with an optional finite-element pressure (else 0).
#[derive(Clone, Copy, Debug)]
pub struct DiscreteStokesData<'a, T> {
    pub u: &'a FeFunction<T>,
    pub p: Option<&'a FeFunction<T>>,
}

impl<T: Real> StokesData<T> for DiscreteStokesData<'_, T> {
    fn velocity_grad(&self, tri: usize, _bary: &Bary<T>, _x: Point<T>) -> Mat2<T> {
        self.u.grad_vector(tri)
    }

    fn pressure(&self, tri: usize, bary: &Bary<T>, _x: Point<T>) -> T {
        self.p.map_or(T::zero(), |p| p.eval_scalar(tri, bary))
    }
}

/// Stabilized Stokes projection `(û, p̂)` of `(u, p)`:
/// `ν a_u(û, v) + b(v, p̂) + b(û, q) - S_h(p̂, q) = ν a_u(u, v) + b(v, p) + b(u, q)`
/// for all discrete `(v, q)`, with `û = 0` on the boundary and `∫p̂ = 0`.
pub fn stokes_project<T: Real, D: StokesData<T> + ?Sized>(
    data: &D,
    mesh: &Arc<TriMesh<T>>,
    nu: T,
    delta0: T,
) -> Result<(FeFunction<T>, FeFunction<T>)> {
    let nv = mesh.n_vertices();
    let n = 3 * nv;
    let dirichlet = |d: usize| d % 3 < 2 && mesh.boundary_vertex[d / 3];
    let rule = QuadratureRule::degree5();
    let mut coo = CooBuilder::with_capacity(n, n, 81 * mesh.n_triangles() + nv);
    let mut rhs = vec![T::zero(); n];
    let two = T::lit(2.0);
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let g = mesh.basis_gradients(k);
        let area = mesh.area(k);
        let au = element_au(g, area);
        let bm = element_b(g, area);
        let stiff = element_stiffness(g, area);
        let sh = delta0 * mesh.h_k[k] * mesh.h_k[k];
        let mut push = |r: usize, c: usize, v: T| {
            if !dirichlet(r) && !dirichlet(c) {
                coo.push(r, c, v);
            }
        };
        for a in 0..3 {
            for b in 0..3 {
                let (ra, cb) = (3 * tri[a], 3 * tri[b]);
                for i in 0..2 {
                    for j in 0..2 {
                        push(ra + i, cb + j, nu * au[2 * a + i][2 * b + j]);
                    }
                    push(ra + i, cb + 2, bm[b][2 * a + i]);
                    push(ra + 2, cb + i, bm[a][2 * b + i]);
                }
                push(ra + 2, cb + 2, -sh * stiff[a][b]);
            }
        }
        for (bary, wq) in rule.iter() {
            let x = mesh.position(k, bary);
            let gu = data.velocity_grad(k, bary, x);
            let du = gu.sym();
            let p = data.pressure(k, bary, x);
            let wa = wq * area;
            for a in 0..3 {
                let ra = 3 * tri[a];
                for i in 0..2 {
                    let dv = if i == 0 {
                        du.xx * g[a][0] + du.xy * g[a][1]
                    } else {
                        du.xy * g[a][0] + du.yy * g[a][1]
                    };
                    rhs[ra + i] += wa * (two * nu * dv - g[a][i] * p);
                }
                rhs[ra + 2] -= wa * gu.trace() * bary[a];
            }
        }
    }
    let mut pmass = vec![T::zero(); nv];
    for (k, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            pmass[v] += mesh.area(k) / T::lit(3.0);
        }
    }
    for v in 0..nv {
        for i in 0..2 {
            if dirichlet(3 * v + i) {
                coo.push(3 * v + i, 3 * v + i, T::one());
                rhs[3 * v + i] = T::zero();
            }
        }
    }
    let a = coo.finalize()?;
    let solver = BorderedStokes::new(&a, pmass.clone())?;
    let bordered_residual = |x: &[T], lambda: T| -> (Vec<T>, T) {
        let mut r = a.mul_vec(x);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = rhs[i] - *ri;
        }
        for v in 0..nv {
            r[3 * v + 2] -= lambda * pmass[v];
        }
        let mean: T = (0..nv).map(|v| pmass[v] * x[3 * v + 2]).sum();
        (r, -mean)
    };
    let tol = T::lit(RESIDUAL_FACTOR) * (T::one() + norm2(&rhs));
    let mut x = rhs.clone();
    let mut lambda = solver.solve(&mut x, T::zero());
    for _ in 0..3 {
        let (mut r, r_mult) = bordered_residual(&x, lambda);
        if (norm2(&r).powi(2) + r_mult * r_mult).sqrt() <= tol {
            break;
        }
        lambda += solver.solve(&mut r, r_mult);
        for (xi, di) in x.iter_mut().zip(r) {
            *xi += di;
        }
    }
    let (r, r_mult) = bordered_residual(&x, lambda);
    let achieved = (norm2(&r).powi(2) + r_mult * r_mult).sqrt();
    if !(achieved <= tol) {
        return Err(Error::SolveFailed {
            residual: achieved.to_f64_lossy(),
        });
    }
    let u = (0..nv).flat_map(|v| [x[3 * v], x[3 * v + 1]]).collect();
    let p = (0..nv).map(|v| x[3 * v + 2]).collect();
    Ok((
        FeFunction::from_coeffs(mesh.clone(), FieldKind::Vector2, u)?,
        FeFunction::from_coeffs(mesh.clone(), FieldKind::Scalar, p)?,
    ))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::fem::norms;
    use crate::manufactured::ExactSolution;

    #[test]
    fn discrete_velocity_is_reproduced() {
        let mesh = Arc::new(TriMesh::<f64>::structured(8).unwrap());
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let u = FeFunction::interpolate_vector(mesh.clone(), |x| {
            let b = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
            [b * rng.random_range(-1.0..1.0), b * rng.random_range(-1.0..1.0)]
        });
        let (uh, ph) = stokes_project(&DiscreteStokesData { u: &u, p: None }, &mesh, 0.3, 1.0).unwrap();
        let du = uh.difference(&u).unwrap();
        assert!(du.coeffs().iter().all(|v| v.abs() < 1e-10));
        assert!(ph.coeffs().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = Arc::new(TriMesh::<f64>::structured(4).unwrap());
        let z = FeFunction::zeros(mesh.clone(), FieldKind::Vector2);
        let (uh, ph) = stokes_project(&DiscreteStokesData { u: &z, p: None }, &mesh, 1.0, 1.0).unwrap();
        assert!(uh.coeffs().iter().chain(ph.coeffs()).all(|&v| v == 0.0));
    }

    #[test]
    fn pressure_has_zero_mean() {
        let exact = ExactSolution::new();
        let mesh = Arc::new(TriMesh::<f64>::structured(8).unwrap());
        let (_, ph) = stokes_project(&exact.at(0.3), &mesh, 0.1, 1.0).unwrap();
        let one = FeFunction::interpolate_scalar(mesh.clone(), |_| 1.0);
        let m = crate::fem::assemble_mass(&mesh, 1);
        assert!(m.bilinear(one.coeffs(), ph.coeffs()).abs() < 1e-12);
    }

    #[test]
    fn manufactured_velocity_converges() {
        let exact = ExactSolution::new();
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let mesh = Arc::new(TriMesh::<f64>::structured(n).unwrap());
                let (uh, _) = stokes_project(&exact.at(0.0), &mesh, 0.1, 1.0).unwrap();
                let pi = FeFunction::interpolate_vector(mesh.clone(), |x| exact.velocity(x, 0.0));
                norms(&uh.difference(&pi).unwrap()).l2
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }
}
