//! Linear solves for the Newton systems of the coupled scheme.

use super::system::{COMPONENTS, C0, P};
use super::System;
use crate::error::{Error, Result};
use crate::linalg::{gmres, CooBuilder, SolverStats, SparseLdlt, SparseMatrix};
use crate::tensor::sym_weight;
use crate::Real;

/// Direct solver for the bordered stabilized Stokes system
/// `[[K, m], [m^T, 0]]` in vertex-interleaved `(u1, u2, p)` unknowns, where
/// `m` holds `∫φ_v` in the pressure rows.
///
/// `K = [[A, B^T], [B, -S]]` has the constant pressure as its left and right
/// null vector. It is factorized with one pressure diagonal pinned, which
/// keeps it quasi-definite; the multiplier and the pressure mean are then
/// recovered in closed form.
pub struct BorderedStokes<T: Real> {
    ldlt: SparseLdlt<T>,
    pmass: Vec<T>,
    total_mass: T,
}

impl<T: Real> BorderedStokes<T> {
    pub fn new(k: &SparseMatrix<T>, pmass: Vec<T>) -> Result<Self> {
        let nv = pmass.len();
        if k.n_rows() != 3 * nv || k.n_cols() != 3 * nv {
            return Err(Error::DimensionMismatch(format!(
                "Stokes block is {}x{}, expected {}",
                k.n_rows(),
                k.n_cols(),
                3 * nv
            )));
        }
        let scale = (0..nv).fold(T::zero(), |s, v| s.max(k.get(3 * v + 2, 3 * v + 2).abs()));
        let pin = if scale > T::zero() { scale } else { T::one() };
        let mut pinned = k.clone();
        let at = pinned.position(2, 2).ok_or(Error::StructurallySingular)?;
        pinned.values_mut()[at] -= pin;
        let total_mass = pmass.iter().copied().sum();
        Ok(Self {
            ldlt: SparseLdlt::new(&pinned)?,
            pmass,
            total_mass,
        })
    }

    /// Overwrites `x` (length `3 nv`) with the solution for right-hand side
    /// `(x, mult_rhs)` and returns the multiplier.
    pub fn solve(&self, x: &mut [T], mult_rhs: T) -> T {
        let nv = self.pmass.len();
        let lambda = (0..nv).map(|v| x[3 * v + 2]).sum::<T>() / self.total_mass;
        for v in 0..nv {
            x[3 * v + 2] -= lambda * self.pmass[v];
        }
        self.ldlt.solve_in_place(x);
        let mean = (0..nv).map(|v| self.pmass[v] * x[3 * v + 2]).sum::<T>();
        let alpha = (mult_rhs - mean) / self.total_mass;
        for v in 0..nv {
            x[3 * v + 2] += alpha;
        }
        lambda
    }
}

/// Block lower-triangular preconditioner for the coupled Jacobian.
///
/// The velocity-pressure block of the Jacobian is state independent and is
/// inverted exactly by [`BorderedStokes`]. The conformation block is
/// approximated by its linear part `w_m (M/Δt + ε K)`, and the
/// velocity-to-conformation coupling is taken from the current Jacobian.
pub struct BlockPreconditioner<T: Real> {
    stokes: BorderedStokes<T>,
    conformation: SparseLdlt<T>,
    nv: usize,
}

impl<T: Real> BlockPreconditioner<T> {
    pub fn new(system: &System<T>) -> Result<Self> {
        let layout = system.layout();
        let nv = layout.mesh().n_vertices();
        let mult = layout.multiplier();
        let lin = system.linear_part();
        let mut stokes = CooBuilder::new(3 * nv, 3 * nv);
        let mut conf = CooBuilder::new(nv, nv);
        for r in 0..mult {
            let (v, i) = (r / COMPONENTS, r % COMPONENTS);
            for (c, val) in lin.row(r) {
                if c == mult {
                    continue;
                }
                let (w, j) = (c / COMPONENTS, c % COMPONENTS);
                if i <= P && j <= P {
                    stokes.push(3 * v + i, 3 * w + j, val);
                } else if i == C0 && j == C0 {
                    conf.push(v, w, val);
                }
            }
        }
        Ok(Self {
            stokes: BorderedStokes::new(&stokes.finalize()?, layout.pressure_mass().to_vec())?,
            conformation: SparseLdlt::new(&conf.finalize()?)?,
            nv,
        })
    }

    /// Overwrites `v` with the preconditioned vector; `jac` is the current Jacobian.
    pub fn apply(&self, jac: &SparseMatrix<T>, v: &mut [T]) {
        let nv = self.nv;
        let mult = COMPONENTS * nv;
        let mut s: Vec<T> = (0..nv).flat_map(|w| COMPONENTS * w..COMPONENTS * w + 3).map(|d| v[d]).collect();
        let lambda = self.stokes.solve(&mut s, v[mult]);
        let mut z = vec![T::zero(); v.len()];
        for w in 0..nv {
            z[COMPONENTS * w..COMPONENTS * w + 3].copy_from_slice(&s[3 * w..3 * w + 3]);
        }
        z[mult] = lambda;
        let coupling = jac.mul_vec(&z);
        let mut c = vec![T::zero(); nv];
        for m in 0..3 {
            for w in 0..nv {
                let d = COMPONENTS * w + C0 + m;
                c[w] = v[d] - coupling[d];
            }
            self.conformation.solve_in_place(&mut c);
            let weight = sym_weight::<T>(m);
            for w in 0..nv {
                z[COMPONENTS * w + C0 + m] = c[w] / weight;
            }
        }
        v.copy_from_slice(&z);
    }
}

/// Right-preconditioned restarted GMRES with [`BlockPreconditioner`].
pub struct CoupledSolver<T: Real> {
    precond: BlockPreconditioner<T>,
    pub restart: usize,
    pub max_iter: usize,
    stats: SolverStats,
}

impl<T: Real> CoupledSolver<T> {
    pub fn new(system: &System<T>) -> Result<Self> {
        Ok(Self {
            precond: BlockPreconditioner::new(system)?,
            restart: 40,
            max_iter: 400,
            stats: SolverStats {
                factorizations: 2,
                ..Default::default()
            },
        })
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Solves `jac x = b` to `||jac x - b||_2 <= tol`.
    pub fn solve(&mut self, jac: &SparseMatrix<T>, b: &[T], tol: T) -> Result<Vec<T>> {
        self.stats.solves += 1;
        let mut x = vec![T::zero(); b.len()];
        let out = gmres(
            |v, y| jac.mul_vec_into(v, y),
            |v| self.precond.apply(jac, v),
            b,
            &mut x,
            tol,
            self.restart,
            self.max_iter,
        );
        self.stats.krylov_iterations += out.iterations;
        if out.converged {
            Ok(x)
        } else {
            Err(Error::SolveFailed {
                residual: out.residual.to_f64_lossy(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::linalg::norm2;
    use crate::manufactured::{interpolate_exact, ExactSolution};
    use crate::mesh::TriMesh;
    use crate::scheme::{Layout, SchemeParams};

    fn system(n: usize, eps: f64) -> System<f64> {
        let mesh = Arc::new(TriMesh::structured(n).unwrap());
        System::new(Arc::new(Layout::new(mesh)), SchemeParams::new(0.1, eps, 0.5 / n as f64, 1.0)).unwrap()
    }

    fn random(sys: &System<f64>, seed: u64) -> Vec<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let l = sys.layout();
        (0..l.n_dofs())
            .map(|i| if l.is_dirichlet(i) { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect()
    }

    #[test]
    fn exact_on_the_linear_stokes_part() {
        // At C = 0 the velocity-pressure-multiplier block decouples and is
        // inverted exactly.
        let sys = system(6, 0.1);
        let l = sys.layout();
        let pre = BlockPreconditioner::new(&sys).unwrap();
        let jac = sys.jacobian(&vec![0.0; l.n_dofs()]);
        let mut x = random(&sys, 5);
        for (i, xi) in x.iter_mut().enumerate() {
            if i < l.multiplier() && i % COMPONENTS >= C0 {
                *xi = 0.0;
            }
        }
        let mut v = jac.mul_vec(&x);
        pre.apply(&jac, &mut v);
        let err: Vec<f64> = v.iter().zip(&x).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) < 1e-9 * norm2(&x), "{}", norm2(&err));
    }

    #[test]
    fn gmres_solves_coupled_jacobian() {
        // Linearized about the interpolated exact solution, a state of the
        // size Newton actually visits.
        for eps in [0.1, 0.0] {
            let sys = system(8, eps);
            let mut solver = CoupledSolver::new(&sys).unwrap();
            let state = interpolate_exact(&ExactSolution::new(), sys.layout().mesh(), 0.3);
            let jac = sys.jacobian(&sys.layout().pack(&state));
            let b = random(&sys, 12);
            let y = solver.solve(&jac, &b, 1e-10).unwrap();
            let r: Vec<f64> = jac.mul_vec(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm2(&r) <= 1e-10);
            assert!(solver.stats().krylov_iterations < 30, "{:?}", solver.stats());
        }
    }
}
